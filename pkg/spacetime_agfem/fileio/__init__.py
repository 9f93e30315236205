"""Boundary files, VTK dumps and CSV reports."""

from .boundary_file import parse_boundary, read_boundary, write_boundary
from .reports import convergence_slopes, read_report_csv, write_report_csv
from .vtk import write_mesh_vtk, write_polydata, write_slab_vtk

__all__ = [
    "parse_boundary",
    "read_boundary",
    "write_boundary",
    "write_report_csv",
    "read_report_csv",
    "convergence_slopes",
    "write_mesh_vtk",
    "write_slab_vtk",
    "write_polydata",
]
