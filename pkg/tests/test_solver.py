"""Tests for spacetime_agfem.assembly.solver module."""

import math

import numpy as np
import pytest

from spacetime_agfem.assembly.problem import ModelProblem
from spacetime_agfem.assembly.solver import MarchOptions, SlabMarcher, TransferKind, march
from spacetime_agfem.deformation.motion import MovingBoundary, PitchingRotation, SmoothCutoff, Static, Translation
from spacetime_agfem.exceptions import ConfigurationError, ToleranceError
from spacetime_agfem.geometry.boundary import OrientedBoundary, rectangle_loop
from spacetime_agfem.harness.manufactured import ConstantSolution
from spacetime_agfem.mesh.time import TimePartition
from spacetime_agfem.models import DeformationMode


class LinearSolution:
    """u = x + y + t, reproduced by Q1 x P1."""

    def value(self, x, t):
        return x[..., 0] + x[..., 1] + t

    def gradient(self, x, t):
        return np.ones(np.shape(x))

    def hessian(self, x, t):
        return np.zeros(np.shape(x) + (2,))


def _linear_problem():
    exact = LinearSolution()
    return ModelProblem(source=lambda x, t: 1.0, dirichlet=exact.value, initial=lambda x: exact.value(x, 0.0))


class TestMarch:
    """Tests for march on fixed domains."""

    @pytest.fixture
    def static_box(self, box_boundary):
        return MovingBoundary(box_boundary, Static())

    def test_linear_solution_is_exact(self, coarse_mesh, static_box):
        """Test x + y + t is reproduced across slabs with vanishing errors."""
        result = march(
            coarse_mesh, TimePartition.uniform(0.5, 2), static_box, _linear_problem(), exact=LinearSolution()
        )
        assert len(result.slabs) == 2
        assert result.resets == []
        final = result.final
        expected = coarse_mesh.vertices.sum(axis=1) + 0.5
        np.testing.assert_allclose(final.vertex_values(1.0), expected, atol=1e-8)
        assert result.report.dg_error == pytest.approx(0.0, abs=1e-7)
        assert result.report.terms_nonnegative
        assert len(result.report.dg_history) == 2

    def test_transfer_kinds(self, coarse_mesh, static_box):
        """Test the first slab uses u_0 and later ones the intersection."""
        result = march(coarse_mesh, TimePartition.uniform(0.75, 3), static_box, _linear_problem())
        kinds = [slab.transfer.kind for slab in result.slabs]
        assert kinds == [TransferKind.INITIAL, TransferKind.INTERSECTION, TransferKind.INTERSECTION]
        assert result.report is None
        assert result.slabs[1].previous is not None

    def test_on_slab_hook(self, coarse_mesh, static_box):
        """Test the hook sees every slab in order."""
        seen = []
        march(coarse_mesh, TimePartition.uniform(0.5, 2), static_box, _linear_problem(), on_slab=seen.append)
        assert [slab.index for slab in seen] == [1, 2]
        assert [(slab.t0, slab.t1) for slab in seen] == [(0.0, 0.25), (0.25, 0.5)]

    def test_conditioning_option(self, coarse_mesh, static_box):
        """Test condition numbers are attached when requested."""
        options = MarchOptions(conditioning=True)
        result = march(coarse_mesh, TimePartition.uniform(0.5, 1), static_box, _linear_problem(), options)
        conditioning = result.final.conditioning
        assert conditioning is not None
        assert conditioning.computed
        assert conditioning.size == result.final.reduced_size


class TestMarchWithHole:
    """Tests for march on a domain with a static hole."""

    @pytest.mark.parametrize("mode", [DeformationMode.PRESCRIBED, DeformationMode.ELASTICITY])
    def test_constant_preserved(self, coarse_mesh, hole_boundary, mode):
        """Test a constant survives aggregation and the transfer in both deformation modes."""
        exact = ConstantSolution(1.5)
        boundary = MovingBoundary(hole_boundary, Static(), loops=[1])
        options = MarchOptions(deformation=mode)
        result = march(coarse_mesh, TimePartition.uniform(0.5, 2), boundary, exact.problem(), options, exact)
        for slab in result.slabs:
            np.testing.assert_allclose(slab.coefficients, 1.5, atol=1e-8)
            assert slab.reduced_size < slab.space.n_dofs
        assert result.report.dg_error == pytest.approx(0.0, abs=1e-7)


class TestMarchWithMovingHole:
    """Tests for march with a hole moving inside a fixed box."""

    @pytest.mark.parametrize("mesh_name", ["small_mesh", "small_simplex_mesh"])
    def test_default_options_keep_box_fixed(self, request, hole_boundary, mesh_name):
        """Test the prescribed default only moves the hole, so a constant survives ten slabs."""
        mesh = request.getfixturevalue(mesh_name)
        exact = ConstantSolution(1.5)
        boundary = MovingBoundary(hole_boundary, Translation((0.2, 0.1)), loops=[1])
        result = march(mesh, TimePartition.uniform(1.0, 10), boundary, exact.problem(), MarchOptions(), exact)
        assert len(result.slabs) == 10
        for slab in result.slabs:
            np.testing.assert_allclose(slab.coefficients, 1.5, atol=1e-8)
        assert result.report.dg_error == pytest.approx(0.0, abs=1e-7)

    @pytest.mark.parametrize(
        "motion",
        [Translation((0.2, 0.1)), PitchingRotation((1.5, 1.5), math.pi / 10, math.pi)],
        ids=["translation", "pitching"],
    )
    @pytest.mark.parametrize("mode", [DeformationMode.PRESCRIBED, DeformationMode.ELASTICITY])
    def test_constant_preserved(self, small_mesh, hole_boundary, motion, mode):
        """Test a constant survives a moving hole in both deformation modes."""
        exact = ConstantSolution(1.5)
        boundary = MovingBoundary(hole_boundary, motion, loops=[1])
        options = MarchOptions(deformation=mode)
        result = march(small_mesh, TimePartition.uniform(1.0, 10), boundary, exact.problem(), options, exact)
        for slab in result.slabs:
            np.testing.assert_allclose(slab.coefficients, 1.5, atol=1e-8)
        assert result.report.dg_error == pytest.approx(0.0, abs=1e-7)

    def test_default_cutoff_vanishes_on_box(self, small_mesh, hole_boundary):
        """Test the built cut-off is one on the hole and zero on the outer loop."""
        boundary = MovingBoundary(hole_boundary, Translation((0.2, 0.1)), loops=[1])
        marcher = SlabMarcher(small_mesh, TimePartition.uniform(1.0, 10), boundary, ModelProblem())
        cutoff = marcher._prescribed_cutoff()
        assert isinstance(cutoff, SmoothCutoff)
        np.testing.assert_allclose(cutoff(hole_boundary.vertices[~boundary.moving]), 0.0)
        np.testing.assert_allclose(cutoff(hole_boundary.vertices[boundary.moving]), 1.0)

    def test_fully_moving_boundary_needs_no_cutoff(self, small_mesh, hole_boundary):
        """Test no cut-off is built when every loop moves."""
        boundary = MovingBoundary(hole_boundary, Translation((0.2, 0.1)))
        marcher = SlabMarcher(small_mesh, TimePartition.uniform(1.0, 2), boundary, ModelProblem())
        assert marcher._prescribed_cutoff() is None

    def test_fixed_interior_loop_rejected(self, small_mesh):
        """Test a rigid displacement that would drag a fixed hole is refused."""
        boundary = OrientedBoundary.from_loops(
            [
                rectangle_loop((0.0, 0.0), (3.0, 3.0)),
                rectangle_loop((0.5, 0.5), (1.0, 1.0), counterclockwise=False),
                rectangle_loop((2.0, 2.0), (2.5, 2.5), counterclockwise=False),
            ]
        )
        moving = MovingBoundary(boundary, Translation((0.2, 0.0)), loops=[1])
        marcher = SlabMarcher(small_mesh, TimePartition.uniform(1.0, 2), moving, ModelProblem())
        with pytest.raises(ConfigurationError, match="fixed boundary loop") as excinfo:
            marcher.march()
        assert excinfo.value.slab == 1
        assert excinfo.value.stage == "deformation"


class TestStageErrors:
    """Tests for error tagging during the march."""

    def test_classification_error_is_tagged(self, coarse_mesh):
        """Test a geometry error carries the slab and stage."""
        boundary = OrientedBoundary.from_loops(
            [
                rectangle_loop((0.0, 0.0), (3.0, 3.0)),
                rectangle_loop((0.75 + 1e-9, 0.75), (2.0, 2.0), counterclockwise=False),
            ]
        )
        marcher = SlabMarcher(
            coarse_mesh, TimePartition.uniform(0.5, 2), MovingBoundary(boundary, Static()), ModelProblem()
        )
        with pytest.raises(ToleranceError) as excinfo:
            marcher.march()
        assert excinfo.value.slab == 1
        assert excinfo.value.stage == "classify"
        assert str(excinfo.value).startswith("[slab 1, stage classify]")
