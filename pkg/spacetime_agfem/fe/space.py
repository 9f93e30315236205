"""Continuous Lagrange spaces on a cell subset and their space-time tensor products.

Nodes of order p live on the refined lattice of ``(p * nx + 1) * (p * ny + 1)``
points. Local node (a, b) of quad (i, j) is lattice point (p*i + a, p*j + b);
for triangles the lower cell (kind 0) uses (p*i + a + b, p*j + b) and the upper
one (kind 1) uses (p*i + a, p*j + a + b). Only the nodes touched by the
space's cells get DOFs, numbered by increasing lattice id.
"""

from functools import cached_property
from typing import Optional

import numpy as np

from ..exceptions import ConfigurationError
from ..mesh.cartesian import CartesianMesh
from .basis import ReferenceElement, TemporalBasis, reference_element


class SpatialSpace:
    """Scalar or 2-vector Lagrange space of order p on a set of mesh cells.

    Vector DOFs are interleaved: component c of node s is DOF ``2 * s + c``.
    """

    def __init__(
        self,
        mesh: CartesianMesh,
        order: int,
        cells: Optional[np.ndarray] = None,
        components: int = 1,
    ) -> None:
        if components not in (1, 2):
            raise ConfigurationError(f"only scalar and 2-vector spaces are supported, got {components}")
        self.mesh = mesh
        self.order = int(order)
        self.components = components
        self.element: ReferenceElement = reference_element(mesh.shape, self.order)
        self.cells = np.arange(mesh.n_cells) if cells is None else np.unique(np.asarray(cells, dtype=int))
        lattice = self.lattice_nodes(self.cells)
        self.node_ids = np.unique(lattice)
        self._compact = -np.ones(self.lattice_size, dtype=int)
        self._compact[self.node_ids] = np.arange(len(self.node_ids))
        self._in_space = np.zeros(mesh.n_cells, dtype=bool)
        self._in_space[self.cells] = True

    @property
    def lattice_shape(self) -> tuple[int, int]:
        nx, ny = self.mesh.counts
        return self.order * nx + 1, self.order * ny + 1

    @property
    def lattice_size(self) -> int:
        sx, sy = self.lattice_shape
        return sx * sy

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_dofs(self) -> int:
        return self.n_nodes * self.components

    @property
    def n_local(self) -> int:
        """Shape functions per cell (scalar)."""
        return self.element.n_nodes

    def contains(self, cells: np.ndarray) -> np.ndarray:
        """Mask of cells that belong to the space."""
        return self._in_space[np.asarray(cells, dtype=int)]

    def lattice_nodes(self, cells: np.ndarray) -> np.ndarray:
        """Refined-lattice node ids of cells, shape (k, n_local)."""
        p = self.order
        i, j, kind = self.mesh.quad_of(cells)
        a, b = self.element.lattice[:, 0], self.element.lattice[:, 1]
        if self.mesh.simplexified:
            lower = kind[:, None] == 0
            col = p * i[:, None] + np.where(lower, a + b, a)
            row = p * j[:, None] + np.where(lower, b, a + b)
        else:
            col = p * i[:, None] + a
            row = p * j[:, None] + b
        return row * self.lattice_shape[0] + col

    def cell_nodes(self, cells: np.ndarray) -> np.ndarray:
        """Compact node numbers of cells, shape (k, n_local)."""
        cells = np.asarray(cells, dtype=int)
        if not np.all(self._in_space[cells]):
            missing = cells[~self._in_space[cells]]
            raise ConfigurationError(f"cells {missing[:5].tolist()} are not part of the space")
        return self._compact[self.lattice_nodes(cells)]

    def cell_dofs(self, cells: np.ndarray) -> np.ndarray:
        """DOF numbers of cells; for vector spaces ordered node-major, component-minor."""
        nodes = self.cell_nodes(cells)
        if self.components == 1:
            return nodes
        return (2 * nodes[:, :, None] + np.arange(2)).reshape(len(nodes), -1)

    def node_index(self, lattice_ids: np.ndarray) -> np.ndarray:
        """Compact numbers of lattice nodes, -1 where a node has no DOF."""
        return self._compact[np.asarray(lattice_ids, dtype=int)]

    @cached_property
    def node_coords(self) -> np.ndarray:
        """Physical coordinates of every node, shape (n_nodes, 2)."""
        coords = np.zeros((self.n_nodes, 2))
        xi = np.broadcast_to(self.element.nodes, (len(self.cells), self.n_local, 2))
        physical = self.mesh.to_physical(self.cells, xi)
        coords[self.cell_nodes(self.cells).ravel()] = physical.reshape(-1, 2)
        return coords

    @cached_property
    def node_cells(self) -> list[np.ndarray]:
        """Space cells containing each node, sorted by cell id."""
        owners: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for cell, nodes in zip(self.cells, self.cell_nodes(self.cells)):
            for node in nodes:
                owners[node].append(int(cell))
        return [np.array(sorted(set(o)), dtype=int) for o in owners]

    def vertex_nodes(self) -> np.ndarray:
        """Compact node of every mesh vertex, -1 for vertices outside the space."""
        i, j = self.mesh.vertex_lattice[:, 0], self.mesh.vertex_lattice[:, 1]
        lattice = self.order * j * self.lattice_shape[0] + self.order * i
        return self._compact[lattice]

    def vector(self) -> "SpatialSpace":
        """2-vector space on the same cells."""
        return SpatialSpace(self.mesh, self.order, self.cells, components=2)

    def scalar(self) -> "SpatialSpace":
        """Scalar space on the same cells."""
        return SpatialSpace(self.mesh, self.order, self.cells, components=1)

    def interpolate(self, function) -> np.ndarray:
        """Nodal interpolant of a function of points (n, 2).

        Returns:
            DOF vector; vector functions return (n, 2) and are interleaved.
        """
        values = np.asarray(function(self.node_coords), dtype=float)
        return values.reshape(-1)


class SpaceTimeSpace:
    """Spatial space tensorised with a DG-in-time Lagrange basis on one slab.

    Space-time DOF ``j * n_space + s`` is spatial DOF s at temporal node j.
    """

    def __init__(self, spatial: SpatialSpace, temporal: TemporalBasis | int) -> None:
        self.spatial = spatial
        self.temporal = temporal if isinstance(temporal, TemporalBasis) else TemporalBasis(int(temporal))

    @property
    def mesh(self) -> CartesianMesh:
        return self.spatial.mesh

    @property
    def n_layers(self) -> int:
        return self.temporal.n_nodes

    @property
    def n_dofs(self) -> int:
        return self.n_layers * self.spatial.n_dofs

    @property
    def n_local(self) -> int:
        return self.n_layers * self.spatial.cell_dofs(self.spatial.cells[:1]).shape[1]

    def cell_dofs(self, cells: np.ndarray) -> np.ndarray:
        """Space-time DOFs of cells, time-major, shape (k, n_t * n_x)."""
        spatial = self.spatial.cell_dofs(cells)
        layers = np.arange(self.n_layers)[None, :, None] * self.spatial.n_dofs
        return (layers + spatial[:, None, :]).reshape(len(spatial), -1)

    def layer(self, coefficients: np.ndarray, j: int) -> np.ndarray:
        """Spatial coefficients of temporal node j."""
        n = self.spatial.n_dofs
        return np.asarray(coefficients)[j * n : (j + 1) * n]

    def at_time(self, coefficients: np.ndarray, s: float) -> np.ndarray:
        """Spatial coefficients of the field at unit slab coordinate s."""
        weights = self.temporal.values(np.array(s))
        layers = np.asarray(coefficients).reshape(self.n_layers, self.spatial.n_dofs)
        return weights @ layers

    def interpolate(self, function, t0: float, t1: float) -> np.ndarray:
        """Nodal interpolant of f(x, t) at the temporal nodes of [t0, t1]."""
        times = t0 + (t1 - t0) * self.temporal.nodes
        x = self.spatial.node_coords
        return np.concatenate(
            [np.asarray(function(x, np.full(len(x), t)), dtype=float).reshape(-1) for t in times]
        )
