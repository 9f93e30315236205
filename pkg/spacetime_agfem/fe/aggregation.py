"""Cell aggregation and the discrete extension operator.

Every cell of a space that is not INTERIOR gets a root INTERIOR cell by a
breadth-first search over face neighbours. Nodes that no INTERIOR cell
touches are constrained: their value is the root-cell polynomial evaluated
at the node.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from ..exceptions import AggregationError, SolverError
from ..models import CellState
from .space import SpatialSpace

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class AggregationMap:
    """Roots of every cell and the prolongation from free to all nodes.

    Attributes:
        space: Scalar space the map acts on.
        roots: Root cell per mesh cell, -1 for cells outside the space.
        distances: Face-path distance to the root per mesh cell.
        free_nodes: Sorted nodes that keep their own DOF.
        constrained_nodes: Sorted nodes expressed through a root cell.
        owners: Cell through which each constrained node is aggregated.
        prolongation: Sparse (n_nodes, n_free) matrix.
    """

    space: SpatialSpace
    roots: np.ndarray
    distances: np.ndarray
    free_nodes: np.ndarray
    constrained_nodes: np.ndarray
    owners: np.ndarray
    prolongation: sparse.csr_matrix

    @property
    def n_free(self) -> int:
        return len(self.free_nodes)

    @property
    def is_identity(self) -> bool:
        return len(self.constrained_nodes) == 0

    def root(self, cell: int) -> int:
        return int(self.roots[cell])

    def expand(self, components: int = 1, layers: int = 1) -> sparse.csr_matrix:
        """Prolongation for interleaved vector DOFs and time-major layers."""
        matrix = self.prolongation
        if components > 1:
            matrix = sparse.kron(matrix, sparse.identity(components), format="csr")
        if layers > 1:
            matrix = sparse.kron(sparse.identity(layers), matrix, format="csr")
        return matrix.tocsr()

    @cached_property
    def free_index(self) -> np.ndarray:
        """Position of each node among the free nodes, -1 if constrained."""
        index = -np.ones(self.space.n_nodes, dtype=int)
        index[self.free_nodes] = np.arange(self.n_free)
        return index


def _bfs_roots(space: SpatialSpace, states: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mesh = space.mesh
    roots = -np.ones(mesh.n_cells, dtype=int)
    distances = -np.ones(mesh.n_cells, dtype=int)
    in_space = np.zeros(mesh.n_cells, dtype=bool)
    in_space[space.cells] = True
    frontier = [int(c) for c in space.cells if states[c] == CellState.INTERIOR]
    for cell in frontier:
        roots[cell] = cell
        distances[cell] = 0
    level = 0
    while frontier:
        level += 1
        candidates: dict[int, int] = {}
        for cell in frontier:
            for other in mesh.adjacency[cell]:
                if in_space[other] and roots[other] < 0:
                    best = candidates.get(int(other))
                    if best is None or roots[cell] < best:
                        candidates[int(other)] = int(roots[cell])
        for other, root in candidates.items():
            roots[other] = root
            distances[other] = level
        frontier = sorted(candidates)
    return roots, distances


def build_aggregates(space: SpatialSpace, states: np.ndarray) -> AggregationMap:
    """Aggregate every non-INTERIOR cell of a space to its nearest INTERIOR cell.

    Ties between equally distant roots go to the lowest root id.

    Args:
        space: Scalar space on the active (or extended) cells.
        states: CellState code per mesh cell.

    Returns:
        The aggregation map.

    Raises:
        AggregationError: If a cell cannot reach an INTERIOR cell.
    """
    states = np.asarray(states)
    roots, distances = _bfs_roots(space, states)
    orphans = [int(c) for c in space.cells if roots[c] < 0]
    if orphans:
        raise AggregationError(
            f"cell {orphans[0]} has no interior cell reachable through active neighbours ({len(orphans)} orphan cells)",
            cell=orphans[0],
        )

    interior = space.cells[states[space.cells] == CellState.INTERIOR]
    touched = np.zeros(space.n_nodes, dtype=bool)
    touched[space.cell_nodes(interior).ravel()] = True
    free_nodes = np.where(touched)[0]
    constrained = np.where(~touched)[0]

    free_index = -np.ones(space.n_nodes, dtype=int)
    free_index[free_nodes] = np.arange(len(free_nodes))
    rows = [free_nodes]
    cols = [np.arange(len(free_nodes))]
    vals = [np.ones(len(free_nodes))]
    owners = np.zeros(len(constrained), dtype=int)
    if len(constrained):
        node_cells = space.node_cells
        for k, node in enumerate(constrained):
            cells = node_cells[node]
            owners[k] = min(cells, key=lambda c: (distances[c], c))
        root_cells = roots[owners]
        xi = space.mesh.to_reference(root_cells, space.node_coords[constrained][:, None, :])
        coefficients = space.element.values(xi)[:, 0, :]
        masters = free_index[space.cell_nodes(root_cells)]
        rows.append(np.repeat(constrained, space.n_local))
        cols.append(masters.ravel())
        vals.append(coefficients.ravel())
    prolongation = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.n_nodes, len(free_nodes)),
    ).tocsr()
    prolongation.eliminate_zeros()
    logger.debug(
        f"Aggregation: {len(space.cells) - len(interior)} aggregated cells, {len(constrained)} constrained nodes"
    )
    return AggregationMap(space, roots, distances, free_nodes, constrained, owners, prolongation)


def extension_apply(
    aggregation: AggregationMap, free_values: np.ndarray, components: int = 1, layers: int = 1
) -> np.ndarray:
    """Fill constrained DOFs from free DOF values by root-cell extension.

    Args:
        aggregation: Aggregation of the scalar space.
        free_values: Values on the free DOFs (interleaved components, time-major layers).
        components: Vector components per node.
        layers: Temporal layers.

    Returns:
        Values on all DOFs.
    """
    return aggregation.expand(components, layers) @ np.asarray(free_values, dtype=float)


def restrict_to_free(
    aggregation: AggregationMap, values: np.ndarray, components: int = 1, layers: int = 1
) -> np.ndarray:
    """Pick the free-DOF entries of a full vector."""
    values = np.asarray(values, dtype=float).reshape(layers, aggregation.space.n_nodes, components)
    return values[:, aggregation.free_nodes, :].reshape(-1)


@dataclass(eq=False)
class ReducedSystem:
    """Constrained system P^T A P x = P^T b over the free DOFs."""

    matrix: sparse.csr_matrix
    rhs: np.ndarray
    prolongation: sparse.csr_matrix

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def solve(self) -> np.ndarray:
        """Direct sparse solve; returns the solution on all DOFs.

        Raises:
            SolverError: If the reduced matrix is singular.
        """
        if self.size == 0:
            return np.zeros(self.prolongation.shape[0])
        try:
            lu = splu(self.matrix.tocsc())
        except RuntimeError as e:
            raise SolverError(f"reduced matrix of size {self.size} is singular: {e}") from e
        reduced = lu.solve(self.rhs)
        if not np.all(np.isfinite(reduced)):
            raise SolverError(f"reduced solve of size {self.size} produced non-finite values")
        return self.prolongation @ reduced


def constrain_system(
    matrix: sparse.spmatrix,
    rhs: np.ndarray,
    aggregation: Optional[AggregationMap],
    components: int = 1,
    layers: int = 1,
    fixed: Optional[np.ndarray] = None,
) -> ReducedSystem:
    """Reduce a system assembled on all DOFs to the free DOFs.

    Args:
        matrix: Square matrix over all DOFs.
        rhs: Right-hand side over all DOFs.
        aggregation: Aggregation map; None keeps every DOF.
        components: Vector components per node.
        layers: Temporal layers.
        fixed: Mask over all DOFs with homogeneous strong values; free DOFs
            among them are removed.

    Returns:
        The reduced system.
    """
    n = matrix.shape[0]
    if aggregation is None:
        prolongation = sparse.identity(n, format="csr")
    else:
        prolongation = aggregation.expand(components, layers)
    if fixed is not None:
        fixed = np.asarray(fixed, dtype=bool)
        pinned = np.asarray(abs(prolongation[fixed]).sum(axis=0)).ravel() > 0.0
        keep = np.where(~pinned)[0]
        prolongation = prolongation[:, keep]
    pt = prolongation.T.tocsr()
    reduced = (pt @ matrix @ prolongation).tocsr()
    return ReducedSystem(reduced, pt @ np.asarray(rhs, dtype=float), prolongation.tocsr())
