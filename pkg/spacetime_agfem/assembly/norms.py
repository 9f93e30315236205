"""Error norms of a marched solution against an analytic one.

The DG norm of the error e = u - u_h is

    ||e||^2 = ||e^N(T)||^2 + sum_i ||e^i(t^i) - e^{i-1}(t^i)||^2 + c_mu int ||e||_V^2 dt,

with ||v||_V^2 = mu ||grad v||^2 + sum beta_T ||v||^2 on the Dirichlet boundary
+ sum mu h_T^2 |v|_{H^2(T)}^2. The first jump compares against u_0.
"""

import logging
import math
from typing import Sequence

import numpy as np

from ..deformation.field import pullback_gradients, pushforward_hessian, spatial_measure_factor
from ..exceptions import ConfigurationError
from ..fe.evaluation import shape_batch
from ..models import BoundaryTag, NormReport
from ..protocols import ExactSolution
from .problem import ModelProblem
from .transfer import jump_squared

logger = logging.getLogger(__name__)


def _check_exact(exact) -> None:
    missing = [name for name in ("value", "gradient", "hessian") if not callable(getattr(exact, name, None))]
    if missing or not isinstance(exact, ExactSolution):
        raise ConfigurationError(f"exact solution lacks derivative callbacks: {', '.join(missing) or 'protocol'}")


class SlabErrors:
    """Error integrals of one slab."""

    def __init__(self, slab, exact: ExactSolution, problem: ModelProblem) -> None:
        self.slab = slab
        self.exact = exact
        self.problem = problem
        self.space = slab.space
        self.field = slab.field

    def _layers(self) -> np.ndarray:
        return self.slab.coefficients.reshape(self.space.n_layers, -1)

    def _volume(self, batch, s: np.ndarray):
        """Errors of value, gradient and Hessian at volume points, leading shape (m, k, nq)."""
        state = self.field.evaluate(batch.cells, batch.points, s)
        sb = shape_batch(self.space.spatial, batch.cells, batch.points, hessians=True)
        temporal = self.space.temporal.values(s)
        layers = self._layers()
        values = sb.interpolate(layers, temporal)
        grads, _ = pullback_gradients(state, sb.interpolate_gradient(layers, temporal))
        map_hessian = None if self.field.is_identity else self.field.map_hessians(batch.cells, batch.points, s)
        hess = pushforward_hessian(state, grads, sb.interpolate_hessian(layers, temporal), map_hessian)
        times = np.broadcast_to(state.times[:, None, None], state.J.shape)
        e = self.exact.value(state.points, times) - values
        de = self.exact.gradient(state.points, times) - grads
        he = self.exact.hessian(state.points, times) - hess
        return state, e, de, he

    def energy(self, quadrature) -> tuple[float, float, float]:
        """Time integrals of the gradient, boundary and broken-H2 terms."""
        s, ws = quadrature.time_points, quadrature.time_weights
        tau = self.field.tau
        mu = self.problem.mu
        gradient = h2 = boundary = 0.0
        diameters = self.space.mesh.cell_diameters
        for batch in quadrature.volume_batches:
            state, _, de, he = self._volume(batch, s)
            weights = tau * ws[:, None, None] * batch.weights[None] * np.abs(state.J)
            gradient += mu * float(np.sum(weights * np.sum(de**2, axis=-1)))
            h_sq = diameters[batch.cells][None, :, None] ** 2
            h2 += mu * float(np.sum(weights * h_sq * np.sum(he**2, axis=(-1, -2))))
        facets = quadrature.facets.select(BoundaryTag.DIRICHLET)
        if len(facets):
            state = self.field.evaluate(facets.cells, facets.points, s)
            sb = shape_batch(self.space.spatial, facets.cells, facets.points)
            values = sb.interpolate(self._layers(), self.space.temporal.values(s))
            times = np.broadcast_to(state.times[:, None, None], state.J.shape)
            e = self.exact.value(state.points, times) - values
            normal = np.broadcast_to(facets.normals[None, :, None, :], state.w.shape)
            factor = spatial_measure_factor(state, normal)
            beta = self.problem.penalty_weights(self.space.spatial.order, diameters[facets.cells])
            weights = tau * ws[:, None, None] * facets.weights[None] * factor * beta[None, :, None]
            boundary = float(np.sum(weights * e**2))
        return gradient, boundary, h2

    def final(self, quadrature) -> tuple[float, float]:
        """Squared L2 and H1-seminorm errors at the slab end."""
        l2 = semi = 0.0
        for batch in quadrature.volume_batches:
            state, e, de, _ = self._volume(batch, np.ones(1))
            weights = batch.weights[None] * np.abs(state.J)
            l2 += float(np.sum(weights * e**2))
            semi += float(np.sum(weights * np.sum(de**2, axis=-1)))
        return l2, semi


def error_norms(slabs: Sequence, exact: ExactSolution, problem: ModelProblem, c_mu: float = 1.0) -> NormReport:
    """DG, final L2 and final H1 errors of a march.

    Args:
        slabs: Slab results in order, each with ``space``, ``coefficients``,
            ``field``, ``quadrature``, ``transfer`` and ``previous``.
        exact: Analytic solution with gradient and Hessian.
        problem: Model problem (mu and the Nitsche penalty).
        c_mu: Weight of the energy term.

    Returns:
        The norm report.

    Raises:
        ConfigurationError: If derivative callbacks are missing or no slab was marched.
    """
    _check_exact(exact)
    if not slabs:
        raise ConfigurationError("no slabs to measure")
    report = NormReport(c_mu=c_mu)

    def initial(x):
        return exact.value(x, np.full(x.shape[:-1], slabs[0].field.t0))

    accumulated = 0.0
    for slab in slabs:
        errors = SlabErrors(slab, exact, problem)
        gradient, boundary, h2 = errors.energy(slab.quadrature)
        jump = jump_squared(slab.space, slab.coefficients, slab.transfer, slab.previous, exact_initial=initial)
        report.gradient_terms.append(gradient)
        report.boundary_terms.append(boundary)
        report.h2_terms.append(h2)
        report.jump_terms.append(jump)
        accumulated += jump + c_mu * (gradient + boundary + h2)
        report.dg_history.append(math.sqrt(accumulated))

    l2_sq, semi_sq = SlabErrors(slabs[-1], exact, problem).final(slabs[-1].quadrature)
    report.l2_error = math.sqrt(l2_sq)
    report.h1_error = math.sqrt(l2_sq + semi_sq)
    report.dg_error = math.sqrt(l2_sq + accumulated)
    logger.info(f"Errors: {report.message}")
    return report
