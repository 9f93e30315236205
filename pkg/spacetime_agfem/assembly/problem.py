"""The scalar convection-diffusion problem posed on the moving domain."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..exceptions import ConfigurationError
from ..protocols import FluxField, ScalarField, VectorField

logger = logging.getLogger(__name__)

NEUMANN_TOL = 1e-10


@dataclass
class ModelProblem:
    """Data of du/dt + w . grad u - mu lap u = f.

    Missing data default to zero. ``initial`` is u_0(x), evaluated on the
    first slab's initial face.

    Attributes:
        mu: Diffusion coefficient.
        advection: Velocity w(x, t), zero when None.
        source: Source f(x, t).
        dirichlet: Boundary values u_D(x, t).
        neumann: Flux g_N(x, t, n_x).
        initial: Initial state u_0(x).
        penalty: c0 in beta_h = c0 p^2 mu / h_T.
    """

    mu: float = 1.0
    advection: Optional[VectorField] = None
    source: Optional[ScalarField] = None
    dirichlet: Optional[ScalarField] = None
    neumann: Optional[FluxField] = None
    initial: Optional[Callable[[np.ndarray], np.ndarray]] = None
    penalty: float = 10.0

    def __post_init__(self) -> None:
        if self.mu <= 0.0:
            raise ConfigurationError(f"diffusion coefficient must be positive, got {self.mu}")
        if self.penalty <= 0.0:
            raise ConfigurationError(f"Nitsche penalty must be positive, got {self.penalty}")

    def penalty_weights(self, order: int, diameters: np.ndarray) -> np.ndarray:
        """beta_h per cell."""
        return self.penalty * order**2 * self.mu / np.asarray(diameters)

    def advection_at(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        if self.advection is None:
            return np.zeros_like(x)
        return np.broadcast_to(np.asarray(self.advection(x, t), dtype=float), x.shape)

    def source_at(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        return _scalar(self.source, x, t)

    def dirichlet_at(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        return _scalar(self.dirichlet, x, t)

    def neumann_at(self, x: np.ndarray, t: np.ndarray, normal: np.ndarray) -> np.ndarray:
        if self.neumann is None:
            return np.zeros(x.shape[:-1])
        return np.broadcast_to(np.asarray(self.neumann(x, t, normal), dtype=float), x.shape[:-1])

    def initial_at(self, x: np.ndarray) -> np.ndarray:
        if self.initial is None:
            return np.zeros(x.shape[:-1])
        return np.broadcast_to(np.asarray(self.initial(x), dtype=float), x.shape[:-1])

    def neumann_inflow(self, x: np.ndarray, t: np.ndarray, n_x: np.ndarray, n_t: np.ndarray, mask=None) -> float:
        """Smallest w . n_x + n_t over Neumann points; warns when negative.

        A negative value means the Neumann part of the boundary has inflow and
        the slab problem is not guaranteed to be well posed.
        """
        values = np.einsum("...i,...i->...", self.advection_at(x, t), n_x) + n_t
        if mask is not None:
            values = values[np.broadcast_to(mask, values.shape)]
        if values.size == 0:
            return np.inf
        worst = float(values.min())
        if worst < -NEUMANN_TOL:
            logger.warning(f"Neumann boundary has inflow: min(w . n_x + n_t) = {worst:.3e}")
        return worst


def _scalar(fn, x: np.ndarray, t: np.ndarray) -> np.ndarray:
    if fn is None:
        return np.zeros(x.shape[:-1])
    return np.broadcast_to(np.asarray(fn(x, t), dtype=float), x.shape[:-1])
