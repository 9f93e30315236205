"""Protocol definitions for spacetime-agfem."""

from typing import Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class ScalarField(Protocol):
    """Space-time scalar data such as a source term or Dirichlet data.

    Points have shape (..., 2) and times broadcast against the leading
    dimensions of the points.
    """

    def __call__(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        ...


@runtime_checkable
class VectorField(Protocol):
    """Space-time vector data such as an advection velocity."""

    def __call__(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        ...


@runtime_checkable
class FluxField(Protocol):
    """Neumann data g_N evaluated with the spatial part of the space-time normal."""

    def __call__(self, x: np.ndarray, t: np.ndarray, normal: np.ndarray) -> np.ndarray:
        ...


@runtime_checkable
class ExactSolution(Protocol):
    """Analytic solution with the derivatives the error norms need."""

    def value(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Return u(x, t) with shape x.shape[:-1]."""
        ...

    def gradient(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Return the spatial gradient with shape x.shape."""
        ...

    def hessian(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Return the spatial Hessian with shape x.shape + (2,)."""
        ...


@runtime_checkable
class BoundaryMotion(Protocol):
    """Motion D(x, t) of boundary points, with D(., 0) the identity."""

    def position(self, x: np.ndarray, t: float) -> np.ndarray:
        """Map initial points x to their position at time t.

        Args:
            x: Points of shape (..., 2) in the initial configuration.
            t: Time.

        Returns:
            Moved points of the same shape.
        """
        ...

    def velocity(self, x: np.ndarray, t: float) -> np.ndarray:
        """Time derivative of position at fixed initial points."""
        ...


@runtime_checkable
class InvertibleMotion(BoundaryMotion, Protocol):
    """Motion whose configurations can be mapped back to the initial one."""

    def inverse(self, y: np.ndarray, t: float) -> np.ndarray:
        """Initial points that D(., t) maps to y."""
        ...
