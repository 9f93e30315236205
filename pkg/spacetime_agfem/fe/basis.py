"""Nodal Lagrange bases on the reference square, triangle and interval."""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import legendre

from ..exceptions import ConfigurationError


def gauss_lobatto_nodes(count: int) -> np.ndarray:
    """Gauss-Lobatto-Legendre points on [0, 1], endpoints included."""
    if count < 2:
        raise ConfigurationError(f"Gauss-Lobatto rules need at least 2 points, got {count}")
    interior = legendre.Legendre.basis(count - 1).deriv().roots() if count > 2 else np.zeros(0)
    nodes = np.concatenate([[-1.0], np.sort(np.real(interior)), [1.0]])
    return 0.5 * (nodes + 1.0)


def _exponents(shape: str, order: int) -> np.ndarray:
    if shape == "quad":
        return np.array([(i, j) for j in range(order + 1) for i in range(order + 1)])
    return np.array([(i, j) for j in range(order + 1) for i in range(order + 1 - j)])


def _power(x: np.ndarray, k: np.ndarray) -> np.ndarray:
    """x**k with negative exponents mapped to zero."""
    return np.where(k >= 0, np.power(x, np.maximum(k, 0)), 0.0)


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """Lagrange element of order p on the unit square or unit triangle.

    Nodes sit on the equispaced lattice ``(a / p, b / p)``: all pairs for the
    square, ``a + b <= p`` for the triangle, both ordered with ``a`` fastest.
    """

    shape: str
    order: int
    lattice: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.shape not in ("quad", "triangle"):
            raise ConfigurationError(f"unknown reference shape {self.shape!r}")
        if self.order < 1:
            raise ConfigurationError(f"spatial order must be >= 1, got {self.order}")
        object.__setattr__(self, "lattice", _exponents(self.shape, self.order))

    @classmethod
    def quadrilateral(cls, order: int) -> "ReferenceElement":
        return cls("quad", order)

    @classmethod
    def triangle(cls, order: int) -> "ReferenceElement":
        return cls("triangle", order)

    @property
    def n_nodes(self) -> int:
        """Number of shape functions: (p+1)^2 or (p+1)(p+2)/2."""
        return len(self.lattice)

    @property
    def nodes(self) -> np.ndarray:
        """Reference coordinates of the nodes."""
        return self.lattice / self.order

    @cached_property
    def _coefficients(self) -> np.ndarray:
        powers = _exponents(self.shape, self.order)
        vandermonde = np.prod(self.nodes[:, None, :] ** powers[None, :, :], axis=-1)
        return np.linalg.inv(vandermonde)

    def _monomials(self, xi: np.ndarray, dx: int = 0, dy: int = 0) -> np.ndarray:
        powers = _exponents(self.shape, self.order)
        i, j = powers[:, 0], powers[:, 1]
        factor = np.ones(len(powers))
        for k in range(dx):
            factor = factor * (i - k)
        for k in range(dy):
            factor = factor * (j - k)
        x, y = xi[..., 0:1], xi[..., 1:2]
        return factor * _power(x, i - dx) * _power(y, j - dy)

    def values(self, xi: np.ndarray) -> np.ndarray:
        """Shape values at reference points (..., 2), shape (..., n_nodes)."""
        return self._monomials(np.asarray(xi, dtype=float)) @ self._coefficients

    def gradients(self, xi: np.ndarray) -> np.ndarray:
        """Reference gradients, shape (..., n_nodes, 2)."""
        xi = np.asarray(xi, dtype=float)
        dx = self._monomials(xi, 1, 0) @ self._coefficients
        dy = self._monomials(xi, 0, 1) @ self._coefficients
        return np.stack([dx, dy], axis=-1)

    def hessians(self, xi: np.ndarray) -> np.ndarray:
        """Reference second derivatives, shape (..., n_nodes, 2, 2)."""
        xi = np.asarray(xi, dtype=float)
        dxx = self._monomials(xi, 2, 0) @ self._coefficients
        dxy = self._monomials(xi, 1, 1) @ self._coefficients
        dyy = self._monomials(xi, 0, 2) @ self._coefficients
        return np.stack([np.stack([dxx, dxy], axis=-1), np.stack([dxy, dyy], axis=-1)], axis=-2)


@dataclass(frozen=True, eq=False)
class TemporalBasis:
    """Lagrange basis of order q on the unit slab interval [0, 1].

    Nodes are the Gauss-Lobatto points for q >= 1 and the midpoint for q = 0.
    """

    order: int

    def __post_init__(self) -> None:
        if self.order < 0:
            raise ConfigurationError(f"temporal order must be >= 0, got {self.order}")

    @property
    def n_nodes(self) -> int:
        return self.order + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        if self.order == 0:
            return np.array([0.5])
        return gauss_lobatto_nodes(self.order + 1)

    @cached_property
    def _coefficients(self) -> np.ndarray:
        return np.linalg.inv(np.vander(self.nodes, self.n_nodes, increasing=True))

    def values(self, s: np.ndarray) -> np.ndarray:
        """Basis values at points of [0, 1], shape (..., q+1)."""
        s = np.asarray(s, dtype=float)
        return np.power(s[..., None], np.arange(self.n_nodes)) @ self._coefficients

    def derivatives(self, s: np.ndarray) -> np.ndarray:
        """Derivatives with respect to the unit slab coordinate."""
        s = np.asarray(s, dtype=float)
        k = np.arange(self.n_nodes)
        return (k * _power(s[..., None], k - 1)) @ self._coefficients


def reference_element(shape: str, order: int) -> ReferenceElement:
    """Element of the given mesh shape ("quad" or "triangle")."""
    return ReferenceElement(shape, order)
