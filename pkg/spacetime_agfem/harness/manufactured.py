"""Closed-form solutions used to verify the discretization."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..assembly.problem import ModelProblem
from ..exceptions import ConfigurationError


@dataclass(frozen=True)
class ManufacturedSolution:
    """u(x, t) = sin(pi alpha t / T) sin(pi x / L_1) sin(pi y / L_2).

    The source is generated from du/dt + w . grad u - mu lap u = f with a
    constant advection w, so u solves the model problem exactly with its own
    traces as Dirichlet data.

    Attributes:
        alpha: Time frequency parameter.
        lengths: Side lengths L_1, L_2 of the box.
        end_time: Final time T.
        mu: Diffusion coefficient.
        advection: Constant velocity w.
    """

    alpha: float = 0.5
    lengths: tuple[float, float] = (3.0, 3.0)
    end_time: float = 1.0
    mu: float = 1.0
    advection: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if self.end_time <= 0.0 or min(self.lengths) <= 0.0:
            raise ConfigurationError("manufactured solution needs positive T and side lengths")

    @property
    def _wavenumbers(self) -> np.ndarray:
        return math.pi / np.asarray(self.lengths, dtype=float)

    def _time(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        omega = math.pi * self.alpha / self.end_time
        t = np.asarray(t, dtype=float)
        return np.sin(omega * t), omega * np.cos(omega * t)

    def _space(self, x: np.ndarray):
        k = self._wavenumbers
        x = np.asarray(x, dtype=float)
        return np.sin(k * x), np.cos(k * x), k

    def value(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        s, _, _ = self._space(x)
        a, _ = self._time(t)
        return a * s[..., 0] * s[..., 1]

    def gradient(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        s, c, k = self._space(x)
        a, _ = self._time(t)
        grad = np.stack([k[0] * c[..., 0] * s[..., 1], k[1] * s[..., 0] * c[..., 1]], axis=-1)
        return a[..., None] * grad

    def hessian(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        s, c, k = self._space(x)
        a, _ = self._time(t)
        product = s[..., 0] * s[..., 1]
        mixed = k[0] * k[1] * c[..., 0] * c[..., 1]
        hess = np.empty(np.shape(product) + (2, 2))
        hess[..., 0, 0] = -k[0] ** 2 * product
        hess[..., 1, 1] = -k[1] ** 2 * product
        hess[..., 0, 1] = hess[..., 1, 0] = mixed
        return a[..., None, None] * hess

    def time_derivative(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        s, _, _ = self._space(x)
        _, rate = self._time(t)
        return rate * s[..., 0] * s[..., 1]

    def source(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        """f = du/dt + w . grad u - mu lap u."""
        laplacian = np.trace(self.hessian(x, t), axis1=-2, axis2=-1)
        transport = self.gradient(x, t) @ np.asarray(self.advection, dtype=float)
        return self.time_derivative(x, t) + transport - self.mu * laplacian

    def initial(self, x: np.ndarray) -> np.ndarray:
        return self.value(x, np.zeros(np.shape(x)[:-1]))

    def neumann(self, x: np.ndarray, t: np.ndarray, normal: np.ndarray) -> np.ndarray:
        return self.mu * np.einsum("...i,...i->...", self.gradient(x, t), normal)

    def problem(self, penalty: float = 10.0) -> ModelProblem:
        """The model problem this solution satisfies."""
        w = np.asarray(self.advection, dtype=float)
        return ModelProblem(
            mu=self.mu,
            advection=None if not np.any(w) else (lambda x, t: np.broadcast_to(w, np.shape(x))),
            source=self.source,
            dirichlet=self.value,
            neumann=self.neumann,
            initial=self.initial,
            penalty=penalty,
        )


@dataclass(frozen=True)
class ConstantSolution:
    """u = value everywhere; preserved exactly by a conservative transfer."""

    constant: float = 1.0
    mu: float = 1.0

    def value(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x)[:-1], self.constant)

    def gradient(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(x))

    def hessian(self, x: np.ndarray, t: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(x) + (2,))

    def initial(self, x: np.ndarray) -> np.ndarray:
        return self.value(x, None)

    def problem(self, penalty: float = 10.0, advection: Optional[Sequence[float]] = None) -> ModelProblem:
        w = None if advection is None else np.asarray(advection, dtype=float)
        return ModelProblem(
            mu=self.mu,
            advection=None if w is None or not np.any(w) else (lambda x, t: np.broadcast_to(w, np.shape(x))),
            dirichlet=self.value,
            initial=self.initial,
            penalty=penalty,
        )


@dataclass(frozen=True)
class GaussianBump:
    """Initial bump exp(-|x - c|^2 / (2 width^2)) for the transport demo."""

    center: tuple[float, float] = (1.0, 1.0)
    width: float = 0.15
    height: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        r2 = np.sum((np.asarray(x, dtype=float) - np.asarray(self.center)) ** 2, axis=-1)
        return self.height * np.exp(-0.5 * r2 / self.width**2)
