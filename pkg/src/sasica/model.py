"""Discrete SaS AR(1) innovation model.

A length-N signal is written ``s = Linv @ w`` where ``w`` holds iid
symmetric alpha-stable innovations and ``Linv`` is the causal mixing
matrix of the first-order recursion ``s_k = rho * s_{k-1} + w_k`` with
``s_0 = 0`` and ``rho = exp(-kappa * T)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class ParameterError(ValueError):
    """Raised for model parameters outside their admissible range."""


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 1.0
    kappa: float = 0.0
    T: float = 1.0
    N: int = 64
    sigma: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.kappa >= 0.0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")
        if not self.T > 0.0:
            raise ParameterError(f"T must be > 0, got {self.T}")
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")
        if not self.sigma >= 0.0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def rho(self) -> float:
        return float(np.exp(-self.kappa * self.T))

    @classmethod
    def from_rho(cls, rho: float, T: float = 1.0, **kw) -> "ModelParams":
        """Build parameters from the one-step correlation ``rho`` in (0, 1]."""
        if not 0.0 < rho <= 1.0:
            raise ParameterError(f"rho must lie in (0, 1], got {rho}")
        return cls(kappa=-np.log(rho) / T, T=T, **kw)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def bspline_alpha_norm(kappa: float, T: float, alpha: float) -> float:
    """alpha-(pseudo)norm of the exponential B-spline ``exp(-kappa t)`` on ``[0, T)``."""
    if kappa == 0.0:
        return T ** (1.0 / alpha)
    return float((-np.expm1(-alpha * kappa * T) / (alpha * kappa)) ** (1.0 / alpha))


def innovation_dispersion(params: ModelParams, normalization: str = "unit") -> float:
    """Dispersion of the discrete innovations.

    ``"unit"`` gives c = 1 (characteristic function ``exp(-|w|^alpha)``);
    ``"bspline"`` gives the continuous-domain value ``||beta_{kappa,T}||_alpha``.
    """
    if normalization == "unit":
        return 1.0
    if normalization == "bspline":
        return bspline_alpha_norm(params.kappa, params.T, params.alpha)
    raise ParameterError(f"unknown normalization {normalization!r}")


def build_mixing(params: ModelParams) -> np.ndarray:
    """Return the N x N mixing matrix with entries ``rho**(i-j)`` for ``i >= j``."""
    N = params.N
    if N < 1:
        raise ParameterError("N must be >= 1")
    idx = np.arange(N)
    lag = idx[:, None] - idx[None, :]
    rho = params.rho
    if rho == 1.0:
        Linv = (lag >= 0).astype(float)
    else:
        # exponent form keeps rho**lag exact at lag 0 and avoids 0**negative
        Linv = np.where(lag >= 0, np.exp(-params.kappa * params.T * np.maximum(lag, 0)), 0.0)
    return np.ascontiguousarray(Linv, dtype=np.float64)


def build_whitening(params: ModelParams) -> np.ndarray:
    """Bidiagonal inverse of :func:`build_mixing` (1 on the diagonal, -rho below)."""
    N = params.N
    L = np.eye(N)
    if N > 1:
        L[np.arange(1, N), np.arange(N - 1)] = -params.rho
    return L


@dataclass(frozen=True)
class SignalPath:
    samples: np.ndarray
    innovations: np.ndarray
    seed: int
    params: ModelParams = field(repr=False, default=None)


def synthesize(params: ModelParams, seed: int, normalization: str = "unit") -> SignalPath:
    from .stable import StableLaw, sample_sas

    c = innovation_dispersion(params, normalization)
    w = sample_sas(StableLaw(params.alpha, c), params.N, seed)
    rho = params.rho
    s = np.empty_like(w)
    prev = 0.0
    for k in range(params.N):
        prev = rho * prev + w[k]
        s[k] = prev
    return SignalPath(samples=s, innovations=w, seed=seed, params=params)


def whiten(params: ModelParams, samples: np.ndarray) -> np.ndarray:
    """Recover innovations from a path, ``w_k = s_k - rho * s_{k-1}``."""
    s = np.asarray(samples, dtype=float)
    w = s.copy()
    w[1:] -= params.rho * s[:-1]
    return w
