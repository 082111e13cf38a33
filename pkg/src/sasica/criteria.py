"""Dependence criteria of a transform ``H`` for the model ``s = Linv w``.

Both criteria depend on ``H`` only through the row alpha-pseudonorms
``hbar_n`` of ``A = H @ Linv``: coefficient ``y_n`` is distributed as
``hbar_n * w_1``.

* ``R(H) = mean(log hbar_n)`` is the per-sample redundancy (nats).
* ``MSE(H) = sigma^2 - sigma^4 * mean(J(hbar_n))`` is the per-sample error
  of coefficient-wise MMSE denoising, ``J`` being the Fisher information of
  the noisy marginal (see :func:`sasica.stable.fisher_info`).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .stable import fisher_info

SINGULAR_THRESHOLD = 1e-12
# for alpha < 1 a round-off residue of 1e-16 would contribute ~1e-16^alpha;
# entries this far below the largest one are treated as exact zeros
ROUNDOFF_FLUSH = 1e-13


class GradientSingularity(RuntimeWarning):
    """Some ``|A_ir|`` vanish while ``alpha < 1``; a subgradient was used."""


@dataclass
class CriterionReport:
    hbars: np.ndarray
    value: float
    criterion_kind: str
    gradient: np.ndarray | None = None
    singular: bool = False

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("n,hbar\n")
            for n, h in enumerate(self.hbars):
                fh.write(f"{n},{h:.17g}\n")
            fh.write(f"# {self.criterion_kind},{self.value:.17g}\n")


def _as_array(M) -> np.ndarray:
    return np.asarray(getattr(M, "entries", M), dtype=float)


def _row_norms(A, alpha, eps=0.0):
    if eps > 0.0:
        return np.sum((A * A + eps * eps) ** (alpha / 2.0), axis=1) ** (1.0 / alpha)
    absA = np.abs(A)
    if alpha < 1.0 and absA.size:
        absA = np.where(absA < ROUNDOFF_FLUSH * absA.max(), 0.0, absA)
    return np.sum(absA ** alpha, axis=1) ** (1.0 / alpha)


def row_alpha_norms(H, Linv, alpha: float, eps: float = 0.0) -> np.ndarray:
    """``hbar_n = (sum_r |(H Linv)_nr|^alpha)^(1/alpha)``.

    ``eps > 0`` replaces ``|a|`` by ``sqrt(a^2 + eps^2)``, a smooth surrogate
    used only to warm-start the optimizer.
    """
    return _row_norms(_as_array(H) @ _as_array(Linv), alpha, eps)


def redundancy_R(H, Linv, alpha: float, gradient: bool = False, eps: float = 0.0) -> CriterionReport:
    hb = row_alpha_norms(H, Linv, alpha, eps)
    rep = CriterionReport(hb, float(np.mean(np.log(hb))), "R")
    if gradient:
        rep.gradient, rep.singular = _grad_R(H, Linv, alpha, eps)
    return rep


def _signed_power(A, alpha):
    """``sgn(A) |A|^(alpha-1)`` with zero where the power would blow up."""
    absA = np.abs(A)
    singular = False
    if alpha < 1.0:
        small = absA < SINGULAR_THRESHOLD
        singular = bool(small.any())
        out = np.zeros_like(A)
        big = ~small
        out[big] = np.sign(A[big]) * absA[big] ** (alpha - 1.0)
        return out, singular
    if alpha == 1.0:
        return np.sign(A), singular
    return np.sign(A) * absA ** (alpha - 1.0), singular


def _hbar_power_grad(H, Linv, alpha, eps=0.0):
    """Rows of ``d(hbar_i^alpha)/dh_ij / alpha``, plus the ``hbar`` vector."""
    H, Linv = _as_array(H), _as_array(Linv)
    A = H @ Linv
    if eps > 0.0:
        S, singular = A * (A * A + eps * eps) ** (alpha / 2.0 - 1.0), False
    else:
        S, singular = _signed_power(A, alpha)
    return S @ Linv.T, _row_norms(A, alpha, eps), singular


def _grad_R(H, Linv, alpha, eps=0.0):
    G, hb, singular = _hbar_power_grad(H, Linv, alpha, eps)
    N = G.shape[0]
    return G / (N * hb[:, None] ** alpha), singular


def grad_R(H, Linv, alpha: float) -> np.ndarray:
    G, singular = _grad_R(H, Linv, alpha)
    if singular:
        warnings.warn("zero entries in H @ Linv with alpha < 1; subgradient used",
                      GradientSingularity, stacklevel=2)
    return G


def _fisher_terms(hbars, alpha, sigma, derivative):
    J = np.empty(len(hbars))
    dJ = np.empty(len(hbars)) if derivative else None
    for n, h in enumerate(hbars):
        if derivative:
            J[n], dJ[n] = fisher_info(h, alpha, sigma, derivative=True)
        else:
            J[n] = fisher_info(h, alpha, sigma)
    return J, dJ


def mse_criterion(H, Linv, alpha: float, sigma: float, gradient: bool = False,
                  eps: float = 0.0) -> CriterionReport:
    if not sigma > 0:
        raise ValueError("sigma must be > 0 for the MSE criterion")
    hb = row_alpha_norms(H, Linv, alpha, eps)
    J, dJ = _fisher_terms(hb, alpha, sigma, gradient)
    value = sigma ** 2 - sigma ** 4 * float(np.mean(J))
    rep = CriterionReport(hb, value, "MSE")
    if gradient:
        rep.gradient, rep.singular = _grad_MSE(H, Linv, alpha, sigma, dJ, eps)
    return rep


def _grad_MSE(H, Linv, alpha, sigma, dJ=None, eps=0.0):
    G, hb, singular = _hbar_power_grad(H, Linv, alpha, eps)
    N = G.shape[0]
    if dJ is None:
        _, dJ = _fisher_terms(hb, alpha, sigma, True)
    # d hbar_i / d h_ij = hbar_i^(1-alpha) * G_ij
    coef = -(sigma ** 4) / N * dJ * hb ** (1.0 - alpha)
    return coef[:, None] * G, singular


def grad_MSE(H, Linv, alpha: float, sigma: float) -> np.ndarray:
    G, singular = _grad_MSE(H, Linv, alpha, sigma)
    if singular:
        warnings.warn("zero entries in H @ Linv with alpha < 1; subgradient used",
                      GradientSingularity, stacklevel=2)
    return G


def evaluate(kind: str, H, Linv, alpha: float, sigma: float = 1.0,
             gradient: bool = False, eps: float = 0.0) -> CriterionReport:
    kind = kind.upper()
    if kind == "R":
        return redundancy_R(H, Linv, alpha, gradient=gradient, eps=eps)
    if kind == "MSE":
        return mse_criterion(H, Linv, alpha, sigma, gradient=gradient, eps=eps)
    raise ValueError(f"unknown criterion {kind!r}")
