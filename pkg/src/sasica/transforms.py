"""Orthonormal analysis bases: identity, DCT-II, Haar, operator-like wavelets, KLT."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, build_mixing


class RootBracketError(ArithmeticError):
    pass


class OrthonormalityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OrthMatrix:
    entries: np.ndarray
    label: str = ""

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    def residual(self) -> float:
        return orthonormality_residual(self.entries)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def orthonormality_residual(H) -> float:
    H = np.asarray(H, dtype=float)
    return float(np.linalg.norm(H @ H.T - np.eye(H.shape[0])))


def _is_pow2(N: int) -> bool:
    return N >= 1 and (N & (N - 1)) == 0


def identity(N: int) -> OrthMatrix:
    return OrthMatrix(np.eye(N), "identity")


def dct_matrix(N: int) -> OrthMatrix:
    i = np.arange(N)[:, None]
    j = np.arange(N)[None, :]
    H = np.sqrt(2.0 / N) * np.cos(np.pi * i * (j + 0.5) / N)
    H[0, :] = 1.0 / np.sqrt(N)
    return OrthMatrix(H, "dct")


def haar_matrix(N: int) -> OrthMatrix:
    """Orthonormal Haar basis: scaling row, then wavelet rows coarse to fine."""
    if not _is_pow2(N):
        raise ValueError(f"Haar basis needs a power-of-two length, got {N}")
    rows = [np.full(N, 1.0 / np.sqrt(N))]
    width = N
    while width >= 2:
        half = width // 2
        for start in range(0, N, width):
            r = np.zeros(N)
            r[start:start + half] = 1.0
            r[start + half:start + width] = -1.0
            rows.append(r / np.sqrt(width))
        width = half
    return OrthMatrix(np.array(rows), "haar")


def opwav_matrix(params: ModelParams) -> OrthMatrix:
    """Operator-like wavelet basis matched to ``L = D + kappa I``.

    Built by the dyadic recursion: the two coarsest rows pair the exponential
    profile ``l = [1, rho, ..., rho^(n/2-1)]`` on both halves, and the remaining
    rows are the lower-level basis (minus its scaling row) on each half.
    """
    N = params.N
    if not _is_pow2(N):
        raise ValueError(f"operator-like wavelets need a power-of-two length, got {N}")
    k_max = N.bit_length() - 1
    kT = params.kappa * params.T
    H = np.ones((1, 1))
    for k in range(1, k_max + 1):
        n = 1 << k
        half = n // 2
        ell = np.exp(-kT * np.arange(half))
        c = np.exp(-kT * half)
        if kT == 0.0:
            norm = np.sqrt(1.0 / n)
        else:
            norm = np.sqrt(-np.expm1(-2.0 * kT) / -np.expm1(-2.0 * n * kT))
        top = np.concatenate([ell, c * ell]) * norm
        second = np.concatenate([-c * ell, ell]) * norm
        Hp = H[1:]
        Z = np.zeros_like(Hp)
        H = np.vstack([top, second, np.hstack([Hp, Z]), np.hstack([Z, Hp])])
    return OrthMatrix(H, f"opwav(rho={params.rho:.6g})")


# ---------------------------------------------------------------------------
# Karhunen-Loeve bases

def klt_spectrum(rho: float, omega) -> np.ndarray:
    """Eigenvalue ``|lambda|^-1`` of the mixing matrix at frequency ``omega``."""
    return np.sqrt((1.0 - rho) ** 2 + 4.0 * rho * np.sin(np.asarray(omega) / 2.0) ** 2)


def _bisect(f, lo, hi, iters=200):
    flo, fhi = f(lo), f(hi)
    if not flo * fhi < 0:
        raise RootBracketError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def stationary_residual(omega, N: int, rho: float):
    """``tan(N w)`` equation of the stationary AR(1) covariance, sign-definite form.

    Zero where ``tan(N w) = -(1-rho^2) sin w / (cos w - 2 rho + rho^2 cos w)``.
    """
    w = np.asarray(omega, dtype=float)
    return (np.sin(N * w) * ((1 + rho ** 2) * np.cos(w) - 2 * rho)
            + (1 - rho ** 2) * np.sin(w) * np.cos(N * w))


def stationary_frequencies(N: int, rho: float) -> np.ndarray:
    """Roots of :func:`stationary_residual`, one in each ``[(i-1)pi/N, i pi/N]``."""
    if not 0 < rho < 1:
        raise ValueError("the stationary covariance needs 0 < rho < 1")
    f = lambda w: float(stationary_residual(w, N, rho))
    out = np.empty(N)
    for i in range(1, N + 1):
        lo, hi = (i - 1) * np.pi / N, i * np.pi / N
        # the endpoints are roots of sin(N w); step inside by a hair
        eps = 1e-13
        out[i - 1] = _bisect(f, lo + eps, hi - eps)
    return out


def model_residual(theta, N: int, rho: float):
    """Frequency equation ``sin((N+1) t) - rho sin(N t) = 0`` of the s_0 = 0 model."""
    t = np.asarray(theta, dtype=float)
    return np.sin((N + 1) * t) - rho * np.sin(N * t)


def model_frequencies(N: int, rho: float) -> np.ndarray:
    """Roots of :func:`model_residual`; root ``i`` lies in ``((i-1)pi/N, i pi/(N+1))``."""
    f = lambda t: float(model_residual(t, N, rho))
    out = np.empty(N)
    for i in range(1, N + 1):
        lo = (i - 1) * np.pi / N
        hi = i * np.pi / (N + 1)
        if i == 1:
            lo = 1e-3 * hi
        out[i - 1] = _bisect(f, lo, hi)
    return out


def model_covariance(params: ModelParams) -> np.ndarray:
    Linv = build_mixing(params)
    return Linv @ Linv.T


def klt_matrix(params: ModelParams, tol: float = 1e-8) -> OrthMatrix:
    """Eigenbasis of the model covariance ``Linv Linv^T`` in closed form.

    Row ``i`` is ``sin(j theta_i)`` (``j = 1..N``), normalized, where
    ``theta_i`` solves :func:`model_residual`; its eigenvalue is
    ``klt_spectrum(rho, theta_i)^-2``. Rows are ordered by decreasing variance.
    Falls back to a numeric eigendecomposition if validation fails.
    """
    N, rho = params.N, params.rho
    theta = model_frequencies(N, rho)
    j = np.arange(1, N + 1)
    V = np.sin(theta[:, None] * j[None, :])
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    if orthonormality_residual(V) <= tol:
        return OrthMatrix(V, "klt")
    warnings.warn("closed-form KLT failed validation; using eigendecomposition", RuntimeWarning)
    ev, U = np.linalg.eigh(model_covariance(params))
    V = U[:, ::-1].T
    if orthonormality_residual(V) > tol:
        raise OrthonormalityError("KLT rows are not orthonormal")
    return OrthMatrix(V, "klt(eig)")


def stationary_klt_matrix(params: ModelParams, tol: float = 1e-8) -> OrthMatrix:
    """KLT of the stationary covariance ``rho^|i-j| / (1 - rho^2)``.

    Uses the closed-form sinusoids ``sin(w_i (j - (N+1)/2) + i pi/2)`` with
    explicit row normalization.
    """
    N, rho = params.N, params.rho
    w = stationary_frequencies(N, rho)
    i = np.arange(1, N + 1)[:, None]
    j = np.arange(1, N + 1)[None, :]
    V = np.sin(w[:, None] * (j - (N + 1) / 2.0) + i * np.pi / 2.0)
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    if orthonormality_residual(V) <= tol:
        return OrthMatrix(V, "stationary-klt")
    warnings.warn("closed-form stationary KLT failed validation; using eigendecomposition",
                  RuntimeWarning)
    idx = np.arange(N)
    C = rho ** np.abs(idx[:, None] - idx[None, :]) / (1.0 - rho ** 2)
    ev, U = np.linalg.eigh(C)
    V = U[:, ::-1].T
    if orthonormality_residual(V) > tol:
        raise OrthonormalityError("stationary KLT rows are not orthonormal")
    return OrthMatrix(V, "stationary-klt(eig)")


def random_orthogonal(N: int, seed) -> OrthMatrix:
    """Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((N, N)))
    Q = Q * np.sign(np.diag(R))[None, :]
    return OrthMatrix(Q, f"random(seed={seed})")


TRANSFORMS = {
    "identity": lambda p: identity(p.N),
    "dct": lambda p: dct_matrix(p.N),
    "haar": lambda p: haar_matrix(p.N),
    "hwt": lambda p: haar_matrix(p.N),
    "opwav": opwav_matrix,
    "opwt": opwav_matrix,
    "klt": klt_matrix,
}


def make_transform(name: str, params: ModelParams) -> OrthMatrix:
    try:
        return TRANSFORMS[name.lower()](params)
    except KeyError:
        raise ValueError(f"unknown transform {name!r}; choose from {sorted(TRANSFORMS)}") from None
