"""Large-N behaviour of the operator-like wavelet and DCT bases.

The wavelet basis on ``N = 2^K`` samples has, at every scale ``k = 1..K``,
``2^(K-k)`` translated rows that all share the same pseudonorm ``hbar_k``
after mixing, plus one scaling row. Here ``gamma_k = 1 / hbar_k`` is computed
in closed form (log domain, so ``K = 40`` is cheap), which gives

* ``R(OpWT) -> sum_k 2^-k log(1/gamma_k)``
* ``MSE(OpWT) -> sum_k 2^-k nu(1/gamma_k)``

The DCT rows, in contrast, have pseudonorms that grow without bound when
``alpha < 2``, so ``R(DCT)`` diverges and ``MSE(DCT)`` saturates at ``sigma^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import zeta

from . import criteria
from .model import ModelParams, build_mixing
from .stable import NuFunction, nu
from .transforms import dct_matrix, opwav_matrix

LN2 = math.log(2.0)
EXACT_TERMS = 1 << 20       # sums longer than this use asymptotic forms
DEFAULT_K = 40


# ---------------------------------------------------------------------------
# log-domain sums

def _log_power_sum(alpha: float, M: int) -> float:
    """``log sum_{j=1}^M j^alpha``."""
    if M <= 0:
        return -math.inf
    if M <= EXACT_TERMS:
        j = np.arange(1, M + 1, dtype=float)
        # factor out the largest term to stay finite for any alpha
        return alpha * math.log(M) + math.log(np.sum((j / M) ** alpha))
    # Euler-Maclaurin around M^(alpha+1)/(alpha+1)
    a1 = alpha + 1.0
    corr = (a1 / (2.0 * M) + alpha * a1 / (12.0 * M * M)
            - alpha * a1 * (alpha - 1) * (alpha - 2) / (720.0 * M ** 4)
            + float(zeta(-alpha)) * a1 * M ** (-a1))
    return a1 * math.log(M) - math.log(a1) + math.log1p(corr)


def _logsumexp(v: np.ndarray) -> float:
    m = float(np.max(v))
    return m + math.log(float(np.sum(np.exp(v - m))))


def _log_decay_sum(alpha: float, kT: float, n: int, t_hi: int, t_lo: int = 0) -> float:
    """``log sum_{t=t_lo}^{t_hi-1} (rho^t - rho^(n-t))^alpha`` with ``rho = exp(-kT)``.

    Terms decay geometrically, so only the first ``EXACT_TERMS`` are summed;
    if the dropped part could matter the decay is too slow and ValueError is raised.
    """
    if t_hi - t_lo > EXACT_TERMS:
        if alpha * EXACT_TERMS * kT < 40.0:
            raise ValueError("decay too slow for the truncated sum; "
                             "use kappa = 0 or fewer scales")
        t_hi = t_lo + EXACT_TERMS
    t = np.arange(t_lo, t_hi, dtype=float)
    lr = -kT
    # rho^t - rho^(n-t) = rho^t * (1 - rho^(n-2t))
    diff = -np.expm1((n - 2.0 * t) * lr)
    return _logsumexp(alpha * (t * lr + np.log(diff)))


def _log_hbar_wavelet(kappa: float, T: float, alpha: float, k: int) -> float:
    """``log hbar_k`` of a scale-``k`` wavelet row (support ``2^k``)."""
    n = 1 << k
    m = n // 2
    if kappa == 0.0:
        # |entries| are m - |i| for i = -m+1..m: m once, 1..m-1 twice
        if m == 1:
            ls = 0.0
        else:
            ls = _logsumexp(np.array([alpha * math.log(m), LN2 + _log_power_sum(alpha, m - 1)]))
        return -0.5 * k * LN2 + ls / alpha
    kT = kappa * T
    one_m_r2 = -math.expm1(-2.0 * kT)
    # |entries| are (rho^t - rho^(n-t))/(1-rho^2): t = 0..m-1 and t = 1..m-1
    parts = [_log_decay_sum(alpha, kT, n, m)]
    if m > 1:
        parts.append(_log_decay_sum(alpha, kT, n, m, t_lo=1))
    ls = _logsumexp(np.array(parts)) - alpha * math.log(one_m_r2)
    log_norm = 0.5 * (math.log(one_m_r2) - math.log(-math.expm1(-2.0 * n * kappa * T)))
    return log_norm + ls / alpha


def _log_hbar_scaling(kappa: float, T: float, alpha: float, K: int) -> float:
    """``log hbar`` of the scaling row on ``N = 2^K`` samples."""
    N = 1 << K
    if kappa == 0.0:
        return -0.5 * K * LN2 + _log_power_sum(alpha, N) / alpha
    kT = kappa * T
    one_m_r2 = -math.expm1(-2.0 * kT)
    # entries rho^t (1 - rho^(2(N-t))) / (1 - rho^2), t = 0..N-1
    ls = _log_decay_sum(alpha, kT, 2 * N, N) - alpha * math.log(one_m_r2)
    log_norm = 0.5 * (math.log(one_m_r2) - math.log(-math.expm1(-2.0 * N * kappa * T)))
    return log_norm + ls / alpha


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaSequence:
    """Reciprocal pseudonorms of the wavelet basis on ``2^K`` samples.

    ``gammas[k-1]`` belongs to the ``2^(K-k)`` rows at scale ``k`` (fraction
    ``weights[k-1] = 2^-k`` of all rows); ``coarse`` belongs to the single
    scaling row.
    """
    gammas: np.ndarray
    weights: np.ndarray
    coarse: float
    kappa: float
    T: float
    alpha: float

    @property
    def K(self) -> int:
        return len(self.gammas)

    def multiset(self) -> np.ndarray:
        """All ``2^K`` reciprocal row pseudonorms, sorted."""
        K = self.K
        parts = [np.full(1 << (K - k), g) for k, g in enumerate(self.gammas, start=1)]
        parts.append(np.array([self.coarse]))
        return np.sort(np.concatenate(parts))

    def upper_bounds(self) -> np.ndarray:
        """Closed-form upper bounds on ``1/gamma_k``."""
        return np.array([hbar_upper_bound(self.kappa, self.T, self.alpha, k)
                         for k in range(1, self.K + 1)])

    def lower_bounds(self) -> np.ndarray:
        return np.array([hbar_lower_bound(self.kappa, self.T, self.alpha, k)
                         for k in range(1, self.K + 1)])


def gamma_sequence(kappa: float, T: float, alpha: float, K: int) -> GammaSequence:
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if kappa < 0 or T <= 0:
        raise ValueError("need kappa >= 0 and T > 0")
    logs = np.array([_log_hbar_wavelet(kappa, T, alpha, k) for k in range(1, K + 1)])
    return GammaSequence(
        gammas=np.exp(-logs),
        weights=2.0 ** -np.arange(1, K + 1, dtype=float),
        coarse=math.exp(-_log_hbar_scaling(kappa, T, alpha, K)),
        kappa=kappa, T=T, alpha=alpha,
    )


def direct_gammas(kappa: float, T: float, alpha: float, K: int) -> np.ndarray:
    """Sorted ``1/hbar_n`` of the explicit ``2^K``-point wavelet matrix."""
    p = ModelParams(alpha=alpha, kappa=kappa, T=T, N=1 << K)
    hb = criteria.row_alpha_norms(opwav_matrix(p), build_mixing(p), alpha)
    return np.sort(1.0 / hb)


# ---------------------------------------------------------------------------
# bounds and limit series

def hbar_upper_bound(kappa: float, T: float, alpha: float, k: int) -> float:
    """Upper bound on ``1/gamma_k``.

    ``kappa = 0``: each of the ``2^k`` entries is at most ``2^(k-1)``, giving
    ``2^(k/2 + k/alpha - 1)``. ``kappa > 0``: entries decay like ``rho^t``,
    so the bound is uniform in ``k``.
    """
    if kappa == 0.0:
        return 2.0 ** (k / 2.0 + k / alpha - 1.0)
    kT = kappa * T
    log_1mr2 = math.log(-math.expm1(-2.0 * kT))
    log_geometric = (LN2 - math.log(-math.expm1(-alpha * kT))) / alpha - log_1mr2
    log_counting = k * LN2 / alpha - log_1mr2
    log_norm = 0.5 * (log_1mr2 - math.log(-math.expm1(-4.0 * kT)))
    return math.exp(min(log_norm + min(log_geometric, log_counting), 700.0))


def hbar_lower_bound(kappa: float, T: float, alpha: float, k: int) -> float:
    """Lower bound on ``1/gamma_k`` from the largest single entry."""
    if kappa == 0.0:
        return 2.0 ** (k / 2.0 - 1.0)
    return math.sqrt(0.5)


def _abs_log_bound(kappa, T, alpha, k):
    return max(abs(math.log(hbar_upper_bound(kappa, T, alpha, k))),
               abs(math.log(hbar_lower_bound(kappa, T, alpha, k))))


def r_tail_bound(kappa: float, T: float, alpha: float, K: int) -> float:
    """Bound on ``|sum_{k>K} 2^-k log(1/gamma_k)|``."""
    if kappa == 0.0:
        # |log hbar_k| <= k (1/2 + 1/alpha) log 2 and sum_{k>K} k 2^-k = (K+2) 2^-K
        return LN2 * (0.5 + 1.0 / alpha) * (K + 2) * 2.0 ** -K
    # for kappa > 0 the bounds are uniform in k (up to the counting form)
    return 2.0 ** -K * max(_abs_log_bound(kappa, T, alpha, k) for k in (K + 1, K + 60))


def limit_R_opwt(kappa: float, T: float, alpha: float, K: int = DEFAULT_K,
                 tol: float = 1e-6) -> float:
    """Limit of ``R(OpWT)`` as ``N -> inf``, truncated at scale ``K``."""
    bound = r_tail_bound(kappa, T, alpha, K)
    if bound >= tol:
        raise ValueError(f"K={K} only certifies a tail of {bound:.3g}; increase K")
    g = gamma_sequence(kappa, T, alpha, K)
    return float(np.sum(g.weights * -np.log(g.gammas)))


def limit_R_bound(kappa: float, T: float, alpha: float) -> float:
    """Closed-form upper bound ``(2/alpha + 1/2 log(1/(1-rho^2))) log 2`` (first term only if kappa = 0)."""
    c = 0.0 if kappa == 0.0 else 0.5 * math.log(1.0 / -math.expm1(-2.0 * kappa * T))
    return (2.0 / alpha + c) * LN2


def limit_mse_opwt(kappa: float, T: float, alpha: float, sigma: float,
                   K: int = DEFAULT_K) -> float:
    """Limit of ``MSE(OpWT)``; the truncation error is at most ``2^-K sigma^2``."""
    if sigma == 0.0:
        return 0.0
    g = gamma_sequence(kappa, T, alpha, K)
    vals = np.array([nu(1.0 / gk, alpha, sigma) for gk in g.gammas])
    return float(np.sum(g.weights * vals))


def mse_hwt_bound(kappa: float, T: float, alpha: float, sigma: float) -> float:
    """``nu(1/gamma_1)/2 + sigma^2/2``: half the rows sit at the finest scale."""
    g1 = math.exp(-_log_hbar_wavelet(kappa, T, alpha, 1))
    return 0.5 * nu(1.0 / g1, alpha, sigma) + 0.5 * sigma ** 2


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitSpectrum:
    """Limit distribution of the DCT row pseudonorms.

    ``kind == "density"`` (``alpha = 2``): arcsine-like density on
    ``[1 - rho, 1 + rho]``. ``kind == "point_mass"`` (``alpha < 2``): all mass
    at ``0`` in the reciprocal scale, i.e. the pseudonorms diverge.
    """
    kind: str
    rho: float

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "point_mass":
            return (0.0, 0.0)
        return (1.0 - self.rho, 1.0 + self.rho)

    def density(self, g):
        if self.kind != "density":
            raise ValueError("a point mass has no density")
        g = np.asarray(g, dtype=float)
        lo, hi = self.support
        with np.errstate(invalid="ignore", divide="ignore"):
            d = (2.0 / np.pi) * g / (np.sqrt(g * g - lo * lo) * np.sqrt(hi * hi - g * g))
        return np.where((g > lo) & (g < hi), d, 0.0)

    def total_mass(self) -> float:
        if self.kind == "point_mass":
            return 1.0
        lo, hi = self.support
        # the endpoints are integrable inverse-square-root singularities
        val, _ = integrate.quad(lambda g: float(self.density(g)), lo, hi, limit=200,
                                epsabs=1e-12, epsrel=1e-12)
        return val


def limit_spectrum_dct(kappa: float, T: float, alpha: float) -> LimitSpectrum:
    rho = math.exp(-kappa * T)
    return LimitSpectrum("density" if alpha == 2 else "point_mass", rho)


# ---------------------------------------------------------------------------

@dataclass
class LargeNReport:
    kappa: float
    T: float
    alpha: float
    sigma: float
    rows: list = field(default_factory=list)   # (N, R_dct, R_opwt, MSE_dct, MSE_opwt)
    limit_R: float = float("nan")
    limit_R_bound: float = float("nan")
    mse_bound: float = float("nan")

    def column(self, name: str) -> np.ndarray:
        idx = ["N", "R_dct", "R_opwt", "MSE_dct", "MSE_opwt"].index(name)
        return np.array([r[idx] for r in self.rows])

    @property
    def r_dct_increasing(self) -> bool:
        return bool(np.all(np.diff(self.column("R_dct")) > 0))

    @property
    def mse_dct_increasing(self) -> bool:
        return bool(np.all(np.diff(self.column("MSE_dct")) > 0))

    @property
    def r_opwt_bounded(self) -> bool:
        return bool(np.all(self.column("R_opwt") <= self.limit_R_bound + 1e-6))

    @property
    def mse_opwt_bounded(self) -> bool:
        return bool(np.all(self.column("MSE_opwt") <= self.mse_bound))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("N,R_dct,R_opwt,MSE_dct,MSE_opwt\n")
            for r in self.rows:
                fh.write(f"{r[0]}," + ",".join(f"{v:.17g}" for v in r[1:]) + "\n")


def nu_table_for(kappa, T, alpha, sigma, N_list, per_decade: int = 20) -> NuFunction:
    """A :class:`NuFunction` spanning every pseudonorm met by the DCT and
    wavelet rows over ``N_list``, with ``per_decade`` nodes per decade.

    Twenty nodes per decade keep the interpolation error near 1e-5.
    """
    lo, hi = math.inf, 0.0
    for N in (min(N_list), max(N_list)):
        p = ModelParams(alpha=alpha, kappa=kappa, T=T, N=N, sigma=sigma)
        Linv = build_mixing(p)
        for H in (dct_matrix(N), opwav_matrix(p)):
            hb = criteria.row_alpha_norms(H, Linv, alpha)
            lo, hi = min(lo, hb.min()), max(hi, hb.max())
    lo, hi = lo / 1.5, hi * 1.5
    nodes = int(math.ceil(per_decade * math.log10(hi / lo))) + 2
    return NuFunction(alpha, sigma, lo=lo, hi=hi, nodes=nodes)


def large_n_row(kappa, T, alpha, sigma, N, nu_table=None):
    p = ModelParams(alpha=alpha, kappa=kappa, T=T, N=N, sigma=sigma)
    Linv = build_mixing(p)
    D, W = dct_matrix(N), opwav_matrix(p)
    if nu_table is None:
        mse = lambda H: criteria.mse_criterion(H, Linv, alpha, sigma).value
    else:
        # MSE is the mean of nu over the row pseudonorms
        mse = lambda H: float(np.mean(nu_table(criteria.row_alpha_norms(H, Linv, alpha))))
    return (N,
            criteria.redundancy_R(D, Linv, alpha).value,
            criteria.redundancy_R(W, Linv, alpha).value,
            mse(D), mse(W))


def theorem1_check(kappa: float, T: float, alpha: float, sigma: float,
                   N_list=(16, 64, 256, 1024), map_fn=map,
                   nu_table=None) -> LargeNReport:
    """Tabulate R and MSE of the DCT and the wavelet basis over growing ``N``.

    ``map_fn`` may be a pool's ``map`` to evaluate the sizes in parallel.
    ``nu_table`` (e.g. a :class:`NuFunction`) replaces the direct MSE
    evaluation, which dominates the cost for large ``N``.
    """
    if alpha >= 2:
        raise ValueError("the comparison is only meaningful for alpha < 2")
    rows = list(map_fn(lambda N: large_n_row(kappa, T, alpha, sigma, N, nu_table),
                         list(N_list)))
    return LargeNReport(
        kappa, T, alpha, sigma, rows,
        limit_R=limit_R_opwt(kappa, T, alpha),
        limit_R_bound=limit_R_bound(kappa, T, alpha),
        mse_bound=mse_hwt_bound(kappa, T, alpha, sigma),
    )
