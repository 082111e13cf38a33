"""Symmetric alpha-stable distribution machinery.

Densities are obtained by inverting the characteristic function
``exp(-|h w|^alpha - sigma^2 w^2 / 2)`` with the FFT, i.e. the law of
``h * W + sigma * Z`` with ``W`` unit-dispersion SaS and ``Z`` standard
normal. Derivatives of order ``k`` come from the factor ``(j w)^k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import fft as sfft
from scipy.interpolate import PchipInterpolator
from scipy.special import gamma as gamma_fn


class NormalizationError(ArithmeticError):
    """The sampled density does not integrate to one within tolerance."""


@dataclass(frozen=True)
class StableLaw:
    alpha: float
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not self.c > 0.0:
            raise ValueError(f"dispersion must be > 0, got {self.c}")

    def charfun(self, omega):
        return charfun(self, omega)


def charfun(law: StableLaw, omega):
    """Characteristic function ``exp(-|c omega|^alpha)``."""
    return np.exp(-np.abs(law.c * np.asarray(omega, dtype=float)) ** law.alpha)


def sample_sas(law: StableLaw, n: int, seed) -> np.ndarray:
    """Draw ``n`` iid SaS variates with the Chambers-Mallows-Stuck method."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    a = law.alpha
    V = rng.uniform(-np.pi / 2, np.pi / 2, size=n)
    E = rng.standard_exponential(size=n)
    if a == 1.0:
        X = np.tan(V)
    else:
        X = (np.sin(a * V) / np.cos(V) ** (1.0 / a)) * (np.cos((1.0 - a) * V) / E) ** ((1.0 - a) / a)
    return law.c * X


def stable_tail_constant(alpha: float) -> float:
    """``C`` in ``P(W > x) ~ C x^-alpha`` for unit-dispersion SaS ``W``."""
    return float(gamma_fn(alpha) * np.sin(np.pi * alpha / 2) / np.pi)


# ---------------------------------------------------------------------------
# FFT densities

MAX_GRID = 2 ** 20
MIN_GRID = 2 ** 12
# exp(-ENVELOPE) is the characteristic function level we aim to cut at
ENVELOPE = 45.0
ENVELOPE_FLOOR = 20.0
# density at the window edge relative to the peak: the level of wrapped-around tail
EDGE_TOL = 1e-3


@dataclass(frozen=True)
class PdfGrid:
    x0: float
    dx: float
    M: int
    values: tuple
    smoothing_sigma: float
    hbar: float = 1.0
    alpha: float = 2.0
    mass: float = 1.0
    tail_mass: float = 0.0
    edge_ratio: float = 0.0
    nyquist_charfun: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.M)

    @property
    def max_order(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> np.ndarray:
        return self.values[k]

    def to_csv(self, path) -> None:
        cols = [self.x] + [self.values[k] if k <= self.max_order else np.full(self.M, np.nan)
                           for k in range(4)]
        data = np.column_stack(cols)
        np.savetxt(path, data, delimiter=",", header="x,p0,p1,p2,p3", comments="", fmt="%.17g")


def grid_policy(hbar: float, alpha: float, sigma: float):
    """Choose ``(M, x_max)`` for the law of ``hbar*W + sigma*Z``.

    Work in units of ``s = max(hbar, sigma)``. The frequency cutoff is where the
    characteristic function drops below ``exp(-ENVELOPE)``; the spatial extent
    targets 40 s for the Gaussian case and a much wider, alpha-dependent window
    for heavy tails. When both cannot be met within ``MAX_GRID`` points, the
    frequency side wins down to ``exp(-ENVELOPE_FLOOR)``.
    """
    s = max(hbar, sigma)
    a, b = hbar / s, sigma / s

    def cutoff(level):
        w = level ** (1.0 / alpha) / a
        if b > 0:
            w = min(w, math.sqrt(2.0 * level) / b)
        return w

    if alpha == 2.0:
        x_target = 40.0
    else:
        # periodization error of the heavy tail decays like x_max^-(1+alpha)
        x_target = 800.0 * 10.0 ** (2.0 * max(0.0, 1.0 - alpha))

    w_hi = cutoff(ENVELOPE)
    M = _pow2(2.0 * x_target * w_hi / np.pi)
    if M <= MAX_GRID:
        return max(M, MIN_GRID), x_target * s
    # shrink the window, but keep at least 20 units when the floor cutoff allows
    w_lo = cutoff(ENVELOPE_FLOOR)
    x_fit = MAX_GRID * np.pi / (2.0 * w_hi)
    if x_fit < 20.0:
        x_fit = min(x_target, max(MAX_GRID * np.pi / (2.0 * w_lo), min(20.0, x_target)))
    return MAX_GRID, x_fit * s


def _pow2(v: float) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(v, 1.0)))))


def pdf_grid(hbar: float, alpha: float, sigma: float = 0.0, max_order: int = 0,
             M: int | None = None, x_max: float | None = None, tol: float = 1e-4) -> PdfGrid:
    """Sample the density of ``hbar*W + sigma*Z`` and its first derivatives.

    Parameters
    ----------
    hbar : float
        Dispersion of the stable component (> 0).
    alpha : float
        Stability exponent in (0, 2].
    sigma : float
        Standard deviation of the Gaussian smoothing (>= 0).
    max_order : int
        Highest derivative order returned (0 to 3).
    M, x_max : optional
        Grid size (power of two) and half-width; defaults from :func:`grid_policy`.
    tol : float
        Allowed deviation of the integrated (absolute) density from one, and
        largest allowed characteristic function at the Nyquist frequency.
        The density at the window edge must also stay below ``EDGE_TOL``
        times the peak; otherwise :class:`NormalizationError` is raised.

    Returns
    -------
    PdfGrid on ``[-x_max, x_max)`` with ``M`` points.
    """
    if not hbar > 0:
        raise ValueError("hbar must be > 0")
    if not 0 <= max_order <= 3:
        raise ValueError("max_order must be in 0..3")
    if M is None or x_max is None:
        M0, x0 = grid_policy(hbar, alpha, sigma)
        M = M0 if M is None else M
        x_max = x0 if x_max is None else x_max
    if M & (M - 1):
        raise ValueError("M must be a power of two")

    dx = 2.0 * x_max / M
    m = sfft.fftfreq(M, d=1.0 / M)           # integer frequency indices
    omega = np.pi * m / x_max
    phi = np.exp(-np.abs(hbar * omega) ** alpha - 0.5 * (sigma * omega) ** 2)
    phi *= np.where(m % 2 == 0, 1.0, -1.0)   # shift of the grid origin to -x_max
    nyq = M // 2
    scale = 1.0 / dx
    values = []
    # two real outputs per complex transform: p_k + j p_{k+1}
    for k in range(0, max_order + 1, 2):
        Fk = (1j * omega) ** k * phi
        spec = Fk.astype(complex)
        if k + 1 <= max_order:
            Fk1 = (1j * omega) ** (k + 1) * phi
            Fk1[nyq] = 0.0
            spec = spec + 1j * Fk1
        out = sfft.ifft(spec) * scale
        values.append(out.real.copy())
        if k + 1 <= max_order:
            values.append(out.imag.copy())

    p0 = values[0]
    mass = float(np.sum(p0) * dx)
    abs_mass = float(np.sum(np.abs(p0)) * dx)
    w_nyq = np.pi * nyq / x_max
    phi_nyq = math.exp(-(hbar * w_nyq) ** alpha - 0.5 * (sigma * w_nyq) ** 2)
    edge = float(abs(p0[0]) / p0.max()) if p0.max() > 0 else math.inf
    where = f"hbar={hbar}, alpha={alpha}, sigma={sigma}, M={M}, x_max={x_max}"
    if not np.isfinite(mass) or abs(mass - 1.0) > tol or abs_mass - 1.0 > tol:
        raise NormalizationError(
            f"density mass {mass:.8f} (absolute {abs_mass:.8f}) off by more than {tol} for {where}")
    if phi_nyq > tol:
        raise NormalizationError(f"grid too coarse: charfun {phi_nyq:.3g} at Nyquist for {where}")
    if edge > EDGE_TOL:
        raise NormalizationError(f"window too narrow: edge density {edge:.3g} of peak for {where}")
    tail = _tail_mass(hbar, alpha, sigma, x_max)
    return PdfGrid(x0=-x_max, dx=dx, M=M, values=tuple(values), smoothing_sigma=sigma,
                   hbar=hbar, alpha=alpha, mass=mass, tail_mass=tail,
                   edge_ratio=edge, nyquist_charfun=phi_nyq)


def _tail_mass(hbar, alpha, sigma, x_max) -> float:
    """Asymptotic estimate of ``P(|hbar W + sigma Z| > x_max)``."""
    if alpha == 2.0:
        sd = math.sqrt(2.0 * hbar ** 2 + sigma ** 2)
        return math.erfc(x_max / (sd * math.sqrt(2.0)))
    return min(1.0, 2.0 * stable_tail_constant(alpha) * (x_max / hbar) ** (-alpha))


# ---------------------------------------------------------------------------
# Fisher information of the noisy marginal and the scalar MMSE

PDF_FLOOR = 1e-300
# FFT round-off sits near 1e-16 of the peak; scores below this level are noise
PDF_REL_FLOOR = 1e-13


def _fisher_from_grid(g: PdfGrid, with_derivative: bool):
    p0, p1 = g[0], g[1]
    ok = p0 > max(PDF_FLOOR, PDF_REL_FLOOR * float(p0.max()))
    score = np.zeros_like(p0)
    score[ok] = p1[ok] / p0[ok]
    J = float(np.sum(p1 * score) * g.dx)
    if not with_derivative:
        return J, None
    h, s2, y = g.hbar, g.smoothing_sigma ** 2, g.x
    p2, p3 = g[2], g[3]
    dp0 = -(p0 + y * p1 + s2 * p2) / h
    dp1 = -(2.0 * p1 + y * p2 + s2 * p3) / h
    dJ = float(np.sum(2.0 * dp1 * score - dp0 * score ** 2) * g.dx)
    return J, dJ


@lru_cache(maxsize=8192)
def _fisher_cached(hkey: float, alpha: float, sigma: float, with_derivative: bool):
    g = pdf_grid(hkey, alpha, sigma, max_order=3 if with_derivative else 1)
    return _fisher_from_grid(g, with_derivative)


def _key(h: float) -> float:
    # 1e-9 relative granularity for the cache
    if h == 0:
        return 0.0
    e = math.floor(math.log10(abs(h)))
    return round(h, 9 - e)


def fisher_info(hbar: float, alpha: float, sigma: float, derivative: bool = False):
    """``J(hbar) = int (p')^2 / p`` for the law of ``hbar*W + sigma*Z``.

    With ``derivative=True`` returns ``(J, dJ/dhbar)``.
    """
    J, dJ = _fisher_cached(_key(float(hbar)), float(alpha), float(sigma), bool(derivative))
    return (J, dJ) if derivative else J


def nu(u: float, alpha: float, sigma: float) -> float:
    """Scalar MMSE of estimating ``u*W`` from ``u*W + sigma*Z``."""
    if u < 0:
        raise ValueError("u must be >= 0")
    if u == 0.0 or sigma == 0.0:
        return 0.0
    val = sigma ** 2 - sigma ** 4 * fisher_info(u, alpha, sigma)
    return min(max(val, 0.0), sigma ** 2)


@dataclass
class NuFunction:
    """Tabulated ``nu`` with monotone cubic interpolation in ``log u``.

    Arguments outside the table range are evaluated directly.
    """
    alpha: float
    sigma: float
    lo: float = 1e-6
    hi: float = 1e6
    nodes: int = 256
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    @property
    def law(self) -> StableLaw:
        return StableLaw(self.alpha, 1.0)

    def table(self):
        u = np.logspace(np.log10(self.lo), np.log10(self.hi), self.nodes)
        v = np.array([nu(x, self.alpha, self.sigma) for x in u])
        # enforce monotonicity against round-off before building the interpolant
        v = np.maximum.accumulate(v)
        return u, v

    def _build(self):
        u, v = self.table()
        self._interp = PchipInterpolator(np.log(u), v, extrapolate=False)

    def __call__(self, u):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        out = np.empty_like(u_arr)
        inside = (u_arr >= self.lo) & (u_arr <= self.hi)
        if inside.any():
            if self._interp is None:
                self._build()
            out[inside] = self._interp(np.log(u_arr[inside]))
        for i in np.flatnonzero(~inside):
            out[i] = nu(u_arr[i], self.alpha, self.sigma)
        return out if np.ndim(u) else float(out[0])

    def direct(self, u):
        return nu(u, self.alpha, self.sigma)
