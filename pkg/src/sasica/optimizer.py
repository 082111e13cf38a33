"""Projected gradient descent over orthogonal matrices with adaptive step."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import criteria
from .model import ModelParams, build_mixing
from .transforms import (OrthMatrix, dct_matrix, haar_matrix, identity, opwav_matrix,
                         orthonormality_residual, random_orthogonal, _is_pow2)

log = logging.getLogger(__name__)


class RankDeficient(np.linalg.LinAlgError):
    pass


def project_unitary(A, tol: float = 1e-12) -> OrthMatrix:
    """Nearest orthogonal matrix in Frobenius norm, ``U V^T`` from ``A = U S V^T``."""
    A = np.asarray(getattr(A, "entries", A), dtype=float)
    U, s, Vt = np.linalg.svd(A)
    if s.min() < tol:
        raise RankDeficient(f"smallest singular value {s.min():.3e} below {tol}")
    return OrthMatrix(U @ Vt, "projected")


@dataclass(frozen=True)
class OptimizerOptions:
    mu0: float = 0.1
    a: float = 1.1
    b: float = 0.5
    max_iters: int = 100_000
    tol: float = 1e-10
    init: str = "auto"
    seed: int = 0
    window: int = 50
    min_step: float = 1e-14
    # smoothing warm-up: None = automatic (on for alpha <= 1), 0 = off
    smooth_eps0: float | None = None
    smooth_factor: float = 4.0
    smooth_min: float = 1e-7
    # warm-up stages only need a good starting point for the exact stage
    smooth_tol: float = 1e-8

    def __post_init__(self):
        if not self.mu0 > 0:
            raise ValueError("mu0 must be > 0")
        if not self.a >= 1:
            raise ValueError("growth factor a must be >= 1")
        if not 0 <= self.b <= 1:
            raise ValueError("shrink factor b must lie in [0, 1]")
        if self.smooth_factor <= 1:
            raise ValueError("smooth_factor must be > 1")

    def replace(self, **kw) -> "OptimizerOptions":
        return OptimizerOptions(**{**self.__dict__, **kw})


@dataclass
class OptResult:
    H_opt: OrthMatrix
    value: float
    trace: list = field(default_factory=list)   # (value, mu, accepted) of the exact stage
    iterations: int = 0
    status: str = ""
    singular_steps: int = 0
    warmup: list = field(default_factory=list)  # (eps, value, iterations, status)

    def trace_to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iter,value,mu,accepted\n")
            for i, (v, mu, acc) in enumerate(self.trace):
                fh.write(f"{i},{v:.17g},{mu:.17g},{int(acc)}\n")


def initial_matrix(params: ModelParams, init: str, seed: int = 0) -> OrthMatrix:
    init = init.lower()
    if init == "auto":
        init = "dct" if params.alpha >= 1.5 or not _is_pow2(params.N) else "opwav"
    if init == "identity":
        return identity(params.N)
    if init == "dct":
        return dct_matrix(params.N)
    if init in ("haar", "hwt"):
        return haar_matrix(params.N)
    if init in ("opwav", "opwt"):
        return opwav_matrix(params)
    if init in ("random", "randomorthogonal"):
        return random_orthogonal(params.N, seed)
    raise ValueError(f"unknown init {init!r}")


def _smoothing_schedule(params, opts):
    eps0 = opts.smooth_eps0
    if eps0 is None:
        if params.alpha > 1.0:
            return []
        eps0 = 1.0 if opts.init.lower().startswith("random") else 1e-3
    out = []
    eps = float(eps0)
    while eps > opts.smooth_min:
        out.append(eps)
        eps /= opts.smooth_factor
    return out


def descend(objective, H, opts: OptimizerOptions):
    """Adaptive-step projected gradient descent on one objective.

    ``objective(H, grad)`` returns a :class:`~sasica.criteria.CriterionReport`.
    Returns ``(H, value, trace, iterations, status, singular_steps)``.
    """
    rep = objective(H, True)
    value, G = rep.value, rep.gradient
    singular = int(rep.singular)
    mu = opts.mu0
    trace = [(value, mu, True)]
    accepted = [value]
    status = "max_iters"
    it = 0
    for it in range(1, opts.max_iters + 1):
        try:
            H_new = project_unitary(H - mu * G).entries
        except RankDeficient:
            mu *= opts.b
            trace.append((value, mu, False))
            continue
        new_value = objective(H_new, False).value
        if new_value < value:
            H, value = H_new, new_value
            rep = objective(H, True)
            G = rep.gradient
            singular += int(rep.singular)
            mu *= opts.a
            trace.append((value, mu, True))
            accepted.append(value)
            if len(accepted) > opts.window and accepted[-opts.window - 1] - value < opts.tol:
                status = "converged"
                break
        else:
            mu *= opts.b
            trace.append((new_value, mu, False))
        if mu < opts.min_step:
            status = "step_underflow"
            break
    return H, value, trace, it, status, singular


def optimize(params: ModelParams, criterion_kind: str = "R",
             opts: OptimizerOptions = OptimizerOptions(), H0=None) -> OptResult:
    """Minimize ``R`` or ``MSE`` over orthogonal ``H``.

    Each iteration takes ``H - mu * grad``, projects it back onto the
    orthogonal group, and keeps it only if the criterion drops; the step
    grows by ``a`` on success and shrinks by ``b`` on failure. Stops when the
    step falls below ``min_step``, after ``max_iters`` iterations, or once the
    total decrease over the last ``window`` accepted steps is below ``tol``.

    For ``alpha <= 1`` the criterion has kinks wherever an entry of
    ``H @ Linv`` vanishes. Unless disabled, the same loop is first run on the
    surrogate with ``|a|`` replaced by ``sqrt(a^2 + eps^2)`` for a decreasing
    sequence of ``eps``; the final stage always uses the exact criterion.
    """
    Linv = build_mixing(params)
    kind = criterion_kind.upper()
    if H0 is None:
        H = initial_matrix(params, opts.init, opts.seed).entries
    else:
        H = np.asarray(getattr(H0, "entries", H0), dtype=float)
    H = np.array(H, dtype=float)

    warmup = []
    for eps in _smoothing_schedule(params, opts):
        obj = lambda M, g, e=eps: criteria.evaluate(kind, M, Linv, params.alpha, params.sigma,
                                                     gradient=g, eps=e)
        H, v, _, its, st, _ = descend(obj, H, opts.replace(tol=max(opts.tol, opts.smooth_tol)))
        warmup.append((eps, v, its, st))
        log.debug("warm-up eps=%.3g: %.12g (%s, %d its)", eps, v, st, its)

    obj = lambda M, g: criteria.evaluate(kind, M, Linv, params.alpha, params.sigma, gradient=g)
    H, value, trace, it, status, singular = descend(obj, H, opts)
    log.info("optimize %s: %s after %d iterations, value %.12g", kind, status, it, value)
    return OptResult(OrthMatrix(H, f"ica({kind})"), value, trace, it, status, singular, warmup)


def multistart(params: ModelParams, criterion_kind: str = "R",
               opts: OptimizerOptions = OptimizerOptions(init="random"),
               seeds=range(5)) -> tuple[OptResult, list[OptResult]]:
    """Run :func:`optimize` from several random starts and keep the best."""
    runs = []
    for s in seeds:
        runs.append(optimize(params, criterion_kind, opts.replace(init="random", seed=int(s))))
    best = min(runs, key=lambda r: r.value)
    return best, runs


def match_basis(H, Href):
    """Align rows of ``H`` to ``Href`` by greedy max ``|<h_i, r_j>|`` assignment.

    Returns ``(distance, perm, signs)`` where row ``perm[j]`` of ``H`` times
    ``signs[j]`` is matched to row ``j`` of ``Href`` and ``distance`` is the
    Frobenius norm of the aligned difference.
    """
    H = np.asarray(getattr(H, "entries", H), dtype=float)
    R = np.asarray(getattr(Href, "entries", Href), dtype=float)
    if H.shape != R.shape:
        raise ValueError("shape mismatch")
    N = H.shape[0]
    C = R @ H.T                     # C[j, i] = <r_j, h_i>
    order = np.argsort(-np.abs(C), axis=None)
    perm = -np.ones(N, dtype=int)
    used_h = np.zeros(N, dtype=bool)
    for flat in order:
        j, i = divmod(int(flat), N)
        if perm[j] < 0 and not used_h[i]:
            perm[j] = i
            used_h[i] = True
            if used_h.all():
                break
    signs = np.sign(C[np.arange(N), perm])
    signs[signs == 0] = 1.0
    aligned = signs[:, None] * H[perm]
    return float(np.linalg.norm(aligned - R)), perm, signs
