import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sasica.criteria import redundancy_R
from sasica.model import ModelParams, build_mixing
from sasica.optimizer import (OptimizerOptions, RankDeficient, initial_matrix, match_basis,
                              multistart, optimize, project_unitary)
from sasica.transforms import haar_matrix, orthonormality_residual, random_orthogonal


def test_projection_examples():
    Q = random_orthogonal(5, 1).entries
    np.testing.assert_allclose(project_unitary(Q).entries, Q, atol=1e-12)
    np.testing.assert_allclose(project_unitary(np.diag([2.0, 3.0])).entries, np.eye(2), atol=1e-15)
    np.testing.assert_allclose(project_unitary([[0.0, 2.0], [1.0, 0.0]]).entries,
                               [[0, 1], [1, 0]], atol=1e-15)
    with pytest.raises(RankDeficient):
        project_unitary(np.array([[1.0, 1.0], [1.0, 1.0]]))


@given(st.integers(0, 10_000), st.integers(2, 10))
def test_projection_idempotent(seed, N):
    A = np.random.default_rng(seed).standard_normal((N, N)) + 0.1 * np.eye(N)
    try:
        P = project_unitary(A).entries
    except RankDeficient:
        return
    assert orthonormality_residual(P) < 1e-12
    np.testing.assert_allclose(project_unitary(P).entries, P, atol=1e-12)


@given(st.integers(0, 10_000))
def test_projection_beats_grid(seed):
    A = np.random.default_rng(seed).standard_normal((2, 2))
    P = project_unitary(A).entries
    best = np.inf
    for t in np.linspace(0, 2 * np.pi, 5000, endpoint=False):
        c, s = math.cos(t), math.sin(t)
        for Q in ([[c, -s], [s, c]], [[c, s], [s, -c]]):
            best = min(best, np.linalg.norm(A - np.array(Q)))
    assert np.linalg.norm(A - P) <= best + 1e-12


def test_options_validation():
    for kw in (dict(a=0.9), dict(b=1.5), dict(b=-0.1), dict(mu0=0.0), dict(smooth_factor=1.0)):
        with pytest.raises(ValueError):
            OptimizerOptions(**kw)


def test_initial_matrix():
    p = ModelParams(alpha=1.0, N=8)
    assert initial_matrix(p, "auto").label.startswith("opwav")
    assert initial_matrix(p.with_(alpha=1.8), "auto").label == "dct"
    assert initial_matrix(p.with_(N=6), "auto").label == "dct"
    with pytest.raises(ValueError):
        initial_matrix(p, "fourier")


def test_gaussian_reaches_decoupling():
    res = optimize(ModelParams.from_rho(0.9, alpha=2.0, N=8), "R")
    assert res.value <= 1e-6
    assert orthonormality_residual(res.H_opt.entries) < 1e-8


def test_two_point_levy_is_haar():
    res = optimize(ModelParams(alpha=1.0, N=2), "R", OptimizerOptions(init="random", seed=3))
    assert res.value == pytest.approx(0.5 * math.log(1.5), abs=1e-4)
    d, _, _ = match_basis(res.H_opt, haar_matrix(2))
    assert d < 1e-3


def test_two_point_grid_oracle():
    Linv = build_mixing(ModelParams(N=2))
    theta = np.linspace(0, np.pi, 20001)
    vals = [redundancy_R(np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]]),
                         Linv, 1.0).value for t in theta]
    assert min(vals) == pytest.approx(0.5 * math.log(1.5), abs=1e-6)
    assert theta[int(np.argmin(vals))] == pytest.approx(math.pi / 4, abs=1e-3)


@pytest.mark.parametrize("alpha,kind,init", [(1.0, "R", "random"), (1.5, "R", "dct"),
                                             (1.5, "MSE", "dct"), (0.7, "R", "haar")])
def test_trace_monotone_and_orthonormal(alpha, kind, init):
    opts = OptimizerOptions(init=init, seed=2, max_iters=300)
    res = optimize(ModelParams.from_rho(0.9, alpha=alpha, N=4), kind, opts)
    acc = [v for v, _, ok in res.trace if ok]
    assert all(b < a for a, b in zip(acc, acc[1:]))
    assert orthonormality_residual(res.H_opt.entries) < 1e-8
    assert res.status in ("converged", "step_underflow", "max_iters")
    assert res.value == acc[-1]


def test_warmup_only_below_one():
    p = ModelParams(alpha=1.5, N=4)
    assert optimize(p, "R", OptimizerOptions(max_iters=50)).warmup == []
    res = optimize(p.with_(alpha=0.8), "R", OptimizerOptions(max_iters=50, init="random"))
    eps = [w[0] for w in res.warmup]
    assert eps[0] == 1.0 and all(b < a for a, b in zip(eps, eps[1:]))
    res = optimize(p.with_(alpha=0.8), "R", OptimizerOptions(max_iters=50, smooth_eps0=0.0))
    assert res.warmup == []


def test_never_worse_than_start():
    p = ModelParams(alpha=1.0, N=8)
    Linv = build_mixing(p)
    start = redundancy_R(haar_matrix(8), Linv, 1.0).value
    res = optimize(p, "R", OptimizerOptions(init="haar", max_iters=2000))
    assert res.value <= start


@pytest.mark.slow
def test_multistart_levy16_not_worse_than_haar():
    p = ModelParams(alpha=1.0, N=16)
    best, runs = multistart(p, "R", seeds=range(3))
    assert len(runs) == 3 and best.value == min(r.value for r in runs)
    r_haar = redundancy_R(haar_matrix(16), build_mixing(p), 1.0).value
    assert best.value <= r_haar + 1e-3


def test_match_basis():
    H = haar_matrix(8).entries
    assert match_basis(H, H)[0] == 0.0
    rng = np.random.default_rng(0)
    P = (rng.choice([-1.0, 1.0], 8)[:, None] * H)[rng.permutation(8)]
    d, perm, signs = match_basis(P, H)
    assert d < 1e-14
    np.testing.assert_allclose(signs[:, None] * P[perm], H)
    ds = [match_basis(random_orthogonal(8, s), H)[0] for s in range(20)]
    assert np.median(ds) > 0.5
    with pytest.raises(ValueError):
        match_basis(np.eye(2), np.eye(3))


def test_trace_csv(tmp_path):
    res = optimize(ModelParams(alpha=2.0, N=3, kappa=0.1), "R", OptimizerOptions(max_iters=20))
    res.trace_to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iter,value,mu,accepted"
    assert len(lines) == len(res.trace) + 1
