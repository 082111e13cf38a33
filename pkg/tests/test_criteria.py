import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sasica.criteria import (CriterionReport, GradientSingularity, evaluate, grad_MSE, grad_R,
                             mse_criterion, redundancy_R, row_alpha_norms)
from sasica.model import ModelParams, build_mixing
from sasica.optimizer import optimize, OptimizerOptions
from sasica.transforms import dct_matrix, haar_matrix, identity, klt_matrix, random_orthogonal

LEVY2 = build_mixing(ModelParams(kappa=0.0, N=2))


def fd_gradient(f, H, step):
    G = np.zeros_like(H)
    for i in range(H.shape[0]):
        for j in range(H.shape[1]):
            E = np.zeros_like(H)
            E[i, j] = step
            G[i, j] = (f(H + E) - f(H - E)) / (2 * step)
    return G


def rel_err(G, ref):
    return np.linalg.norm(G - ref) / np.linalg.norm(ref)


# The mixing matrix is lower-triangular, so H = I gives rows [1, 0] and [1, 1].

def test_row_norms_examples():
    np.testing.assert_allclose(row_alpha_norms(identity(2), LEVY2, 1.0), [1.0, 2.0])
    np.testing.assert_allclose(row_alpha_norms(identity(2), LEVY2, 2.0), [1.0, math.sqrt(2)])
    hb = row_alpha_norms(haar_matrix(2), LEVY2, 1.0)
    np.testing.assert_allclose(sorted(hb), [1 / math.sqrt(2), 3 / math.sqrt(2)])


def test_redundancy_examples():
    assert redundancy_R(identity(2), LEVY2, 1.0).value == pytest.approx(0.5 * math.log(2))
    assert redundancy_R(haar_matrix(2), LEVY2, 1.0).value == pytest.approx(0.5 * math.log(1.5))


@pytest.mark.parametrize("rho", [0.9, 0.5, 1.0])
def test_klt_decouples_gaussian(rho):
    p = ModelParams.from_rho(rho, N=32, alpha=2.0)
    assert abs(redundancy_R(klt_matrix(p), build_mixing(p), 2.0).value) < 1e-10


def test_grad_R_hand_value():
    G = grad_R(np.eye(2), LEVY2, 2.0)
    # entry for the row of H Linv equal to [1, 1] (second row with the lower mixing)
    assert G[1, 1] == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("alpha", [2.0, 1.5, 1.2])
@pytest.mark.parametrize("rho", [1.0, 0.9])
def test_grad_R_finite_difference(alpha, rho):
    p = ModelParams.from_rho(rho, N=8)
    Linv = build_mixing(p)
    H = random_orthogonal(8, 3).entries
    G = grad_R(H, Linv, alpha)
    ref = fd_gradient(lambda M: redundancy_R(M, Linv, alpha).value, H, 1e-6)
    assert rel_err(G, ref) < 1e-5


def test_grad_R_singularity_flag():
    Linv = build_mixing(ModelParams(kappa=0.0, N=4))
    with pytest.warns(GradientSingularity):
        grad_R(haar_matrix(4), Linv, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        grad_R(random_orthogonal(4, 0), Linv, 0.5)


@pytest.mark.parametrize("alpha,N,rho", [(2.0, 4, 1.0), (1.5, 8, 0.9)])
def test_grad_MSE_finite_difference(alpha, N, rho):
    p = ModelParams.from_rho(rho, N=N)
    Linv = build_mixing(p)
    H = random_orthogonal(N, 11).entries
    G = grad_MSE(H, Linv, alpha, 1.0)
    ref = fd_gradient(lambda M: mse_criterion(M, Linv, alpha, 1.0).value, H, 1e-5)
    assert rel_err(G, ref) < 1e-3


def test_grad_MSE_descent_direction():
    p = ModelParams.from_rho(0.9, N=8, alpha=1.5)
    Linv = build_mixing(p)
    H = random_orthogonal(8, 5).entries
    G = grad_MSE(H, Linv, 1.5, 1.0)
    before = mse_criterion(H, Linv, 1.5, 1.0).value
    after = mse_criterion(H - 1e-4 * G / np.linalg.norm(G), Linv, 1.5, 1.0).value
    assert after < before


@pytest.mark.slow
def test_grad_MSE_vanishes_at_optimum():
    p = ModelParams.from_rho(0.9, N=4, alpha=2.0)
    res = optimize(p, "MSE", OptimizerOptions(init="random", seed=1, tol=1e-14))
    G = grad_MSE(res.H_opt, build_mixing(p), 2.0, 1.0)
    # the Euclidean gradient at a constrained optimum is normal to the orthogonal group:
    # its skew (tangent) part H^T G - G^T H vanishes
    H = res.H_opt.entries
    tangent = H.T @ G - G.T @ H
    assert np.max(np.abs(tangent)) < 1e-4


def test_mse_examples():
    one = np.ones((1, 1))
    assert mse_criterion(one, one, 2.0, 1.0).value == pytest.approx(2 / 3, abs=1e-6)
    Linv = build_mixing(ModelParams(kappa=0.0, N=64))
    assert mse_criterion(haar_matrix(64), Linv, 1.0, 1.0).value < \
        mse_criterion(identity(64), Linv, 1.0, 1.0).value
    small = [mse_criterion(haar_matrix(8), build_mixing(ModelParams(N=8)), 1.0, s).value
             for s in (1e-1, 1e-2, 1e-3)]
    assert small[0] > small[1] > small[2] and small[2] < 1e-5
    with pytest.raises(ValueError):
        mse_criterion(one, one, 1.0, 0.0)


orth = st.builds(lambda n, s: random_orthogonal(n, s).entries, st.integers(2, 12), st.integers(0, 999))


@given(orth, st.sampled_from([0.5, 1.0, 1.5, 2.0]), st.integers(0, 999))
def test_permutation_sign_invariance(H, alpha, seed):
    N = H.shape[0]
    rng = np.random.default_rng(seed)
    Linv = build_mixing(ModelParams.from_rho(0.8, N=N))
    Hp = (rng.choice([-1.0, 1.0], N)[:, None] * H)[rng.permutation(N)]
    assert redundancy_R(Hp, Linv, alpha).value == pytest.approx(
        redundancy_R(H, Linv, alpha).value, abs=1e-12)


@given(orth, st.floats(0.1, 10.0))
def test_global_scale_shifts_R(H, t):
    Linv = build_mixing(ModelParams(N=H.shape[0]))
    a = redundancy_R(H, Linv, 1.3).value
    b = redundancy_R(H, t * Linv, 1.3).value
    assert b - a == pytest.approx(math.log(t), abs=1e-12)


def test_global_scale_keeps_argmin():
    theta = np.linspace(0, np.pi, 2001)
    rot = lambda t: np.array([[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]])
    for t in (0.3, 1.0, 7.0):
        vals = [redundancy_R(rot(x), t * LEVY2, 1.0).value for x in theta]
        assert theta[int(np.argmin(vals))] == pytest.approx(np.pi / 4, abs=2e-3)


@given(orth)
def test_gaussian_energy_conservation(H):
    Linv = build_mixing(ModelParams.from_rho(0.7, N=H.shape[0]))
    hb = row_alpha_norms(H, Linv, 2.0)
    assert np.sum(hb ** 2) == pytest.approx(np.sum(Linv ** 2), rel=1e-10)


@given(st.builds(lambda s: random_orthogonal(6, s).entries, st.integers(0, 999)),
       st.sampled_from([0.7, 1.0, 1.6, 2.0]), st.floats(0.2, 2.0))
@settings(max_examples=10)
def test_mse_bounds(H, alpha, sigma):
    rep = mse_criterion(H, build_mixing(ModelParams(N=6)), alpha, sigma)
    assert 0.0 <= rep.value <= sigma ** 2
    assert np.all(rep.hbars > 0)


def test_smoothed_criterion_converges():
    Linv = build_mixing(ModelParams(N=8))
    H = haar_matrix(8)
    exact = redundancy_R(H, Linv, 1.0).value
    for eps in (1e-3, 1e-6):
        assert redundancy_R(H, Linv, 1.0, eps=eps).value == pytest.approx(exact, abs=10 * eps)
    Hr = random_orthogonal(8, 2).entries
    G = redundancy_R(Hr, Linv, 0.7, gradient=True, eps=1e-2).gradient
    ref = fd_gradient(lambda M: redundancy_R(M, Linv, 0.7, eps=1e-2).value, Hr, 1e-6)
    assert rel_err(G, ref) < 1e-5


def test_report_csv_and_dispatch(tmp_path):
    Linv = build_mixing(ModelParams(N=4))
    rep = evaluate("r", dct_matrix(4), Linv, 1.0)
    assert isinstance(rep, CriterionReport) and rep.criterion_kind == "R"
    rep.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "n,hbar" and len(lines) == 6 and lines[-1].startswith("# R,")
    with pytest.raises(ValueError):
        evaluate("kl", dct_matrix(4), Linv, 1.0)
