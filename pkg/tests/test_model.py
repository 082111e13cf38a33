import numpy as np
import pytest
from hypothesis import given, strategies as st

from sasica.model import (ModelParams, ParameterError, bspline_alpha_norm, build_mixing,
                          build_whitening, innovation_dispersion, synthesize, whiten)

params_st = st.builds(
    ModelParams,
    alpha=st.floats(0.1, 2.0),
    kappa=st.floats(0.0, 3.0),
    T=st.floats(0.1, 2.0),
    N=st.integers(1, 40),
    sigma=st.floats(0.0, 2.0),
)


@pytest.mark.parametrize("kw", [
    dict(alpha=0.0), dict(alpha=2.1), dict(kappa=-0.1), dict(T=0.0), dict(N=0), dict(sigma=-1.0),
])
def test_parameter_validation(kw):
    with pytest.raises(ParameterError):
        ModelParams(**kw)


def test_rho_and_from_rho():
    p = ModelParams.from_rho(0.9, N=3)
    assert p.rho == pytest.approx(0.9, abs=1e-15)
    assert ModelParams(kappa=0.0).rho == 1.0
    with pytest.raises(ParameterError):
        ModelParams.from_rho(0.0)


# The mixing matrix is the causal (lower-triangular) form, s = Linv @ w.

def test_mixing_levy():
    np.testing.assert_array_equal(build_mixing(ModelParams(kappa=0.0, T=3.7, N=3)),
                                  [[1, 0, 0], [1, 1, 0], [1, 1, 1]])


def test_mixing_rho09():
    Linv = build_mixing(ModelParams.from_rho(0.9, N=3))
    np.testing.assert_allclose(Linv, [[1, 0, 0], [0.9, 1, 0], [0.81, 0.9, 1]], atol=1e-15)


def test_mixing_det_and_max():
    Linv = build_mixing(ModelParams.from_rho(0.5, N=64))
    assert np.linalg.det(Linv) == pytest.approx(1.0, abs=1e-12)
    assert Linv.max() == 1.0
    assert np.all(np.diag(Linv) == 1.0)
    assert np.all((Linv[Linv != 0] > 0) & (Linv[Linv != 0] <= 1))


@given(params_st)
def test_whitening_inverts_mixing(p):
    prod = build_whitening(p) @ build_mixing(p)
    np.testing.assert_allclose(prod, np.eye(p.N), atol=1e-12)


def test_synthesize_levy_is_cumsum():
    path = synthesize(ModelParams(alpha=1.3, kappa=0.0, N=200), seed=4)
    np.testing.assert_allclose(path.samples, np.cumsum(path.innovations), rtol=1e-12, atol=1e-12)


@given(params_st, st.integers(0, 2 ** 32 - 1))
def test_synthesize_first_sample_and_mixing(p, seed):
    path = synthesize(p, seed)
    assert path.samples[0] == path.innovations[0]
    ref = build_mixing(p) @ path.innovations
    np.testing.assert_allclose(path.samples, ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())


@given(params_st, st.integers(0, 1000))
def test_synthesize_deterministic_and_whiten(p, seed):
    a, b = synthesize(p, seed), synthesize(p, seed)
    np.testing.assert_array_equal(a.samples, b.samples)
    w = whiten(p, a.samples)
    scale = max(np.abs(a.innovations).max(), 1.0)
    np.testing.assert_allclose(w, a.innovations, rtol=1e-12, atol=1e-12 * scale * p.N)


def test_gaussian_increment_variance():
    path = synthesize(ModelParams(alpha=2.0, kappa=0.0, N=100_000), seed=7)
    var = np.var(np.diff(path.samples))
    assert var == pytest.approx(2.0, rel=0.05)


def test_bspline_normalization():
    p = ModelParams(alpha=1.0, kappa=0.0, T=2.0)
    assert innovation_dispersion(p, "bspline") == pytest.approx(2.0)
    assert innovation_dispersion(p) == 1.0
    # small-kappa continuity
    assert bspline_alpha_norm(1e-9, 2.0, 1.5) == pytest.approx(2.0 ** (1 / 1.5), rel=1e-6)
    with pytest.raises(ParameterError):
        innovation_dispersion(p, "other")
