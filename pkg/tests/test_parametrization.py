import numpy as np
import pytest

from binghamkit import InvalidParameter
from binghamkit.parametrization import (
    TAG_DIMS,
    TAGS,
    ParamVector,
    birdal,
    cayley,
    cayley_inverse,
    lambda3,
    lambda4,
    param_jacobian,
    realize,
    skew,
    softplus,
    triu,
    triu_inverse,
)


def test_tag_dims():
    assert TAG_DIMS == {"P10": 10, "P4+3": 7, "P4+4": 8, "P6+3": 9, "P6+4": 10}


def test_param_vector_validates_dim():
    with pytest.raises(InvalidParameter):
        ParamVector("P10", np.zeros(9))
    with pytest.raises(InvalidParameter):
        ParamVector("nope", np.zeros(10))


def test_softplus():
    x = np.array([-3.0, 0.0, 2.0])
    np.testing.assert_allclose(softplus(x), np.log1p(np.exp(x)))
    assert np.all(softplus(x) > 0.0)
    # overflow-safe: large arguments approach identity
    assert softplus(800.0) == pytest.approx(800.0)
    assert np.isfinite(softplus(-800.0))


def test_triu_round_trip():
    rng = np.random.default_rng(0)
    theta = rng.standard_normal(10)
    A = triu_inverse(theta)
    np.testing.assert_allclose(A, A.T)
    np.testing.assert_allclose(triu(A), theta)


def test_skew_antisymmetric():
    rng = np.random.default_rng(1)
    S = skew(rng.standard_normal(6))
    np.testing.assert_allclose(S, -S.T)


def test_cayley_is_special_orthogonal():
    rng = np.random.default_rng(2)
    D = cayley(rng.standard_normal(6))
    np.testing.assert_allclose(D.T @ D, np.eye(4), atol=1e-12)
    assert np.linalg.det(D) == pytest.approx(1.0)


def test_cayley_round_trip():
    rng = np.random.default_rng(3)
    theta = rng.standard_normal(6)
    np.testing.assert_allclose(cayley_inverse(cayley(theta)), theta, atol=1e-10)


def test_birdal_orthogonal_and_scale_invariant():
    rng = np.random.default_rng(4)
    theta = rng.standard_normal(4)
    D = birdal(theta)
    np.testing.assert_allclose(D.T @ D, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(birdal(2.5 * theta), D, atol=1e-12)


def test_lambda4_canonical():
    lam = lambda4(np.array([-7.0, 1.0, -2.0, 4.0]))
    assert lam[0] == 0.0
    assert np.all(np.diff(lam) <= 0.0)
    np.testing.assert_allclose(lam, [0.0, -3.0, -6.0, -11.0])


def test_lambda3_canonical_and_monotone():
    lam = lambda3(np.array([0.5, -1.0, 2.0]))
    assert lam[0] == 0.0
    assert np.all(np.diff(lam) < 0.0)
    # entries are cumulative sums of softplus magnitudes
    gaps = -np.diff(lam)
    np.testing.assert_allclose(gaps, softplus(np.array([0.5, -1.0, 2.0])))


@pytest.mark.parametrize("tag", TAGS)
def test_realize_produces_canonical_params(tag):
    rng = np.random.default_rng(5)
    for _ in range(5):
        p = realize(ParamVector(tag, rng.standard_normal(TAG_DIMS[tag])))
        np.testing.assert_allclose(p.D.T @ p.D, np.eye(4), atol=1e-9)
        assert p.lam[0] == pytest.approx(0.0, abs=1e-12)
        assert np.all(np.diff(p.lam) <= 1e-12)


def test_realize_p10_reproduces_matrix():
    rng = np.random.default_rng(6)
    theta = rng.standard_normal(10)
    p = realize(ParamVector("P10", theta))
    A_raw = triu_inverse(theta)
    # realization only shifts the spectrum, so A differs by a multiple of I
    shift = np.trace(A_raw - p.A) / 4.0
    np.testing.assert_allclose(p.A + shift * np.eye(4), A_raw, atol=1e-10)


@pytest.mark.parametrize("tag", [t for t in TAGS if t != "P10"])
def test_param_jacobian_matches_finite_differences(tag):
    rng = np.random.default_rng(7)
    theta = rng.standard_normal(TAG_DIMS[tag])
    pv = ParamVector(tag, theta)
    jac = param_jacobian(pv)
    step = 1e-6
    n_d = jac.dD.shape[2]
    for j in range(TAG_DIMS[tag]):
        tp, tm = theta.copy(), theta.copy()
        tp[j] += step
        tm[j] -= step
        pp, pm = realize(ParamVector(tag, tp)), realize(ParamVector(tag, tm))
        if j < n_d:
            fd = (pp.D - pm.D) / (2.0 * step)
            np.testing.assert_allclose(jac.dD[:, :, j], fd, atol=1e-6)
        else:
            fd = (pp.lam - pm.lam) / (2.0 * step)
            np.testing.assert_allclose(jac.dlam[:, j - n_d], fd, atol=1e-6)
