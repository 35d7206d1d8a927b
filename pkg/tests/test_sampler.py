import numpy as np
import pytest

from binghamkit import BinghamParams, InvalidParameter, delta_q_stats, sample
from binghamkit.normalizer import normalizing_constant
from binghamkit.quaternion import omega_l
from binghamkit.sampler import (
    _envelope_concentration,
    canonicalize_hemisphere,
    moment_check,
)


def _params(lam, seed=0):
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(4)
    return BinghamParams(omega_l(q / np.linalg.norm(q)), np.asarray(lam, dtype=float))


def test_envelope_concentration_uniform():
    assert _envelope_concentration(np.zeros(4)) == pytest.approx(4.0)


def test_envelope_concentration_solves_equation():
    lam = np.array([0.0, -5.0, -20.0, -40.0])
    b = _envelope_concentration(lam)
    assert 0.0 < b <= 4.0
    assert np.sum(1.0 / (b - 2.0 * lam)) == pytest.approx(1.0, abs=1e-10)


def test_sample_deterministic_and_unit():
    p = _params([0.0, -5.0, -20.0, -40.0])
    a = sample(p, 500, seed=3)
    b = sample(p, 500, seed=3)
    np.testing.assert_array_equal(a.quaternions, b.quaternions)
    assert a.seed == 3
    norms = np.linalg.norm(a.quaternions, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-12)
    assert sample(p, 500, seed=4).quaternions[0] is not a.quaternions[0]


def test_sample_hemisphere_canonical():
    p = _params([0.0, -1.0, -2.0, -3.0])
    batch = sample(p, 2000, seed=0)
    w = batch.quaternions[:, 0]
    assert np.all(w >= 0.0)


def test_acceptance_rate_reasonable():
    p = _params([0.0, -30.0, -60.0, -100.0])
    batch = sample(p, 1000, seed=0)
    assert 0.1 <= batch.acceptance_rate <= 1.0


def test_sample_rejects_bad_count():
    p = _params([0.0, -1.0, -2.0, -3.0])
    with pytest.raises(InvalidParameter):
        sample(p, 0)


def test_canonicalize_hemisphere_shapes():
    q = np.array([-0.5, 0.5, 0.5, -0.5])
    out = canonicalize_hemisphere(q)
    assert out.shape == (4,)
    np.testing.assert_allclose(out, -q)
    many = canonicalize_hemisphere(np.stack([q, -q]))
    np.testing.assert_allclose(many[0], many[1])
    # w == 0 tie broken by the first nonzero component
    tie = canonicalize_hemisphere(np.array([0.0, -1.0, 0.0, 0.0]))
    np.testing.assert_allclose(tie, [0.0, 1.0, 0.0, 0.0])


def test_moment_identity():
    p = _params([0.0, -5.0, -20.0, -40.0])
    empirical, expected, se = moment_check(p, n=30_000, seed=1)
    assert np.sum(expected) == pytest.approx(1.0, rel=1e-6)
    assert np.all(np.abs(empirical - expected) <= 5.0 * se)


def test_delta_q_stats_uniform_mean():
    p = BinghamParams(np.eye(4), np.zeros(4))
    mean, hist = delta_q_stats(p, [1.0, 0.0, 0.0, 0.0], 30_000, seed=2)
    # angular discrepancy of a uniform rotation has mean pi/2 + 2/pi
    assert mean == pytest.approx(np.pi / 2.0 + 2.0 / np.pi, abs=0.02)
    assert sum(hist["counts"]) == 30_000
    assert len(hist["bin_edges"]) == len(hist["counts"]) + 1
    assert hist["bin_edges"][0] == 0.0
    assert hist["bin_edges"][-1] == pytest.approx(np.pi)


def test_concentrated_samples_hug_the_mode():
    p = _params([0.0, -200.0, -200.0, -200.0])
    mean, _ = delta_q_stats(p, p.D[:, 0], 5000, seed=3)
    assert mean < 0.3


def test_sampler_agrees_with_normalizer_ratios():
    # sharper eigenvalue -> smaller second moment in that direction
    p = _params([0.0, -2.0, -10.0, -50.0])
    empirical, expected, _ = moment_check(p, n=20_000, seed=4)
    assert np.all(np.diff(expected) < 0.0)
    assert np.all(np.diff(empirical) < 0.0)
    out = normalizing_constant(p.lam)
    np.testing.assert_allclose(expected, out.dC_dlambda / out.C)
