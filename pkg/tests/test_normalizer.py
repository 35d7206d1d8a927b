import numpy as np
import pytest

from binghamkit import InvalidParameter, NumericalWarning
from binghamkit.normalizer import (
    QuadratureConfig,
    _normalizing_constant_unchecked,
    convergence_check,
    derive_constants,
    integrand,
    integrand_dlambda,
    normalizing_constant,
    weight,
)

# brute-force reference values, frozen after the grid sequence
# self-converged below 1e-9 relative
ORACLE_C = {
    (0.0, -1.0, -2.0, -3.0): 5.401137809617323,
    (0.0, -5.0, -20.0, -40.0): 0.19293833481320985,
    (0.0, -0.5, -1.0, -1.5): 9.819901995617403,
}


def test_config_validation():
    with pytest.raises(InvalidParameter):
        QuadratureConfig(r=1.5)
    with pytest.raises(InvalidParameter):
        QuadratureConfig(omega_d=0.2)  # below 1/r
    with pytest.raises(InvalidParameter):
        QuadratureConfig(n=5)  # below n_min
    with pytest.raises(InvalidParameter):
        QuadratureConfig(d_frac=1.5)


def test_config_dict_round_trip():
    cfg = QuadratureConfig(n=400)
    assert QuadratureConfig.from_dict(cfg.to_dict()) == cfg


def test_derived_constants_defaults():
    c, d, h, p1, p2 = derive_constants(QuadratureConfig())
    assert c == pytest.approx(15.0 * np.pi / 10.9375)
    assert d == pytest.approx(c / 2.0)
    assert h == pytest.approx(0.6882884651454572)
    assert p1 == pytest.approx(16.59263047434562)
    assert p2 == pytest.approx(4.148157618586405)


def test_h_scales_inverse_sqrt_n():
    _, _, h1, _, _ = derive_constants(QuadratureConfig(n=200))
    _, _, h2, _, _ = derive_constants(QuadratureConfig(n=400))
    assert h1 / h2 == pytest.approx(np.sqrt(2.0))


def test_weight_values():
    _, _, _, p1, p2 = derive_constants(QuadratureConfig())
    assert weight(p1 * p2, p1, p2) == pytest.approx(0.5)
    assert 0.5 < weight(0.0, p1, p2) < 1.0
    assert weight(1e6, p1, p2) == pytest.approx(0.0, abs=1e-12)
    assert weight(-1e6, p1, p2) == pytest.approx(1.0)
    x = np.linspace(-10.0, 10.0, 50)
    assert np.all(np.diff(weight(x, p1, p2)) < 0.0)


def test_integrand_values():
    lam = np.zeros(4)
    assert integrand(0.0, lam, 4.0) == pytest.approx(0.0625)
    t = 1.7
    assert integrand(-t, lam, 4.0) == pytest.approx(np.conj(integrand(t, lam, 4.0)))
    mags = np.abs(integrand(np.array([0.0, 1.0, 2.0, 5.0]), lam, 4.0))
    assert np.all(np.diff(mags) < 0.0)


def test_integrand_dlambda_values():
    lam = np.zeros(4)
    assert integrand_dlambda(0.0, lam, 4.0, 2) == pytest.approx(0.0078125)
    # central finite difference in lambda_i
    step = 1e-6
    for i in range(4):
        lp, lm = lam.copy(), lam.copy()
        lp[i] += step
        lm[i] -= step
        fd = (integrand(0.9, lp, 4.0) - integrand(0.9, lm, 4.0)) / (2.0 * step)
        assert integrand_dlambda(0.9, lam, 4.0, i) == pytest.approx(fd, abs=1e-8)


def test_integrand_domain_error():
    with pytest.raises(InvalidParameter):
        integrand(0.0, np.array([0.0, 0.0, 0.0, 5.0]), 4.0)


def test_uniform_constant():
    out = normalizing_constant(np.zeros(4))
    assert out.C == pytest.approx(2.0 * np.pi**2, rel=1e-8)
    assert out.imag_residual / out.C < 1e-8


def test_against_oracle_values():
    for lam, ref in ORACLE_C.items():
        out = normalizing_constant(np.array(lam))
        assert out.C == pytest.approx(ref, rel=1e-6)


def test_gradient_positive_and_sums_to_constant():
    rng = np.random.default_rng(0)
    for _ in range(10):
        lam = np.concatenate([[0.0], np.sort(rng.uniform(-50.0, 0.0, 3))[::-1]])
        out = normalizing_constant(lam)
        assert np.all(out.dC_dlambda > 0.0)
        assert out.dC_dlambda.sum() == pytest.approx(out.C, rel=1e-7)


def test_gradient_matches_finite_differences():
    lam = np.array([0.0, -3.0, -17.0, -42.0])
    out = normalizing_constant(lam)
    for i in range(4):
        h = 1e-4 * max(1.0, abs(lam[i]))
        lp, lm = lam.copy(), lam.copy()
        lp[i] += h
        lm[i] -= h
        fd = (_normalizing_constant_unchecked(lp).C
              - _normalizing_constant_unchecked(lm).C) / (2.0 * h)
        assert out.dC_dlambda[i] == pytest.approx(fd, rel=1e-5)


def test_shift_invariance():
    lam = np.array([0.0, -2.0, -5.0, -9.0])
    base = normalizing_constant(lam).C
    shifted = _normalizing_constant_unchecked(lam + 0.4).C
    assert shifted == pytest.approx(np.exp(0.4) * base, rel=1e-8)


def test_permutation_symmetry():
    lam = np.array([0.0, -1.0, -2.0, -3.0])
    perm = np.array([-3.0, -1.0, 0.0, -2.0])
    a = _normalizing_constant_unchecked(lam).C
    b = _normalizing_constant_unchecked(perm).C
    assert b == pytest.approx(a, rel=1e-10)


def test_rejects_non_canonical():
    with pytest.raises(InvalidParameter):
        normalizing_constant(np.array([0.0, -3.0, -2.0, -1.0]))
    with pytest.raises(InvalidParameter):
        normalizing_constant(np.array([1.0, 0.0, -1.0, -2.0]))
    with pytest.raises(InvalidParameter):
        normalizing_constant(np.array([0.0, -1.0, -2.0, -2e6]))


def test_warns_on_large_imaginary_residual():
    # the shortest node set leaves a visible unpaired endpoint term
    cfg = QuadratureConfig(n=15)
    with pytest.warns(NumericalWarning):
        normalizing_constant(np.array([0.0, -20.0, -40.0, -80.0]), cfg)


def test_convergence_check_small_at_default():
    assert convergence_check(np.array([0.0, -1.0, -2.0, -3.0])) < 1e-8


def test_convergence_improves_from_n_min():
    lam = np.array([0.0, -4.0, -11.0, -30.0])
    small = convergence_check(lam, QuadratureConfig(n=15))
    big = convergence_check(lam, QuadratureConfig(n=200))
    assert big < small
