import numpy as np
import pytest

from binghamkit import (
    DegenerateInput,
    InvalidParameter,
    conjugate,
    delta_q,
    norm,
    normalize,
    omega_l,
    omega_r,
    qmul,
    to_rotation_matrix,
)
from binghamkit.quaternion import as_quaternion, as_unit_quaternion


def random_unit(rng):
    q = rng.standard_normal(4)
    return q / np.linalg.norm(q)


def test_norm_345():
    assert norm([0.0, 3.0, 0.0, 4.0]) == pytest.approx(5.0)


def test_normalize_unit():
    q = normalize([2.0, 0.0, 0.0, 0.0])
    np.testing.assert_allclose(q, [1.0, 0.0, 0.0, 0.0])


def test_normalize_zero_raises():
    with pytest.raises(DegenerateInput):
        normalize([0.0, 0.0, 0.0, 1e-13])


def test_qmul_identity():
    rng = np.random.default_rng(0)
    q = random_unit(rng)
    e = np.array([1.0, 0.0, 0.0, 0.0])
    np.testing.assert_allclose(qmul(e, q), q, atol=1e-15)
    np.testing.assert_allclose(qmul(q, e), q, atol=1e-15)


def test_qmul_associative():
    rng = np.random.default_rng(1)
    a, b, c = (random_unit(rng) for _ in range(3))
    np.testing.assert_allclose(qmul(qmul(a, b), c), qmul(a, qmul(b, c)), atol=1e-12)


def test_qmul_conjugate_gives_norm_squared():
    rng = np.random.default_rng(2)
    q = 3.0 * random_unit(rng)
    prod = qmul(q, conjugate(q))
    np.testing.assert_allclose(prod, [norm(q) ** 2, 0, 0, 0], atol=1e-12)


def test_omega_matrices_realize_multiplication():
    rng = np.random.default_rng(3)
    a, b = random_unit(rng), random_unit(rng)
    np.testing.assert_allclose(omega_l(a) @ b, qmul(a, b), atol=1e-14)
    np.testing.assert_allclose(omega_r(b) @ a, qmul(a, b), atol=1e-14)


def test_omega_l_orthogonal_for_unit_input():
    rng = np.random.default_rng(4)
    M = omega_l(random_unit(rng))
    np.testing.assert_allclose(M.T @ M, np.eye(4), atol=1e-14)


def test_rotation_matrix_properties():
    rng = np.random.default_rng(5)
    q = random_unit(rng)
    R = to_rotation_matrix(q)
    np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-13)
    assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)
    # antipodal quaternions are the same rotation
    np.testing.assert_allclose(to_rotation_matrix(-q), R, atol=1e-14)


def test_delta_q_basics():
    rng = np.random.default_rng(6)
    q = random_unit(rng)
    assert delta_q(q, q) == pytest.approx(0.0, abs=1e-7)
    assert delta_q(q, -q) == pytest.approx(0.0, abs=1e-7)
    e = np.array([1.0, 0.0, 0.0, 0.0])
    i = np.array([0.0, 1.0, 0.0, 0.0])
    assert delta_q(e, i) == pytest.approx(np.pi)


def test_delta_q_clamps_rounding():
    # dot products a hair beyond 1 must not produce NaN
    q = np.array([1.0, 0.0, 0.0, 0.0])
    r = normalize([1.0 + 1e-13, 0.0, 0.0, 0.0])
    assert np.isfinite(delta_q(q, r))


def test_as_quaternion_shape_checks():
    with pytest.raises(InvalidParameter):
        as_quaternion([1.0, 0.0, 0.0])
    with pytest.raises(DegenerateInput):
        as_unit_quaternion([1.0, 1.0, 0.0, 0.0])
