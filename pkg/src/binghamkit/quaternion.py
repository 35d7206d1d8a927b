"""Quaternion algebra on (w, x, y, z) vectors.

Quaternions are plain length-4 numpy arrays in scalar-first order
``(w, x, y, z)`` over the basis {1, i, j, k}.  All functions are pure and
accept anything :func:`numpy.asarray` understands.
"""

import numpy as np

from .errors import DegenerateInput, InvalidParameter

_NORMALIZE_EPS = 1e-12
_UNIT_TOL = 1e-9


def as_quaternion(q):
    """Coerce to a float64 length-4 array, rejecting NaN/Inf."""
    try:
        q = np.asarray(q, dtype=float).reshape(4)
    except ValueError:
        raise InvalidParameter(f"expected 4 quaternion components, got shape {np.shape(q)}")
    if not np.all(np.isfinite(q)):
        raise DegenerateInput("quaternion has non-finite components")
    return q


def as_unit_quaternion(q):
    """Coerce to a length-4 array and check ``||q|| == 1`` within 1e-9."""
    q = as_quaternion(q)
    if abs(np.linalg.norm(q) - 1.0) > _UNIT_TOL:
        raise DegenerateInput(f"not a unit quaternion: ||q|| = {np.linalg.norm(q)!r}")
    return q


def qmul(a, b):
    """Quaternion product a ⊙ b (noncommutative)."""
    aw, ax, ay, az = as_quaternion(a)
    bw, bx, by, bz = as_quaternion(b)
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def omega_l(q):
    """4x4 matrix of left multiplication: omega_l(a) @ b == qmul(a, b)."""
    w, x, y, z = as_quaternion(q)
    return np.array([
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ])


def omega_r(q):
    """4x4 matrix of right multiplication: omega_r(b) @ a == qmul(a, b)."""
    w, x, y, z = as_quaternion(q)
    return np.array([
        [w, -x, -y, -z],
        [x, w, z, -y],
        [y, -z, w, x],
        [z, y, -x, w],
    ])


def conjugate(q):
    """Quaternion conjugate (w, -x, -y, -z)."""
    w, x, y, z = as_quaternion(q)
    return np.array([w, -x, -y, -z])


def norm(q):
    """Euclidean norm of the component vector."""
    return float(np.linalg.norm(as_quaternion(q)))


def normalize(q):
    """Scale to unit norm.

    Raises
    ------
    DegenerateInput
        If ``||q|| <= 1e-12``; below that the direction is meaningless in
        double precision.
    """
    q = as_quaternion(q)
    n = np.linalg.norm(q)
    if n <= _NORMALIZE_EPS:
        raise DegenerateInput("cannot normalize a near-zero quaternion")
    return q / n


def to_rotation_matrix(q):
    """Rotation matrix R(q) in SO(3) for a unit quaternion.

    R(-q) == R(q): antipodal quaternions represent the same rotation.
    """
    w, x, y, z = as_unit_quaternion(q)
    return np.array([
        [1 - 2 * y * y - 2 * z * z, -2 * w * z + 2 * x * y, 2 * w * y + 2 * x * z],
        [2 * w * z + 2 * x * y, 1 - 2 * x * x - 2 * z * z, -2 * w * x + 2 * y * z],
        [-2 * w * y + 2 * x * z, 2 * w * x + 2 * y * z, 1 - 2 * x * x - 2 * y * y],
    ])


def delta_q(q, q_gt):
    """Angular discrepancy 2*arccos(|q_gt . q|) in radians, in [0, pi].

    Symmetric in its arguments and invariant under a sign flip of either
    one.  The dot product is clamped to [0, 1] so floating-point overshoot
    never produces NaN.
    """
    q = as_unit_quaternion(q)
    q_gt = as_unit_quaternion(q_gt)
    return 2.0 * np.arccos(min(abs(float(q_gt @ q)), 1.0))
