"""Continuous maps from unconstrained vectors to Bingham parameters.

Five parametrizations are supported, named by how the orthogonal matrix
and the eigenvalues are produced:

========  ====  ==================  =====================
tag       dim   orthogonal matrix   eigenvalues
========  ====  ==================  =====================
P10       10    eigendecomposition of a symmetric matrix
P4+3       7    birdal (4)          softplus chain (3)
P4+4       8    birdal (4)          sort-and-shift (4)
P6+3       9    cayley (6)          softplus chain (3)
P6+4      10    cayley (6)          sort-and-shift (4)
========  ====  ==================  =====================
"""

from dataclasses import dataclass

import numpy as np

from . import quaternion
from .distribution import BinghamParams, sort_and_shift
from .errors import DegenerateInput, InvalidParameter, NumericalFailure

TAGS = ("P10", "P4+3", "P4+4", "P6+3", "P6+4")
TAG_DIMS = {"P10": 10, "P4+3": 7, "P4+4": 8, "P6+3": 9, "P6+4": 10}

# row-major upper-triangle indices of a 4x4 symmetric matrix
_TRIU_ROWS, _TRIU_COLS = np.triu_indices(4)


@dataclass(frozen=True)
class ParamVector:
    """Raw unconstrained parameter vector under one of the five tags."""

    tag: str
    theta: np.ndarray

    def __post_init__(self):
        if self.tag not in TAG_DIMS:
            raise InvalidParameter(f"unknown parametrization tag {self.tag!r}")
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if theta.shape[0] != TAG_DIMS[self.tag]:
            raise InvalidParameter(
                f"{self.tag} expects {TAG_DIMS[self.tag]} entries, got {theta.shape[0]}"
            )
        if not np.all(np.isfinite(theta)):
            raise InvalidParameter("theta has non-finite entries")
        object.__setattr__(self, "theta", theta)

    def to_dict(self):
        return {"repr": self.tag, "theta": self.theta.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["repr"], np.asarray(data["theta"], float))


def softplus(x):
    """Overflow-safe log(1 + exp(x))."""
    x = np.asarray(x, dtype=float)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def triu_inverse(theta):
    """Place theta_1..theta_10 into the upper triangle of a symmetric 4x4."""
    theta = np.asarray(theta, dtype=float).reshape(10)
    A = np.zeros((4, 4))
    A[_TRIU_ROWS, _TRIU_COLS] = theta
    A[_TRIU_COLS, _TRIU_ROWS] = theta
    return A


def triu(A):
    """Read the upper triangle of a symmetric 4x4 back into 10 entries."""
    A = np.asarray(A, dtype=float).reshape(4, 4)
    return A[_TRIU_ROWS, _TRIU_COLS].copy()


def skew(theta):
    """The 4x4 skew-symmetric matrix S(theta) used by the Cayley map."""
    t1, t2, t3, t4, t5, t6 = np.asarray(theta, dtype=float).reshape(6)
    return np.array([
        [0.0, t1, -t2, t3],
        [-t1, 0.0, t4, -t5],
        [t2, -t4, 0.0, t6],
        [-t3, t5, -t6, 0.0],
    ])


def cayley(theta):
    """Cayley transform (I - S)^-1 (I + S), always orthogonal.

    I - S is invertible for every skew-symmetric S (its eigenvalues are
    1 - i*mu with mu real), so the map is total.
    """
    S = skew(theta)
    return np.linalg.solve(np.eye(4) - S, np.eye(4) + S)


def cayley_inverse(D):
    """Skew parameters with cayley(theta) == D, when they exist.

    Requires D in SO(4) with no -1 eigenvalue; raises DegenerateInput
    otherwise.
    """
    D = np.asarray(D, dtype=float).reshape(4, 4)
    M = np.eye(4) + D
    if abs(np.linalg.det(M)) < 1e-8:
        raise DegenerateInput("D has an eigenvalue at -1; no Cayley preimage")
    S = np.linalg.solve(M.T, (D - np.eye(4)).T).T  # (D - I)(I + D)^-1
    return np.array([S[0, 1], -S[0, 2], S[0, 3], S[1, 2], -S[1, 3], S[2, 3]])


def birdal(theta):
    """Orthogonal matrix from a 4-vector: Omega_L of its normalization.

    Non-unit input is normalized rather than rejected, keeping the map
    total on R^4 minus the origin.
    """
    return quaternion.omega_l(quaternion.normalize(theta))


def lambda4(theta):
    """Sort a raw 4-vector descending and shift so the maximum is zero."""
    theta = np.asarray(theta, dtype=float).reshape(4)
    order = np.argsort(-theta, kind="stable")
    s = theta[order]
    return s - s[0]


def lambda3(theta):
    """Cumulative negative-softplus chain; output is strictly descending."""
    gaps = softplus(np.asarray(theta, dtype=float).reshape(3))
    return np.concatenate([[0.0], -np.cumsum(gaps)])


def _eig_descending_sign_fixed(A):
    """Symmetric eigendecomposition, descending, deterministic column signs.

    Each eigenvector's sign is chosen so its largest-magnitude entry is
    positive; the represented distribution is invariant to these signs.
    """
    try:
        vals, vecs = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(4)])
    signs[signs == 0] = 1.0
    return vals, vecs * signs


def realize(p):
    """Map a raw ParamVector to canonical BinghamParams."""
    theta = p.theta
    if p.tag == "P10":
        vals, vecs = _eig_descending_sign_fixed(triu_inverse(theta))
        return sort_and_shift(vecs, vals)
    if p.tag == "P4+3":
        return sort_and_shift(birdal(theta[:4]), lambda3(theta[4:]))
    if p.tag == "P4+4":
        return sort_and_shift(birdal(theta[:4]), lambda4(theta[4:]))
    if p.tag == "P6+3":
        return sort_and_shift(cayley(theta[:6]), lambda3(theta[6:]))
    if p.tag == "P6+4":
        return sort_and_shift(cayley(theta[:6]), lambda4(theta[6:]))
    raise InvalidParameter(f"unknown tag {p.tag!r}")  # pragma: no cover


@dataclass(frozen=True)
class ParamJacobian:
    """Derivatives of realize with respect to the raw vector.

    For the composite tags, ``dD`` has shape (4, 4, n_d) and ``dlam``
    shape (4, n_lam); the raw vector splits as theta = (theta_D, theta_lam).
    For P10 the natural object is ``dA`` with shape (4, 4, 10), the
    derivative of the symmetric matrix itself (the eigendecomposition is
    not differentiated here).
    """

    tag: str
    dD: np.ndarray | None = None
    dlam: np.ndarray | None = None
    dA: np.ndarray | None = None


def _birdal_jacobian(theta):
    """d birdal / d theta as a (4, 4, 4) stack (Omega_L is linear)."""
    theta = np.asarray(theta, dtype=float).reshape(4)
    n = np.linalg.norm(theta)
    if n <= 1e-12:
        raise DegenerateInput("birdal input too close to zero")
    u = theta / n
    dU = (np.eye(4) - np.outer(u, u)) / n  # du/dtheta
    return np.stack([quaternion.omega_l(dU[:, j]) for j in range(4)], axis=-1)


def _cayley_jacobian(theta):
    """d cayley / d theta as a (4, 4, 6) stack."""
    S = skew(theta)
    Minv = np.linalg.inv(np.eye(4) - S)
    DplusI = Minv @ (np.eye(4) + S) + np.eye(4)
    basis = np.eye(6)
    return np.stack([Minv @ skew(basis[j]) @ DplusI for j in range(6)], axis=-1)


def _lambda4_jacobian(theta):
    """Piecewise-linear Jacobian of lambda4; the max entry's row is zero."""
    theta = np.asarray(theta, dtype=float).reshape(4)
    order = np.argsort(-theta, kind="stable")
    J = np.zeros((4, 4))
    for i in range(4):
        J[i, order[i]] += 1.0
        J[i, order[0]] -= 1.0
    return J


def _lambda3_jacobian(theta):
    """Jacobian of the cumulative softplus chain (sigmoid entries)."""
    theta = np.asarray(theta, dtype=float).reshape(3)
    sig = 1.0 / (1.0 + np.exp(-theta))
    J = np.zeros((4, 3))
    for i in range(1, 4):
        J[i, :i] = -sig[:i]
    return J


def param_jacobian(p):
    """Jacobian of realize at p, structured per tag (see ParamJacobian)."""
    theta = p.theta
    if p.tag == "P10":
        dA = np.zeros((4, 4, 10))
        for k, (i, j) in enumerate(zip(_TRIU_ROWS, _TRIU_COLS)):
            dA[i, j, k] = 1.0
            dA[j, i, k] = 1.0
        return ParamJacobian("P10", dA=dA)
    if p.tag in ("P4+3", "P4+4"):
        dD = _birdal_jacobian(theta[:4])
        rest = theta[4:]
    else:
        dD = _cayley_jacobian(theta[:6])
        rest = theta[6:]
    if p.tag in ("P4+3", "P6+3"):
        dlam = _lambda3_jacobian(rest)
    else:
        dlam = _lambda4_jacobian(rest)
    return ParamJacobian(p.tag, dD=dD, dlam=dlam)
