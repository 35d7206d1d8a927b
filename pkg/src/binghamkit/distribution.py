"""Canonical Bingham distribution on the unit-quaternion sphere.

The density is proportional to ``exp(q^T D diag(lam) D^T q)`` with ``D``
orthogonal and ``lam`` held in canonical form: sorted descending with the
largest entry pinned at zero.  Adding a constant to every entry of ``lam``
leaves the distribution unchanged (the normalizing constant absorbs it),
which is why the canonical form loses nothing.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .quaternion import as_unit_quaternion

_ORTHO_TOL_STRICT = 1e-9
_ORTHO_TOL_INPUT = 1e-6
_CANONICAL_TOL = 1e-9

SURFACE_AREA_S3 = 2.0 * np.pi**2


@dataclass(frozen=True)
class BinghamParams:
    """Canonical parameter pair (D, lam).

    Attributes
    ----------
    D : (4, 4) orthogonal matrix whose columns are eigen-directions in
        quaternion space.
    lam : length-4 vector with ``lam[0] == 0 >= lam[1] >= lam[2] >= lam[3]``.
    """

    D: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        D = np.asarray(self.D, dtype=float).reshape(4, 4)
        lam = np.asarray(self.lam, dtype=float).reshape(4)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "lam", lam)
        if not np.all(np.isfinite(D)) or not np.all(np.isfinite(lam)):
            raise InvalidParameter("non-finite Bingham parameters")
        if np.max(np.abs(D.T @ D - np.eye(4))) > _ORTHO_TOL_STRICT:
            raise InvalidParameter("D is not orthogonal within 1e-9")
        if abs(lam[0]) > _CANONICAL_TOL or np.any(np.diff(lam) > _CANONICAL_TOL):
            raise InvalidParameter(f"lambda not in canonical form: {lam}")

    @property
    def A(self):
        """The symmetric matrix D diag(lam) D^T."""
        return self.D @ np.diag(self.lam) @ self.D.T

    def to_dict(self):
        return {"D": self.D.tolist(), "lambda": self.lam.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["D"], float), np.asarray(data["lambda"], float))


class SymmetryKind(enum.Enum):
    BIPOLAR = "bipolar"
    CIRCULAR = "circular"
    SPHERICAL = "spherical"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class SymmetryClass:
    """Shape class of a Bingham distribution plus the test margin."""

    kind: SymmetryKind
    margin: float  # lam2 + lam3 - lam4


def sort_and_shift(D, lam):
    """Canonicalize raw parameters without changing the distribution.

    Columns of ``D`` are permuted so the matching ``lam`` is descending
    (stable sort, ties keep their original order), then ``lam`` is shifted
    so its maximum is exactly zero.

    Raises
    ------
    InvalidParameter
        If ``D`` is not orthogonal within 1e-6.
    """
    D = np.asarray(D, dtype=float).reshape(4, 4)
    lam = np.asarray(lam, dtype=float).reshape(4)
    if np.max(np.abs(D.T @ D - np.eye(4))) > _ORTHO_TOL_INPUT:
        raise InvalidParameter("D is not orthogonal within 1e-6")
    order = np.argsort(-lam, kind="stable")
    lam_sorted = lam[order]
    return BinghamParams(D[:, order], lam_sorted - lam_sorted[0])


def log_pdf(p, q, C):
    """Log density ``q^T A q - ln(C)``.

    ``C`` is the normalizing constant for ``p.lam`` (see
    :mod:`binghamkit.normalizer`); it is taken as given here so that a
    batch of evaluations can share one constant.
    """
    if not C > 0.0:
        raise InvalidParameter("normalizing constant must be positive")
    q = as_unit_quaternion(q)
    v = p.D.T @ q
    return float(v @ (p.lam * v) - np.log(C))


def pdf(p, q, C):
    """Density value exp(q^T A q) / C."""
    return float(np.exp(log_pdf(p, q, C)))


def mode(p):
    """Maximizer of the density: the column of D paired with lam[0] = 0."""
    return p.D[:, 0].copy()


def trace_indicator(p):
    """Trace of the shifted parameter matrix: lam2 + lam3 + lam4 (<= 0).

    Closer to zero means a flatter, less confident distribution.
    """
    return float(np.sum(p.lam[1:]))


def classify_symmetry(p, tol=1e-6):
    """Classify the distribution shape from the eigenvalue relations.

    The uniform test runs first because a uniform ``lam`` also satisfies
    the circular equality.
    """
    _, l2, l3, l4 = p.lam
    margin = float(l2 + l3 - l4)
    if abs(l2 - l3) <= tol and abs(l3 - l4) <= tol:
        kind = SymmetryKind.UNIFORM
    elif abs(margin) <= tol:
        kind = SymmetryKind.CIRCULAR
    elif l2 + l3 < l4:
        kind = SymmetryKind.BIPOLAR
    else:
        kind = SymmetryKind.SPHERICAL
    return SymmetryClass(kind, margin)
