"""Slow, independent ground truth for the fast paths.

``brute_force_C`` integrates the unnormalized density over S^3 directly in
hyperspherical angles with a composite Simpson product rule, doubling the
grid and Richardson-extrapolating until two successive levels agree.  ``finite_diff`` provides the
central-difference gradients used everywhere a derivative formula needs an
independent check.  Both are deliberately simple and may be orders of
magnitude slower than the normalizer.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import InvalidParameter

_GRID_CAP = 1024


@dataclass(frozen=True)
class GridSpec:
    """Interval counts for the (psi, theta, phi) product grid."""

    n_psi: int = 128
    n_theta: int = 128
    n_phi: int = 256

    def __post_init__(self):
        for v in (self.n_psi, self.n_theta, self.n_phi):
            if v < 8:
                raise InvalidParameter("grid resolutions must be >= 8")

    def doubled(self):
        return GridSpec(2 * self.n_psi, 2 * self.n_theta, 2 * self.n_phi)


def _integrate_once(lam, grid):
    """One Simpson pass over q = (cos psi, sin psi cos th, sin psi sin th cos ph,
    sin psi sin th sin ph) with volume element sin^2 psi sin th."""
    lam = np.asarray(lam, dtype=float).reshape(4)
    psi = np.linspace(0.0, np.pi, grid.n_psi + 1)
    th = np.linspace(0.0, np.pi, grid.n_theta + 1)
    ph = np.linspace(0.0, 2.0 * np.pi, grid.n_phi + 1)
    cp, sp = np.cos(psi), np.sin(psi)
    ct, st = np.cos(th), np.sin(th)
    cf2 = np.cos(ph) ** 2
    sf2 = np.sin(ph) ** 2

    # chunk over psi to bound memory on fine grids
    inner = np.empty(psi.shape)
    for i in range(psi.shape[0]):
        expo = (lam[0] * cp[i] ** 2
                + lam[1] * (sp[i] * ct)[:, None] ** 2
                + (sp[i] * st)[:, None] ** 2 * (lam[2] * cf2 + lam[3] * sf2)[None, :])
        phi_int = simpson(np.exp(expo), x=ph, axis=1)
        inner[i] = simpson(phi_int * st, x=th)
    return float(simpson(inner * sp**2, x=psi))


def brute_force_C(lam, grid=GridSpec(), rtol=1e-8):
    """Brute-force normalizing constant with self-convergence certification.

    Starting from ``grid``, every axis is doubled (clamped at the per-axis
    cap of 1024) and the resulting Simpson sequence is Richardson
    extrapolated: plain grid doubling alone cannot certify 1e-8 within
    the cap once several eigenvalues approach -100, while the
    extrapolated column converges two orders faster on the same grids.
    Returns ``(value, convergence_estimate)`` where the estimate is the
    relative change between the last two entries of the deepest
    extrapolation column available.
    """
    cols = [[_integrate_once(lam, grid)]]
    g = grid
    while True:
        at_cap = min(g.n_psi, g.n_theta, g.n_phi) >= _GRID_CAP
        if len(cols[0]) >= 2:
            src = next(col for col in reversed(cols) if len(col) >= 2)
            est = abs(src[-1] - src[-2]) / abs(src[-1])
            if est <= rtol or at_cap:
                return cols[-1][-1], est
        g = GridSpec(min(2 * g.n_psi, _GRID_CAP),
                     min(2 * g.n_theta, _GRID_CAP),
                     min(2 * g.n_phi, _GRID_CAP))
        cols[0].append(_integrate_once(lam, g))
        # extend the Romberg table: column j cancels the O(h^(2j+2)) term
        for j in range(1, len(cols[0])):
            fac = 4.0 ** (j + 1)
            if len(cols) <= j:
                cols.append([])
            cols[j].append((fac * cols[j - 1][-1] - cols[j - 1][-2]) / (fac - 1.0))


def monte_carlo_C(lam, n=1_000_000, seed=0):
    """Independent Monte-Carlo cross-check of the constant.

    Uniform S^3 points from normalized Gaussians; returns (estimate,
    standard error).  The surface measure has total mass 2 pi^2.
    """
    lam = np.asarray(lam, dtype=float).reshape(4)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    vals = np.exp(q**2 @ lam)
    area = 2.0 * np.pi**2
    return area * float(vals.mean()), area * float(vals.std(ddof=1) / np.sqrt(n))


def finite_diff(f, x, step=1e-6):
    """Central differences of a scalar function, one column per coordinate."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += step
        xm[idx] -= step
        out[idx] = (f(xp) - f(xm)) / (2.0 * step)
    return out


def build_cache(lambdas, path, grid=GridSpec(), rtol=1e-8):
    """Write a JSON cache mapping rounded lambda tuples to oracle values."""
    cache = {}
    for lam in lambdas:
        lam = np.asarray(lam, dtype=float).reshape(4)
        key = ",".join(f"{v:.12g}" for v in lam)
        value, est = brute_force_C(lam, grid, rtol)
        cache[key] = {
            "C": value,
            "grid": [grid.n_psi, grid.n_theta, grid.n_phi],
            "convergence_estimate": est,
        }
    with open(path, "w") as fh:
        json.dump(cache, fh, indent=2)
    return cache


def load_cache(path):
    with open(path) as fh:
        return json.load(fh)
