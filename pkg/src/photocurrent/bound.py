"""Classical upper bound on the current at fixed mean photon number.

For a classical state the P function is a probability density, and the
current is its average of the branch current ``J(|alpha|**2)``. Because
``J`` is blind to the phase, only the radial density matters. Maximising
``sum_i w_i J(x_i)`` subject to ``sum_i w_i = 1``, ``sum_i w_i x_i = nbar``
and ``w_i >= 0`` over a grid is a linear program with two equality
constraints, so some optimal basic solution has at most two support
points. Enumerating every such support is therefore exact for the grid.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import photon_stats as ps
from .currents import _check_r_sq, branch_current, subpoisson_current
from .errors import DomainError, InfeasibleError

DEFAULT_GRID_SIZE = 2001
_SNAP_TOL = 1e-12
_BLOCK = 256


@dataclass(frozen=True)
class BoundCertificate:
    """Optimum of the discretised classical problem."""

    n_mean: float
    r_sq: float
    optimal_value: float
    optimal_support: list[tuple[float, float]]
    gap_to_poisson: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["optimal_support"] = [list(p) for p in self.optimal_support]
        return d


def concavity_certificate(r_sq: float, grid, min_points: int = 100, tol: float = 1e-12) -> bool:
    """True iff every chord of the branch current on ``grid`` lies below it.

    The test is the divided second difference on the sorted (possibly
    non-uniform) grid, ``J[x0, x1, x2] <= tol``.
    """
    x = np.unique(np.asarray(grid, dtype=float))
    if x.size < min_points:
        raise DomainError(f"grid needs at least {min_points} distinct points, got {x.size}")
    j = branch_current(x, r_sq)
    slopes = np.diff(j) / np.diff(x)
    second = np.diff(slopes) / (x[2:] - x[:-2])
    return bool(np.all(second <= tol))


def max_classical_current(nbar: float, r_sq: float, grid_size: int = DEFAULT_GRID_SIZE,
                          grid=None) -> BoundCertificate:
    """Maximise the classical current at mean ``nbar`` over radial densities on a grid.

    The default grid is ``grid_size`` uniform nodes on ``[0, 4 nbar]``; a
    node lying within ``1e-12`` (relative) of ``nbar`` is snapped onto it.
    Ties are broken towards the smaller left-node index.
    """
    _check_r_sq(r_sq)
    if not (math.isfinite(nbar) and nbar > 0.0):
        raise DomainError(f"nbar must be finite and > 0, got {nbar}")
    if grid is None:
        if grid_size < 2:
            raise DomainError("grid_size must be >= 2")
        x = np.linspace(0.0, 4.0 * nbar, grid_size)
    else:
        x = np.unique(np.asarray(grid, dtype=float))
        if x.size == 0 or np.any(x < 0.0) or np.any(~np.isfinite(x)):
            raise DomainError("grid nodes must be finite and >= 0")
    close = np.abs(x - nbar) <= _SNAP_TOL * max(nbar, 1.0)
    x = np.where(close, nbar, x)
    if nbar < x[0] or nbar > x[-1]:
        raise InfeasibleError(f"nbar={nbar} lies outside the grid hull [{x[0]}, {x[-1]}]")

    poisson = branch_current(nbar, r_sq)
    j = branch_current(x, r_sq)
    if np.any(x == nbar):
        # strict concavity makes the point mass the unique maximiser
        value = float(poisson)
        return BoundCertificate(nbar, r_sq, value, [(float(nbar), 1.0)], poisson - value)

    left = np.flatnonzero(x < nbar)
    right = np.flatnonzero(x > nbar)
    xr, jr = x[right], j[right]
    best = (-math.inf, -1, -1, 0.0)
    for start in range(0, left.size, _BLOCK):
        rows = left[start:start + _BLOCK]
        xl = x[rows][:, None]
        jl = j[rows][:, None]
        w = (nbar - xl) / (xr[None, :] - xl)
        vals = jl + w * (jr[None, :] - jl)
        k = int(np.argmax(vals))
        v = float(vals.flat[k])
        if v > best[0]:
            r, c = divmod(k, xr.size)
            best = (v, int(rows[r]), int(right[c]), float(w[r, c]))
    value, i, k, wk = best
    support = [(float(x[i]), 1.0 - wk), (float(x[k]), wk)]
    return BoundCertificate(nbar, r_sq, value, support, poisson - value)


def random_radial_density(rng: np.random.Generator, nbar: float, n_points: int = 8,
                          spread: float = 4.0):
    """Random nonnegative radial density with mean exactly ``nbar`` (up to rounding).

    Nodes are drawn uniformly on ``[0, spread * nbar]`` and rescaled so the
    weighted mean hits ``nbar``; weights are Dirichlet(1, ..., 1).
    """
    from .pfunc import RadialDensity

    nodes = rng.uniform(0.0, spread * nbar, size=n_points)
    weights = rng.dirichlet(np.ones(n_points))
    mean = math.fsum(nodes * weights)
    if mean <= 0.0:
        return RadialDensity.point_mass(nbar)
    return RadialDensity(nodes * (nbar / mean), weights)


def nonclassical_exceedance(nbar: float, r_sq: float) -> float:
    """Sub-Poisson current minus the classical bound at the same mean."""
    _check_r_sq(r_sq)
    if not (math.isfinite(nbar) and nbar > 0.0):
        raise DomainError(f"nbar must be finite and > 0, got {nbar}")
    lam = ps.lambda_for_mean(nbar)
    return subpoisson_current(lam, r_sq).value - branch_current(nbar, r_sq)
