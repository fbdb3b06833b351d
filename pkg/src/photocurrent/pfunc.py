"""P-function averages over coherent-state branches.

A state with P function ``P(alpha)`` yields observables
``<O> = int d^2 alpha P(alpha) <O>_alpha``. The branch current depends on
``alpha`` only through ``|alpha|**2``, so classical averages collapse to
one-dimensional radial densities; the Monte Carlo path keeps the full
complex samples to show that the phase really drops out.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import photon_stats as ps
from .currents import CurrentResult, Method, branch_current
from .errors import DomainError

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class RadialDensity:
    """Nonnegative weights on ``|alpha|**2`` nodes, summing to one."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.shape != weights.shape or nodes.size == 0:
            raise DomainError("nodes and weights must be non-empty and of equal length")
        if np.any(~np.isfinite(nodes)) or np.any(nodes < 0.0):
            raise DomainError("nodes must be finite and >= 0")
        if np.any(weights < 0.0):
            raise DomainError("weights must be >= 0 (classical P function)")
        if abs(math.fsum(weights) - 1.0) > _WEIGHT_TOL:
            raise DomainError(f"weights sum to {math.fsum(weights)!r}, not 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def mean(self) -> float:
        return math.fsum(self.nodes * self.weights)

    @classmethod
    def point_mass(cls, x: float) -> "RadialDensity":
        return cls(np.array([x]), np.array([1.0]))

    @classmethod
    def thermal(cls, nbar: float, n_nodes: int = 64) -> "RadialDensity":
        """Gauss-Laguerre discretisation of ``exp(-x / nbar) / nbar``."""
        t, w = np.polynomial.laguerre.laggauss(n_nodes)
        w = w / math.fsum(w)
        return cls(nbar * t, w)


def branch_average(values, weights) -> float:
    """Weighted sum of per-branch values.

    Weights must sum to one but may be negative, which allows
    quasi-probability averages to be explored numerically.
    """
    values = np.asarray(values, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    if values.shape != weights.shape:
        raise ValueError(f"length mismatch: {values.size} values, {weights.size} weights")
    if abs(math.fsum(weights) - 1.0) > 1e-10:
        raise ValueError(f"weights must sum to 1, got {math.fsum(weights)!r}")
    return math.fsum(values * weights)


def radial_average_current(density: RadialDensity, r_sq: float) -> CurrentResult:
    value = math.fsum(density.weights * branch_current(density.nodes, r_sq))
    return CurrentResult(value, Method.QUADRATURE, 0.0)


def _chunk_currents(stat, r_sq, seed, n):
    samples = ps.sample_classical(stat, seed, n)
    return branch_current(samples.magnitude_sq, r_sq)


def mc_average_current(stat: ps.PhotonStatistics, r_sq: float, n: int, seed: int,
                       workers: int = 1) -> CurrentResult:
    """Monte Carlo P-function average of the branch current.

    ``n`` samples are split over ``workers`` independent streams spawned
    from ``seed``; the result is reproducible for a fixed
    ``(seed, n, workers)``. ``est_error`` is the standard error of the mean.
    """
    if n < 1000:
        raise DomainError(f"need at least 1000 samples, got {n}")
    if workers < 1:
        raise DomainError("workers must be >= 1")
    children = np.random.SeedSequence(seed).spawn(workers)
    sizes = [n // workers + (1 if i < n % workers else 0) for i in range(workers)]
    if workers == 1:
        chunks = [_chunk_currents(stat, r_sq, children[0], sizes[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda a: _chunk_currents(stat, r_sq, *a),
                                   zip(children, sizes)))
    return _reduce(chunks, n)


def sample_average_current(samples: ps.BranchSamples, r_sq: float) -> CurrentResult:
    """Average of the branch current over an explicit batch of branches."""
    if len(samples) == 0:
        raise DomainError("empty sample batch")
    return _reduce([branch_current(samples.magnitude_sq, r_sq)], len(samples))


def _reduce(chunks, n) -> CurrentResult:
    # shift by a reference value so identical samples reduce exactly
    ref = float(chunks[0][0])
    dev = math.fsum(math.fsum(c - ref) for c in chunks)
    dev2 = math.fsum(math.fsum((c - ref) ** 2) for c in chunks)
    mean_dev = dev / n
    var = max(dev2 / n - mean_dev * mean_dev, 0.0) * n / max(n - 1, 1)
    return CurrentResult(ref + mean_dev, Method.MONTE_CARLO, math.sqrt(var / n))
