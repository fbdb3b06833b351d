"""Fock-diagonal photon statistics.

Four families are supported: Poisson (coherent light with random phase),
thermal, the sub-Poisson family ``P_n = lambda**n / (n!)**2 / I0(2 sqrt(lambda))``
and finite custom vectors. Each exposes its pmf, moments, Mandel Q and
generating function ``G(x) = sum_n P_n x**n``; the two classical families can
also be sampled in their coherent-state (P-function) representation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .errors import DomainError, NonclassicalStateError, PoleError, UndefinedQuantityError

POISSON = "poisson"
THERMAL = "thermal"
SUBPOISSON = "subpoisson"
CUSTOM = "custom"
KINDS = (POISSON, THERMAL, SUBPOISSON, CUSTOM)

_NORM_TOL = 1e-12
_TRUNC_REL = 1e-16


@dataclass(frozen=True)
class PhotonStatistics:
    """Immutable description of a photon-number distribution.

    Use the constructors :meth:`poisson`, :meth:`thermal`, :meth:`subpoisson`
    and :meth:`custom` rather than building instances by hand. ``param`` is the
    mean photon number for Poisson and thermal light and ``lambda`` for the
    sub-Poisson family; ``probs`` is only used by custom distributions.
    """

    kind: str
    param: float = 0.0
    probs: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown statistics kind {self.kind!r}")
        if self.kind == CUSTOM:
            p = self.probs
            if not p:
                raise DomainError("custom distribution needs at least one probability")
            if any((not math.isfinite(v)) or v < 0.0 for v in p):
                raise DomainError("custom probabilities must be finite and >= 0")
            if abs(math.fsum(p) - 1.0) > _NORM_TOL:
                raise DomainError(f"custom probabilities sum to {math.fsum(p)!r}, not 1")
        elif not (math.isfinite(self.param) and self.param >= 0.0):
            raise DomainError(f"{self.kind} parameter must be finite and >= 0, got {self.param}")

    @classmethod
    def poisson(cls, nbar: float) -> "PhotonStatistics":
        return cls(POISSON, float(nbar))

    @classmethod
    def thermal(cls, nbar: float) -> "PhotonStatistics":
        return cls(THERMAL, float(nbar))

    @classmethod
    def subpoisson(cls, lam: float) -> "PhotonStatistics":
        return cls(SUBPOISSON, float(lam))

    @classmethod
    def subpoisson_with_mean(cls, nbar: float) -> "PhotonStatistics":
        if nbar == 0:
            return cls(SUBPOISSON, 0.0)
        return cls(SUBPOISSON, lambda_for_mean(nbar))

    @classmethod
    def custom(cls, probs: Sequence[float]) -> "PhotonStatistics":
        return cls(CUSTOM, 0.0, tuple(float(v) for v in probs))

    @property
    def is_classical(self) -> bool:
        return self.kind in (POISSON, THERMAL)


@dataclass(frozen=True)
class Moments:
    mean: float
    second_moment: float
    mandel_q: float  # nan when mean == 0

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2


# ---------------------------------------------------------------- pmf


def _log_pmf(stat: PhotonStatistics, n: int) -> float:
    p = stat.param
    if stat.kind == POISSON:
        if p == 0.0:
            return 0.0 if n == 0 else -math.inf
        return -p + n * math.log(p) - math.lgamma(n + 1)
    if stat.kind == THERMAL:
        if p == 0.0:
            return 0.0 if n == 0 else -math.inf
        return n * math.log(p) - (n + 1) * math.log1p(p)
    # sub-Poisson: lambda^n / (n!)^2 / I0(2 sqrt(lambda))
    if p == 0.0:
        return 0.0 if n == 0 else -math.inf
    z = 2.0 * math.sqrt(p)
    log_norm = math.log(specfun.bessel_i(0, z, scaled=True)) + z
    return n * math.log(p) - 2.0 * math.lgamma(n + 1) - log_norm


def pmf(stat: PhotonStatistics, n: int) -> float:
    """Probability ``P_n`` of finding ``n`` photons."""
    n = int(n)
    if n < 0:
        raise DomainError(f"photon number must be >= 0, got {n}")
    if stat.kind == CUSTOM:
        return stat.probs[n] if n < len(stat.probs) else 0.0
    return math.exp(_log_pmf(stat, n))


def _mode(stat: PhotonStatistics) -> int:
    p = stat.param
    if stat.kind == POISSON:
        return int(math.floor(p))
    if stat.kind == THERMAL:
        return 0
    return int(math.floor(math.sqrt(p)))


def truncation_point(stat: PhotonStatistics) -> int:
    """Smallest ``N`` past the mode with ``P_N < 1e-16 * max_n P_n``.

    Every supported infinite family is log-concave, so beyond this point the
    tail is monotone decreasing and negligible.
    """
    if stat.kind == CUSTOM:
        return len(stat.probs) - 1
    m = _mode(stat)
    log_max = _log_pmf(stat, m)
    cut = log_max + math.log(_TRUNC_REL)
    n = m
    step = max(1, int(math.sqrt(max(stat.param, 1.0))))
    while _log_pmf(stat, n) >= cut:
        n += step
    # back off to the first index below the cutoff
    lo = max(m, n - step)
    while _log_pmf(stat, lo) >= cut:
        lo += 1
    return lo


def pmf_vector(stat: PhotonStatistics, n_max: int | None = None) -> np.ndarray:
    """``[P_0, ..., P_N]`` with ``N`` defaulting to :func:`truncation_point`."""
    if n_max is None:
        n_max = truncation_point(stat)
    if stat.kind == CUSTOM:
        out = np.zeros(n_max + 1)
        k = min(n_max + 1, len(stat.probs))
        out[:k] = stat.probs[:k]
        return out
    return np.array([math.exp(_log_pmf(stat, n)) for n in range(n_max + 1)])


# ---------------------------------------------------------------- moments


def subpoisson_mean(lam: float) -> float:
    """Mean photon number ``sqrt(lam) I1(2 sqrt(lam)) / I0(2 sqrt(lam))``."""
    if lam < 0.0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if lam == 0.0:
        return 0.0
    z = 2.0 * math.sqrt(lam)
    return math.sqrt(lam) * specfun.bessel_i(1, z, scaled=True) / specfun.bessel_i(0, z, scaled=True)


def _mandel(mean: float, second: float) -> float:
    if mean <= 0.0:
        return math.nan
    return (second - mean * mean) / mean - 1.0


def moments(stat: PhotonStatistics) -> Moments:
    """Mean, second moment and Mandel Q (closed forms where they exist)."""
    p = stat.param
    if stat.kind == POISSON:
        return Moments(p, p * p + p, 0.0 if p > 0 else math.nan)
    if stat.kind == THERMAL:
        return Moments(p, 2.0 * p * p + p, p if p > 0 else math.nan)
    if stat.kind == SUBPOISSON:
        mean = subpoisson_mean(p)
        return Moments(mean, p, _mandel(mean, p))
    probs = stat.probs
    mean = math.fsum(n * v for n, v in enumerate(probs))
    second = math.fsum(n * n * v for n, v in enumerate(probs))
    return Moments(mean, second, _mandel(mean, second))


def mandel_q(stat: PhotonStatistics) -> float:
    """Mandel parameter ``Var(n)/<n> - 1``; undefined at zero mean."""
    m = moments(stat)
    if m.mean <= 0.0:
        raise UndefinedQuantityError("Mandel Q is undefined for zero mean photon number")
    return m.mandel_q


# ---------------------------------------------------------------- generating function


def subpoisson_generating_fn(lam: float, x: float) -> float:
    """``C0(lam x) / C0(lam)`` evaluated without overflow."""
    if lam == 0.0:
        return 1.0
    y = lam * x
    z_ref = 2.0 * math.sqrt(lam)
    den = specfun.bessel_i(0, z_ref, scaled=True)
    num = specfun.bessel_clifford_c0_scaled(y)
    shift = (2.0 * math.sqrt(y) if y > 0.0 else 0.0) - z_ref
    return num / den * math.exp(shift)


def generating_fn(stat: PhotonStatistics, x: float) -> float:
    """Probability generating function ``G(x) = sum_n P_n x**n``.

    Uses closed forms continued analytically to every real ``x`` where they
    exist; for thermal light that is ``1 / (1 + nbar (1 - x))`` which has a
    pole at ``x = 1 + 1/nbar``.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    p = stat.param
    if stat.kind == POISSON:
        return math.exp(p * (x - 1.0))
    if stat.kind == THERMAL:
        d = 1.0 + p * (1.0 - x)
        if d <= 0.0:
            raise PoleError(f"thermal generating function has no continuation at x={x}, nbar={p}")
        return 1.0 / d
    if stat.kind == SUBPOISSON:
        return subpoisson_generating_fn(p, x)
    acc = 0.0
    for v in reversed(stat.probs):
        acc = acc * x + v
    return acc


# ---------------------------------------------------------------- lambda inversion


def lambda_for_mean(nbar: float) -> float:
    """Solve ``subpoisson_mean(lam) == nbar`` for ``lam``.

    The mean is strictly increasing in ``lam`` and behaves like
    ``sqrt(lam) - 1/4`` for large ``lam``, so ``[0, max(1, 4 nbar**2)]``
    always brackets the root.
    """
    nbar = float(nbar)
    if not (math.isfinite(nbar) and nbar > 0.0):
        raise DomainError(f"mean photon number must be > 0, got {nbar}")
    hi = max(1.0, 4.0 * nbar * nbar)
    # the rtol floor keeps brentq happy for tiny nbar where lam ~ nbar
    return brentq(lambda lam: subpoisson_mean(lam) - nbar, 0.0, hi,
                  xtol=1e-300, rtol=4 * 2.220446049250313e-16, maxiter=500)


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class BranchAmplitude:
    """One coherent-state branch ``alpha = sqrt(magnitude_sq) exp(i phase)``."""

    magnitude_sq: float
    phase: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.magnitude_sq) and self.magnitude_sq >= 0.0):
            raise DomainError(f"|alpha|^2 must be finite and >= 0, got {self.magnitude_sq}")
        object.__setattr__(self, "phase", float(self.phase) % (2.0 * math.pi))

    @classmethod
    def from_complex(cls, alpha: complex) -> "BranchAmplitude":
        return cls(abs(alpha) ** 2, math.atan2(alpha.imag, alpha.real))

    @property
    def alpha(self) -> complex:
        return math.sqrt(self.magnitude_sq) * complex(math.cos(self.phase), math.sin(self.phase))


@dataclass(frozen=True)
class BranchSamples:
    """Column-oriented batch of branch amplitudes."""

    magnitude_sq: np.ndarray
    phase: np.ndarray

    def __len__(self) -> int:
        return len(self.magnitude_sq)

    def __iter__(self) -> Iterator[BranchAmplitude]:
        for x, ph in zip(self.magnitude_sq, self.phase):
            yield BranchAmplitude(float(x), float(ph))

    def __getitem__(self, i: int) -> BranchAmplitude:
        return BranchAmplitude(float(self.magnitude_sq[i]), float(self.phase[i]))


def make_rng(seed) -> np.random.Generator:
    """Counter-based Philox generator; ``seed`` may be an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


def sample_classical(stat: PhotonStatistics, seed, n: int) -> BranchSamples:
    """Draw ``n`` coherent-state branches from the P function of ``stat``.

    Poisson light is the phase-averaged coherent state (fixed ``|alpha|**2``,
    uniform phase); thermal light has a Gaussian P function with
    ``E|alpha|**2 = nbar``. Other statistics have no nonnegative P function.
    """
    if not stat.is_classical:
        raise NonclassicalStateError(
            f"{stat.kind} statistics have no nonnegative P function to sample from"
        )
    n = int(n)
    if n < 0:
        raise DomainError(f"sample count must be >= 0, got {n}")
    rng = make_rng(seed)
    if stat.kind == POISSON:
        phase = rng.uniform(0.0, 2.0 * math.pi, size=n)
        return BranchSamples(np.full(n, stat.param), phase)
    sd = math.sqrt(stat.param / 2.0)
    re = rng.normal(0.0, sd, size=n)
    im = rng.normal(0.0, sd, size=n)
    return BranchSamples(re * re + im * im, np.mod(np.arctan2(im, re), 2.0 * math.pi))


# ---------------------------------------------------------------- CSV i/o


def write_distribution_csv(stat: PhotonStatistics, path, n_max: int | None = None) -> None:
    """Write ``n,P_n`` rows up to the truncation point."""
    probs = pmf_vector(stat, n_max)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(format_distribution_csv(probs))


def format_distribution_csv(probs) -> str:
    lines = ["n,P_n"]
    lines += [f"{n},{float(v):.12g}" for n, v in enumerate(probs)]
    return "\n".join(lines) + "\n"


def read_distribution_csv(path) -> PhotonStatistics:
    """Load a custom distribution from a ``n,P_n`` CSV file.

    Rows may come in any order; missing ``n`` values are zero. The result
    must be normalised to within 1e-12.
    """
    rows: dict[int, float] = {}
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["n", "P_n"]:
            raise DomainError(f"{path}: expected header 'n,P_n'")
        for row in reader:
            n = int(row["n"])
            if n < 0 or n in rows:
                raise DomainError(f"{path}: bad or duplicate photon number {n}")
            rows[n] = float(row["P_n"])
    if not rows:
        raise DomainError(f"{path}: no rows")
    probs = [0.0] * (max(rows) + 1)
    for n, v in rows.items():
        probs[n] = v
    return PhotonStatistics.custom(probs)
