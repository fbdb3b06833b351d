"""Steady-state photoelectric currents of the two-level converter.

Currents are dimensionless: ``J / gamma`` where ``gamma`` is the common
tunnelling rate (or an explicit reference rate for the full model). The
coupling enters only through ``r_sq = (gamma / |xi0|)**2``.

For a coherent branch with ``|alpha|**2 = x`` the current is
``2x / (4x + r_sq)``. Averaging over a Fock-diagonal state with generating
function ``G`` gives

    J = 1/2 * (1 - r_sq * int_0^inf exp(-r_sq s) G(1 - 4s) ds)

which the quadrature routines evaluate after the substitution
``u = exp(-r_sq s)``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import photon_stats as ps
from . import specfun
from .errors import AccuracyError, DegenerateParametersError, DomainError

log = logging.getLogger(__name__)

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-11
QUAD_LIMIT = 400


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"
    ODE_ORACLE = "ode_oracle"
    FOCK_SUM = "fock_sum"


@dataclass(frozen=True)
class CurrentResult:
    value: float
    method: Method
    est_error: float = 0.0

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class ConverterParams:
    """Rates and lead occupations of the converter.

    Rates are in arbitrary but common units; ``gamma_ref`` fixes the unit in
    which currents are reported and, together with ``r_sq``, the coupling
    ``|xi0| = gamma_ref / sqrt(r_sq)``. ``detuning`` adds ``detuning * N_a``
    to the rotating-frame Hamiltonian; ``xi_phase`` is the phase of ``xi0``.
    """

    gamma_a: float = 1.0
    gamma_b: float = 1.0
    kappa: float = 0.0
    nbar_a: float = 0.0
    nbar_b: float = 1.0
    r_sq: float = 1.5
    gamma_ref: float = 1.0
    detuning: float = 0.0
    xi_phase: float = 0.0

    def __post_init__(self):
        for name in ("gamma_a", "gamma_b", "kappa", "gamma_ref"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise DomainError(f"{name} must be finite and >= 0, got {v}")
        for name in ("nbar_a", "nbar_b"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if not (math.isfinite(self.r_sq) and self.r_sq > 0.0):
            raise DomainError(f"r_sq must be finite and > 0, got {self.r_sq}")
        if not (math.isfinite(self.detuning) and math.isfinite(self.xi_phase)):
            raise DomainError("detuning and xi_phase must be finite")

    @classmethod
    def simplified(cls, r_sq: float, gamma: float = 1.0) -> "ConverterParams":
        """Equal tunnelling rates, no spontaneous emission, zero-temperature leads."""
        return cls(gamma, gamma, 0.0, 0.0, 1.0, r_sq, gamma)

    @property
    def is_simplified(self) -> bool:
        return (self.gamma_a == self.gamma_b and self.kappa == 0.0
                and self.nbar_a == 0.0 and self.nbar_b == 1.0)

    @property
    def xi0(self) -> complex:
        mag = self.gamma_ref / math.sqrt(self.r_sq)
        return mag * complex(math.cos(self.xi_phase), math.sin(self.xi_phase))

    @property
    def xi0_abs_sq(self) -> float:
        return self.gamma_ref**2 / self.r_sq

    def scaled(self, factor: float) -> "ConverterParams":
        """Multiply every rate (and the reference rate) by ``factor``."""
        return ConverterParams(self.gamma_a * factor, self.gamma_b * factor, self.kappa * factor,
                               self.nbar_a, self.nbar_b, self.r_sq, self.gamma_ref * factor,
                               self.detuning * factor, self.xi_phase)


def _check_r_sq(r_sq: float) -> None:
    if not (math.isfinite(r_sq) and r_sq > 0.0):
        raise DomainError(f"r_sq must be finite and > 0, got {r_sq}")


# ---------------------------------------------------------------- coherent branch


def branch_current(x, r_sq: float):
    """Current of a coherent branch with ``|alpha|**2 = x``; accepts arrays."""
    _check_r_sq(r_sq)
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0):
        raise DomainError("|alpha|^2 must be finite and >= 0")
    out = 2.0 * arr / (4.0 * arr + r_sq)
    return float(out) if out.ndim == 0 else out


def full_branch_current(params: ConverterParams, x: float) -> float:
    """Right-lead current ``J_R / gamma_ref`` with all rates and occupations.

    Resonant driving is assumed (``params.detuning`` is ignored).
    """
    if not (math.isfinite(x) and x >= 0.0):
        raise DomainError(f"|alpha|^2 must be finite and >= 0, got {x}")
    ga, gb, k = params.gamma_a, params.gamma_b, params.kappa
    na, nb = params.nbar_a, params.nbar_b
    drive = 4.0 * x * params.xi0_abs_sq
    total = ga + gb + k
    num = drive * ga * gb * (nb - na) - k * ga * gb * total * na
    den = drive * (ga + gb) + gb * (ga + k) * total
    if den <= 0.0 or params.gamma_ref <= 0.0:
        raise DegenerateParametersError("current denominator vanishes; rates are degenerate")
    return num / den / params.gamma_ref


# ---------------------------------------------------------------- closed forms


def thermal_current(nbar: float, r_sq: float) -> float:
    """Current for thermal light, ``1/2 [1 - u exp(u) E1(u)]`` with ``u = r_sq / 4 nbar``.

    ``nbar = 0`` returns 0, the continuous extension.
    """
    _check_r_sq(r_sq)
    if not (math.isfinite(nbar) and nbar >= 0.0):
        raise DomainError(f"nbar must be finite and >= 0, got {nbar}")
    if nbar == 0.0:
        log.debug("thermal_current: nbar = 0, returning continuous extension 0")
        return 0.0
    u = r_sq / (4.0 * nbar)
    # Ei(-u) = -E1(u)
    return 0.5 * (1.0 - u * specfun.exp_integral_e1_scaled(u))


def weak_intensity_current(stat: ps.PhotonStatistics, r_sq: float) -> float:
    """Statistics-independent small-intensity limit ``2 nbar / r_sq``."""
    _check_r_sq(r_sq)
    return 2.0 * ps.moments(stat).mean / r_sq


# ---------------------------------------------------------------- Fock states


def _tail_integral(n: int, a: float) -> float:
    """``T_n(a) = int_0^1 exp(-a v) (1 - v)**n dv`` for ``a > 0``."""
    if a <= 700.0:
        # exp(-a) * sum_k a^k / (k! (n+k+1)); positive terms
        term = 1.0
        total = 1.0 / (n + 1)
        k = 1
        while True:
            term *= a / k
            contrib = term / (n + k + 1)
            total += contrib
            if k > a and contrib < 1e-18 * total:
                break
            k += 1
        return total * math.exp(-a)
    if n < 0.5 * a:
        # forward recurrence T_n = (1 - n T_{n-1}) / a, damped since n / a < 1
        t = -math.expm1(-a) / a
        for j in range(1, n + 1):
            t = (1.0 - j * t) / a
        return t
    # Poisson-weighted sum, sum_k Pois(k; a) / (n + k + 1)
    lo = max(0, int(a - 40.0 * math.sqrt(a)))
    hi = int(a + 40.0 * math.sqrt(a)) + 1
    la = math.log(a)
    terms = [math.exp(-a + k * la - math.lgamma(k + 1)) / (n + k + 1) for k in range(lo, hi)]
    return math.fsum(terms)


def fock_integral(n: int, c: float) -> float:
    """``F_n(c) = int_0^inf exp(-c s) (1 - 4s)**n ds``.

    Split at ``1 - 4s = 0``: the part with ``1 - 4s < 0`` integrates to
    ``(-1)**n n! (4/c)**(n+1) exp(-c/4) / 4`` in closed form, the rest is
    a finite incomplete-gamma type integral summed with positive terms.
    """
    n = int(n)
    if n < 0:
        raise DomainError(f"photon number must be >= 0, got {n}")
    _check_r_sq(c)
    a = 0.25 * c
    log_big = -a + math.lgamma(n + 1) - (n + 1) * math.log(a)
    try:
        big = math.exp(log_big)
    except OverflowError:
        raise DomainError(f"F_{n}({c}) is not representable in double precision") from None
    if n % 2:
        big = -big
    return 0.25 * (big + _tail_integral(n, a))


def fock_current(n: int, r_sq: float) -> float:
    """Normal-ordered current for the Fock state ``|n>``.

    Not bounded by 1/2: a single photon already gives ``2 / r_sq``.
    """
    return 0.5 * (1.0 - r_sq * fock_integral(n, r_sq))


# ---------------------------------------------------------------- quadrature currents


def _quad(f, a, b, what):
    val, err, *rest = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL,
                                     limit=QUAD_LIMIT, full_output=1)
    ier = rest[1] if len(rest) > 1 else 0
    # ier 0 success; 2 is roundoff detected near the target, accept if err is small
    if ier not in (0, 2) or err > 1e-9:
        raise AccuracyError(f"quadrature for {what} did not converge (err={err:.2e})", partial=val)
    return val, err


def _mapped_integral(g, r_sq: float, what: str):
    # r_sq * int_0^inf exp(-r_sq s) g(1-4s) ds  ==  int_0^1 g(1 + 4 ln(u) / r_sq) du
    scale = 4.0 / r_sq

    def integrand(u):
        return g(1.0 + scale * math.log(u))

    return _quad(integrand, 0.0, 1.0, what)


def _sub_ratio(lam: float, y: float, log_den: float) -> float:
    # C0(y) / C0(lam) where log_den = log C0(lam); y may be hugely negative
    if y >= 0.0:
        z = 2.0 * math.sqrt(y)
        return specfun.bessel_i(0, z, scaled=True) * math.exp(z - log_den)
    return specfun.bessel_j0(2.0 * math.sqrt(-y)) * math.exp(-log_den)


def subpoisson_current(lam: float, r_sq: float) -> CurrentResult:
    """Current for the sub-Poisson family, integrated directly in ``s``.

    The integrand ``exp(-r_sq s) C0(lam (1 - 4s)) / C0(lam)`` is smooth and
    exponentially growing in ``s < 1/4`` and oscillatory (``J0``) beyond, so
    the two pieces are integrated separately.
    """
    _check_r_sq(r_sq)
    if not (math.isfinite(lam) and lam >= 0.0):
        raise DomainError(f"lambda must be finite and >= 0, got {lam}")
    if lam == 0.0:
        return CurrentResult(0.0, Method.QUADRATURE, 0.0)
    z = 2.0 * math.sqrt(lam)
    log_den = math.log(specfun.bessel_i(0, z, scaled=True)) + z

    def f(s):
        return math.exp(-r_sq * s) * _sub_ratio(lam, lam * (1.0 - 4.0 * s), log_den)

    head, e1 = _quad(f, 0.0, 0.25, "sub-Poisson current (s < 1/4)")
    tail, e2 = _quad(f, 0.25, math.inf, "sub-Poisson current (s > 1/4)")
    value = 0.5 * (1.0 - r_sq * (head + tail))
    return CurrentResult(value, Method.QUADRATURE, 0.5 * r_sq * (e1 + e2))


def fock_sum_current(stat: ps.PhotonStatistics, r_sq: float) -> CurrentResult:
    """``sum_n P_n j_n`` over the (truncated) photon-number distribution.

    Exact for custom distributions. For broad distributions the individual
    ``j_n`` grow factorially with alternating sign and the sum loses
    precision; prefer the quadrature route there.
    """
    _check_r_sq(r_sq)
    probs = ps.pmf_vector(stat)
    terms = [p * fock_current(n, r_sq) for n, p in enumerate(probs) if p != 0.0]
    scale = max((abs(t) for t in terms), default=0.0)
    return CurrentResult(math.fsum(terms), Method.FOCK_SUM, 1e-15 * len(terms) * scale)


def generic_current(stat: ps.PhotonStatistics, r_sq: float, method: str = "auto") -> CurrentResult:
    """Current for any Fock-diagonal state via its generating function.

    ``method="quadrature"`` integrates ``G(1 - 4s)`` against ``exp(-r_sq s)``;
    ``method="fock_sum"`` sums per-Fock currents. ``"auto"`` picks the sum for
    custom distributions and quadrature otherwise.
    """
    _check_r_sq(r_sq)
    if method == "auto":
        method = "fock_sum" if stat.kind == ps.CUSTOM else "quadrature"
    if method == "fock_sum":
        return fock_sum_current(stat, r_sq)
    if method != "quadrature":
        raise DomainError(f"unknown method {method!r}")
    if stat.kind != ps.CUSTOM and stat.param == 0.0:
        return CurrentResult(0.0, Method.QUADRATURE, 0.0)
    if stat.kind == ps.SUBPOISSON:
        # reuse the overflow-safe ratio; generating_fn caps |lam x| for its public surface
        lam = stat.param
        z = 2.0 * math.sqrt(lam)
        log_den = math.log(specfun.bessel_i(0, z, scaled=True)) + z

        def g(x):
            return _sub_ratio(lam, lam * x, log_den)
    else:
        def g(x):
            return ps.generating_fn(stat, x)

    integral, err = _mapped_integral(g, r_sq, f"{stat.kind} current")
    return CurrentResult(0.5 * (1.0 - integral), Method.QUADRATURE, 0.5 * err)


def poisson_current(nbar: float, r_sq: float) -> float:
    """Phase-averaged coherent light: identical to a single branch at ``x = nbar``."""
    return branch_current(nbar, r_sq)


def current(stat: ps.PhotonStatistics, r_sq: float) -> CurrentResult:
    """Best available evaluation for ``stat`` (closed form when one exists)."""
    if stat.kind == ps.POISSON:
        return CurrentResult(branch_current(stat.param, r_sq), Method.CLOSED_FORM)
    if stat.kind == ps.THERMAL:
        return CurrentResult(thermal_current(stat.param, r_sq), Method.CLOSED_FORM)
    if stat.kind == ps.SUBPOISSON:
        return subpoisson_current(stat.param, r_sq)
    return generic_current(stat, r_sq)


def full_statistics_current(params: ConverterParams, stat: ps.PhotonStatistics) -> CurrentResult:
    """Full-model current ``J_R / gamma_ref`` averaged over ``stat``.

    The full branch current is a Moebius function of ``|alpha|**2`` with the
    same pole structure as the simplified one, so it is an affine image of
    ``branch_current`` at the effective ratio
    ``r_eff = gamma_b (gamma_a + kappa) Sigma / ((gamma_a + gamma_b) |xi0|**2)``.
    Averaging commutes with the affine map, which reduces the problem to
    :func:`current` at ``r_eff``.
    """
    ga, gb, k = params.gamma_a, params.gamma_b, params.kappa
    na, nb = params.nbar_a, params.nbar_b
    total = ga + gb + k
    p = ga * gb * (nb - na)
    q = -k * ga * gb * total * na
    rr = ga + gb
    d = gb * (ga + k) * total
    if rr <= 0.0 or d <= 0.0:
        raise DegenerateParametersError("current denominator vanishes; rates are degenerate")
    r_eff = d / (rr * params.xi0_abs_sq)
    inner = current(stat, r_eff)
    slope = (q - p * d / rr) / d
    value = (p / rr + slope * (1.0 - 2.0 * inner.value)) / params.gamma_ref
    err = 2.0 * abs(slope) * inner.est_error / params.gamma_ref
    return CurrentResult(value, inner.method, err)
