"""Special functions used by the closed-form currents.

Everything here is scalar, pure and written against the standard library
only: the exponential integral ``Ei`` on the negative axis, the modified
Bessel functions ``I0``/``I1``, the Bessel function ``J0`` and the
Bessel-Clifford series ``C0(x) = sum_n x**n / (n!)**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286060651209008240243

_EPS = 2.220446049250313e-16
_TINY = 1e-300
# largest argument with exp(x) finite in double precision
_EXP_MAX = 709.0
# series/continued-fraction switch for E1; both reach ~1e-16 relative here
_E1_SWITCH = 1.0
_I_SERIES_MAX = 25.0
_J0_SERIES_MAX = 8.0
_J0_MILLER_MAX = 25.0
C0_ARG_MAX = 1e6


@dataclass(frozen=True)
class SpecfunResult:
    """A function value with a rough absolute error estimate.

    ``scaled`` is set when ``value`` carries an ``exp(-x)`` factor because the
    unscaled number is not representable.
    """

    value: float
    est_abs_error: float
    scaled: bool = False


def _check_finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return x


# ---------------------------------------------------------------- exponential integral


def _e1_series(u: float) -> float:
    # E1(u) = -gamma - ln u - sum_{k>=1} (-u)^k / (k k!)
    term = 1.0
    terms = []
    k = 1
    while True:
        term *= -u / k
        contrib = term / k
        terms.append(contrib)
        if abs(contrib) < _EPS * 1e-2 * max(1.0, abs(terms[0])):
            break
        k += 1
    return -EULER_GAMMA - math.log(u) - math.fsum(terms)


def _e1_cf_scaled(u: float) -> float:
    """exp(u) * E1(u) by the modified Lentz continued fraction, u > 0."""
    b = u + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge at u={u}")


def exp_integral_e1_scaled(u: float) -> float:
    """Return ``exp(u) * E1(u)`` for ``u > 0`` without overflow."""
    u = _check_finite(u, "u")
    if u <= 0.0:
        raise DomainError(f"E1 needs u > 0, got {u}")
    if u <= _E1_SWITCH:
        return math.exp(u) * _e1_series(u)
    return _e1_cf_scaled(u)


def exp_integral_e1(u: float) -> float:
    """Exponential integral ``E1(u) = int_u^inf exp(-t)/t dt`` for ``u > 0``."""
    u = _check_finite(u, "u")
    if u <= 0.0:
        raise DomainError(f"E1 needs u > 0, got {u}")
    if u <= _E1_SWITCH:
        return _e1_series(u)
    if u > 745.0:
        return 0.0
    return _e1_cf_scaled(u) * math.exp(-u)


def exp_integral_ei(x: float) -> float:
    """Exponential integral ``Ei(x)`` on the negative axis.

    ``Ei(x) = -E1(-x)``; only ``x < 0`` is supported.
    """
    x = _check_finite(x)
    if x >= 0.0:
        raise DomainError(f"exp_integral_ei is defined here for x < 0 only, got {x}")
    return -exp_integral_e1(-x)


# ---------------------------------------------------------------- modified Bessel I0, I1


def _bessel_i_series_scaled(order: int, x: float) -> float:
    # exp(-x) * sum_k (x/2)^(2k+order) / (k! (k+order)!); all terms positive
    half = 0.5 * x
    q = half * half
    term = 1.0 if order == 0 else half
    total = term
    k = 1
    while True:
        term *= q / (k * (k + order))
        total += term
        if term < _EPS * 1e-2 * total:
            break
        k += 1
    return total * math.exp(-x)


def _bessel_i_asymptotic_scaled(order: int, x: float) -> float:
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    prev = math.inf
    k = 1
    while True:
        term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) >= prev:
            break
        total += term
        if abs(term) < _EPS * 1e-2:
            break
        prev = abs(term)
        k += 1
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i(order: int, x: float, scaled: bool = False) -> float:
    """Modified Bessel function of the first kind, order 0 or 1.

    With ``scaled=True`` returns ``exp(-x) * I_order(x)``, which is finite for
    every ``x >= 0``. Unscaled evaluation raises ``OverflowError`` past the
    double-precision range; use :func:`bessel_i_checked` to fall back to the
    scaled value automatically.
    """
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    x = _check_finite(x)
    if x < 0.0:
        raise DomainError(f"bessel_i needs x >= 0, got {x}")
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x <= _I_SERIES_MAX:
        val = _bessel_i_series_scaled(order, x)
    else:
        val = _bessel_i_asymptotic_scaled(order, x)
    if scaled:
        return val
    if x > _EXP_MAX:
        raise OverflowError(f"I_{order}({x}) overflows; request scaled=True")
    return val * math.exp(x)


def bessel_i_checked(order: int, x: float) -> SpecfunResult:
    """``I_order(x)`` with an error estimate; scaled by ``exp(-x)`` if it must be."""
    val = bessel_i(order, x, scaled=True)
    err = 8.0 * _EPS * val
    if x <= _EXP_MAX:
        f = math.exp(x)
        return SpecfunResult(val * f, err * f, scaled=False)
    return SpecfunResult(val, err, scaled=True)


# ---------------------------------------------------------------- J0 and C0


def _j0_series(z: float) -> float:
    q = -0.25 * z * z
    term = 1.0
    terms = [term]
    k = 1
    while True:
        term *= q / (k * k)
        terms.append(term)
        if abs(term) < _EPS * 1e-3:
            break
        k += 1
    return math.fsum(terms)


def _j0_miller(z: float) -> float:
    # backward recurrence J_{k-1} = (2k/z) J_k - J_{k+1}, normalised by
    # J0 + 2 * sum_{k>=1} J_{2k} = 1
    start = 2 * ((int(z) + int(math.sqrt(40.0 * z)) + 30) // 2)
    j_next, j_cur = 0.0, 1e-30
    norm_terms = []
    j0 = 0.0
    for k in range(start, 0, -1):
        j_prev = (2.0 * k / z) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if abs(j_cur) > 1e250:
            j_next *= 1e-250
            j_cur *= 1e-250
            norm_terms = [t * 1e-250 for t in norm_terms]
        # j_cur now holds J_{k-1}
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm_terms.append(2.0 * j_cur)
    j0 = j_cur
    norm_terms.append(j0)
    return j0 / math.fsum(norm_terms)


def _j0_asymptotic(z: float) -> float:
    # Hankel expansion, nu = 0: a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k)
    p_terms = [1.0]
    q_terms = []
    a = 1.0
    prev = math.inf
    k = 1
    while True:
        a *= -((2 * k - 1) ** 2) / (k * 8.0)
        t = a / z**k
        if abs(t) >= prev or abs(t) < _EPS * 1e-3:
            break
        prev = abs(t)
        # (-1)^m a_{2m} / z^{2m} for P, (-1)^m a_{2m+1} / z^{2m+1} for Q
        m = k // 2
        sign = -1.0 if m % 2 else 1.0
        (p_terms if k % 2 == 0 else q_terms).append(sign * t)
        k += 1
    p = math.fsum(p_terms)
    q = math.fsum(q_terms)
    chi = z - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j0(z: float) -> float:
    """Bessel function of the first kind ``J0(z)`` for real ``z``."""
    z = abs(_check_finite(z, "z"))
    if z <= _J0_SERIES_MAX:
        return _j0_series(z)
    if z <= _J0_MILLER_MAX:
        return _j0_miller(z)
    return _j0_asymptotic(z)


def bessel_clifford_c0(x: float) -> float:
    """Entire series ``C0(x) = sum_{n>=0} x**n / (n!)**2``.

    Equals ``I0(2 sqrt(x))`` for ``x >= 0`` and ``J0(2 sqrt(-x))`` for
    ``x < 0``. Small negative arguments are summed directly with compensated
    accumulation; larger ones go through :func:`bessel_j0` because the
    alternating series loses all digits there.
    """
    x = _check_finite(x)
    if abs(x) > C0_ARG_MAX:
        raise DomainError(f"|x| must be <= {C0_ARG_MAX:g}, got {x}")
    if x >= 0.0:
        return bessel_i(0, 2.0 * math.sqrt(x))
    return bessel_j0(2.0 * math.sqrt(-x))


def bessel_clifford_c0_scaled(x: float) -> float:
    """``C0(x) * exp(-2 sqrt(max(x, 0)))``; finite over the whole domain."""
    x = _check_finite(x)
    if abs(x) > C0_ARG_MAX:
        raise DomainError(f"|x| must be <= {C0_ARG_MAX:g}, got {x}")
    if x >= 0.0:
        return bessel_i(0, 2.0 * math.sqrt(x), scaled=True)
    return bessel_j0(2.0 * math.sqrt(-x))
