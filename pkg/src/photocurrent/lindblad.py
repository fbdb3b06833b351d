"""Dynamical oracles for the converter and for a driven two-level system.

Two independent routes to the steady state of one coherent branch:

* the closed set of equations of motion for ``<N_a>``, ``<N_b>``,
  ``<tau+>``, ``<tau->``, integrated in time until the right-hand side
  vanishes (and, separately, solved in closed form);
* the full Lindblad master equation on the 4-dimensional fermionic Fock
  space of levels ``a`` and ``b``, whose steady state is the kernel of the
  vectorised Liouvillian.

Fermions are represented with a Jordan-Wigner string on mode ``b`` (modes
ordered ``a``, ``b``). Basis states are ``|n_a n_b>`` in the order
``|00>, |01>, |10>, |11>``, so ``tau+ = a^dag b`` is the matrix unit
``|10><01|``.

The equations of motion treat spontaneous emission as ``-kappa <N_a>``;
the master equation blocks that decay when level ``b`` is already
occupied, i.e. ``-kappa <N_a (1 - N_b)>``. The two routes therefore agree
exactly only for ``kappa = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from scipy.integrate import solve_ivp

from .currents import ConverterParams
from .errors import (ConvergenceError, DegenerateParametersError, DomainError,
                     NonUniqueSteadyStateError)
from .photon_stats import BranchAmplitude


@dataclass(frozen=True)
class ObservableState:
    n_a: float
    n_b: float
    tau_plus: complex
    tau_minus: complex

    def as_vector(self) -> np.ndarray:
        return np.array([self.n_a, self.n_b, self.tau_plus, self.tau_minus], dtype=complex)

    @classmethod
    def from_vector(cls, y) -> "ObservableState":
        return cls(float(np.real(y[0])), float(np.real(y[1])), complex(y[2]), complex(y[3]))

    def right_current(self, params: ConverterParams) -> float:
        """``J_R / gamma_ref`` carried by this state."""
        na = params.nbar_a
        return params.gamma_a * ((1.0 - na) * self.n_a - na * (1.0 - self.n_a)) / params.gamma_ref


def _as_alpha(alpha) -> complex:
    if isinstance(alpha, BranchAmplitude):
        return alpha.alpha
    return complex(alpha)


# ---------------------------------------------------------------- equations of motion


def eom_matrix(params: ConverterParams, alpha) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(A, b)`` with ``d/dt y = A y + b`` for ``y = (n_a, n_b, tau+, tau-)``."""
    g = params.xi0 * _as_alpha(alpha)
    gc = g.conjugate()
    ga, gb, k = params.gamma_a, params.gamma_b, params.kappa
    na, nb = params.nbar_a, params.nbar_b
    half = 0.5 * (ga + gb + k)
    delta = params.detuning
    # lead term: -gamma [(1 - nbar) n - nbar (1 - n)] = -gamma n + gamma nbar
    A = np.array([
        [-ga - k, 0.0, g, gc],
        [k, -gb, -g, -gc],
        [-gc, gc, -half + 1j * delta, 0.0],
        [-g, g, 0.0, -half - 1j * delta],
    ], dtype=complex)
    b = np.array([ga * na, gb * nb, 0.0, 0.0], dtype=complex)
    return A, b


def eom_rhs(state: ObservableState, params: ConverterParams, alpha) -> ObservableState:
    """Time derivative of the observable set (as an ``ObservableState``)."""
    A, b = eom_matrix(params, alpha)
    return ObservableState.from_vector(A @ state.as_vector() + b)


def analytic_steady(params: ConverterParams, alpha) -> ObservableState:
    """Closed-form fixed point of the equations of motion (resonant drive)."""
    a = _as_alpha(alpha)
    x = abs(a) ** 2
    xi = params.xi0
    ga, gb, k = params.gamma_a, params.gamma_b, params.kappa
    na, nb = params.nbar_a, params.nbar_b
    total = ga + gb + k
    drive = 4.0 * x * params.xi0_abs_sq
    den = drive * (ga + gb) + gb * (ga + k) * total
    if den <= 0.0:
        raise DegenerateParametersError("steady-state denominator vanishes")
    lead_mix = ga * na + gb * nb
    n_a = (drive * lead_mix + ga * gb * total * na) / den
    n_b = (drive * lead_mix + total * (k * ga * na + (k + ga) * gb * nb)) / den
    tau_p = 2.0 * xi.conjugate() * a.conjugate() * (ga * gb * (nb - na) + k * lead_mix) / den
    return ObservableState(n_a, n_b, tau_p, tau_p.conjugate())


def integrate_to_steady(params: ConverterParams, alpha, tol: float = 1e-12,
                        initial: ObservableState | None = None,
                        max_time: float = 1e7) -> ObservableState:
    """Integrate the equations of motion until ``|dy/dt| < tol * max(|y|, 1)``.

    Uses an explicit adaptive Runge-Kutta pair (Dormand-Prince 8(5,3)) in
    chunks of doubling length; the convergence test is on the right-hand
    side, not on successive states, so slow modes are not mistaken for a
    fixed point.
    """
    if tol <= 0.0:
        raise DomainError(f"tol must be > 0, got {tol}")
    if params.gamma_a + params.gamma_b + params.kappa <= 0.0:
        raise DegenerateParametersError("no dissipation: the dynamics has no steady state")
    A, b = eom_matrix(params, alpha)
    if initial is None:
        initial = ObservableState(params.nbar_a, params.nbar_b, 0j, 0j)
    y = initial.as_vector()

    def rhs(_t, yy):
        return A @ yy + b

    # first chunk spans ten e-foldings of the slowest relaxation mode
    slowest = float(np.min(np.abs(np.linalg.eigvals(A).real)))
    if slowest <= 0.0:
        raise DegenerateParametersError("a mode of the equations of motion does not relax")
    chunk = 10.0 / slowest
    elapsed = 0.0
    while True:
        if np.linalg.norm(rhs(0.0, y)) < tol * max(np.linalg.norm(y), 1.0):
            return ObservableState.from_vector(y)
        if elapsed > max_time:
            raise ConvergenceError(f"no steady state within t = {max_time:g}")
        sol = solve_ivp(rhs, (0.0, chunk), y, method="DOP853", rtol=1e-13, atol=1e-15)
        if not sol.success:
            raise ConvergenceError(f"integrator failed: {sol.message}")
        y = sol.y[:, -1]
        elapsed += chunk
        chunk *= 2.0


# ---------------------------------------------------------------- density matrices


@dataclass(frozen=True)
class DensityMatrix:
    rho: np.ndarray

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ op))

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))))

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))


def _lower() -> np.ndarray:
    return np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


_I2 = np.eye(2, dtype=complex)
_Z = np.diag([1.0, -1.0]).astype(complex)

# fermionic annihilators on the |n_a n_b> basis, string attached to b
A_OP = np.kron(_lower(), _I2)
B_OP = np.kron(_Z, _lower())
N_A = A_OP.conj().T @ A_OP
N_B = B_OP.conj().T @ B_OP
TAU_PLUS = A_OP.conj().T @ B_OP
TAU_MINUS = TAU_PLUS.conj().T


def liouvillian(hamiltonian: np.ndarray, jumps) -> np.ndarray:
    """Column-stacked Liouvillian, ``vec(d rho/dt) = L vec(rho)``."""
    h = np.asarray(hamiltonian, dtype=complex)
    d = h.shape[0]
    eye = np.eye(d, dtype=complex)
    out = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for jump in jumps:
        jump = np.asarray(jump, dtype=complex)
        jdj = jump.conj().T @ jump
        out += np.kron(jump.conj(), jump) - 0.5 * np.kron(eye, jdj) - 0.5 * np.kron(jdj.T, eye)
    return out


def _vec_to_rho(v: np.ndarray, d: int) -> np.ndarray:
    rho = v.reshape(d, d, order="F")
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def evolve(hamiltonian, jumps, rho0: np.ndarray, t: float) -> np.ndarray:
    """``rho(t)`` by exponentiating the Liouvillian."""
    rho0 = np.asarray(rho0, dtype=complex)
    d = rho0.shape[0]
    L = liouvillian(hamiltonian, jumps)
    v = la.expm(L * t) @ rho0.reshape(-1, order="F")
    return v.reshape(d, d, order="F")


def lindblad_steady(hamiltonian, jumps, tol: float = 1e-10) -> DensityMatrix:
    """Unique steady state of a Lindblad generator (small dimensions).

    The steady state is the right singular vector of the Liouvillian with
    the smallest singular value. A kernel of dimension > 1 raises
    :class:`NonUniqueSteadyStateError`; if the numerical kernel looks empty
    the state is obtained by long-time propagation instead.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    d = h.shape[0]
    L = liouvillian(h, jumps)
    _, s, vh = np.linalg.svd(L)
    scale = max(s[0], 1.0)
    null = int(np.sum(s < tol * scale))
    if null > 1:
        raise NonUniqueSteadyStateError(f"Liouvillian kernel has dimension {null}", null)
    if null == 1:
        return DensityMatrix(_vec_to_rho(vh[-1].conj(), d))
    # kernel not resolved at this tolerance: relax to the long-time limit
    rho = np.eye(d, dtype=complex) / d
    t = 1.0 / max(s[-2], 1e-12)
    for _ in range(60):
        new = evolve(h, jumps, rho, t)
        if np.max(np.abs(new - rho)) < tol:
            return DensityMatrix(_vec_to_rho(new.reshape(-1, order="F"), d))
        rho, t = new, 2.0 * t
    raise ConvergenceError("long-time propagation did not reach a steady state")


# ---------------------------------------------------------------- model builders


def converter_model(params: ConverterParams, alpha) -> tuple[np.ndarray, list[np.ndarray]]:
    """Rotating-frame Hamiltonian and jump operators of the driven converter."""
    g = params.xi0 * _as_alpha(alpha)
    h = 1j * g * TAU_PLUS - 1j * g.conjugate() * TAU_MINUS + params.detuning * N_A
    jumps = []
    for rate, op in (
        (params.kappa, TAU_MINUS),
        (params.gamma_a * params.nbar_a, A_OP.conj().T),
        (params.gamma_a * (1.0 - params.nbar_a), A_OP),
        (params.gamma_b * params.nbar_b, B_OP.conj().T),
        (params.gamma_b * (1.0 - params.nbar_b), B_OP),
    ):
        if rate > 0.0:
            jumps.append(math.sqrt(rate) * op)
    return h, jumps


def converter_steady(params: ConverterParams, alpha, tol: float = 1e-10) -> DensityMatrix:
    h, jumps = converter_model(params, alpha)
    return lindblad_steady(h, jumps, tol)


def observables(dm: DensityMatrix) -> ObservableState:
    """``(<N_a>, <N_b>, <tau+>, <tau->)`` of a converter density matrix."""
    return ObservableState(dm.expect(N_A).real, dm.expect(N_B).real,
                           dm.expect(TAU_PLUS), dm.expect(TAU_MINUS))


def tls_model(rabi: float, kappa: float, detuning: float = 0.0):
    """Two-level emitter: ``H = detuning |e><e| + rabi/2 (sigma+ + sigma-)``, decay ``kappa``.

    Basis order is ``(|g>, |e>)``.
    """
    sm = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    h = detuning * (sm.conj().T @ sm) + 0.5 * rabi * (sm + sm.conj().T)
    jumps = [math.sqrt(kappa) * sm] if kappa > 0.0 else []
    return h, jumps


def tls_excited_population(dm: DensityMatrix) -> float:
    return float(np.real(dm.rho[1, 1]))
