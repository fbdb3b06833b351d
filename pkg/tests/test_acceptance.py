"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

Run under pytest (the lines are printed in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np

from photocurrent import lindblad as lb
from photocurrent import photon_stats as ps
from photocurrent.bound import max_classical_current, nonclassical_exceedance, random_radial_density
from photocurrent.currents import (ConverterParams, branch_current, current, full_branch_current,
                                   generic_current, subpoisson_current, thermal_current)
from photocurrent.pfunc import mc_average_current, radial_average_current
from photocurrent.validate import random_branch, random_converter_params

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(RESULTS[n])
    assert ok, detail


def _dm_sets():
    rng = np.random.default_rng(4)
    out = []
    for _ in range(50):
        p = random_converter_params(rng, with_kappa=True)
        alpha = random_branch(rng)
        out.append((p, alpha, lb.converter_steady(p, alpha)))
    return out


_DM_CACHE = []


def dm_sets():
    if not _DM_CACHE:
        _DM_CACHE.extend(_dm_sets())
    return _DM_CACHE


def test_criterion_01_ordering():
    t0 = time.perf_counter()
    worst = math.inf
    for r in (1.5, 5.0):
        for n in np.linspace(0.1, 60.0, 200):
            js = current(ps.PhotonStatistics.subpoisson_with_mean(n), r).value
            jp = branch_current(n, r)
            jt = thermal_current(n, r)
            worst = min(worst, js - jp, jp - jt)
    small = max(branch_current(1e-9, r) for r in (1.5, 5.0))
    small = max(small, max(thermal_current(1e-9, r) for r in (1.5, 5.0)))
    small = max(small, max(current(ps.PhotonStatistics.subpoisson_with_mean(1e-9), r).value
                           for r in (1.5, 5.0)))
    sat = max(abs(branch_current(1e12, r) - 0.5) for r in (1.5, 5.0))
    elapsed = time.perf_counter() - t0
    ok = worst >= -1e-9 and small < 1e-8 and sat < 1e-11 and elapsed < 10.0
    record(1, ok, f"min ordering gap {worst:.2e}, J(1e-9) <= {small:.1e}, "
                  f"|J_P(1e12) - 1/2| = {sat:.1e}, {elapsed:.1f} s")


def test_criterion_02_weak_intensity():
    worst = 0.0
    for r in (1.5, 5.0):
        n = 1e-3 * r
        lin = 2.0 * n / r
        for stat in (ps.PhotonStatistics.poisson(n), ps.PhotonStatistics.thermal(n),
                     ps.PhotonStatistics.subpoisson_with_mean(n)):
            worst = max(worst, abs(current(stat, r).value / lin - 1.0))
    record(2, worst < 1e-2, f"max relative deviation from 2 nbar / r_sq: {worst:.2e}")


def test_criterion_03_branch_vs_ode():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        x = rng.uniform(0.0, 100.0)
        r = rng.uniform(0.1, 100.0)
        p = ConverterParams.simplified(r)
        state = lb.integrate_to_steady(p, ps.BranchAmplitude(x, rng.uniform(0, 2 * math.pi)))
        j = branch_current(x, r)
        worst = max(worst, abs(state.right_current(p) - j) / j)
    elapsed = time.perf_counter() - t0
    record(3, worst <= 1e-8 and elapsed < 30.0, f"max relative deviation {worst:.2e}, {elapsed:.1f} s")


def test_criterion_04_full_current_vs_density_matrix():
    dev, dev0 = 0.0, 0.0
    for p, alpha, dm in dm_sets():
        d = abs(full_branch_current(p, alpha.magnitude_sq) - lb.observables(dm).right_current(p))
        dev = max(dev, d)
        p0 = ConverterParams(p.gamma_a, p.gamma_b, 0.0, p.nbar_a, p.nbar_b, p.r_sq, p.gamma_ref,
                             0.0, p.xi_phase)
        dm0 = lb.converter_steady(p0, alpha)
        dev0 = max(dev0, abs(full_branch_current(p0, alpha.magnitude_sq)
                             - lb.observables(dm0).right_current(p0)))
    record(4, dev <= 1e-8, f"max deviation {dev:.2e} with kappa > 0 "
                           f"(same draws at kappa = 0: {dev0:.2e})")


def test_criterion_05_code_paths():
    grid = [(n, r) for n in (0.05, 1.0, 5.0, 20.0, 60.0) for r in (0.1, 1.5, 5.0, 50.0)]
    worst = 0.0
    for n, r in grid:
        P, T = ps.PhotonStatistics.poisson(n), ps.PhotonStatistics.thermal(n)
        lam = ps.lambda_for_mean(n)
        worst = max(worst,
                    abs(generic_current(P, r).value - branch_current(n, r)),
                    abs(generic_current(T, r).value - thermal_current(n, r)),
                    abs(subpoisson_current(lam, r).value
                        - generic_current(ps.PhotonStatistics.subpoisson(lam), r).value))
    record(5, worst <= 1e-9, f"max deviation over {len(grid)} points: {worst:.2e}")


def test_criterion_06_monte_carlo():
    t0 = time.perf_counter()
    res = mc_average_current(ps.PhotonStatistics.thermal(20.0), 1.5, 1_000_000, seed=2024)
    elapsed = time.perf_counter() - t0
    z = abs(res.value - thermal_current(20.0, 1.5)) / res.est_error
    record(6, z < 3.0 and elapsed < 20.0,
           f"MC {res.value:.8f} +- {res.est_error:.1e}, {z:.2f} standard errors, {elapsed:.1f} s")


def test_criterion_07_classical_bound():
    worst_cert, worst_rand = 0.0, -math.inf
    rng = np.random.default_rng(7)
    r = 1.5
    for n in (0.5, 1.0, 5.0, 20.0):
        cert = max_classical_current(n, r)
        h = 4.0 * n / 2000
        # chord error of J on one cell: h**2 / 8 * max |J''| = h**2 / 8 * 16 / r**2
        worst_cert = max(worst_cert, abs(cert.gap_to_poisson) / (2.0 * h * h / r**2))
        for _ in range(10_000 // 4):
            dens = random_radial_density(rng, n, n_points=int(rng.integers(1, 9)))
            worst_rand = max(worst_rand, radial_average_current(dens, r).value - cert.optimal_value)
    record(7, worst_cert <= 1.0 and worst_rand <= 1e-12,
           f"certificate gap / h^2 bound {worst_cert:.2e}; "
           f"max random excess over certificate {worst_rand:.2e}")


def test_criterion_08_nonclassical_exceedance():
    g15 = nonclassical_exceedance(20.0, 1.5)
    g5 = nonclassical_exceedance(20.0, 5.0)
    record(8, g15 > g5 > 0.0, f"gap(20, 1.5) = {g15:.6e}, gap(20, 5) = {g5:.6e}")


def test_criterion_09_mandel_q():
    sub = max(ps.mandel_q(ps.PhotonStatistics.subpoisson_with_mean(n))
              for n in np.geomspace(0.1, 50.0, 100))
    poi = [ps.mandel_q(ps.PhotonStatistics.poisson(n)) for n in (0.1, 1.0, 20.0, 50.0)]
    th = max(abs(ps.mandel_q(ps.PhotonStatistics.thermal(n)) - n) / n for n in (0.1, 1.0, 20.0, 50.0))
    ok = sub < 0.0 and all(q == 0.0 for q in poi) and th < 1e-14
    record(9, ok, f"max sub-Poisson Q {sub:.3e}, Poisson Q {set(poi)}, thermal rel err {th:.1e}")


def test_criterion_10_positivity():
    min_eig = min(dm.min_eigenvalue for _, _, dm in dm_sets())
    tr = max(abs(dm.trace - 1.0) for _, _, dm in dm_sets())
    record(10, min_eig >= -1e-8 and tr <= 1e-10, f"min eigenvalue {min_eig:.2e}, max |tr - 1| {tr:.1e}")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
