import json

import numpy as np
import pytest

from photocurrent import photon_stats as ps
from photocurrent.bound import (BoundCertificate, concavity_certificate, max_classical_current,
                                nonclassical_exceedance, random_radial_density)
from photocurrent.currents import branch_current, subpoisson_current
from photocurrent.errors import DomainError, InfeasibleError
from photocurrent.pfunc import radial_average_current

# frozen output of tests/oracles/fock_sum_oracle.py
GAP_20_R15 = 2.19226941310694e-4
GAP_20_R5 = 6.45937980843193e-4


def test_concavity_certificate():
    assert concavity_certificate(1.5, np.linspace(0.0, 200.0, 1000))
    assert concavity_certificate(5.0, np.linspace(0.0, 200.0, 1000))
    assert concavity_certificate(0.1, np.geomspace(1e-6, 1e4, 500))
    with pytest.raises(DomainError):
        concavity_certificate(1.5, np.linspace(0.0, 1.0, 50))
    # a convex function would be rejected: the chord test itself is live
    x = np.linspace(0.0, 10.0, 200)
    slopes = np.diff(x**2) / np.diff(x)
    assert np.any(np.diff(slopes) / (x[2:] - x[:-2]) > 1e-12)


def test_three_point_concavity_instance():
    nbar = 3.0
    j = branch_current(np.array([0.0, nbar, 2 * nbar]), 1.5)
    assert j[1] >= 0.5 * (j[0] + j[2])


def test_certificate_on_grid_node():
    cert = max_classical_current(1.0, 1.5)
    assert cert.optimal_support == [(1.0, 1.0)]
    assert cert.optimal_value == pytest.approx(2 / 5.5, rel=1e-15)
    assert cert.gap_to_poisson == 0.0


def test_certificate_between_nodes():
    grid = np.linspace(0.0, 4.1, 500)
    cert = max_classical_current(1.0, 1.5, grid=grid)
    (x0, w0), (x1, w1) = cert.optimal_support
    h = grid[1] - grid[0]
    assert x0 < 1.0 < x1 and x1 - x0 == pytest.approx(h, rel=1e-9)
    assert w0 + w1 == pytest.approx(1.0, rel=1e-15)
    assert w0 * x0 + w1 * x1 == pytest.approx(1.0, rel=1e-14)
    assert 0.0 <= cert.gap_to_poisson <= 16 * 1.5 / 1.5**3 * h * h


def test_certificate_infeasible_and_domain():
    with pytest.raises(InfeasibleError):
        max_classical_current(5.0, 1.5, grid=np.linspace(0.0, 4.0, 200))
    with pytest.raises(DomainError):
        max_classical_current(0.0, 1.5)


def test_certificate_json():
    d = max_classical_current(2.0, 1.5, grid_size=401).to_dict()
    assert json.loads(json.dumps(d))["optimal_support"] == [[2.0, 1.0]]
    assert set(d) == {"n_mean", "r_sq", "optimal_value", "optimal_support", "gap_to_poisson"}


@pytest.mark.parametrize("nbar", [0.5, 1.0, 5.0, 20.0, 50.0])
@pytest.mark.parametrize("r", [1.5, 5.0])
def test_random_classical_densities_never_beat_poisson(nbar, r):
    cert = max_classical_current(nbar, r)
    assert len(cert.optimal_support) == 1 and cert.optimal_support[0][0] == nbar
    rng = np.random.default_rng(int(nbar * 100 + r * 10))
    worst = -np.inf
    for _ in range(10_000):
        dens = random_radial_density(rng, nbar, n_points=int(rng.integers(1, 9)))
        worst = max(worst, radial_average_current(dens, r).value - cert.optimal_value)
    assert worst <= 1e-12


@pytest.mark.parametrize("nbar", [0.37, 2.2, 13.1])
def test_support_brackets_mean(nbar):
    cert = max_classical_current(nbar, 2.0, grid=np.linspace(0.0, 50.0, 333))
    xs = [x for x, _ in cert.optimal_support]
    assert len(xs) <= 2 and min(xs) <= nbar <= max(xs)
    assert cert.optimal_value <= branch_current(nbar, 2.0)


# ---------------------------------------------------------------- nonclassical exceedance


def test_exceedance_values_against_oracle():
    assert nonclassical_exceedance(20.0, 1.5) == pytest.approx(GAP_20_R15, abs=1e-12)
    assert nonclassical_exceedance(20.0, 5.0) == pytest.approx(GAP_20_R5, abs=1e-12)


def test_exceedance_positive_and_vanishing_at_low_intensity():
    for nbar in (0.01, 0.5, 1.0, 5.0, 20.0, 50.0):
        for r in (1.0, 1.5, 2.0, 5.0, 10.0):
            assert nonclassical_exceedance(nbar, r) > 0.0
    # second order in nbar: J_sub - J_poisson ~ 8 r nbar |Q| / (4 nbar + r)**3 with Q ~ -nbar / 2
    for r in (1.5, 5.0):
        for nbar in (1e-3, 1e-4, 1e-5):
            assert nonclassical_exceedance(nbar, r) == pytest.approx(4 * nbar**2 / r**2, rel=20 * nbar)


def test_exceedance_matches_definition():
    lam = ps.lambda_for_mean(5.0)
    assert nonclassical_exceedance(5.0, 3.0) == subpoisson_current(lam, 3.0).value - branch_current(5.0, 3.0)


def test_exceedance_decreasing_in_r_sq_at_mean_20():
    # stated invariant; numerically false at nbar = 20 (see README)
    gaps = [nonclassical_exceedance(20.0, r) for r in (1.0, 1.5, 2.0, 5.0, 10.0)]
    assert all(b < a for a, b in zip(gaps, gaps[1:])), gaps


def test_exceedance_endpoint_comparison_at_mean_20():
    # fallback form of the same claim; also false at nbar = 20
    assert nonclassical_exceedance(20.0, 1.5) > nonclassical_exceedance(20.0, 5.0)


def test_peak_exceedance_over_the_sweep_shrinks_with_r_sq():
    # the figure-level reading: the largest sub-Poisson advantage over a sweep
    # of mean photon numbers shrinks as the coupling ratio grows
    means = np.linspace(0.1, 60.0, 120)
    peaks = [max(nonclassical_exceedance(n, r) for n in means) for r in (1.0, 1.5, 2.0, 5.0, 10.0)]
    assert all(b < a for a, b in zip(peaks, peaks[1:])), peaks


def test_exceedance_decreasing_in_r_sq_at_unit_mean():
    gaps = [nonclassical_exceedance(1.0, r) for r in (1.5, 5.0, 10.0)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_certificate_dataclass_is_frozen():
    cert = BoundCertificate(1.0, 1.5, 0.3, [(1.0, 1.0)], 0.0)
    with pytest.raises(AttributeError):
        cert.optimal_value = 1.0
