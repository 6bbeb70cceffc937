"""Entropic thresholds, information-margin ratios, and trade-off plumbing."""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from qnetgec import analysis

mpmath.mp.dps = 50


def test_binary_entropy_known_values():
    assert analysis.binary_entropy(0.0) == 0.0
    assert analysis.binary_entropy(1.0) == 0.0
    assert analysis.binary_entropy(0.5) == 1.0
    x = mpmath.mpf(11) / 100
    want = -x * mpmath.log(x, 2) - (1 - x) * mpmath.log(1 - x, 2)
    assert abs(analysis.binary_entropy(0.11) - float(want)) < 1e-14


def test_binary_entropy_symmetry_and_domain():
    for p in (0.05, 0.2, 0.37):
        assert abs(analysis.binary_entropy(p) - analysis.binary_entropy(1 - p)) < 1e-14
    with pytest.raises(ValueError):
        analysis.binary_entropy(-0.01)
    with pytest.raises(ValueError):
        analysis.binary_entropy(1.01)


def test_solve_entropy_inverts_entropy():
    for p in np.linspace(0.0, 0.5, 26):
        got = analysis.solve_entropy(analysis.binary_entropy(float(p)))
        assert abs(got - p) < 1e-8
    assert analysis.solve_entropy(0.0) == 0.0
    assert analysis.solve_entropy(1.0) == 0.5
    with pytest.raises(ValueError):
        analysis.solve_entropy(1.5)


def test_solve_entropy_half_matches_stated_threshold():
    assert 0.1095 <= analysis.solve_entropy(0.5) <= 0.1105


def test_solve_entropy_two_thirds_matches_stated_threshold():
    assert 0.170 <= analysis.solve_entropy(2.0 / 3.0) <= 0.178


def test_threshold_query_validation():
    with pytest.raises(analysis.AnalysisError):
        analysis.ThresholdQuery("square", None, 0.0)
    with pytest.raises(analysis.AnalysisError):
        analysis.ThresholdQuery("square", None, 1.2)
    with pytest.raises(analysis.AnalysisError):
        analysis.ThresholdQuery("square", 1, 1.0)


def test_ratio_infinite_limits():
    sq = analysis.plaquette_edge_ratio(analysis.ThresholdQuery("square", None, 1.0))
    assert abs(sq - 0.5) < 1e-15
    tri = analysis.plaquette_edge_ratio(analysis.ThresholdQuery("triangular", None, 1.0))
    assert abs(tri - 2.0 / 3.0) < 1e-15


def test_ratio_finite_approaches_infinite():
    inf_val = analysis.plaquette_edge_ratio(analysis.ThresholdQuery("square", None, 0.8))
    prev_gap = None
    for L in (10, 100, 1000, 10**6):
        fin = analysis.plaquette_edge_ratio(analysis.ThresholdQuery("square", L, 0.8))
        gap = abs(fin - inf_val)
        if prev_gap is not None:
            assert gap < prev_gap
        prev_gap = gap
    assert prev_gap < 1e-5


def test_ratio_triangular_complete_network_finite_size():
    # Exact finite-size value at full connectivity: 1 + (2 - L^2)/((L-1)(3L-1)).
    for L in (5, 50, 10**6):
        got = analysis.plaquette_edge_ratio(analysis.ThresholdQuery("triangular", L, 1.0))
        want = 1.0 + (2.0 - L * L) / ((L - 1) * (3 * L - 1))
        assert abs(got - want) < 1e-15
    assert abs(got - 2.0 / 3.0) < 1e-5


def test_ratio_no_margin_below_half_connectivity():
    with pytest.raises(analysis.AnalysisError):
        analysis.plaquette_edge_ratio(analysis.ThresholdQuery("square", None, 0.5))
    with pytest.raises(analysis.AnalysisError):
        analysis.plaquette_edge_ratio(analysis.ThresholdQuery("square", None, 0.3))
    # Triangular connectivity buys margin down to P_c = 1/3.
    with pytest.raises(analysis.AnalysisError):
        analysis.plaquette_edge_ratio(analysis.ThresholdQuery("triangular", None, 1.0 / 3.0))
    assert analysis.plaquette_edge_ratio(
        analysis.ThresholdQuery("triangular", None, 0.4)) > 0


def test_ratio_honeycomb_not_derived():
    with pytest.raises(analysis.AnalysisError):
        analysis.plaquette_edge_ratio(analysis.ThresholdQuery("honeycomb", None, 1.0))


def test_ratio_phi_domain():
    with pytest.raises(analysis.AnalysisError):
        analysis.plaquette_edge_ratio(analysis.ThresholdQuery("square", 10, 1.0), phi=0.0)


def test_entropic_threshold_square_full():
    p = analysis.entropic_threshold(analysis.ThresholdQuery("square", None, 1.0))
    assert abs(analysis.binary_entropy(p) - 0.5) < 1e-9
    assert 0.1095 <= p <= 0.1105


def test_in_critical_region_strict_boundary():
    assert not analysis.in_critical_region(0.5, 0.0)
    assert analysis.in_critical_region(0.51, 0.0)
    assert not analysis.in_critical_region(0.4, 0.0)
    assert not analysis.in_critical_region(1.0, 0.5)
    assert analysis.in_critical_region(1.0, 0.05)
    with pytest.raises(ValueError):
        analysis.in_critical_region(1.5, 0.1)


def test_css_tradeoff_values():
    est = analysis.css_tradeoff(1, 0.01, 0.1)
    assert abs(est.p_z_eff - 3 * 0.1**2) < 1e-15
    assert abs(est.p_x_eff - 0.03) < 1e-15
    assert not est.clamped
    est = analysis.css_tradeoff(2, 0.001, 0.2)
    assert abs(est.p_z_eff - math.comb(5, 3) * 0.2**3) < 1e-15
    assert abs(est.p_x_eff - 0.005) < 1e-15


def test_css_tradeoff_endpoints():
    assert analysis.css_tradeoff(0, 0.3, 0.4) == (0.4, 0.3, False)
    assert analysis.css_tradeoff(3, 0.0, 0.0) == (0.0, 0.0, False)
    est = analysis.css_tradeoff(4, 0.3, 0.9)
    assert est.clamped and est.p_x_eff == 1.0 and est.p_z_eff == 1.0
    with pytest.raises(ValueError):
        analysis.css_tradeoff(-1, 0.1, 0.1)
    with pytest.raises(ValueError):
        analysis.css_tradeoff(1, 1.1, 0.1)


def test_exact_percolation_threshold_constants():
    assert analysis.percolation_threshold("square") == 0.5
    tri = analysis.percolation_threshold("triangular")
    assert abs(tri - 2 * math.sin(math.pi / 18)) < 1e-15
    assert abs(tri - 0.34729635533386066) < 1e-15
    hc = analysis.percolation_threshold("honeycomb")
    assert abs(hc - (1 - tri)) < 1e-15
    with pytest.raises(analysis.AnalysisError):
        analysis.percolation_threshold("kagome")


def test_tradeoff_curve_smoke():
    pts = analysis.tradeoff_curve(0.8, [0.5, 0.8], "square", 6, 120, 19)
    assert len(pts) == 2
    first, last = pts
    # Perfect-singlet branch: no bit flips, every surviving pair succeeds.
    assert first.alpha_prime == 0.5 and first.p_x_prime == 0.0
    assert first.F == 1.0
    assert abs(first.fom - first.F * first.phi**2) < 1e-15
    # Keep-everything branch: full connectivity, finite error rate.
    assert last.P_c == 1.0 and last.phi == 1.0
    assert 0.0 < last.F < 1.0
    assert abs(last.fom - last.F) < 1e-15
