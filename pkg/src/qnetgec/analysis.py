"""Closed-form analytics: entropic thresholds, plaquette/edge ratios,
exact bond-percolation thresholds, CSS encoding trade-offs, and the
strategy/trade-off sweep that ties the Monte Carlo pieces together."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from . import gec, percolation, states


class AnalysisError(ValueError):
    """Query outside the derived regime (for example, no information margin)."""


#: Exact bond-percolation thresholds, kept as expressions to avoid rounding.
EXACT_THRESHOLDS = {
    "square": 0.5,
    "triangular": 2.0 * math.sin(math.pi / 18.0),
    "honeycomb": 1.0 - 2.0 * math.sin(math.pi / 18.0),
}


def percolation_threshold(geometry: str) -> float:
    try:
        return EXACT_THRESHOLDS[geometry]
    except KeyError:
        raise AnalysisError(f"no exact threshold known for geometry {geometry!r}") from None


def binary_entropy(p: float) -> float:
    """H(p) = -p log2 p - (1-p) log2 (1-p), with H(0) = H(1) = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def solve_entropy(target: float) -> float:
    """Invert the binary entropy on [0, 1/2] by bisection.

    Returns p with |H(p) - target| < 1e-10.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"entropy target {target} outside [0, 1]")
    if target == 0.0:
        return 0.0
    if target == 1.0:
        return 0.5
    lo, hi = 0.0, 0.5
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        h = binary_entropy(mid)
        if abs(h - target) < 1e-10:
            return mid
        if h < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)  # pragma: no cover


@dataclass(frozen=True)
class ThresholdQuery:
    """Plaquette/edge ratio query; ``L=None`` asks for the infinite-lattice
    limit."""

    geometry: str
    L: int | None
    P_c: float

    def __post_init__(self) -> None:
        if not 0.0 < self.P_c <= 1.0:
            raise AnalysisError(f"P_c={self.P_c} outside (0, 1]")
        if self.L is not None and self.L < 2:
            raise AnalysisError(f"invalid size L={self.L}")


def plaquette_edge_ratio(q: ThresholdQuery, phi: float = 1.0) -> float:
    """Expected plaquettes per surviving edge, the information margin that
    bounds the correctable error entropy.

    Uses face count = 2 + edges - nodes on the largest cluster with
    ``psi = P_c * phi``: square finite-L gives
    1 + (2 - L^2 phi) / (2 L (L-1) P_c phi), with infinite limit
    1 - 1/(2 P_c); the triangular lattice has (L-1)(3L-1) bonds, giving
    limit 1 - 1/(3 P_c) (2/3 for the complete network).
    """
    if not 0.0 < phi <= 1.0:
        raise AnalysisError(f"phi={phi} outside (0, 1]")
    if q.geometry == "square":
        if q.L is None:
            ratio = 1.0 - 1.0 / (2.0 * q.P_c)
        else:
            L = q.L
            ratio = 1.0 + (2.0 - L * L * phi) / (2.0 * L * (L - 1) * q.P_c * phi)
    elif q.geometry == "triangular":
        if q.L is None:
            ratio = 1.0 - 1.0 / (3.0 * q.P_c)
        else:
            L = q.L
            ratio = 1.0 + (2.0 - L * L * phi) / ((L - 1) * (3 * L - 1) * q.P_c * phi)
    else:
        raise AnalysisError(
            f"plaquette/edge ratio not derived for geometry {q.geometry!r}"
        )
    if ratio <= 0.0:
        raise AnalysisError(
            f"no information margin: plaquette/edge ratio {ratio:.6g} <= 0"
        )
    return ratio


def entropic_threshold(q: ThresholdQuery, phi: float = 1.0) -> float:
    """Bit-flip threshold p* solving H(p*) = plaquette/edge ratio."""
    return solve_entropy(plaquette_edge_ratio(q, phi))


def in_critical_region(P_c: float, p_x_prime: float) -> bool:
    """Strict test of (1 - H(p_x')) * P_c > 1/2."""
    if not 0.0 <= P_c <= 1.0:
        raise ValueError(f"P_c={P_c} outside [0, 1]")
    return (1.0 - binary_entropy(p_x_prime)) * P_c > 0.5


class CssEstimate(NamedTuple):
    p_z_eff: float
    p_x_eff: float
    clamped: bool


def css_tradeoff(t: int, p_x: float, p_z: float) -> CssEstimate:
    """Leading-order error rates of a distance-(2t+1) repetition-encoded edge:
    phase flips suppressed to C(2t+1, t+1) p_z^(t+1), bit flips amplified
    to (2t+1) p_x.  Values above 1 are clamped and flagged."""
    if t < 0 or int(t) != t:
        raise ValueError(f"t={t} must be a nonnegative integer")
    if not 0.0 <= p_x <= 1.0 or not 0.0 <= p_z <= 1.0:
        raise ValueError("error probabilities must lie in [0, 1]")
    t = int(t)
    p_z_eff = math.comb(2 * t + 1, t + 1) * p_z ** (t + 1)
    p_x_eff = (2 * t + 1) * p_x
    clamped = p_z_eff > 1.0 or p_x_eff > 1.0
    return CssEstimate(min(p_z_eff, 1.0), min(p_x_eff, 1.0), clamped)


@dataclass(frozen=True)
class TradeoffPoint:
    """One conversion-strategy sample: dilution/error operating point, the
    resulting largest-cluster fraction and pair fidelity, and the figure of
    merit F * phi^2."""

    alpha: float
    alpha_prime: float
    P_c: float
    p_x_prime: float
    phi: float
    F: float
    F_se: float
    fom: float


def tradeoff_curve(
    alpha: float,
    alpha_prime_grid,
    geometry: str,
    L: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> list[TradeoffPoint]:
    """Sample the conversion trade-off: each alpha' yields an operating
    point (P_c, p_x'), measured by a percolation estimate of phi and a GEC
    estimate of the pair fidelity F at that dilution and error rate."""
    points = []
    curve = states.strategy_curve(states.PureStateParam(alpha), alpha_prime_grid)
    for i, sp in enumerate(curve):
        perc = percolation.estimate_phi_psi(
            geometry, L, sp.conversion_prob, trials, seed, workers, (0, i)
        )
        est = gec.estimate_gec(
            geometry,
            L,
            sp.conversion_prob,
            sp.p_x_prime,
            0.0,
            trials,
            seed,
            workers,
            "random",
            (1, i),
        )
        points.append(
            TradeoffPoint(
                alpha=alpha,
                alpha_prime=sp.alpha_prime,
                P_c=sp.conversion_prob,
                p_x_prime=sp.p_x_prime,
                phi=perc.phi,
                F=est.fidelity,
                F_se=est.se,
                fom=est.fidelity * perc.phi**2,
            )
        )
    return points
