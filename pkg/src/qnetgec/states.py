"""Single-edge state math: Bell-diagonal sampling, rank-three distillation,
pure-state conversion, and twirling.

Everything here is parameter-level.  Each edge is Bell-diagonal (or a pure
Schmidt-form state about to be converted), so one classical bit pair per edge
captures the full quantum state of a network member and the simulation stays
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class StateError(ValueError):
    """Parameter outside the feasible region of an operation."""


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise StateError(f"{name}={p} outside [0, 1]")


@dataclass(frozen=True)
class BellDiagonalParams:
    """Independent bit-flip / phase-flip edge error probabilities."""

    p_x: float
    p_z: float

    def __post_init__(self) -> None:
        _check_prob("p_x", self.p_x)
        _check_prob("p_z", self.p_z)

    def bell_weights(self) -> tuple[float, float, float, float]:
        """Weights of (psi00, psi01, psi10, psi11); sums to 1."""
        px, pz = self.p_x, self.p_z
        return ((1 - px) * (1 - pz), (1 - px) * pz, px * (1 - pz), px * pz)


@dataclass(frozen=True)
class RankThreeParams:
    """Distillable rank-three mixture: singlet weight plus the weight of the
    phase-flipped singlet; the remainder sits on a separable component."""

    singlet_weight: float
    flipped_weight: float

    def __post_init__(self) -> None:
        _check_prob("singlet_weight", self.singlet_weight)
        _check_prob("flipped_weight", self.flipped_weight)
        if self.singlet_weight + self.flipped_weight > 1.0 + 1e-12:
            raise StateError("singlet_weight + flipped_weight exceeds 1")


@dataclass(frozen=True)
class PureStateParam:
    """Largest Schmidt coefficient of a pure two-qubit state."""

    alpha: float

    def __post_init__(self) -> None:
        if not 0.5 <= self.alpha <= 1.0:
            raise StateError(f"alpha={self.alpha} outside [1/2, 1]")


@dataclass(frozen=True)
class BinaryStateParam:
    """Bit-flip weight of a binary (phase-error-free, rank-two) state."""

    p_x_prime: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_x_prime <= 0.5:
            raise StateError(f"p_x_prime={self.p_x_prime} outside [0, 1/2]")


@dataclass(frozen=True)
class EdgeErrorConfig:
    """Bit/phase flip bits of one pure ensemble member, per surviving edge."""

    a: np.ndarray  # uint8 bit-flip indicators
    b: np.ndarray  # uint8 phase-flip indicators

    @property
    def n_bit_flips(self) -> int:
        return int(self.a.sum())

    @property
    def n_phase_flips(self) -> int:
        return int(self.b.sum())


class DistillResult(NamedTuple):
    binary: BinaryStateParam
    success_prob: float


class StrategyPoint(NamedTuple):
    alpha_prime: float
    conversion_prob: float
    p_x_prime: float


def derive_stream(master_seed: int, *key: int) -> np.random.Generator:
    """Per-trial RNG stream: hash of (master seed, key path).

    Streams depend only on their key, never on scheduling, so results are
    identical for any worker count.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.PCG64(ss))


def sample_edge_config(
    params: BellDiagonalParams, n_edges: int, rng: np.random.Generator
) -> EdgeErrorConfig:
    """Draw independent Bernoulli bit/phase flips for ``n_edges`` edges."""
    a = (rng.random(n_edges) < params.p_x).astype(np.uint8)
    b = (rng.random(n_edges) < params.p_z).astype(np.uint8)
    return EdgeErrorConfig(a=a, b=b)


def pcm_distill(s: RankThreeParams) -> DistillResult:
    """Distill two copies of a rank-three state into one binary state.

    Succeeds with probability (w+ )^2 / 2 where w+ is the total entangled
    weight; on success the binary state has
    p_x' = 1 - [(w+)^2 + (w-)^2] / [2 (w+)^2].
    """
    wp = s.singlet_weight + s.flipped_weight
    wm = s.singlet_weight - s.flipped_weight
    if wp <= 0.0:
        raise StateError("state carries no entangled weight; cannot distill")
    p_x_prime = 1.0 - (wp * wp + wm * wm) / (2.0 * wp * wp)
    return DistillResult(BinaryStateParam(p_x_prime), wp * wp / 2.0)


def bond_conversion_prob(s: float, m: int) -> float:
    """Probability that a bond of ``m`` edges yields at least one binary state.

    Pairs of edges are consumed by independent distillation attempts with
    single-attempt success probability ``s``, so m edges allow floor(m/2)
    tries.
    """
    if m < 2:
        raise StateError(f"m={m} < 2; distillation consumes two edges")
    if not 0.0 <= s <= 1.0:
        raise StateError(f"success probability {s} outside [0, 1]")
    return 1.0 - (1.0 - s) ** (m // 2)


def pure_convert_prob(alpha: PureStateParam, alpha_prime: PureStateParam) -> float:
    """Optimal probability of converting |alpha> into the more entangled
    |alpha'> (majorization bound)."""
    a, ap = alpha.alpha, alpha_prime.alpha
    if a >= 1.0:
        raise StateError("alpha=1 is a product state; nothing to convert")
    if ap > a:
        raise StateError(f"target alpha'={ap} less entangled than source alpha={a}")
    return (1.0 - a) / (1.0 - ap)


def twirl_to_binary(alpha_prime: PureStateParam) -> BinaryStateParam:
    """Twirl a pure Schmidt-form state into a binary Bell mixture."""
    ap = alpha_prime.alpha
    p = (math.sqrt(ap) - math.sqrt(1.0 - ap)) ** 2 / 2.0
    return BinaryStateParam(min(p, 0.5))


def strategy_curve(alpha: PureStateParam, alpha_prime_grid) -> list[StrategyPoint]:
    """Conversion-then-twirl trade-off curve for one initial pure state.

    Endpoints: alpha'=1/2 is the entanglement-percolation limit (perfect
    singlets, lowest success probability), alpha'=alpha keeps every bond
    (P_c=1) at the price of the largest p_x'.
    """
    points = []
    for ap in alpha_prime_grid:
        target = PureStateParam(float(ap))
        points.append(
            StrategyPoint(
                alpha_prime=target.alpha,
                conversion_prob=pure_convert_prob(alpha, target),
                p_x_prime=twirl_to_binary(target).p_x_prime,
            )
        )
    return points
