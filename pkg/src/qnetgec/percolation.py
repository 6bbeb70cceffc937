"""Bond percolation on embedded networks.

Monte Carlo estimates of the largest-cluster node fraction phi and bond
fraction psi under independent bond dilution, plus a finite-size threshold
locator based on the crossing of phi(P_c) curves for sizes L and 2L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice, mc, states


class PercolationError(ValueError):
    """Parameter outside the valid dilution domain."""


class UnionFind:
    """Disjoint sets over 0..n-1 with path halving and union by size."""

    __slots__ = ("parent", "size")

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        size = self.size
        if size[rx] < size[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        size[rx] += size[ry]
        return True


@dataclass
class DilutionOutcome:
    """One dilution draw: surviving bonds and the resulting clusters.

    ``labels`` maps each node position to the dense index of its cluster
    root; positions follow ``net.nodes`` order.  Ties for the largest
    cluster break toward the smallest root position.
    """

    surviving: np.ndarray
    labels: np.ndarray
    largest_root: int
    largest_size: int

    @property
    def n_surviving(self) -> int:
        return int(self.surviving.sum())

    def largest_nodes(self, net: lattice.Network) -> frozenset[int]:
        """Node ids of the largest cluster."""
        mask = self.labels == self.largest_root
        return frozenset(net.nodes[i].id for i in np.flatnonzero(mask))

    def largest_bond_mask(self, net: lattice.Network) -> np.ndarray:
        """Surviving bonds with both endpoints in the largest cluster."""
        ends = net.bond_endpoint_pos
        in_big = self.labels == self.largest_root
        return self.surviving & in_big[ends[:, 0]] & in_big[ends[:, 1]]


def dilute(net: lattice.Network, P_c: float, rng: np.random.Generator) -> DilutionOutcome:
    """Keep each bond independently with probability ``P_c`` and label clusters."""
    if not 0.0 <= P_c <= 1.0:
        raise PercolationError(f"P_c={P_c} outside [0, 1]")
    n = net.n_nodes
    surviving = rng.random(net.n_bonds) < P_c if P_c < 1.0 else np.ones(
        net.n_bonds, dtype=bool
    )
    uf = UnionFind(n)
    parent, size = uf.parent, uf.size
    ends = net.bond_endpoint_pos
    for e in np.flatnonzero(surviving).tolist():
        x = int(ends[e, 0])
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        y = int(ends[e, 1])
        while parent[y] != y:
            parent[y] = parent[parent[y]]
            y = parent[y]
        if x != y:
            if size[x] < size[y]:
                x, y = y, x
            parent[y] = x
            size[x] += size[y]
    labels = np.fromiter((uf.find(i) for i in range(n)), dtype=np.int64, count=n)
    sizes = np.asarray(size)
    roots = np.unique(labels)
    largest_root = int(roots[np.argmax(sizes[roots])])
    return DilutionOutcome(
        surviving=surviving,
        labels=labels,
        largest_root=largest_root,
        largest_size=int(sizes[largest_root]),
    )


@dataclass(frozen=True)
class PercEstimate:
    """Largest-cluster statistics at one (geometry, L, P_c) point."""

    geometry: str
    L: int
    P_c: float
    phi: float
    phi_se: float
    psi: float
    psi_se: float
    trials: int
    seed: int


_NET_CACHE: dict[tuple[str, int], lattice.Network] = {}


def _cached_net(geometry: str, L: int) -> lattice.Network:
    key = (geometry, L)
    if key not in _NET_CACHE:
        _NET_CACHE[key] = lattice.build_lattice(geometry, L)
    return _NET_CACHE[key]


def _phi_psi_chunk(args):
    (geometry, L, P_c, seed, key), lo, hi = args
    net = _cached_net(geometry, L)
    ends = net.bond_endpoint_pos
    s_sum = s_sq = c_sum = c_sq = 0
    for t in range(lo, hi):
        rng = states.derive_stream(seed, *key, t)
        out = dilute(net, P_c, rng)
        s = out.largest_size
        in_big = out.labels == out.largest_root
        c = int((out.surviving & in_big[ends[:, 0]] & in_big[ends[:, 1]]).sum())
        s_sum += s
        s_sq += s * s
        c_sum += c
        c_sq += c * c
    return s_sum, s_sq, c_sum, c_sq


def estimate_phi_psi(
    geometry: str,
    L: int,
    P_c: float,
    trials: int,
    seed: int,
    workers: int = 1,
    stream_key: tuple[int, ...] = (),
) -> PercEstimate:
    """Monte Carlo estimate of phi and psi with standard errors.

    phi is the largest-cluster size over the node count; psi is the number
    of surviving bonds inside the largest cluster over the bond count.
    Results are bit-identical for any ``workers`` value.
    """
    net = _cached_net(geometry, L)
    payload = (geometry, L, P_c, seed, tuple(stream_key))
    chunks = mc.run_chunks(_phi_psi_chunk, payload, trials, workers)
    s_sum = s_sq = c_sum = c_sq = 0
    for cs, csq, cc, ccq in chunks:
        s_sum += cs
        s_sq += csq
        c_sum += cc
        c_sq += ccq
    n_nodes, n_bonds = net.n_nodes, net.n_bonds
    phi, phi_se = mc.mean_se(s_sum / n_nodes, s_sq / n_nodes**2, trials)
    psi, psi_se = mc.mean_se(c_sum / n_bonds, c_sq / n_bonds**2, trials)
    return PercEstimate(geometry, L, P_c, phi, phi_se, psi, psi_se, trials, seed)


def locate_threshold(
    geometry: str,
    L: int,
    grid,
    trials: int,
    seed: int,
    workers: int = 1,
) -> float:
    """Estimate the percolation threshold as the P_c where phi(L) and
    phi(2L) cross.

    Below threshold the smaller lattice has the larger phi (boundary
    effects inflate the relative cluster size); above threshold the order
    reverses, so the curves cross near the critical point.
    """
    grid = [float(p) for p in grid]
    small, large = [], []
    for i, p in enumerate(grid):
        small.append(
            estimate_phi_psi(geometry, L, p, trials, seed, workers, (0, i)).phi
        )
        large.append(
            estimate_phi_psi(geometry, 2 * L, p, trials, seed, workers, (1, i)).phi
        )
    return mc.crossing_point(grid, small, large)
