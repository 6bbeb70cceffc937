"""Global error correction on the largest surviving cluster.

Pauli-frame pipeline per trial: dilute the network, take the largest
cluster, enumerate its plaquettes, sample bit-flip bits on its edges,
extract the plaquette syndrome, pair the defects with a minimum-weight
perfect matching on the dual graph (exterior face included as an ordinary
dual node), flip the assumed correction onto the frame, and split the
cluster nodes into the two parity groups that determine pair/GHZ success.

Phase flips never touch the decoder (they commute with every plaquette
measurement), so trials track bit-flip bits only and the phase factor of
the final pair state is composed analytically by ``pair_fidelity``.

Per-trial stream consumption order is part of the reproducibility
contract: dilution draw (only when P_c < 1), bit-flip draw over cluster
edges, one path draw sequence per matched pair in lexicographic pair
order, then the node-pair pick.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import networkx as nx
import numpy as np
import scipy.sparse.csgraph as csgraph

from . import lattice, mc, percolation, states


class GecError(RuntimeError):
    """Internal decoder inconsistency (signals a bug, not bad input)."""


@dataclass(frozen=True)
class Syndrome:
    """Per-face loop parity of the bit-flip bits (face id -> bit)."""

    bits: np.ndarray

    @property
    def defects(self) -> np.ndarray:
        """Face ids with odd boundary parity, ascending."""
        return np.flatnonzero(self.bits)


class MatchedPair(NamedTuple):
    face_a: int
    face_b: int
    path: tuple[int, ...]  # crossed primal edges, as bond indices


@dataclass(frozen=True)
class Matching:
    """Perfect matching of the defects along shortest dual paths."""

    pairs: tuple[MatchedPair, ...]
    weight: int


def compute_syndrome(dual: lattice.DualGraph, config: states.EdgeErrorConfig) -> Syndrome:
    """Boundary-walk parity of a-bits per face; bridges cancel."""
    if config.a.shape != (len(dual.edge_ids),):
        raise ValueError(
            f"config covers {config.a.shape[0]} edges, dual has {len(dual.edge_ids)}"
        )
    bits = (dual.parity_matrix @ config.a.astype(np.int64)) % 2
    return Syndrome(bits=bits.astype(np.uint8))


def _blossom_pairs(edges, n: int) -> list[tuple[int, int]] | None:
    """Exact blossom matching over an explicit edge list; None if the edge
    set admits no perfect matching."""
    graph = nx.Graph()
    graph.add_nodes_from(range(n))
    graph.add_weighted_edges_from(edges)
    mate = nx.min_weight_matching(graph)
    if len(mate) * 2 != n:
        return None
    return sorted(tuple(sorted(p)) for p in mate)


def _dual_potentials(
    weights: np.ndarray, iu: np.ndarray, ju: np.ndarray
) -> tuple[np.ndarray, float]:
    """Feasible potentials for the matching LP relaxation and their sum.

    Solves min w.x subject to unit degree at every defect (odd-set cuts
    omitted) on a nearest-neighbor column subset, adding columns whose dual
    constraint is violated until the potentials are feasible on every pair
    (y_i + y_j <= w_ij).  Any feasible y makes sum(y) a lower bound on the
    perfect-matching weight.  The returned potentials are shifted so that
    feasibility holds exactly despite float round-off.
    """
    import scipy.sparse as sp
    from scipy.optimize import linprog

    n = weights.shape[0]
    w_flat = weights[iu, ju].astype(np.float64)
    order = np.argsort(weights, axis=1, kind="stable")[:, 1:9]
    cand = set()
    for i in range(n):
        for j in order[i]:
            cand.add((i, int(j)) if i < j else (int(j), i))
    cols = sorted(cand)
    y = None
    for _ in range(6):
        ci = np.array([c[0] for c in cols])
        cj = np.array([c[1] for c in cols])
        m = len(cols)
        A = sp.csc_matrix(
            (np.ones(2 * m), (np.concatenate([ci, cj]), np.tile(np.arange(m), 2))),
            shape=(n, m),
        )
        res = linprog(
            c=weights[ci, cj].astype(np.float64),
            A_eq=A,
            b_eq=np.ones(n),
            bounds=(0, None),
            method="highs",
        )
        if res.status != 0:
            order_k = order.shape[1] * 2
            order = np.argsort(weights, axis=1, kind="stable")[:, 1 : order_k + 1]
            extra = set()
            for i in range(n):
                for j in order[i]:
                    extra.add((i, int(j)) if i < j else (int(j), i))
            cols = sorted(cand | extra)
            cand |= extra
            continue
        y = res.eqlin.marginals
        viol = w_flat - y[iu] - y[ju] < -1e-7
        if not viol.any():
            break
        for k in np.flatnonzero(viol):
            cand.add((int(iu[k]), int(ju[k])))
        cols = sorted(cand)
    if y is None:  # pragma: no cover
        return np.zeros(n), 0.0
    rho_min = float((w_flat - y[iu] - y[ju]).min())
    if rho_min < 0.0:
        y = y + rho_min / 2.0  # restore exact feasibility
    return y, float(y.sum())


def _min_weight_pairs(weights: np.ndarray) -> list[tuple[int, int]]:
    """Minimum-weight perfect matching on the complete defect graph;
    returns index pairs sorted lexicographically.

    Large instances are pruned exactly before the blossom solver runs.
    Feasible dual potentials y of the matching LP give the lower bound
    LB = sum(y), and any perfect matching through pair (i, j) weighs at
    least LB plus that pair's reduced cost w_ij - y_i - y_j.  A greedy
    perfect matching picked in ascending reduced-cost order supplies a
    realized upper bound U, so pairs with LB + reduced cost > U belong to
    no optimal matching.  Every edge of every optimal matching passes the
    cut (its bound is at most the optimal weight, which is at most U), so
    the blossom run on the kept edges returns an exact optimum.
    """
    n = weights.shape[0]
    if n == 0:
        return []
    if n == 2:
        return [(0, 1)]
    iu, ju = np.triu_indices(n, 1)
    w_flat = weights[iu, ju]
    if n <= 24:
        pairs = _blossom_pairs(
            ((int(iu[k]), int(ju[k]), int(w_flat[k])) for k in range(len(w_flat))), n
        )
        assert pairs is not None
        return pairs

    y, lower = _dual_potentials(weights, iu, ju)
    reduced = w_flat - y[iu] - y[ju]

    order = np.argsort(reduced, kind="stable")
    k_neighbors = 6
    candidate = None
    while candidate is None:
        rank = np.zeros(n, dtype=np.int64)
        chosen = []
        for k in order:
            i, j = int(iu[k]), int(ju[k])
            if rank[i] < k_neighbors or rank[j] < k_neighbors:
                chosen.append(int(k))
                rank[i] += 1
                rank[j] += 1
        candidate = _blossom_pairs(
            ((int(iu[k]), int(ju[k]), int(w_flat[k])) for k in chosen), n
        )
        k_neighbors *= 4
    upper = sum(int(weights[i, j]) for i, j in candidate)
    if upper <= lower + 1e-7:
        return candidate  # candidate meets the lower bound, hence optimal

    keep = np.flatnonzero(lower + reduced <= upper + 1e-7)
    pairs = _blossom_pairs(
        ((int(iu[k]), int(ju[k]), int(w_flat[k])) for k in keep), n
    )
    if pairs is None:  # pragma: no cover
        raise GecError("exact pruning lost every optimal matching")
    return pairs


def brute_force_pairing(weights: np.ndarray) -> int:
    """Exhaustive minimum total weight over all perfect pairings (test oracle)."""
    idx = tuple(range(weights.shape[0]))

    def rec(rest: tuple[int, ...]) -> int:
        if not rest:
            return 0
        first, tail = rest[0], rest[1:]
        return min(
            int(weights[first, tail[k]]) + rec(tail[:k] + tail[k + 1 :])
            for k in range(len(tail))
        )

    if len(idx) % 2:
        raise ValueError("odd number of defects")
    return rec(idx)


def _random_shortest_path(
    dual: lattice.DualGraph,
    src: int,
    dst: int,
    dist_to_dst: np.ndarray,
    rng: np.random.Generator,
) -> tuple[int, ...]:
    """Walk src -> dst down the BFS distance gradient, picking uniformly
    among tied steps (parallel dual edges count as distinct steps)."""
    path: list[int] = []
    cur = src
    d = int(dist_to_dst[src])
    adj = dual.face_adjacency
    for step in range(d, 0, -1):
        options = [fe for fe in adj[cur] if dist_to_dst[fe[0]] == step - 1]
        pick = options[int(rng.integers(len(options)))] if len(options) > 1 else options[0]
        path.append(dual.edge_ids[pick[1]])
        cur = pick[0]
    if cur != dst:
        raise GecError("shortest-path walk missed its target")  # pragma: no cover
    return tuple(path)


def match_defects(
    dual: lattice.DualGraph,
    syn: Syndrome,
    rng: np.random.Generator,
    *,
    dist: np.ndarray | None = None,
) -> Matching:
    """Minimum-weight perfect matching of the defects.

    Weights are BFS distances on the dual graph (every face, exterior
    included, is an ordinary dual node).  Each matched pair gets one
    shortest path chosen uniformly at random among tied parent choices.
    ``dist`` may carry precomputed all-pairs dual distances (faces x faces);
    otherwise distances are computed from the defect faces only.
    """
    defects = syn.defects
    if len(defects) % 2:
        raise GecError(f"odd defect count {len(defects)}")
    if len(defects) == 0:
        return Matching(pairs=(), weight=0)
    if dist is None:
        rows = csgraph.dijkstra(
            dual.adjacency_matrix, directed=False, unweighted=True, indices=defects
        )
        row_of = {int(f): i for i, f in enumerate(defects)}
        dist_row = lambda f: rows[row_of[f]]
        weights = rows[:, defects]
    else:
        dist_row = lambda f: dist[f]
        weights = dist[np.ix_(defects, defects)]
    weights = weights.astype(np.int64)
    pairs = _min_weight_pairs(weights)
    matched = []
    total = 0
    for i, j in pairs:
        fa, fb = int(defects[i]), int(defects[j])
        path = _random_shortest_path(dual, fa, fb, dist_row(fb), rng)
        matched.append(MatchedPair(fa, fb, path))
        total += int(weights[i, j])
    return Matching(pairs=tuple(matched), weight=total)


def apply_correction(
    config: states.EdgeErrorConfig,
    matching: Matching,
    dual: lattice.DualGraph,
) -> states.EdgeErrorConfig:
    """XOR the crossed-path indicator onto the bit-flip bits."""
    a = config.a.copy()
    idx = dual.edge_index
    for pair in matching.pairs:
        for e in pair.path:
            a[idx[e]] ^= 1
    return states.EdgeErrorConfig(a=a, b=config.b)


def assign_groups(
    net: lattice.Network,
    dual: lattice.DualGraph,
    residual: states.EdgeErrorConfig,
) -> np.ndarray:
    """Split cluster nodes into parity groups 0/1.

    BFS from the smallest node id (parity 0); crossing an edge with a
    residual bit of 1 flips parity.  Every edge is then checked, so an
    inconsistent residual (nonzero syndrome, a decoder bug) raises.
    Returns one bit per entry of ``dual.node_ids``.
    """
    node_ids = dual.node_ids
    pos = {nid: i for i, nid in enumerate(node_ids)}
    n = len(node_ids)
    a = residual.a
    srcs = np.empty(len(dual.edge_ids), dtype=np.int64)
    dsts = np.empty(len(dual.edge_ids), dtype=np.int64)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for epos, e in enumerate(dual.edge_ids):
        b = net.bonds[e]
        pu, pv = pos[b.u], pos[b.v]
        srcs[epos], dsts[epos] = pu, pv
        adj[pu].append((pv, epos))
        adj[pv].append((pu, epos))
    parity = np.full(n, -1, dtype=np.int8)
    parity[0] = 0
    stack = [0]
    while stack:
        u = stack.pop()
        pu = parity[u]
        for v, epos in adj[u]:
            if parity[v] < 0:
                parity[v] = pu ^ a[epos]
                stack.append(v)
    if (parity < 0).any():
        raise GecError("cluster is not connected")  # pragma: no cover
    if ((parity[srcs] ^ parity[dsts]) != a).any():
        raise GecError("residual bits are not a consistent node 2-coloring")
    return parity.astype(np.uint8)


class PairState(NamedTuple):
    """Bell-diagonal weights of the corrected pair state."""

    w_00: float
    w_10: float
    w_01: float
    w_11: float

    @property
    def fidelity(self) -> float:
        return self.w_00


def pair_fidelity(p_same: float, p_z: float, n_edges: int) -> PairState:
    """Compose the measured same-group probability with the analytic phase
    factor (1 + (1-2 p_z)^N_E) / 2 = P(even number of phase flips)."""
    if not 0.0 <= p_same <= 1.0:
        raise ValueError(f"p_same={p_same} outside [0, 1]")
    if not 0.0 <= p_z <= 1.0:
        raise ValueError(f"p_z={p_z} outside [0, 1]")
    if n_edges < 0:
        raise ValueError(f"n_edges={n_edges} < 0")
    even = 0.5 * (1.0 + (1.0 - 2.0 * p_z) ** n_edges)
    return PairState(
        w_00=p_same * even,
        w_10=(1.0 - p_same) * even,
        w_01=p_same * (1.0 - even),
        w_11=(1.0 - p_same) * (1.0 - even),
    )


class GhzStats(NamedTuple):
    all_same: bool
    group_sizes: tuple[int, int]

    @property
    def minority_fraction(self) -> float:
        return min(self.group_sizes) / sum(self.group_sizes)


def extract_ghz_stats(groups: np.ndarray, chosen: list[int]) -> GhzStats | None:
    """Group statistics for a chosen set of node positions; None (void) if a
    position falls outside the cluster."""
    k = len(chosen)
    if k < 1:
        raise ValueError("chosen node set is empty")
    if min(chosen) < 0 or max(chosen) >= len(groups):
        return None
    picked = groups[np.asarray(chosen, dtype=np.int64)]
    ones = int(picked.sum())
    return GhzStats(all_same=ones in (0, k), group_sizes=(k - ones, ones))


@dataclass(frozen=True)
class TrialResult:
    void: bool
    success: int
    defect_count: int
    match_weight: int
    cluster_nodes: int
    cluster_edges: int
    minority_fraction: float
    parity: np.ndarray | None = None
    residual: states.EdgeErrorConfig | None = None
    dual: lattice.DualGraph | None = None
    pair: tuple[int, int] | None = None


_VOID = TrialResult(
    void=True,
    success=0,
    defect_count=0,
    match_weight=0,
    cluster_nodes=0,
    cluster_edges=0,
    minority_fraction=0.0,
)


def _parse_policy(policy) -> tuple:
    if isinstance(policy, (tuple, list)):
        tag = policy[0]
        if tag == "fixed":
            if len(policy) != 3:
                raise ValueError("fixed policy needs two node ids")
            return ("fixed", int(policy[1]), int(policy[2]))
        policy = tag
    if policy not in ("random", "core"):
        raise ValueError(f"unknown node-pair policy {policy!r}")
    return (policy,)


def _core_positions(dual: lattice.DualGraph, net: lattice.Network) -> list[int]:
    """Positions (into dual.node_ids) of the largest 2-edge-connected-ish
    component left after dropping bridge edges; ties break to the smallest
    root position."""
    node_ids = dual.node_ids
    pos = {nid: i for i, nid in enumerate(node_ids)}
    uf = percolation.UnionFind(len(node_ids))
    for e in dual.edge_ids:
        if e in dual.bridges:
            continue
        b = net.bonds[e]
        uf.union(pos[b.u], pos[b.v])
    roots = [uf.find(i) for i in range(len(node_ids))]
    sizes: dict[int, int] = {}
    for r in roots:
        sizes[r] = sizes.get(r, 0) + 1
    best = max(sizes, key=lambda r: (sizes[r], -r))
    return [i for i, r in enumerate(roots) if r == best]


class TrialEngine:
    """Reusable per-configuration trial runner.

    For P_c = 1 the dual graph, all-pairs dual distances, and the core
    candidate list are computed once and shared by every trial; diluted
    configurations rebuild them per trial from the surviving cluster.
    """

    def __init__(self, net: lattice.Network, P_c: float, p_x: float, policy="random"):
        if not 0.0 <= P_c <= 1.0:
            raise ValueError(f"P_c={P_c} outside [0, 1]")
        if not 0.0 <= p_x <= 1.0:
            raise ValueError(f"p_x={p_x} outside [0, 1]")
        self.net = net
        self.P_c = float(P_c)
        self.p_x = float(p_x)
        self.policy = _parse_policy(policy)
        self._fixed_dual: lattice.DualGraph | None = None
        self._fixed_dist: np.ndarray | None = None
        self._fixed_core: list[int] | None = None
        if self.P_c >= 1.0:
            dual = lattice.dual_of_subgraph(net, range(net.n_bonds))
            self._fixed_dual = dual
            self._fixed_dist = csgraph.dijkstra(
                dual.adjacency_matrix, directed=False, unweighted=True
            )
            if self.policy[0] == "core":
                self._fixed_core = _core_positions(dual, net)

    def _pick_pair(
        self,
        dual: lattice.DualGraph,
        parity: np.ndarray,
        core: list[int] | None,
        rng: np.random.Generator,
    ) -> tuple[int, int] | None:
        """Returns node positions, or None when the policy cannot be served."""
        tag = self.policy[0]
        if tag == "fixed":
            pos = {nid: i for i, nid in enumerate(dual.node_ids)}
            u, v = self.policy[1], self.policy[2]
            if u not in pos or v not in pos or u == v:
                return None
            return pos[u], pos[v]
        if tag == "core":
            pool = core if core is not None else _core_positions(dual, self.net)
            if len(pool) < 2:
                return None
            i = int(rng.integers(len(pool)))
            j = int(rng.integers(len(pool) - 1))
            j += j >= i
            return pool[i], pool[j]
        n = len(dual.node_ids)
        i = int(rng.integers(n))
        j = int(rng.integers(n - 1))
        j += j >= i
        return i, j

    def run(self, rng: np.random.Generator) -> TrialResult:
        net = self.net
        if self.P_c >= 1.0:
            dual, dist, core = self._fixed_dual, self._fixed_dist, self._fixed_core
        else:
            out = percolation.dilute(net, self.P_c, rng)
            if out.largest_size < 2:
                return _VOID
            dual = lattice.dual_of_subgraph(
                net, np.flatnonzero(out.largest_bond_mask(net))
            )
            dist, core = None, None

        n_edges = len(dual.edge_ids)
        a = (rng.random(n_edges) < self.p_x).astype(np.uint8)
        config = states.EdgeErrorConfig(a=a, b=np.zeros(n_edges, dtype=np.uint8))
        syn = compute_syndrome(dual, config)
        matching = match_defects(dual, syn, rng, dist=dist)
        residual = apply_correction(config, matching, dual)
        parity = assign_groups(net, dual, residual)
        ones = int(parity.sum())
        minority = min(ones, len(parity) - ones) / len(parity)
        pair = self._pick_pair(dual, parity, core, rng)
        if pair is None:
            return _VOID
        success = int(parity[pair[0]] == parity[pair[1]])
        return TrialResult(
            void=False,
            success=success,
            defect_count=int(len(syn.defects)),
            match_weight=matching.weight,
            cluster_nodes=len(dual.node_ids),
            cluster_edges=n_edges,
            minority_fraction=minority,
            parity=parity,
            residual=residual,
            dual=dual,
            pair=(dual.node_ids[pair[0]], dual.node_ids[pair[1]]),
        )


def run_trial(
    net: lattice.Network,
    P_c: float,
    p_x: float,
    policy,
    rng: np.random.Generator,
) -> TrialResult:
    """Single-shot convenience wrapper around ``TrialEngine``."""
    return TrialEngine(net, P_c, p_x, policy).run(rng)


@dataclass(frozen=True)
class GecEstimate:
    """Aggregated sweep point; fidelity composes the measured same-group
    probability with the analytic phase factor per trial (Monte Carlo
    average of success * P(even phase flips on the cluster edges))."""

    geometry: str
    L: int
    P_c: float
    p_x: float
    p_z: float
    trials: int
    void_trials: int
    mean_success: float
    se: float
    mean_defects: float
    mean_match_weight: float
    fidelity: float
    seed: int
    mean_minority: float
    mean_success_indep: float


_ENGINE_CACHE: dict[tuple, TrialEngine] = {}


def _cached_engine(geometry: str, L: int, P_c: float, p_x: float, policy) -> TrialEngine:
    key = (geometry, L, P_c, p_x, policy)
    if key not in _ENGINE_CACHE:
        net = percolation._cached_net(geometry, L)
        _ENGINE_CACHE[key] = TrialEngine(net, P_c, p_x, policy)
    return _ENGINE_CACHE[key]


def _gec_chunk(args):
    (geometry, L, P_c, p_x, p_z, policy, seed, key), lo, hi = args
    engine = _cached_engine(geometry, L, P_c, p_x, policy)
    n_void = succ = defects = weight = 0
    minority = indep = fid = 0.0
    for t in range(lo, hi):
        rng = states.derive_stream(seed, *key, t)
        res = engine.run(rng)
        if res.void:
            n_void += 1
            continue
        succ += res.success
        defects += res.defect_count
        weight += res.match_weight
        f = res.minority_fraction
        minority += f
        indep += f * f + (1.0 - f) * (1.0 - f)
        fid += res.success * pair_fidelity(1.0, p_z, res.cluster_edges).w_00
    return n_void, succ, defects, weight, minority, indep, fid


def estimate_gec(
    geometry: str,
    L: int,
    P_c: float,
    p_x: float,
    p_z: float,
    trials: int,
    seed: int,
    workers: int = 1,
    policy="random",
    stream_key: tuple[int, ...] = (),
) -> GecEstimate:
    """Monte Carlo sweep point.  Void trials (cluster below 2 nodes, or a
    policy that cannot pick a pair) are excluded from means and counted."""
    policy = _parse_policy(policy)
    payload = (geometry, L, P_c, p_x, p_z, policy, seed, tuple(stream_key))
    chunks = mc.run_chunks(_gec_chunk, payload, trials, workers)
    n_void = succ = defects = weight = 0
    minority = indep = fid = 0.0
    for c in chunks:
        n_void += c[0]
        succ += c[1]
        defects += c[2]
        weight += c[3]
        minority += c[4]
        indep += c[5]
        fid += c[6]
    n = trials - n_void
    mean_success, se = mc.mean_se(succ, succ, n)  # success bits: sum == sum of squares
    return GecEstimate(
        geometry=geometry,
        L=L,
        P_c=P_c,
        p_x=p_x,
        p_z=p_z,
        trials=trials,
        void_trials=n_void,
        mean_success=mean_success,
        se=se,
        mean_defects=defects / n if n else float("nan"),
        mean_match_weight=weight / n if n else float("nan"),
        fidelity=fid / n if n else float("nan"),
        seed=seed,
        mean_minority=minority / n if n else float("nan"),
        mean_success_indep=indep / n if n else float("nan"),
    )
