"""Bond dilution, cluster statistics, and threshold location."""

from __future__ import annotations

import numpy as np
import pytest

from qnetgec import lattice, mc, percolation, states


def test_union_find_basics():
    uf = percolation.UnionFind(5)
    assert uf.union(0, 1)
    assert uf.union(1, 2)
    assert not uf.union(0, 2)
    assert uf.find(2) == uf.find(0)
    assert uf.find(3) != uf.find(0)


def test_dilute_keeps_everything_at_full_probability():
    net = lattice.build_lattice("square", 5)
    rng = states.derive_stream(1, 0)
    out = percolation.dilute(net, 1.0, rng)
    assert out.surviving.all()
    assert out.largest_size == net.n_nodes
    assert out.largest_nodes(net) == frozenset(n.id for n in net.nodes)
    assert out.largest_bond_mask(net).all()


def test_dilute_empty_at_zero_probability():
    net = lattice.build_lattice("square", 5)
    rng = states.derive_stream(1, 1)
    out = percolation.dilute(net, 0.0, rng)
    assert not out.surviving.any()
    assert out.largest_size == 1
    assert out.n_surviving == 0


def test_dilute_domain_error():
    net = lattice.build_lattice("square", 3)
    rng = states.derive_stream(1, 2)
    with pytest.raises(percolation.PercolationError):
        percolation.dilute(net, 1.5, rng)


def test_largest_bond_mask_is_internally_consistent():
    net = lattice.build_lattice("triangular", 8)
    for t in range(20):
        rng = states.derive_stream(7, t)
        out = percolation.dilute(net, 0.4, rng)
        mask = out.largest_bond_mask(net)
        nodes = out.largest_nodes(net)
        assert len(nodes) == out.largest_size
        # Every bond in the mask survived and has both ends in the cluster.
        for e in np.flatnonzero(mask):
            u, v = net.bond_endpoints[e]
            assert out.surviving[e]
            assert u in nodes and v in nodes
        # And every surviving bond with both ends inside is in the mask.
        for e in np.flatnonzero(out.surviving & ~mask):
            u, v = net.bond_endpoints[e]
            assert not (u in nodes and v in nodes)


def test_dilution_far_above_threshold_keeps_a_giant_cluster():
    # At P_c=0.95 the only fragments are isolated boundary nodes, so the
    # largest cluster holds at least 95% of the nodes almost always.
    net = lattice.build_lattice("square", 20)
    floor = int(np.ceil(0.95 * net.n_nodes))
    hits = 0
    for t in range(1000):
        out = percolation.dilute(net, 0.95, states.derive_stream(13, t))
        if out.largest_size >= floor:
            hits += 1
    assert hits >= 990


def test_psi_approaches_pc_times_phi_with_size():
    # On the infinite lattice the bond fraction inside the giant cluster
    # factorizes as psi = P_c * phi; the finite-size gap shrinks with L.
    gaps = []
    for L in (8, 16, 32):
        est = percolation.estimate_phi_psi("square", L, 0.7, 500, 23)
        gaps.append(abs(est.psi - 0.7 * est.phi))
    assert gaps[0] > gaps[1] > gaps[2]


def test_cluster_labels_match_bfs():
    net = lattice.build_lattice("square", 6)
    rng = states.derive_stream(9, 0)
    out = percolation.dilute(net, 0.5, rng)
    # Rebuild components by brute force from the surviving bond list.
    adj = {n.id: [] for n in net.nodes}
    for e in np.flatnonzero(out.surviving):
        u, v = net.bond_endpoints[e]
        adj[u].append(v)
        adj[v].append(u)
    seen = {}
    for start in adj:
        if start in seen:
            continue
        stack, comp = [start], []
        seen[start] = start
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen[y] = start
                    stack.append(y)
        for x in comp:
            seen[x] = start
    for a in adj:
        for b in adj:
            same_ref = seen[a] == seen[b]
            same_got = out.labels[a] == out.labels[b]
            assert same_ref == same_got


def test_estimate_phi_psi_full_lattice_is_exact():
    est = percolation.estimate_phi_psi("square", 8, 1.0, 50, 3)
    assert est.phi == 1.0 and est.psi == 1.0
    assert est.phi_se == 0.0 and est.psi_se == 0.0


def test_estimate_phi_psi_worker_independence():
    one = percolation.estimate_phi_psi("triangular", 10, 0.35, 256, 11, workers=1)
    four = percolation.estimate_phi_psi("triangular", 10, 0.35, 256, 11, workers=4)
    assert one == four


def test_estimate_phi_psi_seed_sensitivity():
    a = percolation.estimate_phi_psi("square", 10, 0.5, 200, 1)
    b = percolation.estimate_phi_psi("square", 10, 0.5, 200, 2)
    assert a.phi != b.phi


def test_phi_monotone_in_connection_probability():
    vals = [percolation.estimate_phi_psi("square", 16, p, 400, 5).phi
            for p in (0.3, 0.5, 0.7)]
    assert vals[0] < vals[1] < vals[2]


def test_crossing_point_linear():
    xs = [0.0, 1.0, 2.0]
    assert mc.crossing_point(xs, [1.0, 0.5, 0.0], [0.0, 0.5, 1.0]) == 1.0
    assert abs(mc.crossing_point(xs, [1.0, 0.6, 0.2], [0.0, 0.8, 1.6]) - 1.0 / 1.2) < 1e-12
    with pytest.raises(ValueError):
        mc.crossing_point(xs, [1.0, 1.0, 1.0], [0.0, 0.0, 0.0])


def test_locate_threshold_small_square():
    got = percolation.locate_threshold(
        "square", 8, [0.35, 0.45, 0.55, 0.65], 300, 17
    )
    assert 0.35 < got < 0.65


def test_mean_se_matches_numpy():
    rng = np.random.default_rng(0)
    xs = rng.random(400)
    mean, se = mc.mean_se(float(xs.sum()), float((xs * xs).sum()), len(xs))
    assert abs(mean - xs.mean()) < 1e-12
    assert abs(se - xs.std(ddof=1) / np.sqrt(len(xs))) < 1e-12
