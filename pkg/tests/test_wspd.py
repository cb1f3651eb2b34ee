import json
import logging

import numpy as np
import pytest

from oracles import bruteforce_find_pairs
from wspdfuse.exceptions import ConfigError, WspdFuseError
from wspdfuse.geometry import Ball, ball_gap
from wspdfuse.split_tree import build_split_tree
from wspdfuse.wspd import (
    Realization,
    WspdPair,
    certificate_violations,
    coverage_counts,
    find_pairs,
    is_well_separated,
    largest_pair,
    realize,
    separation_holds,
    separation_threshold,
    subset_counterexamples,
)


@pytest.mark.parametrize(
    "r0, r1, gap, s_ok, boundary",
    [(3.2153, 3.0909, 10.7448, 1.5, 10.7448 / 3.2153), (11.8761, 18.603, 57.7499, 1.0, 57.7499 / 18.603)],
)
def test_published_predicate_examples(r0, r1, gap, s_ok, boundary):
    assert separation_holds(r0, r1, gap, s_ok)
    assert separation_threshold(r0, r1, gap) == boundary
    assert separation_holds(r0, r1, gap, boundary)
    assert not separation_holds(r0, r1, gap, np.nextafter(boundary, np.inf))


def test_predicate_on_reconstructed_balls():
    a = Ball(np.array([0.0, 0.0]), 3.2153)
    b = Ball(np.array([3.2153 + 10.7448 + 3.0909, 0.0]), 3.0909)
    assert ball_gap(a, b) == pytest.approx(10.7448, abs=1e-12)
    assert is_well_separated(a, b, 1.5)
    assert not is_well_separated(a, b, 3.35)


def test_touching_balls_never_separated():
    a, b = Ball(np.zeros(2), 1.0), Ball(np.array([2.0, 0.0]), 1.0)
    for s in (1e-9, 0.5, 10.0):
        assert not is_well_separated(a, b, s)


@pytest.mark.parametrize("s", [0, -1.0])
def test_nonpositive_s_rejected(s):
    with pytest.raises(ConfigError):
        separation_holds(1, 1, 1, s)
    with pytest.raises(ConfigError):
        realize(build_split_tree([(0, 0), (1, 1)]), s)


def test_find_pairs_two_leaves():
    tree = build_split_tree([(0, 0), (3, 1)])
    for s in (0.1, 1.0, 1e6):
        pairs = find_pairs(tree.root.left, tree.root.right, s)
        assert len(pairs) == 1 and pairs[0].max_radius == 0


def test_find_pairs_unsplit_when_separated():
    tree = build_split_tree([(0, 0), (1, 0), (100, 0)])
    u, v = tree.root.left, tree.root.right
    assert u.point_indices.tolist() == [0, 1]
    (pair,) = find_pairs(u, v, 1.0)
    assert pair.a is u and pair.b is v
    assert pair.max_radius == 0.5
    # |(0.5, 0) - (100, 0)| - 0.5 - 0
    assert pair.gap == 99.0


def test_find_pairs_rejects_overlap():
    tree = build_split_tree([(0, 0), (1, 0), (5, 0)])
    with pytest.raises(ValueError):
        find_pairs(tree.root, tree.root.left, 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_realize_matches_bruteforce_enumeration(seed):
    tree = build_split_tree(np.random.default_rng(seed).uniform(size=(30, 2)))
    r = realize(tree, 2.0)
    got = [(p.a.node_id, p.b.node_id) for p in r]
    assert len(got) == len(set(got))
    expected = bruteforce_find_pairs(tree, 2.0, lambda x, y: is_well_separated(x.ball, y.ball, 2.0))
    assert set(got) == expected


def test_two_point_realization():
    assert len(realize(build_split_tree([(0, 0), (1, 2)]), 3.0)) == 1


def test_three_collinear_points():
    tree = build_split_tree([(0, 0), (1, 0), (2, 0)])
    s = 100.0
    expected = bruteforce_find_pairs(tree, s, lambda x, y: is_well_separated(x.ball, y.ball, s))
    r = realize(tree, s)
    # nothing but singletons can be separated at this s
    assert len(r) == len(expected) == 3
    assert all(p.a.size == p.b.size == 1 for p in r)


@pytest.mark.parametrize("s", [0.25, 1.0, 4.0])
def test_coverage_exactly_once(s):
    P = np.random.default_rng(11).uniform(size=(200, 2))
    counts = coverage_counts(realize(build_split_tree(P), s))
    off = ~np.eye(200, dtype=bool)
    assert np.all(counts[off] == 1)
    assert np.all(np.diag(counts) == 0)


def test_certificates_clean():
    r = realize(build_split_tree(np.random.default_rng(2).normal(size=(120, 5))), 1.0)
    assert certificate_violations(r) == []


def test_certificate_violation_detected():
    tree = build_split_tree([(0, 0), (1, 0), (2, 0), (3, 0)]).compute_balls()
    # radii 0.5, gap 1.0: separated at s=1 but not at s=4
    assert certificate_violations(Realization([WspdPair(tree.root.left, tree.root.right, 1.0, 0.5)], 1.0, tree)) == []
    forged = Realization([WspdPair(tree.root.left, tree.root.right, 1.0, 0.5)], 4.0, tree)
    assert len(certificate_violations(forged)) == 1


def test_pair_count_grows_with_s():
    tree = build_split_tree(np.random.default_rng(5).uniform(size=(150, 3)))
    counts = [len(realize(tree, s)) for s in (0.25, 1, 4, 16)]
    assert counts == sorted(counts)


def _stub_pair(na, nb):
    class Node:
        def __init__(self, n):
            self.size = n
            self.point_indices = np.arange(n)

    return WspdPair(Node(na), Node(nb), 1.0, 0.0)


def test_largest_pair_selection():
    r = Realization([_stub_pair(1, 1), _stub_pair(3, 2), _stub_pair(4, 1)], 1.0, None)
    assert largest_pair(r) is r.pairs[1]
    singles = Realization([_stub_pair(1, 1) for _ in range(3)], 1.0, None)
    assert largest_pair(singles) is singles.pairs[0]
    with pytest.raises(WspdFuseError):
        largest_pair(Realization([], 1.0, None))


def test_singleton_source_gives_empty_realization():
    assert len(realize(build_split_tree([(1, 1)]), 1.0)) == 0


def test_jsonl_records():
    r = realize(build_split_tree(np.random.default_rng(0).uniform(size=(20, 2))), 1.0)
    lines = r.to_jsonl().splitlines()
    assert len(lines) == len(r)
    rec = json.loads(lines[0])
    assert set(rec) == {"pair_id", "node_a_id", "node_b_id", "size_a", "size_b", "gap", "max_radius", "s"}
    assert [json.loads(l)["pair_id"] for l in lines] == list(range(len(r)))
    assert r.summary()["num_pairs"] == len(r)


def test_realization_is_deterministic():
    P = np.random.default_rng(9).normal(size=(60, 3))
    assert realize(build_split_tree(P), 1.0).to_jsonl() == realize(build_split_tree(P), 1.0).to_jsonl()


def test_subset_check_logs_counterexample(caplog):
    # a pair that is not separated at s=4; most of its sub-checks fail too
    tree = build_split_tree([(0, 0), (1, 0), (2, 0), (3, 0)]).compute_balls()
    forged = Realization([WspdPair(tree.root.left, tree.root.right, 1.0, 0.5)], 4.0, tree)
    with caplog.at_level(logging.WARNING, logger="wspdfuse.wspd"):
        found = subset_counterexamples(forged, np.random.default_rng(0), n_subsets=3)
    assert 1 <= len(found) <= 3
    assert "subset" in found[0] and "partner_ball" in found[0]
    assert caplog.records
