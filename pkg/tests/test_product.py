import itertools
import math

import numpy as np
import pytest

from ltlfleet.buchi import GUARD_TRUE, BuchiAutomaton, Guard, nba_accepts_lasso, translate
from ltlfleet.ltl import LassoWord, parse, to_nnf
from ltlfleet.product import (
    InfeasibleTaskError,
    build_product,
    compute_potential,
    compute_traps,
    find_plan,
    track_buchi,
    trap_regions,
)
from ltlfleet.workspace import Workspace, build_cts


def make_pba(text, ws, start):
    nba = translate(to_nnf(parse(text, None)))
    cts = build_cts(ws, start)
    return build_product(cts, nba), nba, cts


def random_instance(rng):
    """Random 4x4 workspace with random a/b labels and a few obstacles."""
    labels = {"a": [], "b": []}
    for cell in range(1, 17):
        r = rng.integers(0, 4)
        if r == 1:
            labels["a"].append(cell)
        elif r == 2:
            labels["b"].append(cell)
        elif r == 3:
            labels["a"].append(cell)
            labels["b"].append(cell)
    n_obs = int(rng.integers(0, 3))
    cells = [int(c) for c in rng.permutation(np.arange(2, 17))[:n_obs]]
    ws = Workspace(4, 4, 4, 4, labels=labels, static_obstacles=cells)
    return ws


FORMULAS = [
    "[] <> a && [] <> b",
    "<> a",
    "[] a",
    "a U b",
    "<> [] a",
    "!(a U b)",
    "X a",
]


# -- brute-force oracles ----------------------------------------------------


def explicit_product(cts, nba):
    """Direct double-loop product enumeration (independent oracle)."""
    states = set()
    edges = {}
    for rid in cts.states:
        for s in range(nba.n_states):
            states.add((rid, s))
            edges[(rid, s)] = []
    for a, b in cts.transitions:
        labels = cts.labels[b]
        for s in range(nba.n_states):
            for guard, t in nba.out_edges(s):
                if guard.eval(frozenset(labels)):
                    edges[(a, s)].append((b, t))
    return states, edges


def oracle_self_reachable_accepting(states, edges, nba):
    out = set()
    for q in states:
        if q[1] not in nba.accepting:
            continue
        seen = set()
        stack = list(edges[q])
        ok = False
        while stack:
            cur = stack.pop()
            if cur == q:
                ok = True
                break
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(edges[cur])
        if ok:
            out.add(q)
    return out


def oracle_bfs_prefix(states, edges, nba, initial, anchors):
    dist = {q: 0 for q in initial}
    queue = list(initial)
    head = 0
    while head < len(queue):
        q = queue[head]
        head += 1
        for q2 in edges[q]:
            if q2 not in dist:
                dist[q2] = dist[q] + 1
                queue.append(q2)
    hits = [dist[a] for a in anchors if a in dist]
    return min(hits) if hits else None


def oracle_potential(states, edges, anchors):
    rev = {q: [] for q in states}
    for q, outs in edges.items():
        for q2 in outs:
            rev[q2].append(q)
    dist = {q: math.inf for q in states}
    queue = []
    for a in anchors:
        dist[a] = 0
        queue.append(a)
    head = 0
    while head < len(queue):
        q = queue[head]
        head += 1
        for p in rev[q]:
            if dist[p] == math.inf:
                dist[p] = dist[q] + 1
                queue.append(p)
    return dist


# -- tests -------------------------------------------------------------------


class TestBuildProduct:
    def test_trivial_product(self):
        nba = BuchiAutomaton(1, {0}, {0}, [(0, GUARD_TRUE, 0)])
        ws = Workspace(1, 1, 1, 1)
        cts = build_cts(ws, 1)
        pba = build_product(cts, nba)
        assert pba.states == ((1, 0),)
        assert pba.accepting == {(1, 0)}
        assert pba.successors((1, 0)) == [(1, 0)]

    def test_unsatisfiable_guard_gives_no_successors(self):
        nba = BuchiAutomaton(1, {0}, {0}, [(0, Guard(frozenset({"z"}), frozenset()), 0)])
        ws = Workspace(2, 1, 2, 1)
        cts = build_cts(ws, 1)
        pba = build_product(cts, nba)
        for q in pba.initial:
            assert pba.successors(q) == []

    def test_empty_initial_set_rejected(self):
        nba = BuchiAutomaton(1, set(), {0}, [(0, GUARD_TRUE, 0)])
        ws = Workspace(1, 1, 1, 1)
        cts = build_cts(ws, 1)
        with pytest.raises(InfeasibleTaskError):
            build_product(cts, nba)

    def test_size_bound_on_random_instances(self):
        rng = np.random.default_rng(3)
        for i in range(20):
            ws = random_instance(rng)
            text = FORMULAS[i % len(FORMULAS)]
            pba, nba, cts = make_pba(text, ws, 1)
            assert len(pba.states) <= len(cts.states) * nba.n_states


class TestFindPlan:
    def test_corridor_reach(self):
        # frozen from the explicit-product BFS oracle: shortest prefix to a
        # self-reachable accepting state takes one extra hop past R3
        ws = Workspace(3, 1, 3, 1, labels={"R3": [3]})
        pba, nba, cts = make_pba("<> R3", ws, 1)
        plan = find_plan(pba)
        prefix_regions, cycle_regions = plan.region_trace()
        states, edges = explicit_product(cts, nba)
        anchors = oracle_self_reachable_accepting(states, edges, nba)
        want = oracle_bfs_prefix(states, edges, nba, pba.initial, anchors)
        assert len(plan.prefix) - 1 == want
        assert prefix_regions[:3] == [1, 2, 3]

    def test_surveillance_suffix_visits_both_targets(self):
        ws = Workspace(5, 6, 5, 6, labels={"R8": [8], "R20": [20]})
        pba, _, _ = make_pba("[] <> R8 && [] <> R20", ws, 11)
        plan = find_plan(pba)
        _, cycle_regions = plan.region_trace()
        assert 8 in cycle_regions and 20 in cycle_regions

    def test_infeasible_when_no_label(self):
        ws = Workspace(2, 1, 2, 1)
        pba, _, _ = make_pba("<> a", ws, 1)
        with pytest.raises(InfeasibleTaskError):
            find_plan(pba)

    def test_plan_is_deterministic(self):
        ws = Workspace(4, 4, 4, 4, labels={"a": [6, 13], "b": [11]})
        plans = set()
        for _ in range(3):
            pba, _, _ = make_pba("[] <> a && [] <> b", ws, 1)
            plan = find_plan(pba)
            plans.add((plan.prefix, plan.suffix))
        assert len(plans) == 1

    def test_prefix_length_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(11)
        for i in range(25):
            ws = random_instance(rng)
            text = FORMULAS[i % len(FORMULAS)]
            pba, nba, cts = make_pba(text, ws, 1)
            states, edges = explicit_product(cts, nba)
            anchors = oracle_self_reachable_accepting(states, edges, nba)
            want = oracle_bfs_prefix(states, edges, nba, pba.initial, anchors)
            if want is None:
                with pytest.raises(InfeasibleTaskError):
                    find_plan(pba)
                continue
            plan = find_plan(pba)
            assert len(plan.prefix) - 1 == want
            plan.validate(pba)

    def test_plan_lasso_accepted_by_nba(self):
        rng = np.random.default_rng(13)
        for i in range(15):
            ws = random_instance(rng)
            text = FORMULAS[i % len(FORMULAS)]
            pba, nba, cts = make_pba(text, ws, 1)
            try:
                plan = find_plan(pba)
            except InfeasibleTaskError:
                continue
            stem, loop = plan.label_lasso(cts.labels)
            assert nba_accepts_lasso(nba, LassoWord(stem, loop)), text

    def test_potential_finite_along_plan(self):
        ws = Workspace(5, 6, 5, 6, labels={"R8": [8], "R20": [20]})
        pba, _, _ = make_pba("[] <> R8 && [] <> R20", ws, 11)
        plan = find_plan(pba)
        table = compute_potential(pba)
        for q in plan.prefix + plan.suffix:
            assert table.of_state(q) < math.inf
        assert table.of_state(plan.anchor) == 0


class TestPotentialAndTraps:
    def test_self_reachable_accepting_is_zero(self):
        ws = Workspace(2, 1, 2, 1, labels={"a": [2]})
        pba, _, _ = make_pba("[] <> a", ws, 1)
        table = compute_potential(pba)
        zeros = [q for q in pba.states if table.of_state(q) == 0]
        assert zeros
        assert all(q in pba.accepting for q in zeros)

    def test_values_match_oracle_on_random_instances(self):
        rng = np.random.default_rng(17)
        for i in range(20):
            ws = random_instance(rng)
            text = FORMULAS[i % len(FORMULAS)]
            pba, nba, cts = make_pba(text, ws, 1)
            states, edges = explicit_product(cts, nba)
            anchors = oracle_self_reachable_accepting(states, edges, nba)
            want = oracle_potential(states, edges, anchors)
            table = compute_potential(pba)
            for q in pba.states:
                assert table.of_state(q) == want[q], (text, q)

    def test_traps_equal_oracle(self):
        rng = np.random.default_rng(19)
        for i in range(20):
            ws = random_instance(rng)
            text = FORMULAS[i % len(FORMULAS)]
            pba, nba, cts = make_pba(text, ws, 1)
            states, edges = explicit_product(cts, nba)
            anchors = oracle_self_reachable_accepting(states, edges, nba)
            want = oracle_potential(states, edges, anchors)
            traps = compute_traps(pba)
            assert traps == {q for q in pba.states if want[q] == math.inf}

    def test_all_states_trapped_without_labels(self):
        ws = Workspace(2, 2, 2, 2)
        pba, _, _ = make_pba("[] <> a", ws, 1)
        assert compute_traps(pba) == set(pba.states)

    def test_no_traps_with_true_self_loop(self):
        # accepting guard-true self-loop reachable from everywhere
        nba = BuchiAutomaton(1, {0}, {0}, [(0, GUARD_TRUE, 0)])
        ws = Workspace(2, 2, 2, 2)
        pba = build_product(build_cts(ws, 1), nba)
        assert compute_traps(pba) == set()

    def test_removing_trap_state_preserves_potentials(self):
        # removing an infinite-potential state cannot affect finite values;
        # the hand-built automaton has a dead branch reachable via 'b'
        nba = BuchiAutomaton(
            3,
            {0},
            {2},
            [
                (0, Guard(frozenset({"a"}), frozenset()), 2),
                (0, Guard(frozenset({"b"}), frozenset()), 1),
                (1, Guard(frozenset({"b"}), frozenset()), 1),
                (2, GUARD_TRUE, 2),
            ],
        )
        ws = Workspace(2, 1, 2, 1, labels={"b": [1], "a": [2]})
        cts = build_cts(ws, 1)
        pba = build_product(cts, nba)
        table = compute_potential(pba)
        traps = compute_traps(pba)
        assert (1, 1) in traps
        removed = sorted(traps)[0]
        states, edges = explicit_product(cts, nba)
        states.discard(removed)
        edges = {
            q: [t for t in outs if t != removed]
            for q, outs in edges.items()
            if q != removed
        }
        anchors = oracle_self_reachable_accepting(states, edges, nba)
        want = oracle_potential(states, edges, anchors)
        for q in pba.states:
            if q == removed or table.of_state(q) == math.inf:
                continue
            assert want[q] == table.of_state(q)

    def test_trap_regions_for_safety_formula(self):
        ws = Workspace(5, 6, 5, 6, labels={"R22": [22], "R28": [28], "R29": [29]})
        pba, nba, _ = make_pba("[] <> R22 && [] <> R28 && [] !R29", ws, 22)
        assert trap_regions(pba, nba.initial) == [29]

    def test_trap_regions_empty_for_pure_surveillance(self):
        ws = Workspace(5, 6, 5, 6, labels={"R8": [8], "R20": [20]})
        pba, nba, _ = make_pba("[] <> R8 && [] <> R20", ws, 11)
        assert trap_regions(pba, nba.initial) == []


class TestTrackBuchi:
    def test_no_enabled_guard_gives_empty(self):
        nba = translate(to_nnf(parse("[] a", None)))
        assert track_buchi(nba, nba.initial, frozenset()) == frozenset()

    def test_true_self_loop_is_preserved(self):
        nba = BuchiAutomaton(1, {0}, {0}, [(0, GUARD_TRUE, 0)])
        assert track_buchi(nba, {0}, frozenset({"x"})) == {0}

    def test_agreement_with_exhaustive_table(self):
        rng = np.random.default_rng(23)
        props = ["a", "b"]
        for _ in range(10):
            n = int(rng.integers(2, 5))
            edges = []
            for s in range(n):
                for t in range(n):
                    if rng.random() < 0.4:
                        req = frozenset(p for p in props if rng.random() < 0.4)
                        forb = frozenset(
                            p for p in props if p not in req and rng.random() < 0.4
                        )
                        edges.append((s, Guard(req, forb), t))
            nba = BuchiAutomaton(n, {0}, {n - 1}, edges)
            # oracle: materialize the full 2^AP transition table
            table = {}
            for s in range(n):
                for labels in itertools.chain.from_iterable(
                    itertools.combinations(props, k) for k in range(3)
                ):
                    lab = frozenset(labels)
                    table[(s, lab)] = {
                        t for (src, g, t) in edges if src == s and g.eval(lab)
                    }
            for labels in [frozenset(), frozenset({"a"}), frozenset({"a", "b"})]:
                for current in [{0}, set(range(n))]:
                    want = set()
                    for s in current:
                        want |= table[(s, labels)]
                    assert track_buchi(nba, current, labels) == want


def test_trap_regions_exclude_static_obstacle_cells():
    ws = Workspace(3, 1, 3, 1, labels={"a": [3]}, static_obstacles=[2])
    nba = translate(to_nnf(parse("<> a", None)))
    pba = build_product(build_cts(ws, 1), nba)
    # cell 2 is an obstacle and cell 3 is unreachable behind it; neither is
    # reported as a trap region (obstacles are not traps, and from within
    # cell 3 the task would actually be satisfiable)
    regions = trap_regions(pba, nba.initial)
    assert 2 not in regions
