"""Product of the motion abstraction with a Buchi automaton, plan synthesis,
potential table and trap states.

Product states are (region id, automaton state) pairs.  A transition
(r, s) -> (r', s') exists when r -> r' is a motion transition and the
automaton can move s -> s' while reading the labels of the *target* region.
The potential of a state is its hop distance to the nearest accepting state
that lies on a cycle; infinite potential marks a trap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class InfeasibleTaskError(Exception):
    """No accepting lasso exists in the product: the task cannot be met."""


def track_buchi(nba, current, observed):
    """One-step image of a set of automaton states under one observation."""
    observed = frozenset(observed)
    out = set()
    for s in current:
        out |= nba.successors(s, observed)
    return frozenset(out)


class ProductAutomaton:
    """Explicit product graph.

    `states` lists the part reachable from the initial states (what plans
    are searched over); potentials and traps are computed on the full
    |regions| x |automaton| graph so that off-plan continuous samples can
    still be scored.
    """

    def __init__(self, cts, nba):
        if not nba.initial:
            raise InfeasibleTaskError("automaton has an empty initial set")
        self.cts = cts
        self.nba = nba

        succ_cache = {}

        def buchi_succ(s, labels):
            key = (s, labels)
            hit = succ_cache.get(key)
            if hit is None:
                hit = sorted(nba.successors(s, labels))
                succ_cache[key] = hit
            return hit

        motion = {}
        for a, b in cts.transitions:
            motion.setdefault(a, []).append(b)
        for a in motion:
            motion[a].sort()

        self._succ = {}
        all_states = []
        for rid in cts.states:
            for s in range(nba.n_states):
                q = (rid, s)
                all_states.append(q)
                out = []
                for rid2 in motion.get(rid, ()):
                    for s2 in buchi_succ(s, cts.labels[rid2]):
                        out.append((rid2, s2))
                self._succ[q] = out

        self.initial = tuple(sorted((cts.initial, s) for s in nba.initial))
        reachable = set(self.initial)
        queue = list(self.initial)
        while queue:
            q = queue.pop()
            for q2 in self._succ[q]:
                if q2 not in reachable:
                    reachable.add(q2)
                    queue.append(q2)
        self.states = tuple(sorted(reachable))
        self.accepting = frozenset(q for q in self.states if q[1] in nba.accepting)

        self._pred = {q: [] for q in all_states}
        for q, outs in self._succ.items():
            for q2 in outs:
                self._pred[q2].append(q)

        self._potential_full = None

    def successors(self, q):
        return self._succ[q]

    def predecessors(self, q):
        return self._pred[q]

    def _self_reachable_accepting(self):
        """Accepting states lying on a cycle, over the full graph."""
        out = []
        for rid in self.cts.states:
            for s in sorted(self.nba.accepting):
                q = (rid, s)
                # BFS from q back to q (>= 1 transition)
                seen = set()
                queue = list(self._succ[q])
                found = False
                while queue:
                    cur = queue.pop()
                    if cur == q:
                        found = True
                        break
                    if cur in seen:
                        continue
                    seen.add(cur)
                    queue.extend(self._succ[cur])
                if found:
                    out.append(q)
        return out

    def potential_full(self):
        """Hop distance to the self-reachable accepting set, every state."""
        if self._potential_full is not None:
            return self._potential_full
        anchors = self._self_reachable_accepting()
        dist = {q: math.inf for q in self._succ}
        queue = []
        for q in anchors:
            dist[q] = 0
            queue.append(q)
        head = 0
        while head < len(queue):
            q = queue[head]
            head += 1
            d = dist[q] + 1
            for p in self._pred[q]:
                if dist[p] == math.inf:
                    dist[p] = d
                    queue.append(p)
        self._potential_full = dist
        return dist


def build_product(cts, nba):
    """Construct the product automaton (reachable part exposed)."""
    return ProductAutomaton(cts, nba)


@dataclass(frozen=True)
class PotentialTable:
    """Per-state distance-to-accepting-cycle values."""

    table: dict  # reachable product state -> value (int or inf)
    full: dict  # every (region, automaton state) pair -> value

    def of_state(self, q):
        return self.full.get(q, math.inf)

    def of(self, region_id, buchi_set):
        """Continuous-state lookup: best value over a set of automaton states."""
        if not buchi_set:
            return math.inf
        return min(self.full.get((region_id, s), math.inf) for s in buchi_set)


def compute_potential(pba):
    full = pba.potential_full()
    return PotentialTable({q: full[q] for q in pba.states}, full)


def compute_traps(pba):
    """Product states from which no accepting cycle is reachable."""
    full = pba.potential_full()
    return frozenset(q for q in pba.states if full[q] == math.inf)


def trap_regions(pba, buchi_set):
    """Regions whose entry makes the task unsatisfiable under the currently
    tracked automaton states: the one-step image while reading the region's
    labels has no state of finite potential.  Static obstacle cells (no
    self-loop in the motion abstraction) are excluded: they are handled as
    obstacles, not traps."""
    full = pba.potential_full()
    labels = pba.cts.labels
    out = []
    for rid in pba.cts.states:
        if (rid, rid) not in pba.cts.transitions:
            continue
        image = track_buchi(pba.nba, buchi_set, labels[rid])
        if not image or all(full.get((rid, s), math.inf) == math.inf for s in image):
            out.append(rid)
    return sorted(out)


@dataclass(frozen=True)
class Plan:
    """Prefix-suffix run through the product.

    `prefix` starts at an initial state and ends at the accepting anchor;
    `suffix` holds the cycle states after the anchor (empty for a self-loop)
    and implicitly returns to it.
    """

    prefix: tuple
    suffix: tuple

    @property
    def anchor(self):
        return self.prefix[-1]

    @property
    def cycle(self):
        return self.suffix + (self.anchor,)

    def state_at(self, progress):
        if progress < len(self.prefix):
            return self.prefix[progress]
        i = (progress - len(self.prefix)) % len(self.cycle)
        return self.cycle[i]

    def region_trace(self):
        return [q[0] for q in self.prefix], [q[0] for q in self.cycle]

    def label_lasso(self, labels):
        """The word the automaton reads along the run (labels of every region
        entered after the start)."""
        stem = tuple(frozenset(labels[q[0]]) for q in self.prefix[1:])
        loop = tuple(frozenset(labels[q[0]]) for q in self.cycle)
        return stem, loop

    def validate(self, pba):
        """Check connectivity, acceptance and loop closure against a product."""
        seq = list(self.prefix)
        for a, b in zip(seq, seq[1:]):
            if b not in pba.successors(a):
                raise ValueError(f"prefix transition {a} -> {b} not in product")
        if self.anchor not in pba.accepting:
            raise ValueError(f"anchor {self.anchor} is not accepting")
        cyc = [self.anchor] + list(self.cycle)
        for a, b in zip(cyc, cyc[1:]):
            if b not in pba.successors(a):
                raise ValueError(f"suffix transition {a} -> {b} not in product")
        return True


def _backward_dist(pba, targets):
    dist = {}
    queue = []
    for q in targets:
        dist[q] = 0
        queue.append(q)
    head = 0
    while head < len(queue):
        q = queue[head]
        head += 1
        d = dist[q] + 1
        for p in pba.predecessors(q):
            if p not in dist:
                dist[p] = d
                queue.append(p)
    return dist


def _greedy_walk(pba, start, dist, length):
    """Lexicographically smallest shortest path following a distance field."""
    path = [start]
    cur = start
    remaining = length
    while remaining > 0:
        nxt = min(
            q for q in pba.successors(cur) if dist.get(q, math.inf) == remaining - 1
        )
        path.append(nxt)
        cur = nxt
        remaining -= 1
    return path


def find_plan(pba, initial=None):
    """Shortest prefix to a self-reachable accepting state, then the shortest
    cycle through it; ties resolve to the smallest (region, state) sequence.

    `initial` overrides the product's initial states (used when replanning
    from an intermediate pose).  Raises InfeasibleTaskError when no accepting
    lasso exists.
    """
    full = pba.potential_full()
    init_states = list(pba.initial if initial is None else initial)
    forward = {}
    queue = list(init_states)
    for q in queue:
        forward[q] = 0
    head = 0
    while head < len(queue):
        q = queue[head]
        head += 1
        d = forward[q] + 1
        for q2 in pba.successors(q):
            if q2 not in forward:
                forward[q2] = d
                queue.append(q2)

    candidates = [
        q for q in forward if q[1] in pba.nba.accepting and full[q] == 0
    ]
    if not candidates:
        raise InfeasibleTaskError("no reachable accepting cycle in the product")
    anchor = min(candidates, key=lambda q: (forward[q], q))

    to_anchor = _backward_dist(pba, [anchor])
    plen = forward[anchor]
    starts = [q for q in init_states if to_anchor.get(q, math.inf) == plen]
    prefix = _greedy_walk(pba, min(starts), to_anchor, plen)

    cycle_len = 1 + min(
        (to_anchor.get(q, math.inf) for q in pba.successors(anchor)), default=math.inf
    )
    first = min(
        q
        for q in pba.successors(anchor)
        if to_anchor.get(q, math.inf) == cycle_len - 1
    )
    cycle = _greedy_walk(pba, first, to_anchor, cycle_len - 1)
    return Plan(tuple(prefix), tuple(cycle[:-1]) if cycle_len > 1 else ())
