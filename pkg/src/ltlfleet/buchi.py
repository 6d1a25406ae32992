"""Nondeterministic Buchi automata and the tableau translation from LTL.

The translation is the classic node-expansion construction: formulas in
negation normal form are unfolded into a graph whose nodes carry "old" and
"next" obligation sets, giving a generalized Buchi automaton (one acceptance
set per Until subformula), which is then degeneralized with a counter.
Edge guards are conjunctions of literals, evaluated on demand against label
sets, so the 2^AP alphabet is never materialized.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ltl import (
    And,
    FalseF,
    LassoWord,
    Next,
    Not,
    Or,
    Prop,
    Release,
    TrueF,
    Until,
    subformulas,
)


@dataclass(frozen=True)
class Guard:
    """Conjunction of literals: all of `require` present, none of `forbid`."""

    require: frozenset
    forbid: frozenset

    def eval(self, labels):
        return self.require <= labels and not (self.forbid & labels)

    def __str__(self):
        lits = sorted(self.require) + [f"!{p}" for p in sorted(self.forbid)]
        return " && ".join(lits) if lits else "true"


GUARD_TRUE = Guard(frozenset(), frozenset())


class BuchiAutomaton:
    """NBA with integer states; immutable after construction."""

    def __init__(self, n_states, initial, accepting, edges):
        self.n_states = n_states
        self.initial = frozenset(initial)
        self.accepting = frozenset(accepting)
        self.edges = tuple(edges)
        self._adj = [[] for _ in range(n_states)]
        for src, guard, dst in self.edges:
            self._adj[src].append((guard, dst))

    def successors(self, state, labels):
        """delta(state, labels): states reachable under one label set."""
        labels = frozenset(labels)
        return {dst for guard, dst in self._adj[state] if guard.eval(labels)}

    def out_edges(self, state):
        return self._adj[state]

    def __repr__(self):
        return (
            f"BuchiAutomaton(states={self.n_states}, init={sorted(self.initial)}, "
            f"accepting={sorted(self.accepting)}, edges={len(self.edges)})"
        )


# ---------------------------------------------------------------------------
# Tableau translation.

_INIT = -1


class _Node:
    __slots__ = ("id", "incoming", "new", "old", "next")

    def __init__(self, node_id, incoming, new, old, nxt):
        self.id = node_id
        self.incoming = set(incoming)
        self.new = set(new)
        self.old = set(old)
        self.next = set(nxt)


def _key(f):
    # Canonical ordering key; structural, so it is stable across runs
    # regardless of hash randomization.
    return str(f)


def _pop_min(formulas):
    f = min(formulas, key=_key)
    formulas.discard(f)
    return f


def _negation(f):
    if isinstance(f, Prop):
        return Not(f)
    if isinstance(f, Not):
        return f.sub
    if isinstance(f, TrueF):
        return FalseF()
    if isinstance(f, FalseF):
        return TrueF()
    return None


def _expand(phi):
    """Node expansion; returns the closed node list."""
    nodes = []
    counter = [0]

    def fresh(incoming, new, old, nxt):
        counter[0] += 1
        return _Node(counter[0], incoming, new, old, nxt)

    pending = [fresh({_INIT}, {phi}, set(), set())]
    while pending:
        node = pending.pop()
        if not node.new:
            merged = False
            for other in nodes:
                if other.old == node.old and other.next == node.next:
                    other.incoming |= node.incoming
                    merged = True
                    break
            if merged:
                continue
            nodes.append(node)
            pending.append(fresh({node.id}, node.next, set(), set()))
            continue
        f = _pop_min(node.new)
        if isinstance(f, FalseF):
            continue  # contradiction, drop the node
        if isinstance(f, (TrueF, Prop, Not)):
            neg = _negation(f)
            if neg is not None and neg in node.old:
                continue
            if not isinstance(f, TrueF):
                node.old.add(f)
            pending.append(node)
        elif isinstance(f, And):
            node.new |= {f.left, f.right} - node.old
            node.old.add(f)
            pending.append(node)
        elif isinstance(f, Next):
            node.old.add(f)
            node.next.add(f.sub)
            pending.append(node)
        elif isinstance(f, Or):
            n1 = fresh(node.incoming, node.new | ({f.left} - node.old), node.old | {f}, node.next)
            n2 = fresh(node.incoming, node.new | ({f.right} - node.old), node.old | {f}, node.next)
            pending.append(n2)
            pending.append(n1)
        elif isinstance(f, Until):
            n1 = fresh(
                node.incoming,
                node.new | ({f.left} - node.old),
                node.old | {f},
                node.next | {f},
            )
            n2 = fresh(node.incoming, node.new | ({f.right} - node.old), node.old | {f}, node.next)
            pending.append(n2)
            pending.append(n1)
        elif isinstance(f, Release):
            n1 = fresh(
                node.incoming,
                node.new | ({f.right} - node.old),
                node.old | {f},
                node.next | {f},
            )
            n2 = fresh(
                node.incoming,
                node.new | ({f.left, f.right} - node.old),
                node.old | {f},
                node.next,
            )
            pending.append(n2)
            pending.append(n1)
        else:
            raise TypeError(f"formula not in negation normal form: {f!r}")
    return nodes


def _node_guard(node):
    require = frozenset(f.name for f in node.old if isinstance(f, Prop))
    forbid = frozenset(f.sub.name for f in node.old if isinstance(f, Not))
    return Guard(require, forbid)


def translate(phi):
    """Translate an NNF formula into an NBA accepting exactly its models."""
    nodes = _expand(phi)
    guards = {n.id: _node_guard(n) for n in nodes}

    # Generalized acceptance: one set per Until subformula.
    untils = sorted((f for f in subformulas(phi) if isinstance(f, Until)), key=_key)
    accept_sets = []
    for u in untils:
        accept_sets.append({n.id for n in nodes if u not in n.old or u.right in n.old})
    k = max(1, len(accept_sets))
    if not accept_sets:
        accept_sets = [{n.id for n in nodes} | {_INIT}]

    # Degeneralize with a counter that advances when the source node lies in
    # the current acceptance set.
    raw_edges = []
    for n in nodes:
        for src in n.incoming:
            raw_edges.append((src, n.id))
    raw_ids = [_INIT] + [n.id for n in nodes]

    def advance(src, i):
        return (i + 1) % k if src in accept_sets[i] else i

    # Reachability prune over (node, counter) pairs, breadth first from the
    # dedicated initial state so numbering is deterministic.
    adj = {rid: [] for rid in raw_ids}
    for src, dst in raw_edges:
        adj[src].append(dst)
    for rid in adj:
        adj[rid].sort()

    start = (_INIT, 0)
    order = {start: 0}
    queue = [start]
    qi = 0
    edges_pairs = []
    while qi < len(queue):
        src_id, i = queue[qi]
        qi += 1
        for dst in adj[src_id]:
            tgt = (dst, advance(src_id, i))
            if tgt not in order:
                order[tgt] = len(order)
                queue.append(tgt)
            edges_pairs.append(((src_id, i), tgt, guards[dst]))

    accepting = {
        order[(nid, i)]
        for (nid, i) in order
        if i == 0 and nid in accept_sets[0]
    }
    edges = [(order[s], g, order[t]) for s, t, g in edges_pairs]
    return BuchiAutomaton(len(order), {0}, accepting, edges)


# ---------------------------------------------------------------------------
# Lasso-word acceptance.


class LassoChecker:
    """Acceptance of ultimately periodic words by one automaton.

    The check factors through the state reached after the stem: a word is
    accepted iff some state reachable over the stem admits an accepting run
    over loop^omega.  Both halves are cached per stem / per loop so that
    exhaustive enumerations over many words stay cheap.
    """

    def __init__(self, nba):
        self.nba = nba
        self._after_stem = {}
        self._good_loop = {}

    def _image(self, states_mask, labels):
        out = 0
        nba = self.nba
        for s in range(nba.n_states):
            if states_mask >> s & 1:
                for t in nba.successors(s, labels):
                    out |= 1 << t
        return out

    def _states_after(self, stem):
        mask = 0
        for s in self.nba.initial:
            mask |= 1 << s
        for labels in stem:
            if mask == 0:
                break
            mask = self._image(mask, labels)
        return mask

    def _good_loop_states(self, loop):
        """Bitmask of states from which loop^omega has an accepting run."""
        nba = self.nba
        k = len(loop)
        n = nba.n_states
        # Product of automaton states with loop offsets; an accepting run
        # exists from (s, 0) iff it reaches a cycle through an accepting pair.
        succ = {}
        for s in range(n):
            for i in range(k):
                succ[(s, i)] = [(t, (i + 1) % k) for t in nba.successors(s, loop[i])]

        # Strongly connected components (iterative Tarjan).
        index = {}
        low = {}
        on_stack = set()
        stack = []
        comp = {}
        n_comp = [0]
        counter = [0]

        def strongconnect(v0):
            work = [(v0, 0)]
            while work:
                v, pi = work[-1]
                if pi == 0:
                    index[v] = low[v] = counter[0]
                    counter[0] += 1
                    stack.append(v)
                    on_stack.add(v)
                recurse = False
                neighbors = succ[v]
                for j in range(pi, len(neighbors)):
                    w = neighbors[j]
                    if w not in index:
                        work[-1] = (v, j + 1)
                        work.append((w, 0))
                        recurse = True
                        break
                    if w in on_stack:
                        low[v] = min(low[v], index[w])
                if recurse:
                    continue
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp[w] = n_comp[0]
                        if w == v:
                            break
                    n_comp[0] += 1
                work.pop()
                if work:
                    u, _ = work[-1]
                    low[u] = min(low[u], low[v])

        for v in succ:
            if v not in index:
                strongconnect(v)

        comp_size = [0] * n_comp[0]
        comp_selfloop = [False] * n_comp[0]
        for v in succ:
            c = comp[v]
            comp_size[c] += 1
            if any(w == v for w in succ[v]):
                comp_selfloop[c] = True
        # A component contains a cycle iff it has more than one vertex or a
        # self loop; it is good if some accepting pair lies in it (for
        # size>1 SCCs every vertex lies on a cycle).
        good_comp = [False] * n_comp[0]
        for v in succ:
            c = comp[v]
            if v[0] in nba.accepting and (comp_size[c] > 1 or comp_selfloop[c]):
                good_comp[c] = True

        # Backward closure: pairs that can reach a good component.
        good_pairs = {v for v in succ if good_comp[comp[v]]}
        changed = True
        while changed:
            changed = False
            for v in succ:
                if v not in good_pairs and any(w in good_pairs for w in succ[v]):
                    good_pairs.add(v)
                    changed = True

        mask = 0
        for s in range(n):
            if (s, 0) in good_pairs:
                mask |= 1 << s
        return mask

    def accepts(self, word):
        stem = tuple(word.stem)
        loop = tuple(word.loop)
        after = self._after_stem.get(stem)
        if after is None:
            after = self._states_after(stem)
            self._after_stem[stem] = after
        good = self._good_loop.get(loop)
        if good is None:
            good = self._good_loop_states(loop)
            self._good_loop[loop] = good
        return bool(after & good)


def nba_accepts_lasso(nba, word):
    """True iff some run over stem.loop^omega meets an accepting state
    infinitely often."""
    if isinstance(word, tuple):
        word = LassoWord.of(*word)
    return LassoChecker(nba).accepts(word)
