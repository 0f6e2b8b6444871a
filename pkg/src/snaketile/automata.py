"""Rabin tree automata over a prefix-closed regular domain.

A production is (state, letter, children) where children has one entry per
direction, each a state or None for the blank outside the domain. A run is
accepting when every infinite branch satisfies some pair (N, P): states of N
occur finitely often and states of P infinitely often.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import BudgetExceeded, InstanceError, UnsupportedCapability


@dataclass(frozen=True)
class TreeDomain:
    """DFA over the directions; a missing transition goes to a rejecting sink."""

    directions: tuple
    states: tuple
    start: object
    delta: dict
    accepting: frozenset

    def __post_init__(self):
        object.__setattr__(self, "accepting", frozenset(self.accepting))
        if self.start not in self.accepting:
            raise InstanceError("domain must contain the empty word")
        reach = self.reachable()
        for q in reach:
            if q in self.accepting:
                continue
            stack, seen = [q], {q}
            while stack:
                x = stack.pop()
                for s in self.directions:
                    y = self.delta.get((x, s))
                    if y is None or y in seen:
                        continue
                    if y in self.accepting:
                        raise InstanceError("domain language is not prefix-closed")
                    seen.add(y)
                    stack.append(y)
        nxt = {}
        for d in reach:
            for s in self.directions:
                y = self.delta.get((d, s))
                nxt[(d, s)] = y if y in self.accepting else None
        object.__setattr__(self, "_next", nxt)
        object.__setattr__(self, "_patterns", {
            d: tuple(nxt[(d, s)] is None for s in self.directions) for d in reach})
        object.__setattr__(self, "_words", {})

    @classmethod
    def full(cls, directions=(0, 1)):
        directions = tuple(directions)
        return cls(directions, ("w",), "w", {("w", s): "w" for s in directions}, frozenset({"w"}))

    def __hash__(self):
        return hash((self.directions, self.states, self.start, self.accepting))

    def step(self, d, s):
        return self._next.get((d, s))

    def reachable(self):
        seen, stack = {self.start}, [self.start]
        while stack:
            x = stack.pop()
            for s in self.directions:
                y = self.delta.get((x, s))
                if y is not None and y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    def live(self):
        """Reachable accepting DFA states, in a fixed order."""
        if "live" not in self._words:
            self._words["live"] = sorted((d for d in self.reachable() if d in self.accepting),
                                         key=repr)
        return self._words["live"]

    def patterns(self):
        """Blank patterns occurring at domain words."""
        if "patterns" not in self._words:
            self._words["patterns"] = frozenset(
                v for d, v in self._patterns.items() if d in self.accepting)
        return self._words["patterns"]

    def pattern(self, d):
        """Which directions leave the domain at DFA state d."""
        return self._patterns[d]

    def words(self, depth):
        if depth in self._words:
            return self._words[depth]
        out, layer = [((), self.start)], [((), self.start)]
        for _ in range(depth):
            nxt = []
            for w, d in layer:
                for s in self.directions:
                    e = self.step(d, s)
                    if e is not None:
                        nxt.append((w + (s,), e))
            out.extend(nxt)
            layer = nxt
        self._words[depth] = out
        return out

    def layout(self, depth):
        """Domain words up to `depth`, each with its child words (None past the depth)."""
        key = ("layout", depth)
        if key not in self._words:
            rows = []
            for w, d in self.words(depth):
                kids = None
                if len(w) < depth:
                    kids = tuple(w + (s,) if self.step(d, s) is not None else None
                                 for s in self.directions)
                rows.append((w, kids))
            self._words[key] = rows
        return self._words[key]


_LAST_INDEX = [None, None]


@dataclass(frozen=True)
class RabinAutomaton:
    states: tuple
    start: object
    alphabet: tuple
    productions: frozenset
    pairs: tuple
    domain: TreeDomain

    def __post_init__(self):
        prods = self.productions
        if not isinstance(prods, frozenset) or any(type(p[2]) is not tuple for p in prods):
            prods = frozenset((q, a, tuple(ch)) for q, a, ch in prods)
            object.__setattr__(self, "productions", prods)
        object.__setattr__(self, "pairs", tuple((frozenset(n), frozenset(p)) for n, p in self.pairs))
        states = set(self.states)
        for n, p in self.pairs:
            if not (n <= states and p <= states):
                raise InstanceError("acceptance pair names an undeclared state")
        # automata differing only in their pairs share the production index
        key = (self.states, self.start, self.alphabet, prods, self.domain)
        if _LAST_INDEX[0] == key:
            object.__setattr__(self, "_index", _LAST_INDEX[1])
            return
        spos = {q: i for i, q in enumerate(self.states)}
        apos = {x: i for i, x in enumerate(self.alphabet)}
        if self.start not in spos:
            raise InstanceError("start state is not declared")
        k = len(self.domain.directions)
        patterns = self.domain.patterns()
        index = {}
        for prod in prods:
            q, a, ch = prod
            if q not in spos or a not in apos or len(ch) != k:
                raise InstanceError(f"malformed production {prod!r}")
            for c in ch:
                if c is not None and c not in spos:
                    raise InstanceError(f"production {prod!r} names an undeclared state")
            blank = tuple(c is None for c in ch)
            if blank not in patterns:
                raise InstanceError(f"production {prod!r} has a blank pattern outside the domain")
            index.setdefault((q, blank), []).append(
                ((apos[a], tuple(-1 if c is None else spos[c] for c in ch)), a, ch))
        # options in declared letter order, then by child states
        for slot, opts in index.items():
            opts.sort(key=_first)
            index[slot] = [(a, ch) for _, a, ch in opts]
        object.__setattr__(self, "_index", index)
        _LAST_INDEX[:] = [key, index]

    def options(self, q, pattern):
        return self._index.get((q, pattern), [])


@dataclass(frozen=True)
class RegularTree:
    """Finite-state labeler: nodes are (automaton state, domain state) pairs."""

    states: tuple
    start: object
    transition: dict
    output: dict
    directions: tuple

    def expand(self, depth):
        """Labeling {word: (q, letter)} on the domain up to `depth`."""
        out = {}
        layer = [((), self.start)]
        for level in range(depth + 1):
            nxt = []
            for w, m in layer:
                out[w] = (m[0], self.output[m])
                if level < depth:
                    for s in self.directions:
                        n = self.transition.get((m, s))
                        if n is not None:
                            nxt.append((w + (s,), n))
            layer = nxt
        return out

    def rows(self):
        for m in self.states:
            succ = " ".join(f"{s}->{self._name(self.transition[(m, s)])}"
                            for s in self.directions if (m, s) in self.transition)
            yield self._name(m), self.output[m], succ

    def _name(self, m):
        q = ".".join(map(str, m[0])) if isinstance(m[0], tuple) else m[0]
        return f"{q}@{m[1]}"


def check_run_prefix(A: RabinAutomaton, run: dict, depth: int) -> bool:
    dom = A.domain
    layout = dom.layout(depth)
    if len(run) != len(layout) or any(w not in run for w, _ in layout):
        raise InstanceError("run labeling does not cover exactly the domain up to the depth")
    if run[()][0] != A.start:
        return False
    prods = A.productions
    for w, kids in layout:
        if kids is None:
            continue
        q, a = run[w]
        ch = tuple(None if k is None else run[k][0] for k in kids)
        if (q, a, ch) not in prods:
            return False
    return True


# ------------------------------------------------------------ acceptance on graphs

def _sccs(nodes, succ):
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = [0]

    def visit(v):
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on.add(v)
        for w in succ[v]:
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(comp)

    for v in nodes:
        if v not in index:
            visit(v)
    return out


def _has_bad_cycle(nodes, succ, pairs, state_of):
    """Some closed walk whose state set satisfies no pair."""
    for comp in _sccs(nodes, succ):
        cs = set(comp)
        if len(comp) == 1 and comp[0] not in succ[comp[0]]:
            continue
        qs = {state_of(v) for v in comp}
        good = next((i for i, (n, p) in enumerate(pairs) if not (qs & n) and (qs & p)), None)
        if good is None:
            return True
        p = pairs[good][1]
        rest = [v for v in comp if state_of(v) not in p]
        sub = {v: [w for w in succ[v] if w in cs and state_of(w) not in p] for v in rest}
        if _has_bad_cycle(rest, sub, pairs, state_of):
            return True
    return False


@dataclass
class EmptinessResult:
    empty: bool
    tree: RegularTree | None
    strategies: int

    def record(self):
        rows = [("verdict", "Empty" if self.empty else "NonEmpty"), ("strategies", self.strategies)]
        if self.tree is not None:
            rows.append(("tree_states", len(self.tree.states)))
        return rows


def emptiness(A: RabinAutomaton, max_strategies: int = 1_000_000) -> EmptinessResult:
    """Search memoryless production choices on (state, domain state) nodes.

    Letters do not influence acceptance, so choices differing only in the
    letter are tried once, using the first letter in declared order.
    """
    dom = A.domain
    counted = 0
    memo = {}

    def choices(node):
        got = memo.get(node)
        if got is None:
            q, d = node
            seen, got = set(), []
            for a, ch in A.options(q, dom.pattern(d)):
                if ch not in seen:
                    seen.add(ch)
                    kids = tuple((c, dom.step(d, s)) for c, s in zip(ch, dom.directions)
                                 if c is not None)
                    got.append((a, ch, kids))
            memo[node] = got
        return got

    def evaluate(assign):
        nonlocal counted
        counted += 1
        if counted > max_strategies:
            raise BudgetExceeded("strategy budget exhausted", strategies=counted)
        succ = {v: c[2] for v, c in assign.items()}
        key = (frozenset(succ.items()), A.pairs)
        bad = _BAD_CYCLE_CACHE.get(key)
        if bad is None:
            if len(_BAD_CYCLE_CACHE) > 200_000:
                _BAD_CYCLE_CACHE.clear()
            bad = _BAD_CYCLE_CACHE[key] = _has_bad_cycle(list(assign), succ, A.pairs, _first)
        return not bad

    def search(assign, pending):
        if not pending:
            return dict(assign) if evaluate(assign) else None
        node, rest = pending[0], pending[1:]
        for c in choices(node):
            assign[node] = c
            new = []
            for k in c[2]:
                if k not in assign and k not in rest and k not in new:
                    new.append(k)
            found = search(assign, rest + new)
            if found is not None:
                return found
            del assign[node]
        return None

    root = (A.start, dom.start)
    found = search({}, [root])
    if found is None:
        return EmptinessResult(True, None, counted)
    transition = {}
    for v, (a, ch, _) in found.items():
        for c, s in zip(ch, dom.directions):
            if c is not None:
                transition[(v, s)] = (c, dom.step(v[1], s))
    order = sorted(found, key=repr)
    tree = RegularTree(tuple(order), root, transition, {v: found[v][0] for v in found},
                       dom.directions)
    return EmptinessResult(False, tree, counted)


# strategy graphs recur across automata that differ only in unused productions
_BAD_CYCLE_CACHE: dict = {}


def _first(v):
    return v[0]


def run_of_tree(tree: RegularTree, depth: int):
    return tree.expand(depth)


# ------------------------------------------------------------ combinations

def _check_compatible(A1, A2):
    if A1.domain != A2.domain or tuple(A1.alphabet) != tuple(A2.alphabet):
        raise InstanceError("automata differ in domain or alphabet")


def _closure(start, expand):
    seen, order, stack = {start}, [start], [start]
    prods = []
    while stack:
        x = stack.pop()
        for a, ch in expand(x):
            prods.append((x, a, ch))
            for c in ch:
                if c is not None and c not in seen:
                    seen.add(c)
                    order.append(c)
                    stack.append(c)
    return order, prods


def combine(A1: RabinAutomaton, A2: RabinAutomaton, op: str) -> RabinAutomaton:
    _check_compatible(A1, A2)
    if op == "intersection":
        return _intersection(A1, A2)
    if op == "union":
        return _union(A1, A2)
    raise InstanceError(f"unknown combination {op!r}")


def _intersection(A1, A2):
    pairs = [(i, j) for i in range(len(A1.pairs)) for j in range(len(A2.pairs))]

    def enter(flags, q1, q2):
        # flag 0 waits for P1, flag 1 waits for P2; a completed round is a hit
        new, hits = [], []
        for (i, j), f in zip(pairs, flags):
            if f == 0 and q1 in A1.pairs[i][1]:
                new.append(1)
                hits.append(0)
            elif f == 1 and q2 in A2.pairs[j][1]:
                new.append(0)
                hits.append(1)
            else:
                new.append(f)
                hits.append(0)
        return tuple(new), tuple(hits)

    def make(q1, q2, flags):
        f, h = enter(flags, q1, q2)
        return (q1, q2, f, h)

    by1, by2 = {}, {}
    for q, a, ch in A1.productions:
        by1.setdefault((q, a), []).append(ch)
    for q, a, ch in A2.productions:
        by2.setdefault((q, a), []).append(ch)

    def expand(x):
        q1, q2, f, _ = x
        out = []
        for a in A1.alphabet:
            for c1 in sorted(by1.get((q1, a), []), key=repr):
                for c2 in sorted(by2.get((q2, a), []), key=repr):
                    if [c is None for c in c1] != [c is None for c in c2]:
                        continue
                    ch = tuple(None if u is None else make(u, v, f) for u, v in zip(c1, c2))
                    out.append((a, ch))
        return out

    start = make(A1.start, A2.start, (0,) * len(pairs))
    states, prods = _closure(start, expand)
    acc = []
    for k, (i, j) in enumerate(pairs):
        n1, n2 = A1.pairs[i][0], A2.pairs[j][0]
        N = {x for x in states if x[0] in n1 or x[1] in n2}
        P = {x for x in states if x[3][k] == 1}
        acc.append((N, P))
    return RabinAutomaton(tuple(states), start, A1.alphabet, frozenset(prods), tuple(acc), A1.domain)


def _union(A1, A2):
    start = ("u",)
    prods = []
    for side, A in ((1, A1), (2, A2)):
        lift = lambda c, side=side: None if c is None else (side, c)
        for q, a, ch in A.productions:
            prods.append(((side, q), a, tuple(lift(c) for c in ch)))
            if q == A.start:
                prods.append((start, a, tuple(lift(c) for c in ch)))
    states = (start,) + tuple((1, q) for q in A1.states) + tuple((2, q) for q in A2.states)
    pairs = [({(1, q) for q in n}, {(1, q) for q in p}) for n, p in A1.pairs]
    pairs += [({(2, q) for q in n}, {(2, q) for q in p}) for n, p in A2.pairs]
    return RabinAutomaton(states, start, A1.alphabet, frozenset(prods), tuple(pairs), A1.domain)


# ------------------------------------------------------------ independent checks

def _move_table(A):
    """Nodes indexed as bits; each node lists its options as child bitmasks."""
    if _LAST_MOVES[0] is A._index:
        return _LAST_MOVES[1]
    dom = A.domain
    nodes = [(q, d) for q in A.states for d in dom.live()]
    bit = {v: 1 << i for i, v in enumerate(nodes)}
    moves = []
    for v in nodes:
        opts = set()
        for _, ch in A.options(v[0], dom.pattern(v[1])):
            m = 0
            for c, s in zip(ch, dom.directions):
                if c is not None:
                    m |= bit[(c, dom.step(v[1], s))]
            opts.add(m)
        moves.append(tuple(opts))
    _LAST_MOVES[:] = [A._index, (nodes, bit, moves)]
    return nodes, bit, moves


_LAST_MOVES = [None, None]


def _cpre(moves, S):
    out = 0
    for i, opts in enumerate(moves):
        for m in opts:
            if m & S == m:
                out |= 1 << i
                break
    return out


def _mask(bit, pred):
    out = 0
    for v, b in bit.items():
        if pred(v):
            out |= b
    return out


def _winning(nodes, bit, moves, A):
    full = (1 << len(nodes)) - 1

    def fix(f, X):
        while True:
            Y = f(X)
            if Y == X:
                return X
            X = Y

    if not A.pairs:
        return fix(lambda X: _cpre(moves, X), 0)
    N, P = A.pairs[0]
    good = _mask(bit, lambda v: v[0] not in N)
    rec = _mask(bit, lambda v: v[0] not in N and v[0] in P)
    return fix(lambda X: fix(lambda Y: fix(
        lambda Z: _cpre(moves, X) | (rec & _cpre(moves, Y)) | (good & _cpre(moves, Z)),
        0), full), 0)


def _prefix(moves, leaves, depth):
    alive = leaves
    for _ in range(depth):
        alive = _cpre(moves, alive)
    return alive


def prefix_run_exists(A: RabinAutomaton, depth: int, extendable: bool = False) -> bool:
    """A run prefix of the given depth whose leaves can still be continued.

    By default a leaf only needs some applicable production; with
    `extendable` it must lie in the winning region, so the prefix extends to an
    accepting run.
    """
    if extendable:
        return truncated_runs(A, depth)[2]
    nodes, bit, moves = _move_table(A)
    alive = sum(1 << i for i, opts in enumerate(moves) if opts)
    return bool(_prefix(moves, alive, depth) & bit[(A.start, A.domain.start)])


def fixpoint_nonempty(A: RabinAutomaton) -> bool:
    """Nonemptiness via the nested fixpoint for at most one pair."""
    return truncated_runs(A, 0)[0]


def truncated_runs(A: RabinAutomaton, depth: int):
    """(fixpoint nonempty, plain depth prefix exists, extendable depth prefix exists)."""
    if len(A.pairs) > 1:
        raise UnsupportedCapability("fixpoint check handles at most one acceptance pair")
    nodes, bit, moves = _move_table(A)
    root = bit[(A.start, A.domain.start)]
    win = _winning(nodes, bit, moves, A)
    alive = sum(1 << i for i, opts in enumerate(moves) if opts)
    return (bool(win & root), bool(_prefix(moves, alive, depth) & root),
            bool(_prefix(moves, win, depth) & root))


def all_small_automata(max_states=2, max_letters=2, max_pairs=1):
    """Every automaton over the full binary domain within the given sizes.

    States are 0..k-1 with start 0, letters 0..m-1.
    """
    dom = TreeDomain.full((0, 1))
    for k in range(1, max_states + 1):
        Q = tuple(range(k))
        subsets = [frozenset(s for s in Q if mask >> s & 1) for mask in range(2 ** k)]
        pair_opts = [()]
        if max_pairs >= 1:
            pair_opts += [((n, p),) for n in subsets for p in subsets]
        for m in range(1, max_letters + 1):
            S = tuple(range(m))
            cands = [(q, a, ch) for q in Q for a in S for ch in product(Q, repeat=2)]
            for mask in range(2 ** len(cands)):
                prods = frozenset(c for i, c in enumerate(cands) if mask >> i & 1)
                for pairs in pair_opts:
                    yield RabinAutomaton(Q, 0, S, prods, pairs, dom)
