"""Towers of finite groups with HNN levels, their limits, and the supervisor game."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .errors import BudgetExceeded, InstanceError
from .groups import (FiniteGroupTable, HnnGroup, HnnNormalForm, HnnPresentation,
                     LamplighterGroup, MarkedGroup, PermutationLimitGroup,
                     elementary_abelian_table, format_word, symmetric_table)


class TowerFamily(str, Enum):
    LAMPLIGHTER = "lamplighter"
    PERMUTATIONS = "permutations"


def _family(f):
    try:
        return TowerFamily(f)
    except ValueError:
        raise InstanceError(f"unknown tower family {f!r}") from None


@dataclass(frozen=True, eq=False)
class TowerLevel:
    family: TowerFamily
    n: int
    A: FiniteGroupTable
    prev: FiniteGroupTable
    embedding_prev: tuple  # left copy of A_{n-1}
    alpha: dict            # left copy element -> shifted copy element
    presentation: HnnPresentation
    group: HnnGroup
    generators: dict       # generator name -> A_n element
    witnesses: dict        # generator name -> word over a, t, T

    @property
    def order(self):
        return self.A.order


def _lamplighter_tables(n):
    A = elementary_abelian_table(n + 1)
    prev = elementary_abelian_table(n)
    left = tuple(range(prev.order))
    shifted = tuple(v << 1 for v in range(prev.order))
    gens = {f"e{i}": 1 << i for i in range(n + 1)}
    wit = {f"e{i}": ("T",) * i + ("a",) + ("t",) * i for i in range(n + 1)}
    return A, prev, left, shifted, 1, gens, wit


def _perm_tables(n):
    m = n + 2
    A = symmetric_table(m)
    prev = symmetric_table(m - 1)
    idx = {p: i for i, p in enumerate(A.labels)}
    left, shifted = [], []
    for p in prev.labels:
        left.append(idx[tuple(p) + (m - 1,)])
        shifted.append(idx[(0,) + tuple(v + 1 for v in p)])

    def transposition(i):
        q = list(range(m))
        q[i], q[i + 1] = q[i + 1], q[i]
        return idx[tuple(q)]

    gens = {f"s{i}": transposition(i) for i in range(m - 1)}
    wit = {f"s{i}": ("T",) * i + ("a",) + ("t",) * i for i in range(m - 1)}
    return A, prev, tuple(left), tuple(shifted), transposition(0), gens, wit


def build_level(family, n: int, max_order: int = 1024) -> TowerLevel:
    family = _family(family)
    if n < 0:
        raise InstanceError("level must be nonnegative")
    size = 2 ** (n + 1) if family == TowerFamily.LAMPLIGHTER else _factorial(n + 2)
    if size > max_order:
        raise BudgetExceeded(f"A_{n} has {size} elements, above the table budget {max_order}",
                             order=size)
    maker = _lamplighter_tables if family == TowerFamily.LAMPLIGHTER else _perm_tables
    A, prev, left, shifted, a, gens, wit = maker(n)
    P = HnnPresentation(A, prev, left, shifted, names={"a": a})
    G = HnnGroup(P, {"a": a}, name=f"{family.value}[{n}]")
    level = TowerLevel(family, n, A, prev, left, dict(zip(left, shifted)), P, G, gens, wit)
    verify_level(level)
    return level


def _factorial(m):
    out = 1
    for i in range(2, m + 1):
        out *= i
    return out


def verify_level(level: TowerLevel):
    """Raise InstanceError unless every structural claim about the level holds."""
    A, prev, P, G = level.A, level.prev, level.presentation, level.group
    for name, emb in (("left", level.embedding_prev), ("shifted", tuple(level.alpha[x] for x in level.embedding_prev))):
        if len(set(emb)) != prev.order or not A.is_hom_from(prev, emb):
            raise InstanceError(f"{name} copy of the previous group is not embedded")
    # the two copies are conjugate by t in G_n
    t = G.eval_canon(("t",))
    T = G.eval_canon(("T",))
    for x, y in level.alpha.items():
        lhs = G.mul(G.mul(T, HnnNormalForm(x, ())), t)
        if lhs != HnnNormalForm(y, ()):
            raise InstanceError("t does not conjugate the left copy onto the shifted copy")
    for name, g in level.generators.items():
        if G.eval_canon(level.witnesses[name]) != HnnNormalForm(g, ()):
            raise InstanceError(f"witness word for {name} evaluates elsewhere")
    if A.generated(list(level.generators.values())) != set(range(A.order)):
        raise InstanceError("declared generators do not generate A_n")
    return True


def limit_group(family) -> MarkedGroup:
    family = _family(family)
    if family == TowerFamily.LAMPLIGHTER:
        return LamplighterGroup()
    return PermutationLimitGroup()


# ------------------------------------------------------------------ balls

def ball_witness(G: MarkedGroup, H: MarkedGroup, r: int):
    """None if the marked balls of radius r agree, else a word pair separating them."""
    if set(G.letters) != set(H.letters):
        raise InstanceError("groups are marked by different generating sets")
    letters = G.letters
    start = (G.identity(), H.identity())
    g2h, h2g, word = {start[0]: start[1]}, {start[1]: start[0]}, {start: ()}
    frontier = [start]
    for _ in range(r):
        nxt = []
        for x, y in frontier:
            w = word[(x, y)]
            for s in letters:
                x2, y2 = G.act(x, s), H.act(y, s)
                seen_x, seen_y = g2h.get(x2), h2g.get(y2)
                if seen_x is None and seen_y is None:
                    g2h[x2], h2g[y2] = y2, x2
                    word[(x2, y2)] = w + (s,)
                    nxt.append((x2, y2))
                elif seen_x != y2:
                    other = word[(x2, seen_x)] if seen_x is not None else word[(seen_y, y2)]
                    return other, w + (s,)
        frontier = nxt
    return None


def ball_agreement(G: MarkedGroup, H: MarkedGroup, r: int) -> bool:
    return ball_witness(G, H, r) is None


# ------------------------------------------------------------------ fibers

@dataclass
class FiberComponentsReport:
    interval: tuple
    radius: int
    components: list
    closed: list
    frontier: list
    bound: int | None

    @property
    def max_size(self):
        return max((len(c) for c in self.components), default=0)

    @property
    def all_closed(self):
        return all(self.closed)

    def within_bound(self):
        if self.bound is None:
            return None
        return all(len(c) <= self.bound for c, ok in zip(self.components, self.closed) if ok)

    def record(self):
        return [("interval", f"{self.interval[0]}..{self.interval[1]}" if self.interval else "empty"),
                ("radius", self.radius), ("components", len(self.components)),
                ("closed", sum(self.closed)), ("max_size", self.max_size),
                ("bound", self.bound if self.bound is not None else "-"),
                ("within_bound", self.within_bound()),
                ("max_frontier", max(self.frontier, default=0))]


def fiber_components(G: MarkedGroup, r: int, interval, max_vertices: int = 20000,
                     level: TowerLevel | None = None) -> FiberComponentsReport:
    """Components through ball(r) of the graph on pi^-1(I) whose edges are ball(r) elements."""
    if G.pi_weights is None:
        raise InstanceError(f"{G.name} has no Z-projection")
    if not interval:
        return FiberComponentsReport((), r, [], [], [], None)
    lo, hi = min(interval), max(interval)
    e = G.identity()
    seen = {e}
    layer = [e]
    for _ in range(r):
        nxt = []
        for x in layer:
            for s in G.letters:
                y = G.act(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        layer = nxt
    gens = [x for x in seen if x != e]
    seeds = sorted((x for x in seen if lo <= G.pi(x) <= hi), key=repr)
    comps, closed, fronts, owner = [], [], [], set()
    for s in seeds:
        if s in owner:
            continue
        comp = {s}
        queue = deque([s])
        done = True
        while queue:
            if len(comp) > max_vertices:
                done = False
                break
            x = queue.popleft()
            for g in gens:
                y = G.mul(x, g)
                if y not in comp and lo <= G.pi(y) <= hi:
                    comp.add(y)
                    queue.append(y)
        owner |= comp
        comps.append(frozenset(comp))
        closed.append(done)
        fronts.append(len(queue))
    bound = None
    if level is not None:
        width = (hi + r) - (lo - r)
        bound = 4 * width ** 2 * level.order
    return FiberComponentsReport((lo, hi), r, comps, closed, fronts, bound)


# ------------------------------------------------------------------ supervisor

@dataclass
class WatchItem:
    index: int
    encoding: str
    R: int
    words: str


@dataclass
class SupervisorState:
    stage: int = 0
    cursor: int = 0
    radius: int = 0
    watch: list = field(default_factory=list)
    resolved: dict = field(default_factory=dict)
    log: list = field(default_factory=list)


def _max_word(words):
    return max((len(w) for w in words), default=0)


def supervisor_step(state: SupervisorState, level: TowerLevel, budget=None):
    """Resolve the next enumerated tileset on this level; returns (state, radius)."""
    from .solver import Budget, Case, Outcome, classify_z, ouroboros_search, reach
    from .tiles import enumerate_tilesets

    budget = budget or Budget()
    G = level.group
    idx = state.cursor
    tiles = enumerate_tilesets(idx)
    L = tiles.max_step_length
    kind, r = None, 0
    closure = reach(G, tiles, [G.identity()], lambda v: False, budget)
    if closure.outcome == Outcome.NO:
        kind, r = "no-snake", closure.certificate["radius"] + L
    else:
        cyc = ouroboros_search(G, tiles, budget)
        if cyc.outcome == Outcome.YES:
            kind, r = "ouroboros", _max_word(cyc.words) + L
        else:
            label = classify_z(G, tiles, budget)
            if label.case == Case.CASE1:
                words = label.detail["words"].split(";")
                kind = "periodic-unbounded"
                r = max(len(w.split()) if w != "1" else 0 for w in words) + L
            elif label.case == Case.CASE3:
                kind, r = "no-snake", label.detail["n"] * L
            elif label.case == Case.CASE2:
                kind = "bounded-Z-watch"
                r = L
                state.watch.append(WatchItem(idx, tiles.encode(), label.R, ""))
            else:
                state.log.append(f"stage={state.stage} level={level.n} tileset={idx} kind=aborted "
                                 f"radius=- acc={state.radius}")
                raise BudgetExceeded(f"tileset {idx} unresolved on level {level.n}",
                                     tileset=idx, level=level.n, detail=label.detail)
    state.radius = max(state.radius, r)
    if kind != "bounded-Z-watch":
        state.resolved[idx] = kind
    state.log.append(f"stage={state.stage} level={level.n} tileset={idx} kind={kind} "
                     f"radius={r} acc={state.radius}")
    _recheck_watch(state, level, budget)
    state.cursor += 1
    state.stage += 1
    return state, r


def _recheck_watch(state, level, budget):
    from .solver import Case, classify_z
    from .tiles import enumerate_tilesets

    keep = []
    for item in state.watch:
        if item.index == state.cursor:
            keep.append(item)
            continue
        label = classify_z(level.group, enumerate_tilesets(item.index), budget)
        if label.case in (Case.CASE1, Case.CASE3):
            state.resolved[item.index] = label.case.value
            state.log.append(f"stage={state.stage} level={level.n} tileset={item.index} "
                             f"kind=watch-resolved-{label.case.value} radius=0 acc={state.radius}")
        else:
            keep.append(item)
    state.watch = keep


def run_supervisor(steps: int, family="lamplighter", levels=(1, 2, 3), budget=None):
    state = SupervisorState()
    built = {n: build_level(family, n) for n in levels}
    for i in range(steps):
        n = levels[min(len(levels) - 1, i * len(levels) // steps)]
        supervisor_step(state, built[n], budget)
    return state
