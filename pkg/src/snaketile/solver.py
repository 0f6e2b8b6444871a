"""Search and decision procedures for snakes.

All searches share one depth-first engine that grows injective paths from a
start vertex, checking dominoes incrementally. Exploration order is fixed:
start vertices as given, steps in declared order, colours in declared order.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

from .errors import InstanceError, Undetermined, UnsupportedCapability
from .groups import MarkedGroup, format_word
from .tiles import (FinitePathSnake, Ouroboros, PeriodicSnake, StepTable, Tileset,
                    ValidityMode, validate_snake)


@dataclass(frozen=True)
class Budget:
    max_length: int = 12
    max_period: int = 6
    max_radius: int = 8
    max_states: int = 200_000
    time_cap: float | None = None

    def __post_init__(self):
        for name in ("max_length", "max_period", "max_radius", "max_states"):
            if getattr(self, name) < 1:
                raise InstanceError(f"budget {name} must be positive")
        if self.time_cap is not None and self.time_cap <= 0:
            raise InstanceError("budget time_cap must be positive")


class Outcome(str, Enum):
    YES = "Yes"
    NO = "No"
    UNKNOWN = "Unknown"


@dataclass
class Verdict:
    outcome: Outcome
    witness: object = None
    certificate: dict = field(default_factory=dict)
    used: dict = field(default_factory=dict)
    words: tuple = ()

    @property
    def definite(self):
        return self.outcome != Outcome.UNKNOWN

    def record(self):
        rows = [("outcome", self.outcome.value)]
        if self.witness is not None:
            rows.append(("witness_shape", self.witness.shape))
            rows.append(("witness_words", ";".join(format_word(w) for w in self.words)))
            if isinstance(self.witness, PeriodicSnake):
                rows.append(("period", self.witness.period))
        for k in sorted(self.certificate):
            rows.append((f"cert_{k}", self.certificate[k]))
        for k in sorted(self.used):
            rows.append((f"used_{k}", self.used[k]))
        return rows


class Case(str, Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    UNKNOWN = "Unknown"


@dataclass
class CaseLabel:
    case: Case
    R: int | None = None
    witness: PeriodicSnake | None = None
    detail: dict = field(default_factory=dict)

    @property
    def definite(self):
        return self.case != Case.UNKNOWN

    def record(self):
        rows = [("case", self.case.value)]
        if self.R is not None:
            rows.append(("R", self.R))
        for k in sorted(self.detail):
            rows.append((k, self.detail[k]))
        return rows


class _OutOfBudget(Exception):
    pass


class _Found(Exception):
    pass


class Engine:
    """Incremental path growth with domino checks for one (group, tileset, strength)."""

    def __init__(self, G: MarkedGroup, tiles: Tileset, strength="strong", budget=None):
        self.G = G
        self.tiles = tiles
        self.st = StepTable(G, tiles)
        self.strength = strength
        self.directed = tiles.directed
        self.budget = budget or Budget()
        self.D = tiles.dominoes
        self.states = 0
        self.deadline = (time.monotonic() + self.budget.time_cap
                         if self.budget.time_cap else None)
        self.step_len = [len(w) for w in tiles.steps]
        self.id = G.identity()
        self.id_steps = [k for k, e in enumerate(self.st.ev) if e == self.id]

    def tick(self):
        self.states += 1
        if self.states > self.budget.max_states:
            raise _OutOfBudget("states")
        if self.deadline is not None and self.states % 512 == 0 and time.monotonic() > self.deadline:
            raise _OutOfBudget("time")

    def moves(self, v, x):
        G, ev = self.G, self.st.ev
        if self.directed:
            k = x[1]
            return [(k, G.mul(v, ev[k]))]
        seen, out = set(), []
        for k, e in enumerate(ev):
            w = G.mul(v, e)
            if w not in seen:
                seen.add(w)
                out.append((k, w))
        return out

    def fits(self, index, colors, w, y, prev=None, k=None):
        """Can w coloured y join the support `index` (vertex -> position)?"""
        G, D = self.G, self.D
        if self.strength == "strong":
            for k2, e in enumerate(self.st.ev):
                z = G.mul(w, e)
                if z == w:
                    if (y, k2, y) not in D:
                        return False
                    continue
                j = index.get(z)
                if j is not None and (y, k2, colors[j]) not in D:
                    return False
            for k2, e in enumerate(self.st.evinv):
                z = G.mul(w, e)
                if z == w:
                    continue
                j = index.get(z)
                if j is not None and (colors[j], k2, y) not in D:
                    return False
            return True
        if prev is None:
            return True
        x = colors[prev]
        if self.directed:
            return (x, k, y) in D
        step = self.st.ev[k]
        return any((x, k2, y) in D for k2, e in enumerate(self.st.ev) if e == step)

    def head_open(self, index, w, y):
        G = self.G
        if self.directed:
            z = G.mul(w, self.st.ev[y[1]])
            return z != w and z not in index
        return any(G.mul(w, e) != w and G.mul(w, e) not in index for e in self.st.ev)

    def grow(self, starts, max_n, visit, close=None):
        """Depth-first enumeration of valid path snakes with at most max_n vertices.

        visit(verts, colors, steps) is called on every valid path; returning True
        stops the search. close(...) is called when a move re-enters the start
        vertex (cycle candidates). Returns True if some path hit max_n and could
        still be extended (the search was truncated).
        """
        truncated = False
        verts, colors, steps, index = [], [], [], {}

        def rec():
            nonlocal truncated
            self.tick()
            if visit(verts, colors, steps):
                raise _Found
            head, x = verts[-1], colors[-1]
            full = len(verts) >= max_n
            for k, w in self.moves(head, x):
                if w in index:
                    if close is not None and w == verts[0]:
                        if close(verts, colors, steps, k):
                            raise _Found
                    continue
                for y in self.tiles.colors:
                    if not self.fits(index, colors, w, y, len(verts) - 1, k):
                        continue
                    index[w] = len(verts)
                    verts.append(w)
                    colors.append(y)
                    steps.append(k)
                    if self.head_open(index, w, y) or close is not None:
                        if full:
                            truncated = truncated or self.head_open(index, w, y)
                        else:
                            rec()
                    del index[w]
                    verts.pop()
                    colors.pop()
                    steps.pop()

        try:
            for v in starts:
                for y in self.tiles.colors:
                    if not self.fits({}, [], v, y):
                        continue
                    index[v] = 0
                    verts.append(v)
                    colors.append(y)
                    if self.head_open(index, v, y) or close is not None:
                        rec()
                    del index[v]
                    verts.pop()
                    colors.pop()
        except _Found:
            return None
        return truncated

    def words(self, start_word, steps):
        out = [tuple(start_word)]
        for k in steps:
            out.append(out[-1] + self.tiles.steps[k])
        return tuple(out)


def _snake_valid_path(eng, verts, colors):
    index = {v: i for i, v in enumerate(verts)}
    return eng.head_open(index, verts[-1], colors[-1])


def reach(G: MarkedGroup, tiles: Tileset, A, B, budget: Budget | None = None,
          strength="strong", start_words=None) -> Verdict:
    """Snake from a vertex of A (finite iterable of canonical elements) to a vertex satisfying B."""
    budget = budget or Budget()
    eng = Engine(G, tiles, strength, budget)
    starts = list(A)
    start_words = start_words or {}
    found = {}
    deepest = [0, 0]

    def visit(verts, colors, steps):
        ok_head = _snake_valid_path(eng, verts, colors)
        wl = sum(eng.step_len[k] for k in steps)
        deepest[0] = max(deepest[0], len(verts))
        deepest[1] = max(deepest[1], wl)
        try:
            hit = B(verts[-1])
        except Exception as exc:  # predicate failures are surfaced as instance errors
            raise InstanceError(f"target predicate failed: {exc}") from exc
        if ok_head and hit:
            found["snake"] = FinitePathSnake(tuple(verts), tuple(colors))
            found["words"] = eng.words(start_words.get(verts[0], ()), steps)
            return True
        return False

    try:
        truncated = eng.grow(starts, budget.max_length, visit)
    except _OutOfBudget as exc:
        return Verdict(Outcome.UNKNOWN, used={"states": eng.states, "exhausted": str(exc)})
    used = {"states": eng.states}
    if "snake" in found:
        return Verdict(Outcome.YES, found["snake"], words=found["words"], used=used)
    if truncated:
        used["exhausted"] = "length"
        return Verdict(Outcome.UNKNOWN, used=used)
    cert = {"kind": "closed", "max_vertices": deepest[0], "radius": deepest[1]}
    return Verdict(Outcome.NO, certificate=cert, used=used)


def ouroboros_search(G: MarkedGroup, tiles: Tileset, budget: Budget | None = None,
                     strength="strong") -> Verdict:
    budget = budget or Budget()
    eng = Engine(G, tiles, strength, budget)
    found = {}
    deepest = [0, 0]

    def visit(verts, colors, steps):
        deepest[0] = max(deepest[0], len(verts))
        deepest[1] = max(deepest[1], sum(eng.step_len[k] for k in steps))
        if len(verts) == 1 and eng.id_steps:
            y = colors[0]
            ks = [y[1]] if eng.directed else eng.id_steps
            for k in ks:
                if k in eng.id_steps and (strength == "strong" or (y, k, y) in eng.D):
                    found["cycle"] = Ouroboros(tuple(verts), tuple(colors))
                    found["steps"] = [k]
                    return True
        return False

    def close(verts, colors, steps, k):
        if len(verts) < 2:
            return False
        if strength == "weak":
            x, y = colors[-1], colors[0]
            step = eng.st.ev[k]
            ks = [k] if eng.directed else [k2 for k2, e in enumerate(eng.st.ev) if e == step]
            if not any((x, k2, y) in eng.D for k2 in ks):
                return False
        found["cycle"] = Ouroboros(tuple(verts), tuple(colors))
        found["steps"] = list(steps) + [k]
        return True

    try:
        truncated = eng.grow([G.identity()], budget.max_length, visit, close)
    except _OutOfBudget as exc:
        return Verdict(Outcome.UNKNOWN, used={"states": eng.states, "exhausted": str(exc)})
    used = {"states": eng.states}
    if "cycle" in found:
        cyc = found["cycle"]
        words = eng.words((), found["steps"])
        return Verdict(Outcome.YES, cyc, words=words, used=used)
    cert = {"kind": "cycles-excluded", "bound": budget.max_length if truncated else deepest[0],
            "complete": not truncated, "radius": deepest[1]}
    return Verdict(Outcome.NO, certificate=cert, used=used)


def _periodic_candidates(eng: Engine, p):
    """Yield (verts, colors, steps, g) for fundamental domains of period p."""
    G = eng.G
    out = []

    def visit(verts, colors, steps):
        if len(verts) == p:
            g = G.mul(verts[-1], eng.st.ev[colors[-1][1]])
            out.append((tuple(verts), tuple(colors), tuple(steps) + (colors[-1][1],), g))
        return False

    eng.grow([G.identity()], p, visit)
    return out


def periodic_snake_search(G: MarkedGroup, tiles: Tileset, budget: Budget | None = None,
                          accept=None) -> Verdict:
    """Positive semi-decider for strong directed bi-infinite snakes.

    `accept(g)` optionally restricts the translation element.
    """
    if not tiles.directed:
        raise InstanceError("periodic search needs a directed tileset")
    budget = budget or Budget()
    eng = Engine(G, tiles, "strong", budget)
    mode = ValidityMode("strong", True, "infinite")
    skipped = 0
    try:
        for p in range(1, budget.max_period + 1):
            for verts, colors, steps, g in _periodic_candidates(eng, p):
                if g == eng.id or (accept is not None and not accept(g)):
                    continue
                snake = PeriodicSnake(p, verts, colors, g)
                eng.tick()
                try:
                    ok = validate_snake(G, tiles, snake, mode)
                except Undetermined:
                    skipped += 1
                    continue
                if ok:
                    words = eng.words((), steps)
                    return Verdict(Outcome.YES, snake, words=words,
                                   used={"states": eng.states, "period": p})
    except _OutOfBudget as exc:
        return Verdict(Outcome.UNKNOWN, used={"states": eng.states, "exhausted": str(exc)})
    return Verdict(Outcome.UNKNOWN, used={"states": eng.states, "exhausted": "period",
                                          "undetermined": skipped})


def segment_exists(G: MarkedGroup, tiles: Tileset, n: int, budget: Budget | None = None):
    """True/False for a valid strong directed n-vertex segment starting at 1; None on budget."""
    eng = Engine(G, tiles, "strong", budget or Budget())
    hit = []

    def visit(verts, colors, steps):
        if len(verts) >= n:
            hit.append(True)
            return True
        return False

    try:
        eng.grow([G.identity()], n, visit)
    except _OutOfBudget:
        return None
    return bool(hit)


def path_search(G: MarkedGroup, tiles: Tileset, n: int, budget: Budget | None = None,
                strength="strong") -> Verdict:
    """A valid path snake with exactly n vertices, up to translation."""
    budget = budget or Budget()
    eng = Engine(G, tiles, strength, budget)
    found = {}

    def visit(verts, colors, steps):
        if len(verts) == n:
            found["snake"] = FinitePathSnake(tuple(verts), tuple(colors))
            found["words"] = eng.words((), steps)
            return True
        return False

    try:
        eng.grow([G.identity()], n, visit)
    except _OutOfBudget as exc:
        return Verdict(Outcome.UNKNOWN, used={"states": eng.states, "exhausted": str(exc)})
    used = {"states": eng.states}
    if "snake" in found:
        return Verdict(Outcome.YES, found["snake"], words=found["words"], used=used)
    return Verdict(Outcome.NO, certificate={"kind": "segment-exhaustion", "n": n}, used=used)


def infinite_snake_decide(G: MarkedGroup, tiles: Tileset, budget: Budget | None = None) -> Verdict:
    if not tiles.directed:
        raise InstanceError("reduce the tileset to directed strong form first")
    budget = budget or Budget()
    top = max(budget.max_length, budget.max_period)
    for k in range(1, top + 1):
        if k <= budget.max_period:
            v = periodic_snake_search(G, tiles, Budget(budget.max_length, k, budget.max_radius,
                                                       budget.max_states, budget.time_cap))
            if v.outcome == Outcome.YES:
                return v
        if k <= budget.max_length:
            ex = segment_exists(G, tiles, k, budget)
            if ex is None:
                return Verdict(Outcome.UNKNOWN, used={"exhausted": "states", "length": k})
            if not ex:
                return Verdict(Outcome.NO, certificate={"kind": "segment-exhaustion", "n": k})
    return Verdict(Outcome.UNKNOWN, used={"exhausted": "length", "length": budget.max_length})


def _middle_windows_level(G, tiles, budget):
    """Search (T, n) such that every middle n-window of every valid T-segment
    starts and ends at the same Z-level; return (R, T, n) or None."""
    eng = Engine(G, tiles, "strong", budget)
    pi = G.pi
    for T in range(2, budget.max_length + 1):
        segs = []

        def visit(verts, colors, steps):
            if len(verts) == T:
                segs.append([pi(v) for v in verts])
            return False

        try:
            eng.grow([G.identity()], T, visit)
        except _OutOfBudget:
            return None
        if not segs:
            return None
        for n in range(2, T + 1):
            m = (T - n) // 2
            R, ok = 0, True
            for s in segs:
                w = s[m:m + n]
                if w[-1] != w[0]:
                    ok = False
                    break
                R = max(R, max(w) - min(w))
            if ok:
                return R, T, n
    return None


def classify_z(G: MarkedGroup, tiles: Tileset, budget: Budget | None = None) -> CaseLabel:
    if not tiles.directed:
        raise InstanceError("classify needs a directed strong tileset")
    if G.pi_weights is None:
        raise UnsupportedCapability(f"{G.name} has no Z-projection")
    budget = budget or Budget()
    moving = periodic_snake_search(G, tiles, budget, accept=lambda g: G.pi(g) != 0)
    if moving.outcome == Outcome.YES:
        return CaseLabel(Case.CASE1, witness=moving.witness,
                         detail={"period": moving.witness.period,
                                 "words": ";".join(format_word(w) for w in moving.words)})
    dec = infinite_snake_decide(G, tiles, budget)
    if dec.outcome == Outcome.NO:
        return CaseLabel(Case.CASE3, detail={"n": dec.certificate["n"]})
    if dec.outcome == Outcome.YES:
        flat = _middle_windows_level(G, tiles, budget)
        if flat is not None:
            R, T, n = flat
            return CaseLabel(Case.CASE2, R=R, witness=dec.witness,
                             detail={"segment": T, "window": n})
    return CaseLabel(Case.UNKNOWN, detail={"infinite": dec.outcome.value})


def lift_snake(G: MarkedGroup, H: MarkedGroup, tiles: Tileset, snake: FinitePathSnake,
               start_word=()) -> FinitePathSnake:
    """Follow the same step words in G from the lift of the start vertex."""
    if not set(H.letters) <= set(G.letters):
        raise InstanceError("quotient must use the marking of the covering group")
    mode = ValidityMode("strong", True, "path")
    if not validate_snake(H, tiles, snake, mode):
        raise InstanceError("snake does not validate in the quotient")
    start_word = tuple(start_word)
    if H.eval_canon(start_word) != snake.vertices[0]:
        raise InstanceError("start word does not evaluate to the snake's first vertex")
    v = G.eval_canon(start_word)
    verts = [v]
    for c in snake.colors[:-1]:
        v = G.mul(v, G.eval_canon(tiles.steps[c[1]]))
        verts.append(v)
    return FinitePathSnake(tuple(verts), snake.colors)
