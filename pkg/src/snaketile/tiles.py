"""Tilesets, snakes, validity checking, and the two tileset reductions.

Directed colours are pairs ``(base, k)`` where ``k`` indexes the step list;
dominoes are triples ``(colour, k, colour)``. Undirected colours are plain
names. A finite path snake must be able to keep going: in directed mode the
head's arrow leaves the support, in undirected mode some step does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

from .errors import InstanceError, Undetermined
from .groups import MarkedGroup, format_word

STRENGTHS = ("weak", "strong")
SHAPES = ("path", "infinite", "ouroboros")


@dataclass(frozen=True)
class Tileset:
    steps: tuple
    colors: tuple
    dominoes: frozenset
    directed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(tuple(w) for w in self.steps))
        object.__setattr__(self, "colors", tuple(self.colors))
        object.__setattr__(self, "dominoes", frozenset(self.dominoes))
        if any(len(w) == 0 for w in self.steps):
            raise InstanceError("step words must be nonempty")
        if len(set(self.steps)) != len(self.steps):
            raise InstanceError("duplicate step words")
        if len(set(self.colors)) != len(self.colors):
            raise InstanceError("duplicate colours")
        cs = set(self.colors)
        if self.directed:
            for c in self.colors:
                if not (isinstance(c, tuple) and len(c) == 2 and 0 <= c[1] < len(self.steps)):
                    raise InstanceError(f"directed colour {c!r} must carry a step index")
        for x, k, y in self.dominoes:
            if x not in cs or y not in cs:
                raise InstanceError(f"domino {(x, k, y)!r} names an undeclared colour")
            if not 0 <= k < len(self.steps):
                raise InstanceError(f"domino {(x, k, y)!r} names an undeclared step")

    @property
    def base_colors(self):
        if not self.directed:
            return self.colors
        return tuple(dict.fromkeys(c[0] for c in self.colors))

    def direction(self, color):
        return color[1]

    @property
    def max_step_length(self):
        return max((len(w) for w in self.steps), default=0)

    def sorted_dominoes(self):
        order = {c: i for i, c in enumerate(self.colors)}
        return sorted(self.dominoes, key=lambda d: (order[d[0]], d[1], order[d[2]]))

    def color_name(self, c):
        return f"{c[0]}:{c[1]}" if self.directed else str(c)

    def encode(self) -> str:
        steps = "|".join(" ".join(w) for w in self.steps)
        cols = ",".join(self.color_name(c) for c in self.colors)
        doms = ",".join(f"({self.color_name(x)},{k},{self.color_name(y)})"
                        for x, k, y in self.sorted_dominoes())
        return f"{'directed' if self.directed else 'undirected'};S=[{steps}];C=[{cols}];D=[{doms}]"


DirectedTileset = Tileset


@dataclass(frozen=True)
class ValidityMode:
    strength: str = "strong"
    directed: bool = True
    shape: str = "path"

    def __post_init__(self):
        if self.strength not in STRENGTHS or self.shape not in SHAPES:
            raise InstanceError(f"bad validity mode {self}")


@dataclass(frozen=True)
class FinitePathSnake:
    vertices: tuple
    colors: tuple
    shape = "path"


@dataclass(frozen=True)
class Ouroboros:
    vertices: tuple
    colors: tuple
    shape = "ouroboros"


@dataclass(frozen=True)
class PeriodicSnake:
    """Bi-infinite snake with omega(i + k*period) = translation^k * omega(i)."""

    period: int
    vertices: tuple
    colors: tuple
    translation: object
    shape = "infinite"


class StepTable:
    """Evaluated steps of a tileset inside a group."""

    def __init__(self, G: MarkedGroup, tiles: Tileset):
        self.G = G
        self.tiles = tiles
        self.ev = tuple(G.eval_canon(w) for w in tiles.steps)
        self.evinv = tuple(G.inv(e) for e in self.ev)
        self.D = tiles.dominoes

    def steps_for(self, u, v):
        d = self.G.mul(self.G.inv(u), v)
        return [k for k, e in enumerate(self.ev) if e == d]


def _check_colors(tiles, colors):
    cs = set(tiles.colors)
    for c in colors:
        if c not in cs:
            raise InstanceError(f"colour {c!r} not in tileset")


def _edge_ok(st: StepTable, mode, x, y, u, v):
    ks = st.steps_for(u, v)
    if not ks:
        return False
    if mode.directed:
        k = x[1]
        if k not in ks:
            return False
        return mode.strength == "strong" or (x, k, y) in st.D
    if mode.strength == "strong":
        return True
    return any((x, k, y) in st.D for k in ks)


def _support_checks(st, mode, verts, colors, edges, sources=None):
    """Injectivity, edge constraints and (strong mode) all adjacencies."""
    index = {}
    for i, v in enumerate(verts):
        if v in index:
            return False
        index[v] = i
    for i, j in edges:
        if not _edge_ok(st, mode, colors[i], colors[j], verts[i], verts[j]):
            return False
    if mode.strength == "strong":
        G = st.G
        for i in (range(len(verts)) if sources is None else sources):
            for k, e in enumerate(st.ev):
                j = index.get(G.mul(verts[i], e))
                if j is not None and (colors[i], k, colors[j]) not in st.D:
                    return False
    return True


def _head_open(st, mode, verts, colors):
    G = st.G
    support = set(verts)
    head = verts[-1]
    if mode.directed:
        return G.mul(head, st.ev[colors[-1][1]]) not in support
    return any(G.mul(head, e) not in support for e in st.ev)


def periodic_window(G: MarkedGroup, st: StepTable, snake: PeriodicSnake):
    """Number K of neighbouring periods that can interact with period 0.

    Raises Undetermined when neither the Z-projection nor a tree action bounds it.
    """
    g = snake.translation
    bounds = []
    if G.pi_weights is not None:
        pg = G.pi(g)
        if pg != 0:
            pis = [G.pi(v) for v in snake.vertices]
            spread = max(pis) - min(pis)
            reach = max((abs(G.pi(e)) for e in st.ev), default=0)
            bounds.append((spread + reach) // abs(pg))
    tl = G.tree_length(g)
    if tl is not None:
        tau = G.tree_length(G.mul(g, g)) - tl
        if tau > 0:
            m = max(G.tree_length(v) for v in snake.vertices)
            ls = max((G.tree_length(e) for e in st.ev), default=0)
            bounds.append((2 * m + ls) // tau)
    if bounds:
        return min(bounds)
    raise Undetermined("translation has no certified infinite order")


def _torsion_order(G, g, limit=64):
    x = g
    for k in range(1, limit + 1):
        if x == G.identity():
            return k
        x = G.mul(x, g)
    return None


def validate_snake(G: MarkedGroup, tiles: Tileset, snake, mode: ValidityMode) -> bool:
    if snake.shape != mode.shape:
        raise InstanceError(f"snake shape {snake.shape} does not match mode {mode.shape}")
    if mode.directed and not tiles.directed:
        raise InstanceError("directed validity needs a directed tileset")
    _check_colors(tiles, snake.colors)
    st = StepTable(G, tiles)
    verts, colors = tuple(snake.vertices), tuple(snake.colors)
    if len(verts) != len(colors) or not verts:
        return False

    if mode.shape == "path":
        edges = [(i, i + 1) for i in range(len(verts) - 1)]
        return (_support_checks(st, mode, verts, colors, edges)
                and _head_open(st, mode, verts, colors))

    if mode.shape == "ouroboros":
        n = len(verts)
        if n == 1:
            ok = any(e == G.identity() for e in st.ev)
            if not ok:
                return False
        edges = [(i, (i + 1) % n) for i in range(n)]
        return _support_checks(st, mode, verts, colors, edges)

    # periodic: unroll a window of periods on both sides
    p, g = snake.period, snake.translation
    if p != len(verts) or g == G.identity():
        return False
    try:
        K = periodic_window(G, st, snake)
    except Undetermined:
        if _torsion_order(G, g) is not None:
            return False
        raise
    powers = {0: G.identity()}
    for k in range(1, K + 2):
        powers[k] = G.mul(powers[k - 1], g)
        powers[-k] = G.inv(powers[k])
    ks = sorted(powers)
    window = [G.mul(powers[k], v) for k in ks for v in verts]
    wcolors = [c for _ in ks for c in colors]
    zero = ks.index(0) * p
    edges = [(zero + i, zero + i + 1) for i in range(p)]
    sources = range(zero, zero + p)
    return _support_checks(st, mode, window, wcolors, edges, sources)


# ------------------------------------------------------------- reductions

def to_directed_strong(tiles: Tileset, source: str) -> Tileset:
    """Tileset whose strong directed snakes match `source`-variant snakes of `tiles`."""
    steps = range(len(tiles.steps))
    D = tiles.dominoes
    if source in ("strong", "weak"):
        if tiles.directed:
            raise InstanceError(f"{source} source expects an undirected tileset")
        colors = tuple((c, k) for c in tiles.colors for k in steps)
        if source == "strong":
            doms = {((c, s), k, (d, s2)) for c, k, d in D for s in steps for s2 in steps}
        else:
            doms = {((c, k), k, (d, s2)) for c, k, d in D for s2 in steps}
            doms |= {(x, k, y) for x in colors for y in colors for k in steps if k != x[1]}
        return Tileset(tiles.steps, colors, frozenset(doms), True)
    if source == "directed-weak":
        if not tiles.directed:
            raise InstanceError("directed-weak source expects a directed tileset")
        doms = {(x, k, y) for x, k, y in D if k == x[1]}
        doms |= {(x, k, y) for x in tiles.colors for y in tiles.colors for k in steps
                 if k != x[1]}
        return Tileset(tiles.steps, tiles.colors, frozenset(doms), True)
    raise InstanceError(f"unknown source variant {source!r}")


def extend_generators(tiles: Tileset, bigger_steps) -> Tileset:
    bigger = [tuple(w) for w in bigger_steps]
    missing = [w for w in tiles.steps if w not in bigger]
    if missing:
        raise InstanceError(f"extension does not contain steps {missing}")
    if not tiles.directed:
        raise InstanceError("extend_generators needs a directed tileset")
    new = [w for w in bigger if w not in tiles.steps]
    steps = tiles.steps + tuple(new)
    old = len(tiles.steps)
    wild = {(x, k, y) for x in tiles.colors for y in tiles.colors
            for k in range(old, len(steps))}
    return Tileset(steps, tiles.colors, tiles.dominoes | wild, True)


# ------------------------------------------------------------- enumeration

def _words_upto(letters, L):
    out = []
    for n in range(1, L + 1):
        out.extend(product(letters, repeat=n))
    return out


def _colex_unrank(r, k):
    out = []
    for i in range(k, 0, -1):
        c = i - 1
        while math.comb(c + 1, i) <= r:
            c += 1
        out.append(c)
        r -= math.comb(c, i)
    return sorted(out)


def _colex_rank(combo):
    return sum(math.comb(c, i + 1) for i, c in enumerate(sorted(combo)))


def _shell_blocks(s):
    for L in range(1, s - 1):
        for k in range(1, s - L):
            m = s - L - k
            if m >= 1:
                yield L, k, m


def _block_size(letters, L, k, m):
    n_l = len(_words_upto(letters, L))
    n_prev = len(_words_upto(letters, L - 1))
    n_steps = math.comb(n_l, k) - math.comb(n_prev, k)
    n_col = m * k
    return n_steps, n_col * k * n_col


def _build(letters, L, k, m, s_rank, d, d_rank):
    words = _words_upto(letters, L)
    n_prev = len(_words_upto(letters, L - 1))
    idx = _colex_unrank(s_rank + math.comb(n_prev, k), k)
    steps = tuple(words[i] for i in idx)
    colors = tuple((f"c{j}", q) for j in range(m) for q in range(k))
    triples = [(x, q, y) for x in colors for q in range(k) for y in colors]
    doms = frozenset(triples[i] for i in _colex_unrank(d_rank, d))
    return Tileset(steps, colors, doms, True)


def enumerate_tilesets(index: int, letters=("a", "t", "T")) -> Tileset:
    """The index-th directed tileset over `letters` (full colour set C' x S').

    Shells of constant max-step-length + |S'| + |C'| are finite and listed in
    order; inside a shell the order is (max step length, |S'|, |C'|, |D|),
    then step set, then domino set, both in colex order.
    """
    if index < 0:
        raise InstanceError("index must be nonnegative")
    r = index
    s = 3
    while True:
        for L, k, m in _shell_blocks(s):
            n_steps, T = _block_size(letters, L, k, m)
            total = n_steps * 2 ** T
            if r >= total:
                r -= total
                continue
            for d in range(T + 1):
                chunk = n_steps * math.comb(T, d)
                if r >= chunk:
                    r -= chunk
                    continue
                s_rank, d_rank = divmod(r, math.comb(T, d))
                return _build(letters, L, k, m, s_rank, d, d_rank)
        s += 1


def tileset_index(tiles: Tileset, letters=("a", "t", "T")) -> int:
    """Inverse of enumerate_tilesets."""
    k = len(tiles.steps)
    L = tiles.max_step_length
    m = len(tiles.base_colors)
    colors = tuple((f"c{j}", q) for j in range(m) for q in range(k))
    words = _words_upto(letters, L)
    order = sorted(tiles.steps, key=lambda w: words.index(w))
    relabel = {}
    bases = {b: f"c{j}" for j, b in enumerate(tiles.base_colors)}
    for c in tiles.colors:
        relabel[c] = (bases[c[0]], order.index(tiles.steps[c[1]]))
    if set(relabel.values()) != set(colors):
        raise InstanceError("tileset is outside the enumerated family")
    doms = {(relabel[x], order.index(tiles.steps[q]), relabel[y]) for x, q, y in tiles.dominoes}
    triples = [(x, q, y) for x in colors for q in range(k) for y in colors]
    d_rank = _colex_rank([triples.index(t) for t in doms])
    n_prev = len(_words_upto(letters, L - 1))
    s_rank = _colex_rank([words.index(w) for w in order]) - math.comb(n_prev, k)
    d = len(doms)
    offset = 0
    s = L + k + m
    for s2 in range(3, s):
        for blk in _shell_blocks(s2):
            n_steps, T = _block_size(letters, *blk)
            offset += n_steps * 2 ** T
    for blk in _shell_blocks(s):
        n_steps, T = _block_size(letters, *blk)
        if blk == (L, k, m):
            break
        offset += n_steps * 2 ** T
    n_steps, T = _block_size(letters, L, k, m)
    for d2 in range(d):
        offset += n_steps * math.comb(T, d2)
    return offset + s_rank * math.comb(T, d) + d_rank


def describe_snake(G, snake) -> str:
    return f"{snake.shape}[{len(snake.vertices)}]"
