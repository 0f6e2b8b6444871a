"""Naive reference searches used to cross-check the solver.

Vertex paths are enumerated first without looking at colours; colourings are
then found by plain backtracking against every constraint of the mode. No
pruning is shared with the solver.
"""
from __future__ import annotations

from .groups import MarkedGroup
from .tiles import Tileset


def _evaluated(G, tiles):
    return [G.eval_canon(w) for w in tiles.steps]


def vertex_paths(G: MarkedGroup, ev, n):
    """Injective vertex sequences of exactly n vertices starting at 1, with the
    step indices available on each consecutive pair."""
    out = []

    def rec(path, ks):
        if len(path) == n:
            out.append((tuple(path), tuple(ks)))
            return
        nexts = {}
        for k, e in enumerate(ev):
            nexts.setdefault(G.mul(path[-1], e), []).append(k)
        for w, kk in nexts.items():
            if w not in path:
                path.append(w)
                ks.append(tuple(kk))
                rec(path, ks)
                path.pop()
                ks.pop()

    rec([G.identity()], [])
    return out


def vertex_cycles(G, ev, n):
    out = []
    for path, ks in vertex_paths(G, ev, n):
        back = tuple(k for k, e in enumerate(ev) if G.mul(path[-1], e) == path[0])
        if back:
            out.append((path, ks + (back,)))
    return out


def _colourings(tiles, n, unary, binary):
    """Backtracking search for one colouring satisfying all constraints."""
    cols = tiles.colors
    by_last = [[] for _ in range(n)]
    for i, j, pred in binary:
        by_last[max(i, j)].append((i, j, pred))
    x = [None] * n

    def rec(i):
        if i == n:
            return True
        for c in cols:
            if not unary[i](c):
                continue
            x[i] = c
            if all(pred(x[a], x[b]) for a, b, pred in by_last[i]) and rec(i + 1):
                return True
        x[i] = None
        return False

    return list(x) if rec(0) else None


def _constraints(G, tiles, ev, verts, edges, strength, directed, head_rule, centre=None):
    D = tiles.dominoes
    n = len(verts)
    index = {v: i for i, v in enumerate(verts)}
    unary = [lambda c: True] * n
    binary = []
    edge_steps = {}
    for i, j, ks in edges:
        edge_steps[i] = (j, ks)
        if directed:
            unary[i] = (lambda ks: lambda c: c[1] in ks)(ks)
            if strength == "weak":
                binary.append((i, j, lambda a, b: (a, a[1], b) in D))
        elif strength == "weak":
            binary.append((i, j, (lambda ks: lambda a, b: any((a, k, b) in D for k in ks))(ks)))
    if strength == "strong":
        sources = range(n) if centre is None else centre
        for i in sources:
            for k, e in enumerate(ev):
                j = index.get(G.mul(verts[i], e))
                if j is not None:
                    binary.append((i, j, (lambda k: lambda a, b: (a, k, b) in D)(k)))
    if head_rule:
        h = n - 1
        support = set(verts)
        if directed:
            prev = unary[h]
            unary[h] = lambda c: prev(c) and G.mul(verts[h], ev[c[1]]) not in support
        else:
            if all(G.mul(verts[h], e) in support for e in ev):
                return None
    # identity-step self adjacency inside a pair check: binary with i == j
    fixed = []
    for i, j, pred in binary:
        if i == j:
            u = unary[i]
            unary[i] = (lambda u, pred: lambda c: u(c) and pred(c, c))(u, pred)
        else:
            fixed.append((i, j, pred))
    return unary, fixed


def path_snake_exists(G, tiles: Tileset, strength, directed, n_max):
    """Some valid path snake with at most n_max vertices (exists iff one starts at 1)."""
    return any(path_snake(G, tiles, strength, directed, n) for n in range(1, n_max + 1))


def path_snake(G, tiles, strength, directed, n):
    ev = _evaluated(G, tiles)
    for verts, ks in vertex_paths(G, ev, n):
        edges = [(i, i + 1, ks[i]) for i in range(n - 1)]
        cons = _constraints(G, tiles, ev, verts, edges, strength, directed, True)
        if cons is None:
            continue
        col = _colourings(tiles, n, *cons)
        if col is not None:
            return verts, col
    return None


def cycle_exists(G, tiles, strength, directed, n_max):
    ev = _evaluated(G, tiles)
    for n in range(1, n_max + 1):
        for verts, ks in vertex_cycles(G, ev, n):
            edges = [(i, (i + 1) % n, ks[i]) for i in range(n)]
            cons = _constraints(G, tiles, ev, verts, edges, strength, directed, False)
            if cons is not None and _colourings(tiles, n, *cons) is not None:
                return True
    return False


def _unroll(G, verts, g, W):
    powers = [G.identity()]
    for _ in range(W):
        powers.append(G.mul(powers[-1], g))
    inv = G.inv(g)
    neg = [G.identity()]
    for _ in range(W):
        neg.append(G.mul(neg[-1], inv))
    ordered = neg[:0:-1] + powers
    return [G.mul(h, v) for h in ordered for v in verts]


def periodic_window_check(G, tiles, verts, colors, g, strength, directed, periods):
    """Check a periodic snake on +-`periods` unrolled periods, pairs touching period 0."""
    p = len(verts)
    ev = _evaluated(G, tiles)
    window = _unroll(G, verts, g, periods)
    if len(set(window)) != len(window):
        return False
    zero = periods * p
    wcols = list(colors) * (2 * periods + 1)
    edges = []
    for i in range(zero, zero + p):
        d = G.mul(G.inv(window[i]), window[i + 1])
        ks = tuple(k for k, e in enumerate(ev) if e == d)
        if not ks:
            return False
        edges.append((i, i + 1, ks))
    cons = _constraints(G, tiles, ev, window, edges, strength, directed, False,
                        centre=range(zero, zero + p))
    unary, binary = cons
    return (all(unary[i](wcols[i]) for i in range(len(window)))
            and all(pred(wcols[i], wcols[j]) for i, j, pred in binary))


def _generous_periods(p, L):
    return 2 * p * L + L + 1


def periodic_exists(G, tiles, strength, directed, p_max, accept=None):
    """Brute force over fundamental paths, translations and periodic colourings."""
    ev = _evaluated(G, tiles)
    L = tiles.max_step_length
    for p in range(1, p_max + 1):
        for verts, ks in vertex_paths(G, ev, p):
            for k, e in enumerate(ev):
                g = G.mul(verts[-1], e)
                if g in verts or (accept is not None and not accept(g)):
                    continue
                W = _generous_periods(p, L)
                window = _unroll(G, verts, g, W)
                if len(set(window)) != len(window):
                    continue
                zero = W * p
                cols = _periodic_colouring(G, tiles, ev, window, zero, p, strength, directed)
                if cols is not None:
                    return verts, cols, g
    return None


def _periodic_colouring(G, tiles, ev, window, zero, p, strength, directed):
    """Find colours for one period so the unrolled window is valid."""
    from itertools import product
    for cols in product(tiles.colors, repeat=p):
        if periodic_window_check_cols(G, tiles, ev, window, zero, p, cols, strength, directed):
            return cols
    return None


def periodic_window_check_cols(G, tiles, ev, window, zero, p, cols, strength, directed):
    D = tiles.dominoes
    index = {v: i for i, v in enumerate(window)}
    col = lambda i: cols[(i - zero) % p]
    for i in range(zero, zero + p):
        d = G.mul(G.inv(window[i]), window[i + 1])
        ks = [k for k, e in enumerate(ev) if e == d]
        if not ks:
            return False
        x, y = col(i), col(i + 1)
        if directed:
            if x[1] not in ks:
                return False
            if strength == "weak" and (x, x[1], y) not in D:
                return False
        elif strength == "weak" and not any((x, k, y) in D for k in ks):
            return False
        if strength == "strong":
            for k, e in enumerate(ev):
                j = index.get(G.mul(window[i], e))
                if j is not None and (x, k, col(j)) not in D:
                    return False
    return True
