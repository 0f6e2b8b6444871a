"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import random
import sys
import time
from collections import Counter
from itertools import product
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
from families import directed_weak_family, undirected_family  # noqa: E402

from snaketile import oracle
from snaketile.automata import all_small_automata, check_run_prefix, emptiness, truncated_runs
from snaketile.groups import FreeGroup, HnnPresentation, hnn_normal_form
from snaketile.instance import parse_instance
from snaketile.solver import (Budget, Case, Outcome, classify_z, lift_snake, ouroboros_search,
                              periodic_snake_search, segment_exists)
from snaketile.tiles import (FinitePathSnake, Tileset, ValidityMode, to_directed_strong,
                             validate_snake)
from snaketile.tower import (ball_agreement, ball_witness, build_level, fiber_components,
                             limit_group, run_supervisor)

INSTANCES = Path(__file__).parent.parent / "instances"


@pytest.fixture
def verdict(capsys):
    """Print one line per criterion, outside pytest's capture."""
    started = time.monotonic()

    def say(name, ok, limit, detail=""):
        elapsed = time.monotonic() - started
        within = elapsed < limit
        with capsys.disabled():
            status = "PASS" if ok and within else "FAIL"
            print(f"\n[acceptance] {status} {name}: {detail} ({elapsed:.1f}s, limit {limit}s)")
        assert ok, detail
        assert within, f"{name} took {elapsed:.1f}s"
    return say


def test_convergence_radius(verdict):
    lim = limit_group("lamplighter")
    agree = {n: ball_agreement(build_level("lamplighter", n).group, lim, n // 2)
             for n in range(2, 7)}
    g0 = build_level("lamplighter", 0).group
    witness = ball_witness(g0, lim, 4)
    ok = all(agree.values()) and not ball_agreement(g0, lim, 4) and witness is not None
    if witness is not None:
        u, v = witness
        # the pair must actually separate the two groups
        ok &= (g0.eval_canon(u) == g0.eval_canon(v)) != (lim.eval_canon(u) == lim.eval_canon(v))
    verdict("convergence radius", ok, 60, f"agreement {agree}, level-0 witness {witness}")


def test_fiber_bound(verdict):
    worst, results = 0.0, []
    for n in (1, 2, 3):
        lv = build_level("lamplighter", n)
        for r in (1, 2):
            for interval in ((0, 0), (0, 1)):
                rep = fiber_components(lv.group, r, interval, level=lv)
                results.append(rep.all_closed and rep.within_bound())
                worst = max(worst, rep.max_size / rep.bound)
    verdict("fiber bound", all(results), 120,
            f"{sum(results)}/{len(results)} cases closed and within bound, max size/bound {worst:.3f}")


def _undirected_mismatches(G):
    bad = 0
    for th in undirected_family(G.letters):
        for src in ("weak", "strong"):
            red = to_directed_strong(th, src)
            for n in range(1, 7):
                if ((oracle.path_snake(G, th, src, False, n) is None)
                        != (oracle.path_snake(G, red, "strong", True, n) is None)):
                    bad += 1
            if oracle.cycle_exists(G, th, src, False, 6) != oracle.cycle_exists(G, red, "strong", True, 6):
                bad += 1
            if ((oracle.periodic_exists(G, th, src, False, 3) is None)
                    != (oracle.periodic_exists(G, red, "strong", True, 3) is None)):
                bad += 1
    return bad


def _directed_weak_mismatches(G):
    bad = total = 0
    for th in directed_weak_family(G.letters):
        total += 1
        red = to_directed_strong(th, "directed-weak")
        for n in range(1, 7):
            if (oracle.path_snake(G, th, "weak", True, n) is not None) != segment_exists(G, red, n):
                bad += 1
        if oracle.cycle_exists(G, th, "weak", True, 6) != (
                ouroboros_search(G, red, Budget(max_length=6)).outcome == Outcome.YES):
            bad += 1
        if (oracle.periodic_exists(G, th, "weak", True, 3) is not None) != (
                periodic_snake_search(G, red, Budget(max_period=3)).outcome == Outcome.YES):
            bad += 1
    return bad, total


def test_reduction_equivalence(verdict):
    g0 = build_level("lamplighter", 0).group
    free = FreeGroup()
    counts = {}
    for G in (g0, free):
        counts[(G.name, "undirected")] = _undirected_mismatches(G)
        counts[(G.name, "directed-weak")] = _directed_weak_mismatches(G)[0]
    verdict("reduction equivalence", not any(counts.values()), 600, f"mismatches {counts}")


def _consistent(G, th, label):
    if label.case == Case.CASE1:
        snake = label.witness
        return (validate_snake(G, th, snake, ValidityMode("strong", True, "infinite"))
                and G.pi(snake.translation) != 0
                and oracle.periodic_window_check(G, th, snake.vertices, snake.colors,
                                                 snake.translation, "strong", True, 3))
    if label.case == Case.CASE3:
        return oracle.path_snake(G, th, "strong", True, label.detail["n"]) is None
    if label.case == Case.CASE2:
        snake = label.witness
        valid = validate_snake(G, th, snake, ValidityMode("strong", True, "infinite"))
        moving = oracle.periodic_exists(G, th, "strong", True, 3, accept=lambda g: G.pi(g) != 0)
        return valid and moving is None and label.R >= 0
    return True


def test_classifier(verdict):
    hand = {}
    for name, case, R in (("lamplighter_translation", Case.CASE1, None),
                          ("free_a_power", Case.CASE2, 0),
                          ("lamplighter_a", Case.CASE3, None)):
        inst = parse_instance(INSTANCES / f"{name}.inst")
        lab = classify_z(inst.group, inst.tileset, inst.budget)
        hand[name] = lab.case == case and (R is None or lab.R == R)
    stats = {}
    inconsistent = 0
    for G in (FreeGroup(), limit_group("lamplighter")):
        cnt = Counter()
        for th in undirected_family(G.letters):
            for src in ("weak", "strong"):
                red = to_directed_strong(th, src)
                lab = classify_z(G, red)
                cnt[lab.definite] += 1
                if lab.definite and not _consistent(G, red, lab):
                    inconsistent += 1
        stats[G.name] = cnt[True] / (cnt[True] + cnt[False])
    ok = all(hand.values()) and inconsistent == 0 and min(stats.values()) >= 0.9
    verdict("classifier", ok, 600,
            f"hand {hand}, definite share {stats}, inconsistent {inconsistent}")


def _random_snake(rng, lim):
    letters = lim.letters
    while True:
        steps = tuple((s,) for s in rng.sample(letters, rng.randint(1, len(letters))))
        n = rng.randint(2, 10)
        start = tuple(rng.choice(letters) for _ in range(rng.randint(0, 4)))
        ks = [rng.randrange(len(steps)) for _ in range(n)]
        v = lim.eval_canon(start)
        verts = [v]
        for k in ks[:-1]:
            v = lim.act(v, steps[k][0])
            verts.append(v)
        if len(set(verts)) != n:
            continue
        colors = tuple((f"v{i}", k) for i, k in enumerate(ks))
        dominoes = frozenset((colors[i], ks[i], colors[i + 1]) for i in range(n - 1))
        tiles = Tileset(steps, colors, dominoes, directed=True)
        snake = FinitePathSnake(tuple(verts), colors)
        if validate_snake(lim, tiles, snake, ValidityMode("strong", True, "path")):
            return tiles, snake, start


def test_lift_monotonicity(verdict):
    rng = random.Random(2024)
    lim, free = limit_group("lamplighter"), FreeGroup()
    failures = 0
    for _ in range(100):
        tiles, snake, start = _random_snake(rng, lim)
        up = lift_snake(free, lim, tiles, snake, start_word=start)
        ok = (validate_snake(free, tiles, up, ValidityMode("strong", True, "path"))
              and len(set(up.vertices)) == len(up.vertices)
              and free.pi(up.vertices[0]) == lim.pi(snake.vertices[0])
              and free.pi(up.vertices[-1]) == lim.pi(snake.vertices[-1]))
        failures += not ok
    verdict("lift monotonicity", failures == 0, 60, f"{failures} failures of 100")


def test_pumping_completeness(verdict):
    free = FreeGroup()
    segments = exceptions = 0
    for th in undirected_family(free.letters):
        for src in ("weak", "strong"):
            red = to_directed_strong(th, src)
            ex = segment_exists(free, red, 12)
            if ex is None:
                exceptions += 1
            elif ex:
                segments += 1
                v = periodic_snake_search(free, red, Budget(max_period=6))
                if v.outcome != Outcome.YES or v.witness.period > 6:
                    exceptions += 1
    verdict("pumping completeness", exceptions == 0, 600,
            f"{segments} tilesets with 12-vertex segments, {exceptions} exceptions")


def test_rabin_emptiness(verdict):
    total = disagree = unsound = plain_only = 0
    for A in all_small_automata():
        total += 1
        res = emptiness(A)
        fix, plain, extendable = truncated_runs(A, 6)
        if res.empty == extendable or res.empty == fix:
            disagree += 1
        if not res.empty:
            if not (plain and check_run_prefix(A, res.tree.expand(6), 6)):
                unsound += 1
        elif plain:
            plain_only += 1
    verdict("rabin emptiness", disagree == 0 and unsound == 0, 300,
            f"{total} automata, {disagree} verdict disagreements, {unsound} unsound witnesses, "
            f"{plain_only} empty automata with only non-accepting depth-6 prefixes")


def test_supervisor_smoke(verdict):
    first = run_supervisor(50, "lamplighter", (1, 2, 3))
    replay = run_supervisor(50, "lamplighter", (1, 2, 3))
    same = "\n".join(first.log).encode() == "\n".join(replay.log).encode()
    acc = [int(dict(f.split("=", 1) for f in line.split())["acc"]) for line in first.log]
    monotone = all(a <= b for a, b in zip(acc, acc[1:]))
    kinds = Counter(dict(f.split("=", 1) for f in line.split())["kind"] for line in first.log)
    resolved = first.stage == 50 and len(first.resolved) + len(first.watch) >= 50
    verdict("supervisor smoke run", same and monotone and resolved, 600,
            f"kinds {dict(kinds)}, accumulated radius {first.radius}, replay identical {same}")


# Normal forms in level 1 of the lamplighter tower, checked against plain
# pinch rewriting on words over all of A_1 = (Z/2)^2 (xor on 0..3). Here
# t^-1 c t = c<<1 for c in {0, 1}.

def _pinch_reduce(word):
    out = []
    for tok in word:
        if isinstance(tok, int):
            if out and isinstance(out[-1], int):
                out[-1] ^= tok
            else:
                out.append(tok)
            continue
        mid = 0
        if out and isinstance(out[-1], int):
            mid = out[-1]
            below = out[-2] if len(out) > 1 else None
        else:
            below = out[-1] if out else None
        if tok == "t" and below == "T" and mid in (0, 1):
            del out[-2 if out and isinstance(out[-1], int) else -1:]
            tok, piece = None, mid << 1
        elif tok == "T" and below == "t" and mid in (0, 2):
            del out[-2 if out and isinstance(out[-1], int) else -1:]
            tok, piece = None, mid >> 1
        if tok is None:
            if out and isinstance(out[-1], int):
                out[-1] ^= piece
            else:
                out.append(piece)
        else:
            out.append(tok)
    return out


def _canonical(word):
    """Push subgroup parts rightwards through each stable letter."""
    cur, syl = 0, []
    for tok in _pinch_reduce(word):
        if isinstance(tok, int):
            cur ^= tok
        elif tok == "t":
            syl.append((cur & 2, 1))
            cur = (cur & 1) << 1
        else:
            syl.append((cur & 1, -1))
            cur = cur >> 1
    return tuple(syl), cur


def test_normal_form_soundness(verdict):
    lv = build_level("lamplighter", 1)
    base = lv.presentation
    names = {f"x{g}": g for g in range(lv.A.order)}
    P = HnnPresentation(base.A, base.C, base.emb_minus, base.emb_plus, names=names)
    letters = list(names) + ["t", "T"]
    ours, theirs = {}, {}
    for n in range(7):
        for w in product(letters, repeat=n):
            ours[w] = hnn_normal_form(P, w)
            theirs[w] = _canonical([names[x] if x in names else x for x in w])
    # same partition: each of our classes maps to exactly one oracle class and back
    fwd, back = {}, {}
    for w in ours:
        fwd.setdefault(ours[w], set()).add(theirs[w])
        back.setdefault(theirs[w], set()).add(ours[w])
    ok = all(len(s) == 1 for s in fwd.values()) and all(len(s) == 1 for s in back.values())
    verdict("normal-form soundness", ok, 120,
            f"{len(ours)} words, {len(fwd)} classes ours, {len(back)} classes by rewriting")
