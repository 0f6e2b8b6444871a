"""Command line entry point. Exit codes: 0 definite, 2 unknown, 1 error."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import BudgetExceeded, InstanceError, UnsupportedCapability, Undetermined
from .report import Report

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2


def _load(path):
    from .instance import parse_instance
    return parse_instance(path)


def _need(inst, what):
    if getattr(inst, what) is None:
        raise InstanceError(f"instance has no [{what}] section")
    return getattr(inst, what)


def _reduced(tiles, variant):
    from .tiles import to_directed_strong
    if tiles.directed:
        return tiles if variant == "strong" else to_directed_strong(tiles, "directed-weak")
    return to_directed_strong(tiles, variant)


def _verdict_exit(outcome_value):
    return EXIT_UNKNOWN if outcome_value == "Unknown" else EXIT_OK


def cmd_solve(args, rep):
    from .solver import infinite_snake_decide, ouroboros_search, path_search
    inst = _load(args.instance)
    G, tiles = _need(inst, "group"), _need(inst, "tileset")
    variant = args.variant or inst.variant
    shape = args.shape or inst.shape
    if tiles.directed and variant == "weak":
        variant = "directed-weak"
    red = _reduced(tiles, variant)
    rep.add("variant", variant)
    rep.add("shape", shape)
    rep.add("reduced_colors", len(red.colors))
    rep.add("reduced_dominoes", len(red.dominoes))
    if shape == "path":
        n = args.length or 2
        rep.add("length", n)
        v = path_search(G, red, n, inst.budget)
    elif shape == "ouroboros":
        v = ouroboros_search(G, red, inst.budget)
    else:
        v = infinite_snake_decide(G, red, inst.budget)
    rep.extend(v.record())
    return _verdict_exit(v.outcome.value)


def cmd_classify(args, rep):
    from .solver import classify_z
    inst = _load(args.instance)
    G, tiles = _need(inst, "group"), _need(inst, "tileset")
    red = _reduced(tiles, inst.variant) if not tiles.directed else tiles
    label = classify_z(G, red, inst.budget)
    rep.extend(label.record())
    return _verdict_exit(label.case.value)


def cmd_reduce(args, rep):
    from .tiles import extend_generators, to_directed_strong
    inst = _load(args.instance)
    G, tiles = _need(inst, "group"), _need(inst, "tileset")
    red = to_directed_strong(tiles, args.source)
    if args.extend:
        red = extend_generators(red, [G.gens.parse(w) for w in args.extend])
    rep.add("source", args.source)
    rep.add("colors", len(red.colors))
    rep.add("dominoes", len(red.dominoes))
    rep.add("encoding", red.encode())
    return EXIT_OK


def cmd_reach(args, rep):
    from .groups import ball
    from .solver import reach
    inst = _load(args.instance)
    G, tiles = _need(inst, "group"), _need(inst, "tileset")
    red = _reduced(tiles, inst.variant)
    b = ball(G, args.start_radius)
    starts = [c for c in b.canons if G.pi(c) == args.from_fiber]
    words = dict(zip(b.canons, b.words))
    target = args.to_fiber
    v = reach(G, red, starts, lambda x: G.pi(x) == target, inst.budget, start_words=words)
    rep.add("from_fiber", args.from_fiber)
    rep.add("to_fiber", target)
    rep.add("starts", len(starts))
    rep.extend(v.record())
    return _verdict_exit(v.outcome.value)


def cmd_tower(args, rep):
    from .tower import (ball_agreement, build_level, fiber_components, limit_group,
                        run_supervisor)
    if args.action == "build":
        lv = build_level(args.family, args.level)
        rep.add("family", lv.family.value)
        rep.add("level", lv.n)
        rep.add("order", lv.order)
        rep.add("previous_order", lv.prev.order)
        rep.add("transversal_plus", len(lv.presentation.trans_plus))
        rep.add("transversal_minus", len(lv.presentation.trans_minus))
        for name in lv.generators:
            rep.add(f"witness_{name}", " ".join(lv.witnesses[name]))
        return EXIT_OK
    if args.action == "verify":
        lv = build_level(args.family, args.level)
        limit = limit_group(args.family)
        radius = args.radius if args.radius is not None else args.level // 2
        rep.add("family", lv.family.value)
        rep.add("level", lv.n)
        rep.add("radius", radius)
        rep.add("ball_agreement_limit", ball_agreement(lv.group, limit, radius))
        nxt = build_level(args.family, args.level + 1)
        rep.add("ball_agreement_next", ball_agreement(lv.group, nxt.group, radius))
        unknown = False
        for I in ((0, 0), (0, 1)):
            fr = fiber_components(lv.group, max(1, radius), I, level=lv)
            rep.extend(fr.record(), prefix=f"fiber_{I[0]}_{I[1]}_")
            unknown |= not fr.all_closed
            if args.report:
                rep.figures.append(("fiber_%d_%d.png" % I, "fiber", fr))
        return EXIT_UNKNOWN if unknown else EXIT_OK
    if args.action == "supervise":
        levels = tuple(int(x) for x in args.levels.split(","))
        try:
            state = run_supervisor(args.steps, args.family, levels)
        except BudgetExceeded as exc:
            rep.add("aborted", str(exc))
            return EXIT_UNKNOWN
        rep.add("stages", state.stage)
        rep.add("accumulated_radius", state.radius)
        rep.add("watch", len(state.watch))
        rep.block("log", state.log)
        if args.report:
            rep.figures.append(("supervisor.png", "supervisor", state))
        return EXIT_OK
    raise InstanceError(f"unknown tower action {args.action!r}")


def cmd_automaton(args, rep):
    from .automata import combine, emptiness
    inst = _load(args.instance)
    A = _need(inst, "automaton")
    if args.action == "combine":
        B = _need(_load(args.other), "automaton")
        A = combine(A, B, args.op)
        rep.add("op", args.op)
        rep.add("states", len(A.states))
        rep.add("productions", len(A.productions))
        rep.add("pairs", len(A.pairs))
    res = emptiness(A)
    rep.extend(res.record())
    if res.tree is not None:
        rep.block("regular_tree", ["\t".join(map(str, r)) for r in res.tree.rows()])
    return EXIT_OK


def cmd_ball(args, rep):
    from .groups import ball
    inst = _load(args.instance)
    G = _need(inst, "group")
    b = ball(G, args.radius)
    rep.add("radius", args.radius)
    rep.add("vertices", len(b.words))
    rep.add("edges", len(b.edges))
    if args.dot:
        rep.block("dot", b.to_dot().rstrip("\n").split("\n"))
    if args.report:
        rep.figures.append(("ball.png", "ball", b))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="snaketile", description="Snake tiling problems on marked groups.")
    p.add_argument("--report", metavar="DIR", help="also write report.tsv and figures to DIR")
    p.add_argument("--no-timing", action="store_true", help="omit the elapsed time line")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="decide snake existence for a variant and shape")
    s.add_argument("instance")
    s.add_argument("--variant", choices=["weak", "strong", "directed-weak"])
    s.add_argument("--shape", choices=["path", "infinite", "ouroboros"])
    s.add_argument("--length", type=int, help="vertex count for path snakes (default 2)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("classify", help="Z-projection case of the infinite snakes")
    s.add_argument("instance")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("reduce", help="reduce a tileset to directed strong form")
    s.add_argument("instance")
    s.add_argument("--from", dest="source", default="strong",
                   choices=["strong", "weak", "directed-weak"])
    s.add_argument("--extend", nargs="*", help="extra step words for a larger generating set")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("reach", help="snake from one Z-fiber to another")
    s.add_argument("instance")
    s.add_argument("--from-fiber", type=int, default=0)
    s.add_argument("--to-fiber", type=int, required=True)
    s.add_argument("--start-radius", type=int, default=0)
    s.set_defaults(func=cmd_reach)

    s = sub.add_parser("tower", help="tower levels, checks and the supervisor")
    s.add_argument("action", choices=["build", "verify", "supervise"])
    s.add_argument("--family", default="lamplighter", choices=["lamplighter", "permutations"])
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--radius", type=int)
    s.add_argument("--levels", default="1,2,3")
    s.add_argument("--steps", type=int, default=50)
    s.set_defaults(func=cmd_tower)

    s = sub.add_parser("automaton", help="Rabin tree automata")
    s.add_argument("action", choices=["emptiness", "combine"])
    s.add_argument("instance")
    s.add_argument("other", nargs="?")
    s.add_argument("--op", choices=["intersection", "union"], default="intersection")
    s.set_defaults(func=cmd_automaton)

    s = sub.add_parser("ball", help="labelled ball of the Cayley graph")
    s.add_argument("instance")
    s.add_argument("--radius", type=int, default=2)
    s.add_argument("--dot", action="store_true", help="include the DOT graph")
    s.set_defaults(func=cmd_ball)
    return p


def _write_figures(rep, directory):
    from . import figures
    d = Path(directory)
    for name, kind, obj in rep.figures:
        if kind == "ball":
            figures.ball_figure(obj, d / name)
        elif kind == "fiber":
            figures.fiber_histogram(obj, d / name)
        elif kind == "supervisor":
            figures.supervisor_figure(obj, d / name)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "automaton" and args.action == "combine" and not args.other:
        parser.error("automaton combine needs two instance files")
    rep = Report(" ".join(sys.argv[1:] if argv is None else argv))
    try:
        code = args.func(args, rep)
    except (InstanceError, UnsupportedCapability) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (BudgetExceeded, Undetermined) as exc:
        rep.add("outcome", "Unknown")
        rep.add("reason", str(exc))
        code = EXIT_UNKNOWN
    sys.stdout.write(rep.render(timing=not args.no_timing))
    if args.report:
        rep.write(args.report)
        _write_figures(rep, args.report)
    return code


if __name__ == "__main__":
    sys.exit(main())
