"""Static figures for command reports (matplotlib, file output only)."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _layered_positions(ball):
    """Vertices on concentric circles by word length."""
    layers = {}
    for i, w in enumerate(ball.words):
        layers.setdefault(len(w), []).append(i)
    pos = {}
    for depth, members in layers.items():
        for j, i in enumerate(members):
            angle = 2 * math.pi * j / len(members)
            pos[i] = (depth * math.cos(angle), depth * math.sin(angle))
    return pos


def ball_figure(ball, path):
    pos = _layered_positions(ball)
    fig, ax = plt.subplots(figsize=(6, 6))
    letters = sorted({s for _, s, _ in ball.edges})
    cmap = plt.get_cmap("tab10")
    drawn = set()
    for i, s, j in ball.edges:
        if frozenset((i, j)) in drawn:
            continue
        drawn.add(frozenset((i, j)))
        (x0, y0), (x1, y1) = pos[i], pos[j]
        ax.plot([x0, x1], [y0, y1], color=cmap(letters.index(s) % 10), lw=0.6, alpha=0.6)
    xs, ys = zip(*(pos[i] for i in range(len(ball.words))))
    ax.scatter(xs, ys, s=12, color="black", zorder=3)
    for k, s in enumerate(letters):
        ax.plot([], [], color=cmap(k % 10), label=s)
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"ball of radius {ball.radius} in {ball.group.name} ({len(ball.words)} vertices)")
    ax.set_aspect("equal")
    ax.axis("off")
    return _save(fig, path)


def fiber_histogram(report, path):
    fig, ax = plt.subplots(figsize=(6, 4))
    sizes = [len(c) for c, ok in zip(report.components, report.closed) if ok]
    if sizes:
        ax.hist(sizes, bins=min(30, max(1, len(set(sizes)))), color="steelblue")
    if report.bound is not None:
        ax.axvline(report.bound, color="crimson", ls="--", label=f"bound {report.bound}")
        ax.legend()
    ax.set_xlabel("component size")
    ax.set_ylabel("components")
    ax.set_title(f"fiber components, r={report.radius}, I={report.interval}")
    return _save(fig, path)


def supervisor_figure(state, path):
    stages, radii, acc = [], [], []
    for line in state.log:
        fields = dict(part.split("=", 1) for part in line.split())
        if fields.get("radius", "-") == "-" or fields["kind"].startswith("watch"):
            continue
        stages.append(int(fields["stage"]))
        radii.append(int(fields["radius"]))
        acc.append(int(fields["acc"]))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.step(stages, acc, where="post", label="accumulated radius")
    ax.scatter(stages, radii, s=10, color="gray", label="step radius")
    ax.set_xlabel("stage")
    ax.set_ylabel("radius")
    ax.legend()
    return _save(fig, path)


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return path
