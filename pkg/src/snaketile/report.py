"""Tab-delimited reports with a fixed field order."""
from __future__ import annotations

import time
from pathlib import Path


class Report:
    def __init__(self, command: str):
        self.command = command
        self.rows = []
        self.blocks = []
        self.started = time.monotonic()
        self.figures = []

    def add(self, key, value):
        self.rows.append((str(key), _cell(value)))

    def extend(self, rows, prefix=""):
        for k, v in rows:
            self.add(prefix + str(k), v)

    def block(self, title, lines):
        """Verbatim multi-line payload such as a DOT graph or a log."""
        self.blocks.append((title, list(lines)))

    def body(self) -> str:
        out = [f"command\t{self.command}"]
        out += [f"{k}\t{v}" for k, v in self.rows]
        for title, lines in self.blocks:
            out.append(f"begin\t{title}")
            out += lines
            out.append(f"end\t{title}")
        return "\n".join(out) + "\n"

    def render(self, timing=True) -> str:
        text = self.body()
        if timing:
            text += f"elapsed_s\t{time.monotonic() - self.started:.3f}\n"
        return text

    def write(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        path = d / "report.tsv"
        path.write_text(self.render(), encoding="utf-8")
        return path


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    return str(v).replace("\t", " ").replace("\n", " ")
