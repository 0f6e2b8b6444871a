"""Instance files: `[section]` headers with `key = value` lines.

Values are integers, booleans, quoted strings, bare atoms (which may contain
spaces), bracketed lists and parenthesised tuples. A value whose brackets are
still open continues onto the following lines. `#` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .automata import RabinAutomaton, TreeDomain
from .errors import InstanceError
from .groups import (FiniteGroupTable, FiniteMarkedGroup, FreeGroup, HnnGroup,
                     HnnPresentation, MarkedGroup, cyclic_table, symmetric_table)
from .solver import Budget
from .tiles import Tileset

SECTIONS = ("group", "tileset", "automaton", "budget")
_INT = re.compile(r"^-?\d+$")
_FLOAT = re.compile(r"^-?\d+\.\d*$")
_BARE = re.compile(r"^[A-Za-z0-9_:^'\-.+⁻¹²]+( [A-Za-z0-9_:^'\-.+⁻¹²]+)*$")


class InstanceParseError(InstanceError):
    def __init__(self, message, line=None, column=None, section=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}" + (f", column {column}" if column is not None else ""))
        if section is not None:
            where.append(f"[{section}]" + (f".{key}" if key else ""))
        super().__init__(f"{': '.join([' '.join(where), message]) if where else message}")
        self.line, self.column, self.section, self.key = line, column, section, key


class _ValueParser:
    def __init__(self, text, line, col):
        self.s, self.i, self.line, self.col = text, 0, line, col

    def fail(self, msg):
        raise InstanceParseError(msg, self.line, self.col + self.i)

    def ws(self):
        while self.i < len(self.s) and self.s[self.i] in " \t\n":
            self.i += 1

    def parse(self):
        v = self.value()
        self.ws()
        if self.i != len(self.s):
            self.fail(f"unexpected {self.s[self.i]!r}")
        return v

    def value(self):
        self.ws()
        if self.i >= len(self.s):
            self.fail("missing value")
        c = self.s[self.i]
        if c == "[":
            return self.seq("]", list)
        if c == "(":
            return self.seq(")", tuple)
        if c == '"':
            j = self.s.find('"', self.i + 1)
            if j < 0:
                self.fail("unterminated string")
            out = self.s[self.i + 1:j]
            self.i = j + 1
            return out
        j = self.i
        while j < len(self.s) and self.s[j] not in ",[]()\"":
            j += 1
        atom = self.s[self.i:j].strip()
        if not atom:
            self.fail(f"unexpected {c!r}")
        self.i = j
        if _INT.match(atom):
            return int(atom)
        if _FLOAT.match(atom):
            return float(atom)
        if atom in ("true", "false"):
            return atom == "true"
        return " ".join(atom.split())

    def seq(self, close, kind):
        self.i += 1
        items = []
        while True:
            self.ws()
            if self.i < len(self.s) and self.s[self.i] == close:
                self.i += 1
                return kind(items)
            items.append(self.value())
            self.ws()
            if self.i < len(self.s) and self.s[self.i] == ",":
                self.i += 1
            elif self.i < len(self.s) and self.s[self.i] == close:
                continue
            else:
                self.fail(f"expected ',' or {close!r}")


def parse_value(text, line=1, col=1):
    return _ValueParser(text, line, col).parse()


def _balance(text):
    depth, quoted = 0, False
    for c in text:
        if c == '"':
            quoted = not quoted
        elif not quoted and c in "[(":
            depth += 1
        elif not quoted and c in "])":
            depth -= 1
    return depth


def _strip_comment(line):
    quoted = False
    for i, c in enumerate(line):
        if c == '"':
            quoted = not quoted
        elif c == "#" and not quoted:
            return line[:i]
    return line


def parse_sections(text: str) -> dict:
    sections, current = {}, None
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = _strip_comment(lines[i])
        lineno = i + 1
        i += 1
        if not raw.strip():
            continue
        stripped = raw.strip()
        if stripped.startswith("["):
            m = re.match(r"^\[([a-z-]+)\]$", stripped)
            if not m:
                raise InstanceParseError("malformed section header", lineno, raw.index("[") + 1)
            current = m.group(1)
            if current not in SECTIONS:
                raise InstanceParseError(f"unknown section {current!r}", lineno, 1)
            if current in sections:
                raise InstanceParseError(f"duplicate section {current!r}", lineno, 1)
            sections[current] = {}
            continue
        if current is None:
            raise InstanceParseError("key outside any section", lineno, 1)
        if "=" not in raw:
            raise InstanceParseError("expected 'key = value'", lineno, len(raw) - len(raw.lstrip()) + 1,
                                     current)
        key, _, rest = raw.partition("=")
        key = key.strip()
        if not re.match(r"^[a-z_][a-z0-9_]*$", key):
            raise InstanceParseError(f"bad key {key!r}", lineno, 1, current)
        if key in sections[current]:
            raise InstanceParseError(f"duplicate key {key!r}", lineno, 1, current, key)
        col = len(key) + raw.index(key) + 2
        while _balance(rest) > 0 and i < len(lines):
            rest += "\n" + _strip_comment(lines[i])
            i += 1
        try:
            sections[current][key] = parse_value(rest, lineno, col)
        except InstanceParseError as exc:
            raise InstanceParseError(str(exc).split(": ", 1)[-1], exc.line, exc.column,
                                     current, key) from None
    return sections


# ------------------------------------------------------------ serialization

def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, tuple):
        return "(" + ", ".join(format_value(x) for x in v) + ")"
    s = str(v)
    if _BARE.match(s) and not _INT.match(s) and not _FLOAT.match(s) and s not in ("true", "false"):
        return s
    return '"' + s + '"'


def serialize(inst: "Instance") -> str:
    out = []
    for name in SECTIONS:
        if name in inst.sections:
            out.append(f"[{name}]")
            for k, v in inst.sections[name].items():
                out.append(f"{k} = {format_value(v)}")
            out.append("")
    return "\n".join(out)


# ------------------------------------------------------------ semantic layer

@dataclass(eq=False)
class Instance:
    sections: dict
    group: MarkedGroup | None = None
    tileset: Tileset | None = None
    automaton: RabinAutomaton | None = None
    budget: Budget = field(default_factory=Budget)
    variant: str = "strong"
    shape: str = "path"
    level: object = None

    def __eq__(self, other):
        return isinstance(other, Instance) and self.sections == other.sections


def _need(sec, name, key, kinds=None):
    if key not in sec:
        raise InstanceParseError(f"missing key {key!r}", section=name, key=key)
    v = sec[key]
    if kinds is not None and not isinstance(v, kinds):
        raise InstanceParseError(f"wrong type for {key!r}", section=name, key=key)
    return v


def _named_elements(sec, name, key="generators"):
    """`[a=1, b=2]` style assignments of letter names to table elements."""
    out = {}
    for item in _need(sec, name, key, list):
        if not isinstance(item, str) or "=" not in item:
            raise InstanceParseError(f"expected name=element, got {item!r}", section=name, key=key)
        n, _, v = item.partition("=")
        if not _INT.match(v.strip()):
            raise InstanceParseError(f"element index must be an integer in {item!r}",
                                     section=name, key=key)
        out[n.strip()] = int(v)
    return out


def _finite_table(sec, name, prefix=""):
    if f"{prefix}cyclic" in sec:
        return cyclic_table(sec[f"{prefix}cyclic"])
    if f"{prefix}symmetric" in sec:
        return symmetric_table(sec[f"{prefix}symmetric"])
    rows = _need(sec, name, f"{prefix}table", list)
    try:
        return FiniteGroupTable(tuple(tuple(r) for r in rows))
    except InstanceError as exc:
        raise InstanceParseError(str(exc), section=name, key=f"{prefix}table") from None


def build_group(sec):
    from .tower import build_level, limit_group

    name = "group"
    kind = _need(sec, name, "kind", str).lower()
    level = None
    if kind == "free":
        G = FreeGroup(tuple(_need(sec, name, "generators", list)))
    elif kind == "finite-table":
        G = FiniteMarkedGroup(_finite_table(sec, name), _named_elements(sec, name))
    elif kind == "free-product-z":
        A = _finite_table(sec, name)
        trivial = cyclic_table(1)
        P = HnnPresentation(A, trivial, (A.identity,), (A.identity,),
                            names=_named_elements(sec, name), stable=sec.get("stable", "t"))
        G = HnnGroup(P, name="free-product")
    elif kind == "hnn":
        A = _finite_table(sec, name)
        C = _finite_table(sec, name, "subgroup_")
        try:
            P = HnnPresentation(A, C, tuple(_need(sec, name, "emb_minus", list)),
                                tuple(_need(sec, name, "emb_plus", list)),
                                names=_named_elements(sec, name), stable=sec.get("stable", "t"))
        except InstanceError as exc:
            raise InstanceParseError(str(exc), section=name, key="emb_minus") from None
        G = HnnGroup(P, name="hnn")
    elif kind == "tower-level":
        level = build_level(_need(sec, name, "family", str), _need(sec, name, "level", int))
        G = level.group
    elif kind == "tower-limit":
        G = limit_group(_need(sec, name, "family", str))
    else:
        raise InstanceParseError(f"unknown group kind {kind!r}", section=name, key="kind")
    return G, level


def _color(text, directed, name):
    if not directed:
        return str(text)
    s = str(text)
    base, sep, k = s.rpartition(":")
    if not sep or not _INT.match(k):
        raise InstanceParseError(f"directed colour {s!r} must look like base:step",
                                 section="tileset", key=name)
    return (base, int(k))


def build_tileset(sec, G):
    name = "tileset"
    directed = sec.get("directed", True)
    steps = []
    for w in _need(sec, name, "steps", list):
        try:
            steps.append(G.gens.parse(str(w)))
        except InstanceError as exc:
            raise InstanceParseError(str(exc), section=name, key="steps") from None
    colors = [_color(c, directed, "colors") for c in _need(sec, name, "colors", list)]
    cs = set(colors)
    doms = set()
    for d in _need(sec, name, "dominoes", list):
        if not isinstance(d, tuple) or len(d) != 3:
            raise InstanceParseError(f"domino {d!r} is not a triple", section=name, key="dominoes")
        x, k, y = _color(d[0], directed, "dominoes"), d[1], _color(d[2], directed, "dominoes")
        if isinstance(k, str):
            w = G.gens.parse(k)
            if w not in steps:
                raise InstanceParseError(f"domino step {k!r} is not declared", section=name,
                                         key="dominoes")
            k = steps.index(w)
        if x not in cs or y not in cs:
            raise InstanceParseError(f"domino {d!r} names an undeclared colour", section=name,
                                     key="dominoes")
        doms.add((x, k, y))
    try:
        return Tileset(tuple(steps), tuple(colors), frozenset(doms), directed)
    except InstanceError as exc:
        raise InstanceParseError(str(exc), section=name) from None


def _children(text, k, name):
    parts = str(text).split()
    if len(parts) != k:
        raise InstanceParseError(f"production children {text!r} need {k} entries",
                                 section="automaton", key=name)
    return tuple(None if p == "-" else p for p in parts)


def build_automaton(sec):
    name = "automaton"
    dirs = tuple(str(d) for d in sec.get("directions", ["0", "1"]))
    if "domain" in sec:
        # domain = [(state, direction, state), ...]; domain_accepting; domain_start
        delta = {(str(a), str(s)): str(b) for a, s, b in sec["domain"]}
        dom = TreeDomain(dirs, tuple(sorted({a for a, _ in delta} | set(delta.values()))),
                         str(_need(sec, name, "domain_start")), delta,
                         frozenset(str(x) for x in _need(sec, name, "domain_accepting", list)))
    else:
        dom = TreeDomain.full(dirs)
    states = tuple(str(q) for q in _need(sec, name, "states", list))
    alphabet = tuple(str(a) for a in _need(sec, name, "alphabet", list))
    prods = []
    for p in _need(sec, name, "productions", list):
        if not isinstance(p, tuple) or len(p) != 3:
            raise InstanceParseError(f"production {p!r} is not (state, letter, children)",
                                     section=name, key="productions")
        prods.append((str(p[0]), str(p[1]), _children(p[2], len(dirs), "productions")))
    pairs = []
    for pr in sec.get("pairs", []):
        if not isinstance(pr, tuple) or len(pr) != 2:
            raise InstanceParseError(f"pair {pr!r} is not (N, P)", section=name, key="pairs")
        pairs.append((frozenset(str(pr[0]).split()), frozenset(str(pr[1]).split())))
    try:
        return RabinAutomaton(states, str(_need(sec, name, "start")), alphabet,
                              frozenset(prods), tuple(pairs), dom)
    except InstanceError as exc:
        raise InstanceParseError(str(exc), section=name) from None


def build_budget(sec):
    keys = ("max_length", "max_period", "max_radius", "max_states", "time_cap")
    for k in sec:
        if k not in keys:
            raise InstanceParseError(f"unknown budget key {k!r}", section="budget", key=k)
    try:
        return Budget(**{k: sec[k] for k in keys if k in sec})
    except (InstanceError, TypeError) as exc:
        raise InstanceParseError(str(exc), section="budget") from None


def load_instance(text: str) -> Instance:
    sections = parse_sections(text)
    inst = Instance(sections)
    if "group" in sections:
        inst.group, inst.level = build_group(sections["group"])
    if "tileset" in sections:
        if inst.group is None:
            raise InstanceParseError("tileset needs a [group] section", section="tileset")
        inst.tileset = build_tileset(sections["tileset"], inst.group)
        inst.variant = sections["tileset"].get("variant", "strong")
        inst.shape = sections["tileset"].get("shape", "path")
    if "automaton" in sections:
        inst.automaton = build_automaton(sections["automaton"])
    if "budget" in sections:
        inst.budget = build_budget(sections["budget"])
    return inst


def parse_instance(path) -> Instance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InstanceError(f"cannot read {path}: {exc}") from None
    return load_instance(text)
