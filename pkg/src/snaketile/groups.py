"""Marked groups: canonical element forms, word evaluation, normal forms, balls.

Every group here is marked by an ordered list of letters, each paired with a
formal inverse letter (an involutive generator is its own inverse letter).
Elements are handled internally as hashable canonical values; `Element`
wraps one together with its group for the public API.
"""
from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import BudgetExceeded, InstanceError, UnsupportedCapability

Word = tuple  # tuple of letter names

_TOKEN = re.compile(r"^([A-Za-z_][A-Za-z0-9_']*)(?:\^(-?\d+)|(⁻¹)|(²))?$")


def inverse_name(name: str) -> str:
    if len(name) == 1 and name.isalpha():
        return name.swapcase()
    return name + "^-1"


@dataclass(frozen=True)
class GeneratingSet:
    letters: tuple
    involution: dict = field(hash=False, compare=False)

    def __post_init__(self):
        if len(set(self.letters)) != len(self.letters):
            raise InstanceError(f"duplicate letters in {self.letters}")
        for x in self.letters:
            y = self.involution.get(x)
            if y not in self.letters or self.involution.get(y) != x:
                raise InstanceError(f"letter {x!r} lacks a consistent inverse")

    @classmethod
    def from_generators(cls, names: Sequence[str], involutions: Iterable[str] = ()):
        involutions = set(involutions)
        letters, inv = [], {}
        for g in names:
            letters.append(g)
            if g in involutions:
                inv[g] = g
            else:
                h = inverse_name(g)
                letters.append(h)
                inv[g], inv[h] = h, g
        return cls(tuple(letters), inv)

    def index(self, letter):
        return self.letters.index(letter)

    def inverse_word(self, word):
        return tuple(self.involution[x] for x in reversed(word))

    def parse(self, text) -> Word:
        """Parse a whitespace separated word; accepts `x^-1`, `x⁻¹`, `x^k`, `x²`."""
        if not isinstance(text, str):
            word = tuple(text)
            for x in word:
                if x not in self.involution:
                    raise InstanceError(f"unknown letter {x!r}")
            return word
        out = []
        for tok in text.split():
            if tok in self.involution:
                out.append(tok)
                continue
            m = _TOKEN.match(tok)
            if not m or m.group(1) not in self.involution:
                raise InstanceError(f"unknown letter {tok!r}")
            base = m.group(1)
            if m.group(3):
                k = -1
            elif m.group(4):
                k = 2
            else:
                k = int(m.group(2)) if m.group(2) else 1
            letter = base if k > 0 else self.involution[base]
            out.extend([letter] * abs(k))
        return tuple(out)

    def shortlex_key(self, word):
        return (len(word), tuple(self.letters.index(x) for x in word))


def format_word(word) -> str:
    return " ".join(word) if word else "1"


class MarkedGroup:
    """Base class. Subclasses supply identity/act/mul/inv on canonical values."""

    kind = "abstract"
    pi_weights: dict | None = None

    def __init__(self, gens: GeneratingSet, name: str = ""):
        self.gens = gens
        self.name = name or self.kind

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"

    @property
    def letters(self):
        return self.gens.letters

    def identity(self):
        raise NotImplementedError

    def act(self, x, letter):
        raise NotImplementedError

    def mul(self, x, y):
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def tree_length(self, x):
        """Orbit distance in a tree the group acts on, or None if unknown."""
        return None

    def eval_canon(self, word):
        x = self.identity()
        for letter in word:
            if letter not in self.gens.involution:
                raise InstanceError(f"unknown letter {letter!r} for {self.name}")
            x = self.act(x, letter)
        return x

    def pi(self, x):
        raise UnsupportedCapability(f"{self.name} declares no Z-projection")

    def element(self, canon):
        return Element(self, canon)


class Element:
    __slots__ = ("group", "canon")

    def __init__(self, group: MarkedGroup, canon):
        self.group = group
        self.canon = canon

    def __eq__(self, other):
        return (isinstance(other, Element) and other.group is self.group
                and other.canon == self.canon)

    def __hash__(self):
        return hash(self.canon)

    def __mul__(self, other):
        return multiply(self.group, self, other)

    def __repr__(self):
        return f"Element({self.group.name}, {self.canon!r})"


def evaluate(G: MarkedGroup, w) -> Element:
    return Element(G, G.eval_canon(G.gens.parse(w)))


def multiply(G: MarkedGroup, x: Element, y: Element) -> Element:
    if x.group is not G or y.group is not G:
        raise InstanceError("operands belong to different groups")
    return Element(G, G.mul(x.canon, y.canon))


def z_projection(G: MarkedGroup, x) -> int:
    if G.pi_weights is None:
        raise UnsupportedCapability(f"{G.name} declares no Z-projection")
    if isinstance(x, Element):
        if x.group is not G:
            raise InstanceError("element of another group")
        x = x.canon
    return G.pi(x)


def word_pi(G: MarkedGroup, word) -> int:
    if G.pi_weights is None:
        raise UnsupportedCapability(f"{G.name} declares no Z-projection")
    return sum(G.pi_weights[x] for x in word)


# ---------------------------------------------------------------- free groups

class FreeGroup(MarkedGroup):
    kind = "free"

    def __init__(self, names=("a", "t"), stable="t"):
        super().__init__(GeneratingSet.from_generators(names), "free<" + ",".join(names) + ">")
        if stable in names:
            self.pi_weights = {x: 0 for x in self.letters}
            self.pi_weights[stable] = 1
            self.pi_weights[inverse_name(stable)] = -1

    def identity(self):
        return ()

    def act(self, x, letter):
        if x and x[-1] == self.gens.involution[letter]:
            return x[:-1]
        return x + (letter,)

    def mul(self, x, y):
        inv = self.gens.involution
        k = 0
        while k < len(x) and k < len(y) and x[-1 - k] == inv[y[k]]:
            k += 1
        return x[:len(x) - k] + y[k:]

    def inv(self, x):
        return self.gens.inverse_word(x)

    def tree_length(self, x):
        return len(x)

    def pi(self, x):
        if self.pi_weights is None:
            return super().pi(x)
        return sum(self.pi_weights[c] for c in x)


# ------------------------------------------------------------- finite groups

@dataclass(frozen=True, eq=False)
class FiniteGroupTable:
    table: tuple
    identity: int = 0
    labels: tuple = ()

    def __post_init__(self):
        n = len(self.table)
        if n == 0 or any(len(row) != n for row in self.table):
            raise InstanceError("multiplication table must be square and nonempty")
        T = np.asarray(self.table, dtype=np.int64)
        if T.min() < 0 or T.max() >= n:
            raise InstanceError("table entries out of range")
        e = self.identity
        if not (np.all(T[e] == np.arange(n)) and np.all(T[:, e] == np.arange(n))):
            raise InstanceError("identity is not neutral")
        inv = [-1] * n
        for g in range(n):
            hits = np.nonzero(T[g] == e)[0]
            if len(hits) != 1 or T[hits[0], g] != e:
                raise InstanceError(f"element {g} has no two-sided inverse")
            inv[g] = int(hits[0])
        if n <= 128:
            if not np.array_equal(_assoc_left(T), _assoc_right(T)):
                raise InstanceError("table is not associative")
        else:
            rng = random.Random(0)
            for _ in range(20000):
                a, b, c = rng.randrange(n), rng.randrange(n), rng.randrange(n)
                if T[T[a, b], c] != T[a, T[b, c]]:
                    raise InstanceError("table is not associative")
        object.__setattr__(self, "inverse", tuple(inv))
        object.__setattr__(self, "_rows", tuple(tuple(int(v) for v in row) for row in self.table))

    @property
    def order(self):
        return len(self.table)

    def mul(self, a, b):
        return self._rows[a][b]

    def inv(self, a):
        return self.inverse[a]

    def power(self, a, k):
        x = self.identity
        for _ in range(k):
            x = self.mul(x, a)
        return x

    @classmethod
    def from_elements(cls, elements, op, identity):
        elements = list(elements)
        index = {g: i for i, g in enumerate(elements)}
        table = tuple(tuple(index[op(g, h)] for h in elements) for g in elements)
        return cls(table, index[identity], tuple(elements))

    def is_hom_from(self, other: "FiniteGroupTable", images) -> bool:
        return all(images[other.mul(a, b)] == self.mul(images[a], images[b])
                   for a in range(other.order) for b in range(other.order))

    def generated(self, gens):
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen


def _assoc_left(T):
    # (ab)c for all a,b,c
    return T[T]


def _assoc_right(T):
    # a(bc) for all a,b,c
    n = len(T)
    return T[np.arange(n)[:, None, None], T[None, :, :]]


def cyclic_table(n: int) -> FiniteGroupTable:
    return FiniteGroupTable.from_elements(range(n), lambda a, b: (a + b) % n, 0)


def elementary_abelian_table(rank: int) -> FiniteGroupTable:
    return FiniteGroupTable.from_elements(range(2 ** rank), lambda a, b: a ^ b, 0)


def _compose_right(p, q):
    # right action: first p, then q
    return tuple(q[i] for i in p)


def symmetric_table(m: int) -> FiniteGroupTable:
    from itertools import permutations
    elems = sorted(permutations(range(m)))
    return FiniteGroupTable.from_elements(elems, _compose_right, tuple(range(m)))


def right_coset_split(A: FiniteGroupTable, subgroup):
    """For each g return (h, r) with g = h*r, h in subgroup, r the least element of Hg."""
    split = {}
    for g in range(A.order):
        coset = [A.mul(h, g) for h in subgroup]
        r = min(coset)
        split[g] = (A.mul(g, A.inv(r)), r)
    return split


def transversal(split):
    return tuple(sorted({r for _, r in split.values()}))


class FiniteMarkedGroup(MarkedGroup):
    kind = "finite"

    def __init__(self, table: FiniteGroupTable, generators: dict, name="finite"):
        invol = [g for g, i in generators.items() if table.mul(i, i) == table.identity]
        gens = GeneratingSet.from_generators(list(generators), invol)
        super().__init__(gens, name)
        self.table = table
        self.letter_value = {}
        for g, i in generators.items():
            self.letter_value[g] = i
            self.letter_value[gens.involution[g]] = table.inv(i)

    def identity(self):
        return self.table.identity

    def act(self, x, letter):
        return self.table.mul(x, self.letter_value[letter])

    def mul(self, x, y):
        return self.table.mul(x, y)

    def inv(self, x):
        return self.table.inv(x)


# ------------------------------------------------------------ amalgams

@dataclass(eq=False)
class AmalgamPresentation:
    A: FiniteGroupTable
    B: FiniteGroupTable
    C: FiniteGroupTable
    emb_a: tuple
    emb_b: tuple
    names_a: dict
    names_b: dict

    def __post_init__(self):
        for side, X, emb in (("A", self.A, self.emb_a), ("B", self.B, self.emb_b)):
            if len(set(emb)) != self.C.order or not X.is_hom_from(self.C, emb):
                raise InstanceError(f"embedding of C into {side} is not an injective homomorphism")
        self._split = {"A": right_coset_split(self.A, self.emb_a),
                       "B": right_coset_split(self.B, self.emb_b)}
        self._back = {"A": {g: c for c, g in enumerate(self.emb_a)},
                      "B": {g: c for c, g in enumerate(self.emb_b)}}
        self.trans_a = transversal(self._split["A"])
        self.trans_b = transversal(self._split["B"])
        if set(self.names_a) & set(self.names_b):
            raise InstanceError("letter names of A and B overlap")

    def table(self, side):
        return self.A if side == "A" else self.B

    def emb(self, side):
        return self.emb_a if side == "A" else self.emb_b


def _amalgam_push(P: AmalgamPresentation, c0, syls, c):
    C = P.C
    for i in range(len(syls) - 1, -1, -1):
        if c == C.identity:
            return c0
        side, rep = syls[i]
        X = P.table(side)
        h, r = P._split[side][X.mul(rep, P.emb(side)[c])]
        syls[i] = (side, r)
        c = P._back[side][h]
    return C.mul(c0, c)


def _amalgam_mul(P: AmalgamPresentation, c0, syls, side, x):
    X = P.table(side)
    if syls and syls[-1][0] == side:
        h, r = P._split[side][X.mul(syls[-1][1], x)]
        if r == X.identity:
            syls.pop()
        else:
            syls[-1] = (side, r)
        return _amalgam_push(P, c0, syls, P._back[side][h])
    h, r = P._split[side][x]
    c0 = _amalgam_push(P, c0, syls, P._back[side][h])
    if r != X.identity:
        syls.append((side, r))
    return c0


def amalgam_normal_form(P: AmalgamPresentation, w):
    """Return (c, syllables): c in C and an alternating tuple of (side, rep)."""
    tokens = w.split() if isinstance(w, str) else list(w)
    c0, syls = P.C.identity, []
    for tok in tokens:
        m = _TOKEN.match(tok)
        name, k = (tok, 1)
        if m and tok not in P.names_a and tok not in P.names_b:
            name = m.group(1)
            k = -1 if m.group(3) else 2 if m.group(4) else int(m.group(2) or 1)
        if name in P.names_a:
            side, x = "A", P.names_a[name]
        elif name in P.names_b:
            side, x = "B", P.names_b[name]
        else:
            raise InstanceError(f"unknown letter {tok!r}")
        X = P.table(side)
        if k < 0:
            x, k = X.inv(x), -k
        for _ in range(k):
            c0 = _amalgam_mul(P, c0, syls, side, x)
    return c0, tuple(syls)


# ------------------------------------------------------------ HNN extensions

class HnnNormalForm(NamedTuple):
    head: int
    syllables: tuple  # ((eps, g), ...)


@dataclass(eq=False)
class HnnPresentation:
    """A*_C where t^-1 emb_minus(c) t = emb_plus(c)."""

    A: FiniteGroupTable
    C: FiniteGroupTable
    emb_minus: tuple
    emb_plus: tuple
    names: dict = field(default_factory=dict)
    stable: str = "t"

    def __post_init__(self):
        for label, emb in (("minus", self.emb_minus), ("plus", self.emb_plus)):
            if len(set(emb)) != self.C.order or not self.A.is_hom_from(self.C, emb):
                raise InstanceError(f"embedding {label} is not an injective homomorphism")
        # after t^eps the syllable is a right coset rep of emb_eps(C)
        self._split = {1: right_coset_split(self.A, self.emb_plus),
                       -1: right_coset_split(self.A, self.emb_minus)}
        back_minus = {g: c for c, g in enumerate(self.emb_minus)}
        back_plus = {g: c for c, g in enumerate(self.emb_plus)}
        # t emb_plus(c) = emb_minus(c) t ; t^-1 emb_minus(c) = emb_plus(c) t^-1
        self._pass = {1: {h: self.emb_minus[c] for h, c in back_plus.items()},
                      -1: {h: self.emb_plus[c] for h, c in back_minus.items()}}
        self.trans_plus = transversal(self._split[1])
        self.trans_minus = transversal(self._split[-1])
        self._words = None

    def letter_map(self):
        """Letters (A names, their inverses, t, t^-1) -> ('a', element) or ('t', eps)."""
        out = {}
        for name, g in self.names.items():
            out[name] = ("a", g)
        for name, g in self.names.items():
            out.setdefault(inverse_name(name), ("a", self.A.inv(g)))
        out[self.stable] = ("t", 1)
        out[inverse_name(self.stable)] = ("t", -1)
        return out

    def element_word(self, g):
        """Shortest word in the named A letters evaluating to g (BFS, name order)."""
        if self._words is None:
            words = {self.A.identity: ()}
            frontier = [self.A.identity]
            while frontier:
                nxt = []
                for x in frontier:
                    for name, h in self.names.items():
                        y = self.A.mul(x, h)
                        if y not in words:
                            words[y] = words[x] + (name,)
                            nxt.append(y)
                frontier = nxt
            self._words = words
        if g not in self._words:
            raise InstanceError(f"element {g} not generated by the named letters")
        return self._words[g]

    # normal form arithmetic on (head, list-of-syllables)
    def _mul_a(self, head, syls, a):
        A = self.A
        carry = a
        for i in range(len(syls) - 1, -1, -1):
            if carry == A.identity:
                return head
            eps, g = syls[i]
            h, r = self._split[eps][A.mul(g, carry)]
            syls[i] = (eps, r)
            carry = self._pass[eps][h]
        return A.mul(head, carry)

    def _mul_t(self, syls, eps):
        if syls and syls[-1][1] == self.A.identity and syls[-1][0] == -eps:
            syls.pop()
        else:
            syls.append((eps, self.A.identity))

    def mul_nf(self, x: HnnNormalForm, y: HnnNormalForm) -> HnnNormalForm:
        head, syls = x.head, list(x.syllables)
        head = self._mul_a(head, syls, y.head)
        for eps, g in y.syllables:
            self._mul_t(syls, eps)
            head = self._mul_a(head, syls, g)
        return HnnNormalForm(head, tuple(syls))

    def inv_nf(self, x: HnnNormalForm) -> HnnNormalForm:
        A = self.A
        pieces = [x.head]
        for eps, g in x.syllables:
            pieces.append(eps)
            pieces.append(g)
        head, syls = A.identity, []
        for j, piece in enumerate(reversed(pieces)):
            if j % 2 == 0:
                head = self._mul_a(head, syls, A.inv(piece))
            else:
                self._mul_t(syls, -piece)
        return HnnNormalForm(head, tuple(syls))

    def nf_word(self, nf: HnnNormalForm):
        t, T = self.stable, inverse_name(self.stable)
        out = list(self.element_word(nf.head))
        for eps, g in nf.syllables:
            out.append(t if eps == 1 else T)
            out.extend(self.element_word(g))
        return tuple(out)


def hnn_normal_form(P: HnnPresentation, w) -> HnnNormalForm:
    lm = P.letter_map()
    tokens = w.split() if isinstance(w, str) else list(w)
    head, syls = P.A.identity, []
    for tok in tokens:
        if tok in lm:
            items = [lm[tok]]
        else:
            m = _TOKEN.match(tok)
            if not m or m.group(1) not in lm:
                raise InstanceError(f"unknown letter {tok!r}")
            k = -1 if m.group(3) else 2 if m.group(4) else int(m.group(2) or 1)
            kind, v = lm[m.group(1)]
            if k < 0:
                v = P.A.inv(v) if kind == "a" else -v
            items = [(kind, v)] * abs(k)
        for kind, v in items:
            if kind == "a":
                head = P._mul_a(head, syls, v)
            else:
                P._mul_t(syls, v)
    return HnnNormalForm(head, tuple(syls))


class HnnGroup(MarkedGroup):
    """A*_C marked by the given A letters together with t and t^-1."""

    kind = "hnn"

    def __init__(self, P: HnnPresentation, letters: dict | None = None, name="hnn"):
        letters = dict(P.names) if letters is None else dict(letters)
        invol = [g for g, i in letters.items() if P.A.mul(i, i) == P.A.identity]
        gens = GeneratingSet.from_generators(list(letters) + [P.stable], invol)
        super().__init__(gens, name)
        self.P = P
        self._act = {}
        for g, i in letters.items():
            self._act[g] = ("a", i)
            self._act[gens.involution[g]] = ("a", P.A.inv(i))
        self._act[P.stable] = ("t", 1)
        self._act[gens.involution[P.stable]] = ("t", -1)
        self.pi_weights = {x: (v if k == "t" else 0) for x, (k, v) in self._act.items()}
        self._id = HnnNormalForm(P.A.identity, ())

    def identity(self):
        return self._id

    def act(self, x, letter):
        kind, v = self._act[letter]
        syls = list(x.syllables)
        if kind == "a":
            head = self.P._mul_a(x.head, syls, v)
            return HnnNormalForm(head, tuple(syls))
        self.P._mul_t(syls, v)
        return HnnNormalForm(x.head, tuple(syls))

    def mul(self, x, y):
        return self.P.mul_nf(x, y)

    def inv(self, x):
        return self.P.inv_nf(x)

    def tree_length(self, x):
        return len(x.syllables)

    def pi(self, x):
        return sum(e for e, _ in x.syllables)


# ------------------------------------------------------------ limit groups

class LamplighterGroup(MarkedGroup):
    """Z/2 wr Z with (f,k)(g,m) = (f + shift_k g, k + m); a lights lamp 0, t shifts."""

    kind = "lamplighter"

    def __init__(self):
        super().__init__(GeneratingSet.from_generators(["a", "t"], ["a"]), "lamplighter")
        self.pi_weights = {"a": 0, "t": 1, "T": -1}

    def identity(self):
        return ((), 0)

    def act(self, x, letter):
        lamps, k = x
        if letter == "a":
            return (tuple(sorted(set(lamps) ^ {k})), k)
        return (lamps, k + (1 if letter == "t" else -1))

    def mul(self, x, y):
        (f, k), (g, m) = x, y
        return (tuple(sorted(set(f) ^ {p + k for p in g})), k + m)

    def inv(self, x):
        f, k = x
        return (tuple(p - k for p in f), -k)

    def pi(self, x):
        return x[1]


class PermutationLimitGroup(MarkedGroup):
    """Permutations of Z that translate by a fixed offset outside a finite set.

    Canonical form (offset, ((p, f(p)), ...)) listing the points where f(p) != p + offset.
    Products use the right action: (x*y)(p) = y(x(p)). Letter a swaps 0 and 1.
    """

    kind = "permutations"

    def __init__(self):
        super().__init__(GeneratingSet.from_generators(["a", "t"], ["a"]), "perm(Z)")
        self.pi_weights = {"a": 0, "t": 1, "T": -1}
        self._letters = {"a": (0, ((0, 1), (1, 0))), "t": (1, ()), "T": (-1, ())}

    def identity(self):
        return (0, ())

    @staticmethod
    def apply(x, p):
        k, exc = x
        for q, v in exc:
            if q == p:
                return v
        return p + k

    @staticmethod
    def preimage(x, q):
        k, exc = x
        for p, v in exc:
            if v == q:
                return p
        return q - k

    def mul(self, x, y):
        kz = x[0] + y[0]
        pts = {p for p, _ in x[1]} | {self.preimage(x, q) for q, _ in y[1]}
        exc = []
        for p in sorted(pts):
            v = self.apply(y, self.apply(x, p))
            if v != p + kz:
                exc.append((p, v))
        return (kz, tuple(exc))

    def act(self, x, letter):
        return self.mul(x, self._letters[letter])

    def inv(self, x):
        k, exc = x
        return (-k, tuple(sorted((v, p) for p, v in exc)))

    def pi(self, x):
        return x[0]


# ------------------------------------------------------------ balls

@dataclass(frozen=True)
class LabeledBall:
    group: MarkedGroup
    radius: int
    canons: tuple
    words: tuple
    edges: tuple  # (i, letter, j) vertex indices

    @property
    def vertices(self):
        return tuple(Element(self.group, c) for c in self.canons)

    def to_dot(self) -> str:
        lines = [f'digraph "ball_{self.group.name}_{self.radius}" {{']
        for i, w in enumerate(self.words):
            lines.append(f'  v{i} [label="{format_word(w)}"];')
        for i, s, j in self.edges:
            lines.append(f'  v{i} -> v{j} [label="{s}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def ball(G: MarkedGroup, r: int, max_vertices: int = 200000) -> LabeledBall:
    """Exact ball of radius r with shortlex-minimal representative words."""
    if r < 0:
        raise InstanceError("radius must be nonnegative")
    e = G.identity()
    words = {e: ()}
    level = [e]
    for depth in range(r):
        nxt = []
        for x in level:
            for s in G.letters:
                y = G.act(x, s)
                if y not in words:
                    words[y] = words[x] + (s,)
                    nxt.append(y)
                    if len(words) > max_vertices:
                        raise BudgetExceeded("ball exceeds vertex budget", partial_radius=depth)
        level = nxt
    order = sorted(words, key=lambda c: G.gens.shortlex_key(words[c]))
    index = {c: i for i, c in enumerate(order)}
    edges = []
    for c in order:
        for s in G.letters:
            d = G.act(c, s)
            if d in index:
                edges.append((index[c], s, index[d]))
    return LabeledBall(G, r, tuple(order), tuple(words[c] for c in order), tuple(edges))


def all_words(letters, max_len):
    for n in range(max_len + 1):
        yield from product(letters, repeat=n)
