"""Tableaux, lingering lattice paths, slope tables and the vertex-avoiding
divisor ``D`` with its representatives ``D_i``.

Points on loop ``k`` are addressed by a cyclic coordinate ``t`` in
``[0, L_k)``, ``L_k = top_k + bottom_k``: ``t = 0`` is ``v_k``, the top edge
is ``0 <= t <= top_k`` (ending at ``w_k``) and the bottom edge is traversed
back from ``w_k`` to ``v_k``.  A degree-0 divisor ``E`` on a cycle is
principal iff ``sum E(t) * t`` vanishes modulo ``L_k``; every chip position
below is solved from that condition.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

from .graph import GraphPoint, bridge, top, bottom

COORD = "coord"
DOWN = "down"
LINGER = "linger"


class TableauError(ValueError):
    pass


class DivisorError(RuntimeError):
    pass


@dataclass(frozen=True)
class Tableau:
    """Rectangular tableau with ``r+1`` columns of ``s`` entries each."""

    columns: tuple
    omitted: frozenset = frozenset()

    @property
    def r(self):
        return len(self.columns) - 1

    @property
    def s(self):
        return len(self.columns[0]) if self.columns else 0

    @property
    def g(self):
        return sum(len(c) for c in self.columns) + len(self.omitted)

    @property
    def rho(self):
        return len(self.omitted)

    @property
    def rows(self):
        return [tuple(col[i] for col in self.columns) for i in range(self.s)]

    def validate(self):
        if len(self.columns) < 2:
            raise TableauError("need at least two columns (r >= 1)")
        s = len(self.columns[0])
        if s < 1 or any(len(c) != s for c in self.columns):
            raise TableauError("tableau is not rectangular")
        entries = [x for c in self.columns for x in c]
        everything = entries + sorted(self.omitted)
        g = len(everything)
        if sorted(everything) != list(range(1, g + 1)):
            raise TableauError(f"entries and omitted numbers must be exactly 1..{g}")
        for j, col in enumerate(self.columns):
            for a, b in zip(col, col[1:]):
                if not a < b:
                    raise TableauError(f"column {j + 1} not increasing at {a}, {b}")
        for i, row in enumerate(self.rows):
            for a, b in zip(row, row[1:]):
                if not a < b:
                    raise TableauError(f"row {i + 1} not increasing at {a}, {b}")
        return self

    def to_text(self):
        lines = [" ".join(str(x) for x in row) for row in self.rows]
        if self.omitted:
            lines.append("linger: " + " ".join(str(x) for x in sorted(self.omitted)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows, omitted = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                if line.startswith("linger:"):
                    omitted += [int(x) for x in line[len("linger:"):].split()]
                else:
                    rows.append([int(x) for x in line.split()])
            except ValueError:
                raise TableauError(f"line {lineno}: expected integers, got {raw!r}")
        if not rows:
            raise TableauError("no tableau rows found")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise TableauError(f"row {i + 1} has {len(row)} entries, expected {width}")
        columns = tuple(tuple(row[j] for row in rows) for j in range(width))
        return cls(columns, frozenset(omitted)).validate()


@dataclass(frozen=True)
class LingeringLatticePath:
    r: int
    steps: tuple    # ("coord", j) with 1 <= j <= r, ("down",), ("linger",)

    @property
    def g(self):
        return len(self.steps)

    def points(self):
        p = tuple(range(self.r, 0, -1))
        out = [p]
        for step in self.steps:
            if step[0] == COORD:
                j = step[1]
                p = p[:j - 1] + (p[j - 1] + 1,) + p[j:]
            elif step[0] == DOWN:
                p = tuple(x - 1 for x in p)
            out.append(p)
        return out

    def validate(self):
        pts = self.points()
        for k, p in enumerate(pts):
            for j in range(self.r):
                nxt = p[j + 1] if j + 1 < self.r else 0
                if not p[j] > nxt:
                    raise TableauError(
                        f"path leaves the chamber at step {k}: p_{k}({j}) = {p[j]}"
                        f" is not > {nxt}")
        if pts[-1] != pts[0]:
            raise TableauError(f"path ends at {pts[-1]}, not {pts[0]}")
        return self


def column_start_bridges(t):
    """Bridges just left of the first loop of each column, plus both ends.

    For the standard tableau these are the multiples of ``s``; lingering
    loops end up inside the block of the column that follows them.
    """
    return frozenset({0, t.g} | {col[0] - 1 for col in t.columns})


def tableau_to_path(t):
    t.validate()
    r = t.r
    where = {}
    for j, col in enumerate(t.columns, 1):
        for x in col:
            where[x] = j
    steps = []
    for i in range(1, t.g + 1):
        j = where.get(i)
        if j is None:
            steps.append((LINGER,))
        elif j == r + 1:
            steps.append((DOWN,))
        else:
            steps.append((COORD, j))
    return LingeringLatticePath(r, tuple(steps)).validate()


def path_to_tableau(path):
    path.validate()
    cols = [[] for _ in range(path.r + 1)]
    omitted = []
    for i, step in enumerate(path.steps, 1):
        if step[0] == COORD:
            cols[step[1] - 1].append(i)
        elif step[0] == DOWN:
            cols[path.r].append(i)
        else:
            omitted.append(i)
    return Tableau(tuple(tuple(c) for c in cols), frozenset(omitted)).validate()


def standard_tableau(p):
    """Column-filled tableau: ``1..s`` in the first column, ``s+1..2s`` in
    the second and so on."""
    if p.rho != 0:
        raise TableauError("standard tableau requires rho = 0")
    s = p.s
    cols = tuple(tuple(range(j * s + 1, (j + 1) * s + 1)) for j in range(p.r + 1))
    return Tableau(cols).validate()


def all_tableaux(r, s, rho):
    """Every valid tableau of shape (r+1) x s with ``rho`` omitted numbers,
    enumerated through legal lingering lattice paths."""
    g = (r + 1) * s + rho
    start = tuple(range(r, 0, -1))
    out = []

    def rec(p, steps, nd, nl):
        k = len(steps)
        if k == g:
            if p == start:
                out.append(path_to_tableau(LingeringLatticePath(r, tuple(steps))))
            return
        if nl < rho:
            rec(p, steps + [(LINGER,)], nd, nl + 1)
        for j in range(1, r + 1):
            q = p[:j - 1] + (p[j - 1] + 1,) + p[j:]
            if j == 1 or q[j - 1] < q[j - 2]:
                rec(q, steps + [(COORD, j)], nd, nl)
        if nd < s and p[-1] > 1:
            rec(tuple(x - 1 for x in p), steps + [(DOWN,)], nd + 1, nl)

    rec(start, [], 0, 0)
    return out


# -- slope table and multisets -------------------------------------------------

@dataclass(frozen=True)
class SlopeTable:
    """``p[k][i]``: slope of ``psi_i`` on bridge ``k`` (0 <= k <= g)."""

    p: tuple

    @property
    def g(self):
        return len(self.p) - 1

    @property
    def r(self):
        return len(self.p[0]) - 1

    def to_json(self):
        return [list(row) for row in self.p]


def slope_table(path):
    return SlopeTable(tuple(pt + (0,) for pt in path.points()))


def multiset(*indices):
    return tuple(sorted(indices))


def parse_multiset(text):
    """``"013"`` or ``"0,1,3"`` -> ``(0, 1, 3)``."""
    text = text.strip().lstrip("psi_").strip("{}")
    parts = text.split(",") if "," in text else list(text)
    return multiset(*(int(x) for x in parts if x.strip()))


def all_multisets(r, m):
    return list(combinations_with_replacement(range(r + 1), m))


def sigma_of(I, k, tbl):
    return sum(tbl.p[k][i] for i in I)


def multiset_str(I):
    if max(I, default=0) < 10:
        return "".join(str(i) for i in I)
    return ",".join(str(i) for i in I)


# -- divisor -------------------------------------------------------------------

def loop_point(G, k, t):
    """GraphPoint for cyclic coordinate ``t`` on loop ``k``."""
    L = G.circumference(k)
    t = t % L
    if t <= G.top[k]:
        return GraphPoint(top(k), t)
    return GraphPoint(bottom(k), L - t)


@dataclass(frozen=True)
class DivisorModel:
    """``D`` and its representatives ``D_i``.

    ``chips[k]`` is the cyclic coordinate of the chip of ``D`` on loop ``k``
    (or ``None``); ``rep[k][i]`` the same for ``D_i``.  ``D`` has ``r`` chips
    at ``w_0``; ``D_i`` has ``i`` chips at ``w_0`` and ``r - i`` at ``v_{g+1}``.
    """

    r: int
    g: int
    chips: tuple
    rep: tuple
    steps: tuple

    @property
    def degree(self):
        return self.r + sum(1 for c in self.chips[1:] if c is not None)

    def loop_degree(self, k):
        return 0 if self.chips[k] is None else 1

    def divisor(self, G):
        out = {("w", 0): self.r} if self.r else {}
        for k in range(1, self.g + 1):
            if self.chips[k] is not None:
                key = loop_point(G, k, self.chips[k]).key(G)
                out[key] = out.get(key, 0) + 1
        return out

    def rep_divisor(self, G, i):
        out = {}
        if i:
            out[("w", 0)] = i
        if self.r - i:
            out[("v", self.g + 1)] = self.r - i
        for k in range(1, self.g + 1):
            y = self.rep[k][i]
            if y is not None:
                key = loop_point(G, k, y).key(G)
                out[key] = out.get(key, 0) + 1
        return out


def _generic_coordinate(rng, L):
    big = 1_000_003
    return L * Fraction(rng.randrange(1, big), big)


def _solve_loop(k, step, a, b, ell, L, rng):
    """Chip of ``D`` and of every ``D_i`` on one loop given port slopes.

    ``D_i|loop ~ D|loop + a_i*[v] - b_i*[w]`` on the cycle, with ``[v]`` at
    ``t = 0`` and ``[w]`` at ``t = ell``.
    """
    r1 = len(a)
    deg_D = 0 if step[0] == DOWN else 1
    degs = [deg_D + a[i] - b[i] for i in range(r1)]
    for i, dg in enumerate(degs):
        if dg < 0 or dg > 1:
            raise DivisorError(f"loop {k}: D_{i} would have degree {dg} on the loop")
    pins = {(b[i] * ell) % L for i in range(r1) if deg_D == 1 and degs[i] == 0}
    if len(pins) > 1:
        raise DivisorError(f"loop {k}: inconsistent chip position constraints")
    for attempt in range(64):
        if deg_D == 0:
            x = None
        elif pins:
            x = next(iter(pins))
        else:
            x = _generic_coordinate(rng, L)
        ys = []
        for i in range(r1):
            if degs[i] == 0:
                ys.append(None)
            else:
                base = x if x is not None else Fraction(0)
                ys.append((base - b[i] * ell) % L)
        used = [y for y in ys if y is not None] + ([x] if x is not None else [])
        on_vertex = any(y == 0 or y == ell for y in used)
        if not on_vertex:
            return x, tuple(ys)
        if pins or deg_D == 0:
            break
    raise DivisorError(f"loop {k}: a chip lands on a vertex; divisor not vertex avoiding")


def build_divisor(t, G, seed=0):
    path = tableau_to_path(t)
    tbl = slope_table(path)
    if G.g != path.g:
        raise DivisorError(f"graph genus {G.g} != tableau genus {path.g}")
    rng = random.Random(seed)
    r = t.r
    chips = [None]
    rep = [None]
    for k in range(1, G.g + 1):
        a, b = tbl.p[k - 1], tbl.p[k]
        x, ys = _solve_loop(k, path.steps[k - 1], a, b, G.top[k], G.circumference(k), rng)
        chips.append(x)
        rep.append(ys)
    model = DivisorModel(r, G.g, tuple(chips), tuple(rep), path.steps)
    d = r + sum(1 for st in path.steps if st[0] != DOWN)
    if model.degree != d:
        raise DivisorError(f"degree {model.degree} != expected {d}")
    return model, tbl
