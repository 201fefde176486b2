"""The metric chain of loops with bridges.

Vertices are ``w_0 .. w_g`` (left end of each bridge) and ``v_1 .. v_{g+1}``
(right end of each bridge).  Bridge ``k`` joins ``w_k`` to ``v_{k+1}``; loop
``k`` has a top edge of length ``top[k]`` and a bottom edge of length
``bottom[k]``, both oriented from ``v_k`` to ``w_k``.  All lengths are exact
``Fraction`` values.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd

from sympy import nextprime, factorint

TOP = "top"
BOTTOM = "bottom"
BRIDGE = "bridge"


class GraphError(ValueError):
    pass


def bridge(k):
    return (BRIDGE, k)


def top(k):
    return (TOP, k)


def bottom(k):
    return (BOTTOM, k)


@dataclass(frozen=True)
class ChainOfLoops:
    """Chain of ``g`` loops.  ``top``/``bottom`` are indexed 1..g (index 0 is
    a placeholder ``None``), ``bridges`` 0..g."""

    g: int
    top: tuple
    bottom: tuple
    bridges: tuple
    long_bridges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.top) != self.g + 1 or len(self.bottom) != self.g + 1:
            raise GraphError("top/bottom must have g+1 entries (index 0 unused)")
        if len(self.bridges) != self.g + 1:
            raise GraphError("need g+1 bridge lengths")
        for k in range(1, self.g + 1):
            if self.top[k] <= 0 or self.bottom[k] <= 0:
                raise GraphError(f"loop {k} has a non-positive edge length")
        for k, n in enumerate(self.bridges):
            if n <= 0:
                raise GraphError(f"bridge {k} has non-positive length")
        for k in self.long_bridges:
            if not 0 <= k <= self.g:
                raise GraphError(f"long bridge index {k} out of range 0..{self.g}")

    def edges(self):
        """All edges in left-to-right order."""
        out = [bridge(0)]
        for k in range(1, self.g + 1):
            out += [top(k), bottom(k), bridge(k)]
        return out

    def length(self, edge):
        kind, k = edge
        if kind == BRIDGE:
            return self.bridges[k]
        if kind == TOP:
            return self.top[k]
        return self.bottom[k]

    def circumference(self, k):
        return self.top[k] + self.bottom[k]

    def endpoints(self, edge):
        kind, k = edge
        if kind == BRIDGE:
            return ("w", k), ("v", k + 1)
        return ("v", k), ("w", k)

    def midpoint(self, k):
        """The point ``u_k`` in the middle of bridge ``k``."""
        return GraphPoint(bridge(k), self.bridges[k] / 2)

    def blocks(self):
        """Consecutive pairs of long bridges, as (left, right) bridge indices."""
        pos = sorted(self.long_bridges)
        return list(zip(pos, pos[1:]))

    def to_json(self):
        return {
            "g": self.g,
            "top": [str(x) for x in self.top[1:]],
            "bottom": [str(x) for x in self.bottom[1:]],
            "bridge": [str(x) for x in self.bridges],
            "long_bridges": sorted(self.long_bridges),
        }

    @classmethod
    def from_json(cls, data):
        try:
            tops = [Fraction(x) for x in data["top"]]
            bots = [Fraction(x) for x in data["bottom"]]
            brs = [Fraction(x) for x in data["bridge"]]
        except (KeyError, ValueError, ZeroDivisionError) as exc:
            raise GraphError(f"malformed lengths: {exc}") from exc
        g = len(tops)
        if len(bots) != g or len(brs) != g + 1:
            raise GraphError("expected g top, g bottom and g+1 bridge lengths")
        if "g" in data and data["g"] != g:
            raise GraphError(f"declared g={data['g']} but {g} loops given")
        return cls(g, (None, *tops), (None, *bots), tuple(brs),
                   frozenset(data.get("long_bridges", ())))


@dataclass(frozen=True)
class GraphPoint:
    edge: tuple
    offset: Fraction

    def key(self, G):
        """Canonical identity: vertices compare equal across their edges."""
        if self.offset == 0:
            return G.endpoints(self.edge)[0]
        if self.offset == G.length(self.edge):
            return G.endpoints(self.edge)[1]
        return (self.edge, self.offset)


def same_point(G, a, b):
    return a.key(G) == b.key(G)


@dataclass(frozen=True)
class PieceRange:
    lo: int
    hi: int

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise GraphError(f"bad piece range [{self.lo}, {self.hi}]")

    def __contains__(self, k):
        return self.lo <= k <= self.hi


def piece_of(G, pt):
    """Index ``k`` of the piece ``gamma_k`` containing ``pt``.

    ``gamma_0 = [w_0, u_0)``, ``gamma_k = [u_{k-1}, u_k)`` for ``1 <= k <= g``
    and ``gamma_{g+1} = [u_g, v_{g+1}]``.
    """
    kind, k = pt.edge
    if not 0 <= pt.offset <= G.length(pt.edge):
        raise GraphError(f"offset {pt.offset} outside edge {pt.edge}")
    if kind != BRIDGE:
        return k
    return k if pt.offset < G.bridges[k] / 2 else k + 1


def decompose(G):
    return [PieceRange(k, k) for k in range(G.g + 2)]


def in_range(G, pt, rng):
    return piece_of(G, pt) in rng


# -- admissible instantiation -------------------------------------------------

def scale_factor(p):
    """The constant K in the policy ``x << y  <=>  y >= K*x``."""
    return 10 * p.g * p.m * (p.r + p.s + 1)


def default_long_bridges(p):
    return frozenset(a * p.s for a in range(p.r + 2) if a * p.s <= p.g)


def instantiate_admissible(p, long_bridges=None):
    g = p.g
    if long_bridges is None:
        long_bridges = default_long_bridges(p)
    long_bridges = frozenset(long_bridges)
    for k in long_bridges:
        if not 0 <= k <= g:
            raise GraphError(f"long bridge index {k} out of range 0..{g}")
    primes = []
    q = g + 1
    for _ in range(g):
        q = nextprime(q)
        primes.append(q)
    top = (None,) + (Fraction(4),) * g
    bottom = (None,) + tuple(Fraction(1, q) for q in primes)
    K = scale_factor(p)
    base = K * (sum(top[1:]) + sum(bottom[1:]) + g)
    long_len = base * K * (g + 1)
    bridges = tuple(long_len if k in long_bridges else base for k in range(g + 1))
    return ChainOfLoops(g, top, bottom, bridges, long_bridges)


def _no_small_relation(values, bound):
    """True iff no nonzero integer vector ``c`` with ``|c_k| <= bound`` has
    ``sum c_k * values[k] == 0``.

    Coordinates whose denominator has a prime-power factor ``q**e`` with
    ``q > bound`` not shared by any other denominator are forced to zero
    (compare ``q``-adic valuations); the remainder is decided by a
    meet-in-the-middle enumeration.
    """
    vals = list(values)
    alive = list(range(len(vals)))
    changed = True
    while changed:
        changed = False
        for k in list(alive):
            den = vals[k].denominator
            for q, e in factorint(den).items():
                if q <= bound:
                    continue
                if all(vals[j].denominator % q != 0 for j in alive if j != k):
                    alive.remove(k)
                    changed = True
                    break
    if not alive:
        return True
    lcm = 1
    for k in alive:
        lcm = lcm * vals[k].denominator // gcd(lcm, vals[k].denominator)
    ints = [int(vals[k] * lcm) for k in alive]
    half = len(ints) // 2
    left, right = ints[:half], ints[half:]
    if (2 * bound + 1) ** max(len(left), len(right)) > 2_000_000:
        raise GraphError("relation check too large to decide exactly")
    rng = range(-bound, bound + 1)
    seen = {}
    for c in product(rng, repeat=len(left)):
        s = sum(a * b for a, b in zip(c, left))
        seen.setdefault(s, []).append(c)
    for c in product(rng, repeat=len(right)):
        s = -sum(a * b for a, b in zip(c, right))
        for cl in seen.get(s, ()):
            if any(cl) or any(c):
                return False
    return True


def verify_admissible(G, p):
    """Check the admissibility clauses; returns ``(ok, [diagnostics])``.

    Clauses: (i) ``4g*bottom_k < top_k``; (ii) ``top_k << min(n_{k-1}, n_k)``;
    (iii) no integer relation among the bottom lengths with coefficients of
    absolute value at most ``g+1``; (iv) every block between consecutive long
    bridges is much shorter than both bounding bridges.
    """
    problems = []
    g = G.g
    if g != p.g:
        problems.append(f"genus mismatch: graph has {g}, parameters give {p.g}")
        return False, problems
    K = scale_factor(p)
    for k in range(1, g + 1):
        if not 4 * g * G.bottom[k] < G.top[k]:
            problems.append(f"(i) loop {k}: 4g*m_k = {4 * g * G.bottom[k]} >= l_k = {G.top[k]}")
        if not K * G.top[k] <= min(G.bridges[k - 1], G.bridges[k]):
            problems.append(f"(ii) loop {k}: l_k not << adjacent bridges")
    try:
        if not _no_small_relation(G.bottom[1:], g + 1):
            problems.append("(iii) bottom lengths satisfy a small integer relation")
    except GraphError as exc:
        problems.append(f"(iii) {exc}")
    for a, b in G.blocks():
        size = sum(G.top[i] for i in range(a + 1, b + 1)) + \
            sum(G.bridges[i] for i in range(a + 1, b))
        if not K * size <= min(G.bridges[a], G.bridges[b]):
            problems.append(f"(iv) block ({a},{b}] not << bridges {a}, {b}")
    return not problems, problems
