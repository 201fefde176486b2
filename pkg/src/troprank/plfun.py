"""Exact piecewise-linear functions on a chain of loops.

A function is stored edge by edge: sorted breakpoints ``0 = x_0 < ... < x_n``
(the edge length), integer slopes on each of the ``n`` segments and the value
at the left end.  Everything is ``Fraction``; there are no tolerances.

Sign convention: ``div f(x) = -(sum of outgoing slopes at x)``.  With this
convention a pointwise minimum of functions in ``R(D)`` stays in ``R(D)``, and
the degree of ``div f`` on ``[u_{k-1}, u_k)`` is ``slope(u_{k-1}) - slope(u_k)``.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .graph import BRIDGE, GraphPoint, bridge, piece_of, top, bottom


class PLError(RuntimeError):
    pass


@dataclass(frozen=True)
class EdgeFn:
    breaks: tuple
    slopes: tuple
    value0: Fraction

    @cached_property
    def vals(self):
        out = [self.value0]
        for (a, b), s in zip(zip(self.breaks, self.breaks[1:]), self.slopes):
            out.append(out[-1] + s * (b - a))
        return tuple(out)

    def values(self):
        return self.vals

    def segment(self, x):
        """Index of the segment containing ``x`` (right-closed on the last)."""
        lo, hi = 0, len(self.slopes) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.breaks[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def __call__(self, x):
        j = self.segment(x)
        return self.values()[j] + self.slopes[j] * (x - self.breaks[j])

    def slope_right(self, x):
        j = self.segment(x)
        if x == self.breaks[j + 1] and j + 1 < len(self.slopes):
            j += 1
        return self.slopes[j]

    def slope_left(self, x):
        j = self.segment(x)
        if x == self.breaks[j] and j > 0:
            j -= 1
        return self.slopes[j]

    @property
    def end_value(self):
        return self.values()[-1]


def _simplify(breaks, slopes, value0):
    nb, ns = [breaks[0]], []
    for b, s in zip(breaks[1:], slopes):
        if ns and ns[-1] == s:
            nb[-1] = b
        else:
            ns.append(s)
            nb.append(b)
    return EdgeFn(tuple(nb), tuple(ns), value0)


def _linear(length, slope, value0):
    return EdgeFn((Fraction(0), length), (slope,), value0)


def _add_edge(fs, coeffs=None):
    if coeffs is None:
        coeffs = [1] * len(fs)
    pts = sorted({x for f in fs for x in f.breaks})
    slopes = []
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        slopes.append(sum(c * f.slopes[f.segment(mid)] for f, c in zip(fs, coeffs)))
    return _simplify(tuple(pts), tuple(slopes), sum(c * f.value0 for f, c in zip(fs, coeffs)))


@dataclass(frozen=True)
class PLFunction:
    edges: dict

    def __call__(self, pt):
        return self.edges[pt.edge](pt.offset)

    def __add__(self, other):
        return PLFunction({e: _add_edge([f, other.edges[e]]) for e, f in self.edges.items()})

    def shifted(self, c):
        return PLFunction({e: EdgeFn(f.breaks, f.slopes, f.value0 + c)
                           for e, f in self.edges.items()})

    def sigma(self, G, k):
        """Slope at ``u_k`` going to the right."""
        return self.edges[bridge(k)].slope_right(G.bridges[k] / 2)

    def to_json(self):
        return {f"{kind}_{k}": {"breaks": [str(x) for x in f.breaks],
                                "slopes": list(f.slopes),
                                "value0": str(f.value0)}
                for (kind, k), f in self.edges.items()}


def pl_sum(fns, coeffs=None):
    edges = fns[0].edges.keys()
    return PLFunction({e: _add_edge([f.edges[e] for f in fns], coeffs) for e in edges})


def continuity_defects(f, G):
    """Vertices where incident edge values disagree (empty for valid f)."""
    seen = {}
    bad = []
    for e, ef in f.edges.items():
        a, b = G.endpoints(e)
        for key, val in ((a, ef.value0), (b, ef.end_value)):
            if key in seen and seen[key] != val:
                bad.append(key)
            seen.setdefault(key, val)
    return bad


def divisor_of(f, G):
    """``div f`` as a map from canonical point keys to nonzero integers."""
    out = {}

    def add(key, n):
        if n:
            out[key] = out.get(key, 0) + n
            if out[key] == 0:
                del out[key]

    for e, ef in f.edges.items():
        a, b = G.endpoints(e)
        add(a, -ef.slopes[0])
        add(b, ef.slopes[-1])
        for j in range(1, len(ef.slopes)):
            add((e, ef.breaks[j]), ef.slopes[j - 1] - ef.slopes[j])
    return out


def divisor_add(*divs, coeffs=None):
    coeffs = coeffs or [1] * len(divs)
    out = {}
    for d, c in zip(divs, coeffs):
        for k, v in d.items():
            out[k] = out.get(k, 0) + c * v
    return {k: v for k, v in out.items() if v}


def key_point(G, key):
    """Inverse of ``GraphPoint.key`` (vertices map to a bridge endpoint or,
    for interior loop vertices, the top edge)."""
    if isinstance(key[0], str) and key[0] in ("w", "v"):
        kind, k = key
        if kind == "w":
            return GraphPoint(bridge(k), Fraction(0))
        if k == G.g + 1:
            return GraphPoint(bridge(k - 1), G.bridges[k - 1])
        return GraphPoint(top(k), Fraction(0))
    edge, off = key
    return GraphPoint(edge, off)


def piece_degrees(div, G):
    out = [0] * (G.g + 2)
    for key, v in div.items():
        out[piece_of(G, key_point(G, key))] += v
    return out


# -- construction of psi_i -----------------------------------------------------

def _cycle_function(E, ell, L, value_v):
    """Function on the loop with cycle divisor ``E`` (dict t -> int).

    Returns the top-edge and bottom-edge ``EdgeFn`` (both oriented v -> w).
    """
    pts = sorted(set(E) | {Fraction(0), ell})
    cum, c = [], 0
    for t in pts:
        c += E.get(t, 0)
        cum.append(c)
    if c != 0:
        raise PLError("loop divisor has nonzero degree")
    lens = [b - a for a, b in zip(pts, pts[1:] + [L])]
    s_wrap = sum(ln * cj for ln, cj in zip(lens, cum)) / L
    if s_wrap.denominator != 1:
        raise PLError("loop divisor is not principal")
    slopes = [int(s_wrap) - cj for cj in cum]
    ends = pts + [L]
    full = _simplify(tuple(ends), tuple(slopes), value_v)
    split = full.breaks.index(ell) if ell in full.breaks else None
    tb = [x for x in full.breaks if x <= ell]
    if split is None:
        tb.append(ell)
    top_fn = _simplify(tuple(tb), tuple(full.slopes[full.segment((a + b) / 2)]
                                        for a, b in zip(tb, tb[1:])), value_v)
    bb = sorted({L - x for x in full.breaks if x >= ell} | {Fraction(0), L - ell})
    bot_slopes = tuple(-full.slopes[full.segment(L - (a + b) / 2)] for a, b in zip(bb, bb[1:]))
    bot_fn = _simplify(tuple(bb), bot_slopes, value_v)
    if top_fn.end_value != bot_fn.end_value:
        raise PLError("loop function does not close up")
    return top_fn, bot_fn


def build_psi(i, D, tbl, G):
    """``psi_i`` with ``psi_i(w_0) = 0`` and ``D + div psi_i = D_i``."""
    edges = {}
    val = Fraction(0)
    edges[bridge(0)] = _linear(G.bridges[0], tbl.p[0][i], val)
    val += tbl.p[0][i] * G.bridges[0]
    for k in range(1, G.g + 1):
        ell, L = G.top[k], G.circumference(k)
        a, b = tbl.p[k - 1][i], tbl.p[k][i]
        E = {}
        for t, n in ((D.chips[k], -1), (D.rep[k][i], 1), (Fraction(0), -a), (ell, b)):
            if t is not None and n:
                E[t] = E.get(t, 0) + n
        try:
            tf, bf = _cycle_function({t: n for t, n in E.items() if n}, ell, L, val)
        except PLError as exc:
            raise PLError(f"loop {k}, psi_{i}: {exc}") from exc
        edges[top(k)] = tf
        edges[bottom(k)] = bf
        val = tf.end_value
        edges[bridge(k)] = _linear(G.bridges[k], b, val)
        val += b * G.bridges[k]
    return PLFunction(edges)


class Series:
    """All ``psi_i`` for one divisor, with cached ``psi_I``."""

    def __init__(self, D, tbl, G):
        self.D, self.tbl, self.G = D, tbl, G
        self.m_cache = {}
        self.psi = [build_psi(i, D, tbl, G) for i in range(tbl.r + 1)]

    @property
    def r(self):
        return self.tbl.r

    def psi_I(self, I):
        I = tuple(sorted(I))
        if I not in self.m_cache:
            counts = {}
            for i in I:
                counts[i] = counts.get(i, 0) + 1
            keys = sorted(counts)
            self.m_cache[I] = pl_sum([self.psi[i] for i in keys], [counts[i] for i in keys])
        return self.m_cache[I]

    def D_I(self, I):
        return divisor_add(*(self.D.rep_divisor(self.G, i) for i in I))


def build_psi_I(I, series):
    return series.psi_I(I)


# -- lower envelope --------------------------------------------------------------

@dataclass(frozen=True)
class EnvelopeCell:
    edge: tuple
    a: Fraction
    b: Fraction
    achievers: frozenset


def envelope_edge(edge, items, length):
    """items: list of (label, EdgeFn, shift).  Returns (EdgeFn, cells)."""
    pts = sorted({x for _, f, _ in items for x in f.breaks} | {Fraction(0), length})
    cells = []
    bks, sls = [Fraction(0)], []
    v0 = None
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        lines = []
        for lab, f, c in items:
            j = f.segment(mid)
            s = f.slopes[j]
            va = f.values()[j] + s * (a - f.breaks[j]) + c
            lines.append((lab, s, va))
        x = a
        val_x = {lab: va for lab, _, va in lines}
        slope = {lab: s for lab, s, _ in lines}
        while x < b:
            vmin = min(val_x.values())
            tied = [lab for lab in val_x if val_x[lab] == vmin]
            smin = min(slope[lab] for lab in tied)
            ach = frozenset(lab for lab in tied if slope[lab] == smin)
            nxt = b
            for lab, vx in val_x.items():
                if slope[lab] < smin:
                    cross = x + (vx - vmin) / (smin - slope[lab])
                    if cross < nxt:
                        nxt = cross
            if v0 is None:
                v0 = vmin
            if cells and cells[-1].achievers == ach and cells[-1].b == x:
                last = cells.pop()
                cells.append(EnvelopeCell(edge, last.a, nxt, ach))
            else:
                cells.append(EnvelopeCell(edge, x, nxt, ach))
            bks.append(nxt)
            sls.append(smin)
            for lab in val_x:
                val_x[lab] += slope[lab] * (nxt - x)
            x = nxt
    return _simplify(tuple(bks), tuple(sls), v0), cells


def lower_envelope(fns, shifts, G):
    """``theta = min_I (f_I + b_I)`` with exact achiever cells.

    ``fns`` maps labels to PLFunctions; ``shifts`` maps labels to rationals
    (missing labels get 0).
    """
    edges, cells = {}, []
    for e in G.edges():
        items = [(lab, f.edges[e], Fraction(shifts.get(lab, 0))) for lab, f in fns.items()]
        ef, cs = envelope_edge(e, items, G.length(e))
        edges[e] = ef
        cells.extend(cs)
    return PLFunction(edges), cells


def achievers_at(cells, G, pt):
    """Union of achievers over all cells whose closure contains ``pt``."""
    out = set()
    for c in cells:
        if c.edge == pt.edge and c.a <= pt.offset <= c.b:
            out |= c.achievers
    key = pt.key(G)
    if key != (pt.edge, pt.offset):
        for c in cells:
            if c.edge == pt.edge:
                continue
            a, b = G.endpoints(c.edge)
            if (key == a and c.a == 0) or (key == b and c.b == G.length(c.edge)):
                out |= c.achievers
    return out


def delta_vector(theta, D, G, m):
    """``(sigma, delta)`` with ``delta`` computed by direct degree count of
    ``m*D + div theta`` and cross-checked against the slope formula."""
    g = G.g
    sigma = [theta.sigma(G, k) for k in range(g + 1)]
    Delta = divisor_add(D.divisor(G), divisor_of(theta, G), coeffs=[m, 1])
    direct = piece_degrees(Delta, G)
    formula = [m * D.r - sigma[0]]
    for t in range(1, g + 1):
        formula.append(sigma[t - 1] - sigma[t] + m * D.loop_degree(t))
    formula.append(sigma[g])
    if direct != formula:
        raise PLError(f"delta mismatch: direct {direct} vs formula {formula}")
    return sigma, direct
