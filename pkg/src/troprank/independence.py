"""Tropical (in)dependence of a family of functions ``psi_I``.

Three tools live here:

* ``check_dependence`` decides exactly whether given shifts ``b_I`` make the
  minimum occur at least twice everywhere;
* ``search_dependence`` hunts for such shifts (it can only ever find
  dependences, never prove independence);
* ``certify_independence`` runs a branch-and-prune search over slope
  profiles ``sigma_0 .. sigma_g`` of the hypothetical minimum ``theta``.  Each
  constraint is one of the rules below; if no profile survives, the family is
  independent (relative to those rules) and the recorded steps form a
  certificate that ``replay`` re-derives.

Rules:

    C1  achievers on loop t are permissible: sigma_{t-1}psi_I <= sigma_{t-1}
        and sigma_t psi_I >= sigma_t; at least two of them
    C2  the same with the two bridges bounding a block, for achievers on the
        block's loops and for the tie pairs at bridge midpoints in the block
    C3  achievers on a chip loop with column index i carry i with
        multiplicity >= m - delta_t
    C4  delta_t = sigma_{t-1} - sigma_t + m deg(D|gamma_t) >= 2
    C5  sigma_k is the common slope of two functions achieving at u_k
    C6  at least three candidate achievers per loop (distinct functions have
        distinct restrictions to a loop); when there are at most five, some
        subset of them must be dependent on the loop itself
    C7  (m = 3) if every candidate in a block contains the one index raised by
        the block's coordinate loops (no down loops), there must be more than genus(block) plus the
        number of distinct reduced slopes of them
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .graph import GraphPoint, top, bottom
from .plfun import lower_envelope, envelope_edge
from .series import COORD, DOWN, multiset_str, parse_multiset

ALL_RULES = ("C1", "C2", "C3", "C4", "C5", "C6", "C7")
INDEPENDENT = "Independent"
DEPENDENT = "Dependent"
UNKNOWN = "Unknown"


class InputError(ValueError):
    pass


def validate_family(A, r, m):
    seen = set()
    out = []
    for I in A:
        J = tuple(sorted(I))
        if len(J) != m or any(not 0 <= i <= r for i in J):
            raise InputError(f"multiset {I} is not of size {m} over 0..{r}")
        if J in seen:
            raise InputError(f"duplicate multiset {multiset_str(J)}")
        seen.add(J)
        out.append(J)
    return sorted(out)


# -- exact dependence check ---------------------------------------------------

@dataclass
class DependenceWitness:
    b: dict
    verified: bool = False

    def to_json(self):
        return {"b": {multiset_str(I): str(v) for I, v in sorted(self.b.items())},
                "verified": self.verified}

    @classmethod
    def from_json(cls, data):
        b = {parse_multiset(k): Fraction(v) for k, v in data["b"].items()}
        return cls(b, bool(data.get("verified")))


def _unique_cells(cells):
    return [c for c in cells if len(c.achievers) < 2]


def check_shifts(fns, shifts, G):
    """``(ok, witness_point)`` for labelled PL functions ``fns``: ``ok`` iff
    the shifted minimum is attained at least twice at every point.  A
    uniquely achieved cell yields its midpoint."""
    _, cells = lower_envelope(fns, shifts, G)
    for c in cells:
        if len(c.achievers) < 2:
            return False, GraphPoint(c.edge, (c.a + c.b) / 2)
    return True, None


def check_dependence(A, b, series):
    A = validate_family(A, series.r, len(A[0]) if A else 0)
    fns = {I: series.psi_I(I) for I in A}
    return check_shifts(fns, b, series.G)


def _gap(fns, shifts, I, cell, G):
    """How far to raise ``b_I`` on ``cell``.

    With ``h`` = (minimum of the other shifted functions) - (shifted ``f_I``),
    a new tie appears at the smallest positive interior local minimum of
    ``h`` (or flat stretch).  If ``h`` has none, ``I`` is lifted by the
    maximum of ``h`` so it no longer owns the cell.
    """
    e = cell.edge
    items = [(J, f.edges[e], Fraction(shifts[J])) for J, f in fns.items() if J != I]
    others, _ = envelope_edge(e, items, G.length(e))
    own = fns[I].edges[e]
    pts = sorted({cell.a, cell.b}
                 | {x for x in others.breaks if cell.a < x < cell.b}
                 | {x for x in own.breaks if cell.a < x < cell.b})
    h = [others(x) - own(x) - shifts[I] for x in pts]
    cands = []
    for j in range(1, len(pts) - 1):
        if h[j] > 0 and h[j] <= h[j - 1] and h[j] <= h[j + 1]:
            cands.append(h[j])
    if cands:
        return min(cands)
    return max(h)


def search_shifts(fns, G, budget=200, start=None):
    """Greedy tie creation on labelled functions; returns shifts making the
    family dependent, or ``None`` when the budget runs out.  Never proves
    independence."""
    shifts = {I: Fraction(0) for I in fns}
    if start:
        shifts.update({I: Fraction(v) for I, v in start.items()})
    if len(fns) < 2:
        return None
    for _ in range(budget):
        _, cells = lower_envelope(fns, shifts, G)
        bad = _unique_cells(cells)
        if not bad:
            return shifts
        I = min(next(iter(c.achievers)) for c in bad)
        cell = next(c for c in bad if I in c.achievers)
        gap = _gap(fns, shifts, I, cell, G)
        if gap <= 0:
            return None
        shifts[I] += gap
    return None


def search_dependence(A, series, budget=200, start=None):
    A = validate_family(A, series.r, len(A[0]))
    fns = {I: series.psi_I(I) for I in A}
    b = search_shifts(fns, series.G, budget, start)
    if b is None:
        return None
    ok, _ = check_shifts(fns, b, series.G)
    return DependenceWitness(b, verified=ok) if ok else None


# -- combinatorial certifier --------------------------------------------------

def _popcount(x):
    return bin(x).count("1")


def _bits(x):
    i = 0
    while x:
        if x & 1:
            yield i
        x >>= 1
        i += 1


@dataclass(frozen=True)
class SigmaProfile:
    """Slopes of the minimum at ``u_0 .. u_g`` with the candidate achievers
    each rule leaves on every loop."""

    sigma: tuple
    loop_candidates: tuple = ()

    def delta(self, D, m):
        g = len(self.sigma) - 1
        out = [m * D.r - self.sigma[0]]
        out += [self.sigma[t - 1] - self.sigma[t] + m * D.loop_degree(t) for t in range(1, g + 1)]
        out.append(self.sigma[g])
        return out

    def to_json(self):
        return {"sigma": list(self.sigma),
                "loop_candidates": [[multiset_str(I) for I in c] for c in self.loop_candidates]}


@dataclass
class IndependenceCertificate:
    status: str                      # "contradiction" or "inconclusive"
    steps: list = field(default_factory=list)
    profile: list = None
    rules: tuple = ALL_RULES

    def to_json(self):
        return {"status": self.status, "rules": list(self.rules),
                "steps": self.steps, "profile": self.profile}

    def bounds(self):
        """All recorded bounds as tuples (k, op, value, rule)."""
        return [(s["k"], s["op"], s["value"], s["rule"])
                for s in self.steps if "op" in s]


class Certifier:
    def __init__(self, A, series, rules=ALL_RULES):
        self.series = series
        self.G = series.G
        self.tbl = series.tbl
        self.D = series.D
        self.r = series.r
        self.g = self.G.g
        self.m = len(A[0])
        self.A = validate_family(A, self.r, self.m)
        self.rules = tuple(r for r in ALL_RULES if r in set(rules))
        self.N = len(self.A)
        self.sig = [[sum(self.tbl.p[k][i] for i in I) for k in range(self.g + 1)]
                    for I in self.A]
        self.steps = []
        self.blocks = self.G.blocks()
        self.block_end = {b: a for a, b in self.blocks}
        self._local_cache = {}
        self._perm_cache = {}
        self.allmask = (1 << self.N) - 1

    # -- masks
    def perm(self, lo_k, hi_k, x, y):
        key = (lo_k, hi_k, x, y)
        v = self._perm_cache.get(key)
        if v is None:
            v = 0
            for n in range(self.N):
                if self.sig[n][lo_k] <= x and self.sig[n][hi_k] >= y:
                    v |= 1 << n
            self._perm_cache[key] = v
        return v

    def tie_mask(self, k, val, within=None):
        within = self.allmask if within is None else within
        v = 0
        for n in _bits(within):
            if self.sig[n][k] == val:
                v |= 1 << n
        return v

    def column_index(self, t):
        st = self.D.steps[t - 1]
        if st[0] == COORD:
            return st[1] - 1
        if st[0] == DOWN:
            return self.r
        return None

    def tie_values(self, k):
        counts = {}
        for n in range(self.N):
            counts[self.sig[n][k]] = counts.get(self.sig[n][k], 0) + 1
        return sorted(v for v, c in counts.items() if c >= 2)

    # -- local loop test
    def locally_independent(self, t, mask):
        """True when no subset of the masked functions is dependent on loop ``t``."""
        key = (t, mask)
        if key in self._local_cache:
            return self._local_cache[key]
        labels = [self.A[n] for n in _bits(mask)]
        res = not _loop_subset_dependent(self.series, t, labels)
        self._local_cache[key] = res
        return res

    # -- rule checks
    def loop_candidates(self, t, x, y, within=None):
        """Candidate achievers on loop t, or None when a loop rule fails."""
        on = self.rules
        if "C4" in on and x - y + self.m * self.D.loop_degree(t) < 2:
            return None
        cand = self.perm(t - 1, t, x, y) if "C1" in on else self.allmask
        if within is not None:
            cand &= within
        if "C3" in on:
            i = self.column_index(t)
            if i is not None:
                delta = x - y + self.m * self.D.loop_degree(t)
                need = self.m - delta
                cand &= sum(1 << n for n in _bits(cand) if self.A[n].count(i) >= need)
        need = 3 if "C6" in on else 2
        cnt = _popcount(cand)
        if cnt < need:
            return None
        if "C6" in on and cnt <= LOCAL_EXACT_MAX and self.locally_independent(t, cand):
            return None
        return cand

    def loop_ok(self, t, x, y):
        return self.loop_candidates(t, x, y) is not None

    def block_ok(self, a, b, sigmas):
        """``sigmas[k - a]`` = sigma_k for a <= k <= b."""
        if "C2" not in self.rules and "C7" not in self.rules:
            return True
        B = self.perm(a, b, sigmas[0], sigmas[-1]) if "C2" in self.rules else self.allmask
        union = 0
        for t in range(a + 1, b + 1):
            c = self.loop_candidates(t, sigmas[t - 1 - a], sigmas[t - a], within=B)
            if c is None:
                return False
            union |= c
        for k in range(a, b):
            tm = self.tie_mask(k, sigmas[k - a], B)
            if "C5" in self.rules and _popcount(tm) < 2:
                return False
            if k > a:
                union |= tm
        if "C7" in self.rules and self.m == 3 and union and self.block_count_fails(a, b, sigmas, union):
            return False
        return True

    def block_count_fails(self, a, b, sigmas, union):
        """Counting bound for a block whose chip loops all move one index.

        Every candidate contains that index ``alpha``; removing it leaves
        pairs whose minimum ``theta_alpha`` has slopes ``tau_k = sigma_k -
        p_k(alpha)``.  These cannot increase, the pieces of constant ``tau``
        carry disjoint permissible sets, and a piece of genus ``h`` needs more
        than ``h + 1`` of them; dependence therefore needs more than
        ``genus + #{tau values}`` candidates.
        """
        steps = [self.D.steps[t - 1] for t in range(a + 1, b + 1)]
        if any(st[0] == DOWN for st in steps):
            return False
        cols = {st[1] - 1 for st in steps if st[0] == COORD}
        if len(cols) != 1:
            return False
        alpha = cols.pop()
        if any(alpha not in self.A[n] for n in _bits(union)):
            return False
        tau = [sigmas[k - a] - self.tbl.p[k][alpha] for k in range(a, b + 1)]
        if any(y > x for x, y in zip(tau, tau[1:])):
            return False
        return _popcount(union) <= (b - a) + len(set(tau))

    # -- trace helpers
    def _bound(self, rule, k, op, value, where):
        self.steps.append({"rule": rule, "at": where, "k": k, "op": op, "value": value,
                           "claim": f"sigma_{k} {op} {value}"})

    def _contradiction(self, rule, where, claim, **extra):
        step = {"rule": rule, "at": where, "claim": claim, "contradiction": True}
        step.update(extra)
        self.steps.append(step)

    # -- the search
    def run(self):
        g, m = self.g, self.m
        if self.N < 2:
            self._contradiction("TRIVIAL", "family", "a single function is independent")
            return IndependenceCertificate("contradiction", self.steps, None, self.rules)
        lo_all = [min(s[k] for s in self.sig) for k in range(g + 1)]
        hi_all = [max(s[k] for s in self.sig) for k in range(g + 1)]
        dom = []
        for k in range(g + 1):
            if "C5" in self.rules:
                vals = self.tie_values(k)
                if not vals:
                    self._contradiction("C5", f"u_{k}", f"no slope is shared by two functions at u_{k}")
                    return IndependenceCertificate("contradiction", self.steps, None, self.rules)
                self._bound("C5", k, "<=", vals[-1], f"u_{k}")
                self._bound("C5", k, ">=", vals[0], f"u_{k}")
            else:
                vals = list(range(lo_all[k], hi_all[k] + 1))
            dom.append(vals)
        # interval form of C4
        if "C4" in self.rules:
            for t in range(1, g + 1):
                best = dom[t - 1][-1] - dom[t][0] + m * self.D.loop_degree(t)
                if best < 2:
                    self._contradiction(
                        "C4", f"loop {t}",
                        f"delta_{t} <= {dom[t - 1][-1]} - {dom[t][0]} + {m * self.D.loop_degree(t)}"
                        f" = {best} < 2",
                        uses=[f"sigma_{t - 1} <= {dom[t - 1][-1]}", f"sigma_{t} >= {dom[t][0]}"],
                        delta_bound=best, loop=t)
                    return IndependenceCertificate("contradiction", self.steps, None, self.rules)
        # pairwise arc consistency on loops
        changed = True
        while changed:
            changed = False
            for t in range(1, g + 1):
                left = [x for x in dom[t - 1] if any(self.loop_ok(t, x, y) for y in dom[t])]
                right = [y for y in dom[t] if any(self.loop_ok(t, x, y) for x in left)]
                for k, new in ((t - 1, left), (t, right)):
                    if new != dom[k]:
                        changed = True
                        if not new:
                            self._contradiction("AC", f"loop {t}",
                                                f"no admissible pair (sigma_{t - 1}, sigma_{t})",
                                                loop=t)
                            return IndependenceCertificate("contradiction", self.steps, None,
                                                           self.rules)
                        if new[-1] != dom[k][-1]:
                            self._bound("AC", k, "<=", new[-1], f"loop {t}")
                        if new[0] != dom[k][0]:
                            self._bound("AC", k, ">=", new[0], f"loop {t}")
                        dom[k] = new
        # forward propagation with block rules
        layer = {(x,): [x] for x in dom[0]}
        open_block = 0 in {a for a, _ in self.blocks}
        for k in range(1, g + 1):
            nxt = {}
            starts = {a for a, _ in self.blocks}
            for key, prof in layer.items():
                x = prof[-1]
                for y in dom[k]:
                    if not self.loop_ok(k, x, y):
                        continue
                    if k in self.block_end:
                        a = self.block_end[k]
                        if not self.block_ok(a, k, prof[a:] + [y]):
                            continue
                    in_block = any(a <= k < b for a, b in self.blocks)
                    if in_block:
                        a = max(a for a, b in self.blocks if a <= k < b)
                        nkey = tuple(prof[a:]) + (y,) if k > a else (y,)
                    else:
                        nkey = (y,)
                    if nkey not in nxt:
                        nxt[nkey] = prof + [y]
            layer = nxt
            vals = sorted({p[-1] for p in layer.values()})
            if not vals:
                self._contradiction("FWD", f"u_{k}",
                                    f"no slope profile survives through bridge {k}", k_fail=k)
                return IndependenceCertificate("contradiction", self.steps, None, self.rules)
            self._bound("FWD", k, "<=", vals[-1], f"u_{k}")
            self._bound("FWD", k, ">=", vals[0], f"u_{k}")
        prof = min(layer.values())
        return IndependenceCertificate("inconclusive", self.steps, prof, self.rules)


def _loop_restrictions(series, t, labels):
    return {I: (series.psi_I(I).edges[top(t)], series.psi_I(I).edges[bottom(t)])
            for I in labels}


def _pair_constants(fa, fb):
    """Values of ``fa - fb`` on segments where the two have equal slope."""
    out = set()
    pts = sorted(set(fa.breaks) | set(fb.breaks))
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        if fa.slopes[fa.segment(mid)] == fb.slopes[fb.segment(mid)]:
            out.add(fa(mid) - fb(mid))
    return out


def _shift_assignments(comp, K):
    """Shift vectors on ``comp`` (first label fixed at 0) in which every
    label coincides with an earlier one through a constant in ``K``."""
    frontier = {((comp[0], Fraction(0)),)}
    for _ in range(len(comp) - 1):
        nxt = set()
        for part in frontier:
            have = dict(part)
            for v in comp:
                if v in have:
                    continue
                for u, bu in have.items():
                    for k in K[(u, v)]:
                        grown = dict(have)
                        grown[v] = bu + k
                        nxt.add(tuple(sorted(grown.items())))
        frontier = nxt
    return [dict(p) for p in frontier]


def _loop_envelopes(series, t, rest, shifts):
    G = series.G
    out = []
    for e, idx in ((top(t), 0), (bottom(t), 1)):
        items = [(I, rest[I][idx], shifts[I]) for I in shifts]
        out.append(envelope_edge(e, items, G.length(e)))
    return out


def _lonely_cells(envs):
    return [(j, c) for j, (_, cells) in enumerate(envs) for c in cells if len(c.achievers) < 2]


def _difference_values(envs1, envs2, cells):
    """Values of ``E1 - E2`` at the ends and breakpoints of ``cells``."""
    vals = []
    for j, c in cells:
        f1, f2 = envs1[j][0], envs2[j][0]
        pts = {c.a, c.b} | {x for x in f1.breaks + f2.breaks if c.a < x < c.b}
        vals += [f1(x) - f2(x) for x in pts]
    return vals


LOCAL_EXACT_MAX = 5


def _loop_subset_dependent(series, t, labels):
    """Exact for up to ``LOCAL_EXACT_MAX`` labels: can some subset of at
    least two of them have its minimum attained twice everywhere on loop
    ``t``?

    In such a subset every function coincides with another one on an open
    arc, so the labels split into groups whose internal shifts are fixed by
    coincidence constants.  One group is tested directly.  For two groups
    with envelopes ``E1``, ``E2`` the free offset ``lam`` must satisfy
    ``max(E1 - E2 on cells where E2 is attained once) <= lam <=
    min(E1 - E2 on cells where E1 is attained once)``.  Three or more groups
    only occur with six or more labels; those are reported as possibly
    dependent.
    """
    if len(labels) > LOCAL_EXACT_MAX:
        return True
    rest = _loop_restrictions(series, t, labels)
    K = {}
    for I, J in combinations(labels, 2):
        c = _pair_constants(rest[I][0], rest[J][0]) | _pair_constants(rest[I][1], rest[J][1])
        K[(I, J)] = c
        K[(J, I)] = {-x for x in c}
    options = {}

    def group(comp):
        if comp not in options:
            opts = []
            for sh in _shift_assignments(list(comp), K):
                envs = _loop_envelopes(series, t, rest, sh)
                opts.append((envs, _lonely_cells(envs)))
            options[comp] = opts
        return options[comp]

    for size in range(2, len(labels) + 1):
        for T in combinations(labels, size):
            if any(not lonely for _, lonely in group(T)):
                return True
            for k in range(1, size - 2):
                for tail in combinations(T[1:], k):
                    C1 = (T[0],) + tail
                    C2 = tuple(x for x in T if x not in C1)
                    for e1, b1 in group(C1):
                        for e2, b2 in group(C2):
                            lo = _difference_values(e1, e2, b1)
                            hi = _difference_values(e1, e2, b2)
                            if max(hi) <= min(lo):
                                return True
    return False


def certify_independence(A, series, rules=ALL_RULES):
    return Certifier(A, series, rules).run()


def replay(cert, A, series):
    """Re-derive a certificate; returns ``(ok, message)``.

    The C5 bounds are recomputed from the slope table independently of the
    search, C4 interval contradictions are re-evaluated from those bounds, and
    the remaining steps are reproduced by rerunning the deterministic search.
    """
    A = validate_family(A, series.r, len(A[0]))
    g = series.G.g
    sig = {I: [sum(series.tbl.p[k][i] for i in I) for k in range(g + 1)] for I in A}
    for step in cert.steps:
        if step["rule"] == "C5" and "op" in step:
            k = step["k"]
            counts = {}
            for I in A:
                counts[sig[I][k]] = counts.get(sig[I][k], 0) + 1
            ties = [v for v, c in counts.items() if c >= 2]
            want = max(ties) if step["op"] == "<=" else min(ties)
            if want != step["value"]:
                return False, f"C5 bound at u_{k} does not replay"
        if step["rule"] == "C4" and step.get("contradiction"):
            t = step["loop"]
            D = series.D
            his = [s["value"] for s in cert.steps
                   if s.get("rule") == "C5" and s.get("k") == t - 1 and s["op"] == "<="]
            los = [s["value"] for s in cert.steps
                   if s.get("rule") == "C5" and s.get("k") == t and s["op"] == ">="]
            best = his[0] - los[0] + len(A[0]) * D.loop_degree(t)
            if best != step["delta_bound"] or best >= 2:
                return False, f"C4 contradiction at loop {t} does not replay"
    again = Certifier(A, series, cert.rules).run()
    if json.dumps(again.to_json(), sort_keys=True) != json.dumps(cert.to_json(), sort_keys=True):
        return False, "rerun produced a different trace"
    return True, "ok"


# -- driver --------------------------------------------------------------------

@dataclass
class Verdict:
    kind: str
    certificate: IndependenceCertificate = None
    witness: DependenceWitness = None

    def to_json(self):
        return {"verdict": self.kind,
                "certificate": self.certificate.steps if self.certificate else [],
                "witness": self.witness.to_json() if self.witness else None,
                "profile": ({"sigma": self.certificate.profile}
                            if self.certificate and self.certificate.profile else None)}


def verdict(A, series, rules=ALL_RULES, budget=200):
    cert = certify_independence(A, series, rules)
    if cert.status == "contradiction":
        return Verdict(INDEPENDENT, cert)
    w = search_dependence(A, series, budget)
    if w is not None:
        ok, _ = check_dependence(A, w.b, series)
        if ok:
            return Verdict(DEPENDENT, cert, w)
    return Verdict(UNKNOWN, cert)
