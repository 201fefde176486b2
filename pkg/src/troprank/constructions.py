"""Case specifications, the three inductive transformations and the library
of explicit cases."""

import json
from dataclasses import dataclass, replace

from .graph import instantiate_admissible
from .parameters import ParameterQuadruple, classify_range
from .plfun import Series
from .series import (Tableau, all_multisets, build_divisor, column_start_bridges, multiset,
                     parse_multiset, slope_table, standard_tableau,
                     tableau_to_path)


class CaseError(ValueError):
    pass


@dataclass(frozen=True)
class CaseSpec:
    name: str
    parameters: ParameterQuadruple
    tableau: Tableau
    A: tuple
    long_bridge_override: frozenset = None
    tag: str = ""
    detail: str = "full"          # "full" or "sketch"
    expected: str = "Independent"
    expensive: bool = False
    size_exception: str = ""

    def __post_init__(self):
        p = self.parameters
        t = self.tableau
        if (t.r, t.s, t.rho) != (p.r, p.s, p.rho):
            raise CaseError(f"{self.name}: tableau shape (r={t.r}, s={t.s}, rho={t.rho})"
                            f" does not match {p}")
        A = tuple(sorted(multiset(*I) for I in self.A))
        if len(set(A)) != len(A):
            raise CaseError(f"{self.name}: duplicate multisets in A")
        for I in A:
            if len(I) != p.m or not all(0 <= i <= p.r for i in I):
                raise CaseError(f"{self.name}: bad multiset {I}")
        object.__setattr__(self, "A", A)
        want = classify_range(p).target_size
        if len(A) != want and not self.size_exception:
            raise CaseError(f"{self.name}: |A| = {len(A)} but target size is {want}")

    @property
    def long_bridges(self):
        if self.long_bridge_override is not None:
            return frozenset(self.long_bridge_override)
        return column_start_bridges(self.tableau)

    def build(self, seed=0, G=None):
        """``(G, series)`` for this case; ``G`` overrides the instantiated graph."""
        if G is None:
            G = instantiate_admissible(self.parameters, self.long_bridges)
        D, tbl = build_divisor(self.tableau, G, seed=seed)
        return G, Series(D, tbl, G)

    def slope_table(self):
        return slope_table(tableau_to_path(self.tableau))

    def sidecar(self):
        return {
            "name": self.name,
            "parameters": self.parameters.as_dict(),
            "A": [list(I) for I in self.A],
            "long_bridges": sorted(self.long_bridge_override)
            if self.long_bridge_override is not None else None,
            "tag": self.tag,
            "detail": self.detail,
            "expected": self.expected,
            "expensive": self.expensive,
        }

    def to_files(self, stem):
        """Write ``stem.tab`` and ``stem.json``."""
        with open(f"{stem}.tab", "w", encoding="utf-8") as fh:
            fh.write(self.tableau.to_text())
        with open(f"{stem}.json", "w", encoding="utf-8") as fh:
            json.dump(self.sidecar(), fh, indent=2)

    @classmethod
    def from_files(cls, tab_path, json_path=None, m=None):
        with open(tab_path, encoding="utf-8") as fh:
            t = Tableau.from_text(fh.read())
        meta = {}
        if json_path:
            with open(json_path, encoding="utf-8") as fh:
                try:
                    meta = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise CaseError(f"{json_path}: {exc}") from exc
        m = m or meta.get("parameters", {}).get("m", 3)
        p = ParameterQuadruple(t.r, t.s, t.rho, m)
        if "A" in meta:
            A = [tuple(I) if not isinstance(I, str) else parse_multiset(I) for I in meta["A"]]
        else:
            A = full_or_empty(p)
        lb = meta.get("long_bridges")
        return cls(meta.get("name", str(tab_path)), p, t, tuple(A),
                   frozenset(lb) if lb is not None else None,
                   tag=meta.get("tag", "user"), expected=meta.get("expected", "Independent"),
                   size_exception="" if "A" not in meta else meta.get("size_exception", ""))


def full_or_empty(p):
    """All multisets when that is the target size, else raise."""
    rc = classify_range(p)
    if rc.injective:
        return all_multisets(p.r, p.m)
    raise CaseError(f"{p} is in the surjective range; an explicit A is required")


# -- inductions -----------------------------------------------------------------

def _check_injective(c):
    if not classify_range(c.parameters).injective:
        raise CaseError(f"{c.name}: {c.parameters} is not in the injective range")


def induct_injective_rho(c):
    """One more loop at the right end whose lattice-path step lingers."""
    _check_injective(c)
    p = c.parameters
    q = ParameterQuadruple(p.r, p.s, p.rho + 1, p.m)
    t = Tableau(c.tableau.columns, c.tableau.omitted | {p.g + 1}).validate()
    lb = c.long_bridge_override
    return CaseSpec(f"{c.name}/rho+", q, t, tuple(all_multisets(p.r, p.m)), lb,
                    tag="induct rho+")


def induct_injective_s(c):
    """Append the row ``g+1 .. g+r+1`` to the bottom of the tableau."""
    _check_injective(c)
    p = c.parameters
    q = ParameterQuadruple(p.r, p.s + 1, p.rho, p.m)
    cols = tuple(col + (p.g + 1 + j,) for j, col in enumerate(c.tableau.columns))
    t = Tableau(cols, c.tableau.omitted).validate()
    return CaseSpec(f"{c.name}/s+", q, t, tuple(all_multisets(p.r, p.m)), None,
                    tag="induct s+")


def added_functions(m, s):
    """The ``(m-1)(s+1) + 1`` multisets containing 0 added when raising r."""
    out = [(0,) * m]
    for k in range(1, m):
        for a in range(1, s + 2):
            out.append(multiset(*((0,) * k + (1,) * (m - 1 - k) + (a,))))
    return out


def induct_surjective_r(c):
    """Shift the tableau by ``s``, prepend the column ``1..s``; shift every
    multiset up by one and add the functions of ``added_functions``."""
    p = c.parameters
    if p.r < p.s:
        raise CaseError(f"{c.name}: raising r needs r >= s (r={p.r}, s={p.s})")
    if not classify_range(p).surjective:
        raise CaseError(f"{c.name}: {p} is not in the surjective range")
    s = p.s
    q = ParameterQuadruple(p.r + 1, s, p.rho, p.m)
    cols = (tuple(range(1, s + 1)),) + tuple(tuple(x + s for x in col)
                                             for col in c.tableau.columns)
    t = Tableau(cols, frozenset(x + s for x in c.tableau.omitted)).validate()
    A = [tuple(i + 1 for i in I) for I in c.A] + added_functions(p.m, s)
    return CaseSpec(f"{c.name}/r+", q, t, tuple(A), None, tag="induct r+")


def separation_on_bridge(c_new, m, s, r_old):
    """Slopes at bridge ``s`` of the added functions in a raised case.

    Returns ``(values, ok)`` with ``ok`` true iff the values are pairwise
    distinct and all exceed ``m * r_old``.
    """
    tbl = c_new.slope_table()
    vals = [sum(tbl.p[s][i] for i in I) for I in added_functions(m, s)]
    ok = len(set(vals)) == len(vals) and min(vals) > m * r_old
    return vals, ok


def derivable_from_smaller(p):
    """Sources of smaller genus from which an induction produces ``p``."""
    out = []
    if p.rho >= 1:
        src = ParameterQuadruple(p.r, p.s, p.rho - 1, p.m)
        if classify_range(src).injective:
            out.append(("rho+", src))
    if p.s >= 2:
        src = ParameterQuadruple(p.r, p.s - 1, p.rho, p.m)
        if classify_range(src).injective:
            out.append(("s+", src))
    if p.r >= 2:
        src = ParameterQuadruple(p.r - 1, p.s, p.rho, p.m)
        if src.r >= src.s and classify_range(src).surjective:
            out.append(("r+", src))
    return out


def mirror_tableau(t):
    """Rotate by 180 degrees: entry ``x`` in column ``j`` goes to
    ``g + 1 - x`` in column ``r + 2 - j``.  This reverses the chain."""
    g = t.g
    cols = tuple(tuple(sorted(g + 1 - x for x in col)) for col in reversed(t.columns))
    return Tableau(cols, frozenset(g + 1 - x for x in t.omitted)).validate()


def mirror_case(c):
    """Reverse the chain and send ``I`` to ``r - I``."""
    p = c.parameters
    lb = None
    if c.long_bridge_override is not None:
        lb = frozenset(p.g - k for k in c.long_bridge_override)
    A = tuple(tuple(p.r - i for i in I) for I in c.A)
    return replace(c, name=f"{c.name}/mirror", tableau=mirror_tableau(c.tableau), A=A,
                   long_bridge_override=lb, tag=c.tag + " mirrored")


# -- explicit sets --------------------------------------------------------------

def canonical_A(m):
    if m < 2:
        raise CaseError("m must be >= 2")
    A = all_multisets(2, 2)
    for k in range(3, m + 1):
        A = [multiset(*I, 1) for I in A]
        A += [(0,) * k, (0,) * (k - 1) + (2,), (0,) + (2,) * (k - 1), (2,) * k]
    return sorted(A)


def canonical_case(m):
    p = ParameterQuadruple(2, 1, 0, m)
    return CaseSpec(f"canonical-m{m}", p, standard_tableau(p), tuple(canonical_A(m)),
                    tag="canonical base g=3")


def canonical_chain(m, g_max):
    """Canonical cases of genus 3..g_max by repeatedly raising r."""
    out = [canonical_case(m)]
    while out[-1].parameters.g < g_max:
        out.append(induct_surjective_r(out[-1]))
    return out


def edge_indices_A(r, m=3):
    """Multisets with at least one index in ``{0, 1, r-1, r}``."""
    keep = {0, 1, r - 1, r}
    return [I for I in all_multisets(r, m) if keep & set(I)]


def full_case(r, s, rho=0, m=3, name=None, tag="", **kw):
    p = ParameterQuadruple(r, s, rho, m)
    t = kw.pop("tableau", None) or standard_tableau(p)
    return CaseSpec(name or f"full-r{r}-s{s}-rho{rho}", p, t, tuple(all_multisets(r, m)),
                    tag=tag, **kw)


def wide_case(r, s):
    if 4 * s < r * r:
        raise CaseError(f"s = {s} < r^2/4 for r = {r}")
    return full_case(r, s, name=f"wide-r{r}-s{s}", tag="s >= r^2/4, full set")


def edge_case(r):
    s = r - 1
    p = ParameterQuadruple(r, s, 0, 3)
    return CaseSpec(f"edge-r{r}", p, standard_tableau(p), tuple(edge_indices_A(r)),
                    tag="s = r-1, indices touching {0,1,r-1,r}")


def rank3_case(rho):
    """Rank 3, s = 1, rho = 0..3."""
    if rho == 0:
        c = canonical_chain(3, 4)[-1]
        return replace(c, name="rank3-rho0", tag="rank 3, s=1, rho=0")
    cols = {1: ((1,), (3,), (4,), (5,)),
            2: ((1,), (3,), (5,), (6,)),
            3: ((1,), (4,), (6,), (7,))}[rho]
    omitted = {1: {2}, 2: {2, 4}, 3: {2, 3, 5}}[rho]
    drop = {1: {(0, 0, 3), (0, 2, 3), (0, 3, 3)}, 2: {(0, 0, 3)}, 3: set()}[rho]
    p = ParameterQuadruple(3, 1, rho, 3)
    A = [I for I in all_multisets(3, 3) if I not in drop]
    return CaseSpec(f"rank3-rho{rho}", p, Tableau(cols, frozenset(omitted)).validate(),
                    tuple(A), tag=f"rank 3, s=1, rho={rho}")


def rank4_block_case():
    """r=4, s=3, rho=1 with a genus-4 middle block."""
    p = ParameterQuadruple(4, 3, 1, 3)
    cols = ((1, 2, 3), (4, 5, 6), (7, 8, 9), (11, 12, 13), (14, 15, 16))
    t = Tableau(cols, frozenset({10})).validate()
    return CaseSpec("rank4-s3-rho1", p, t, tuple(all_multisets(4, 3)),
                    frozenset({0, 3, 6, 10, 13, 16}), tag="rank 4, s=3, rho=1, moved long bridge")


RANK4_PAIRS = ((1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (1, 7), (1, 8),
               (2, 1), (2, 2), (2, 3), (2, 4), (3, 1))


def lingering_tail_tableau(r, s, rho):
    """Standard tableau followed by ``rho`` lingering steps."""
    p = ParameterQuadruple(r, s, 0, 3)
    t = standard_tableau(p)
    g = p.g
    return Tableau(t.columns, frozenset(range(g + 1, g + rho + 1))).validate()


def rank4_sketch_case(s, rho):
    if s == 1 and rho in (1, 2):
        c = induct_surjective_r(rank3_case(rho))
        return replace(c, name=f"rank4-s{s}-rho{rho}", tag=f"rank 4, s={s}, rho={rho}, raised from rank 3",
                       detail="sketch")
    p = ParameterQuadruple(4, s, rho, 3)
    t = lingering_tail_tableau(4, s, rho)
    rc = classify_range(p)
    if rc.injective:
        A = all_multisets(4, 3)
    else:
        # drop the multisets with the most interior indices until the size fits
        ranked = sorted(all_multisets(4, 3),
                        key=lambda I: (sum(1 for i in I if i in (0, 4)), I), reverse=True)
        A = sorted(ranked[:rc.target_size])
    return CaseSpec(f"rank4-s{s}-rho{rho}", p, t, tuple(A), tag=f"rank 4, s={s}, rho={rho}",
                    detail="sketch")


def rank5_case():
    return full_case(5, 5, name="rank5-s5", tag="rank 5, r=s=5, full set", expensive=True)


def example_case():
    """(3,2,0,3) with the tableau whose columns are {1,3}, {2,4}, {5,6}, {7,8}."""
    p = ParameterQuadruple(3, 2, 0, 3)
    t = Tableau(((1, 3), (2, 4), (5, 6), (7, 8))).validate()
    return CaseSpec("example-3-2-0-3", p, t, tuple(all_multisets(3, 3)),
                    tag="isomorphism range example")


def case_library():
    out = [canonical_case(m) for m in range(2, 7)]
    out += [wide_case(r, s) for r, s in ((2, 1), (3, 3), (4, 4))]
    out += [edge_case(r) for r in (3, 4)]
    out += [rank3_case(rho) for rho in range(4)]
    out.append(rank4_block_case())
    out += [rank4_sketch_case(s, rho) for s, rho in RANK4_PAIRS if (s, rho) != (3, 1)]
    out.append(example_case())
    out.append(rank5_case())
    return out


def library_lookup(name, **params):
    """Resolve a CLI library name plus optional ``m``, ``r``, ``s``, ``rho``."""
    m = params.get("m")
    r = params.get("r")
    s = params.get("s")
    rho = params.get("rho")
    if name == "canonical":
        g = params.get("g") or 3
        return canonical_chain(m or 3, g)[-1]
    if name == "wide":
        if r is None or s is None:
            raise CaseError("wide needs --r and --s")
        return wide_case(r, s)
    if name == "edge":
        if r is None:
            raise CaseError("edge needs --r")
        return edge_case(r)
    if name == "rank3":
        return rank3_case(rho or 0)
    if name == "rank4":
        s = s or 3
        rho = 1 if rho is None else rho
        if (s, rho) == (3, 1):
            return rank4_block_case()
        if (s, rho) not in RANK4_PAIRS:
            raise CaseError(f"rank4 library has no (s, rho) = ({s}, {rho})")
        return rank4_sketch_case(s, rho)
    if name == "rank5":
        return rank5_case()
    if name == "example":
        return example_case()
    for c in case_library():
        if c.name == name:
            return c
    raise CaseError(f"unknown library case {name!r}")
