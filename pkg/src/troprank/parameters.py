"""Parameter bookkeeping for the tropical maximal rank problem.

Two coordinate systems are in use: ``(g, r, d, m)`` (genus, rank, degree,
multiplication degree) and ``(r, s, rho, m)`` with ``s = g - d + r`` and
``rho = g - (r+1)s``.  Solving the second relation for ``g`` gives

    g = (r+1)*s + rho,   d = g + r - s.

(Writing ``g = r*s + rho`` instead would contradict the definition of
``rho``; e.g. ``(3, 2, 0, 3)`` must give ``g = 8``.)
"""

from dataclasses import dataclass
from math import comb

INJECTIVE = "Injective"
SURJECTIVE = "Surjective"
BOTH = "Both"


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class ParameterQuadruple:
    r: int
    s: int
    rho: int
    m: int

    def __post_init__(self):
        for name in ("r", "s", "rho", "m"):
            if not isinstance(getattr(self, name), int):
                raise ParameterError(f"{name} must be an integer")
        if self.r < 1:
            raise ParameterError(f"r must be >= 1, got {self.r}")
        if self.s < 1:
            raise ParameterError(f"s must be >= 1, got {self.s}")
        if self.rho < 0:
            raise ParameterError(f"rho must be >= 0, got {self.rho}")
        if self.m < 1:
            raise ParameterError(f"m must be >= 1, got {self.m}")

    @property
    def g(self):
        return (self.r + 1) * self.s + self.rho

    @property
    def d(self):
        return self.g + self.r - self.s

    def as_dict(self):
        return {"r": self.r, "s": self.s, "rho": self.rho, "m": self.m,
                "g": self.g, "d": self.d}

    def __str__(self):
        return f"(r={self.r}, s={self.s}, rho={self.rho}, m={self.m})"


@dataclass(frozen=True)
class RangeClass:
    kind: str
    binom: int
    sections: int

    @property
    def target_size(self):
        return min(self.binom, self.sections)

    @property
    def injective(self):
        return self.binom <= self.sections

    @property
    def surjective(self):
        return self.binom >= self.sections


def from_rsrho(r, s, rho, m):
    return ParameterQuadruple(r, s, rho, m)


def from_grdm(g, r, d, m):
    """Convert ``(g, r, d, m)`` coordinates; requires ``d < g + r`` and
    ``g >= (r+1)(g-d+r)``."""
    s = g - d + r
    rho = g - (r + 1) * s
    if s < 1:
        raise ParameterError(f"d = {d} must be < g + r = {g + r}")
    if rho < 0:
        raise ParameterError(f"g = {g} < (r+1)(g-d+r) = {(r + 1) * s}")
    return ParameterQuadruple(r, s, rho, m)


def classify_range(p):
    binom = comb(p.r + p.m, p.m)
    sections = p.m * p.d - p.g + 1
    if binom == sections:
        kind = BOTH
    elif binom < sections:
        kind = INJECTIVE
    else:
        kind = SURJECTIVE
    return RangeClass(kind, binom, sections)


def target_size(p):
    return classify_range(p).target_size
