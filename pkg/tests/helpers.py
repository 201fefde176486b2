"""Shared sampling for the envelope property checks."""

import random
from fractions import Fraction

from troprank.plfun import achievers_at, delta_vector, divisor_add, divisor_of, lower_envelope
from troprank.graph import GraphPoint, bottom, top

SAMPLE_CASES = [("canonical", {"m": 3}), ("canonical", {"m": 2}), ("rank3", {"rho": 1}),
                ("example", {}), ("canonical", {"m": 3, "g": 5})]


def random_shifts(rng, labels, G, fns=None):
    """Random shifts; with ``fns`` they are centred so that every function
    takes nearly the same value at a random point, which spreads the
    achievers across the graph."""
    unit = G.top[1]
    if fns is None:
        return {I: G.bridges[0] * Fraction(rng.randrange(-4000, 4000), 1000) for I in labels}
    e = rng.choice(G.edges())
    pt = GraphPoint(e, G.length(e) * Fraction(rng.randrange(1, 1000), 1000))
    return {I: -fns[I](pt) + unit * Fraction(rng.randrange(-2000, 2000), 100) for I in labels}


def loop_achievers(cells, t):
    out = set()
    for c in cells:
        if c.edge in (top(t), bottom(t)):
            out |= c.achievers
    return out


def envelope_facts(series, A, shifts, m):
    """Checks on one shifted family; returns a list of violated properties."""
    G, D = series.G, series.D
    fns = {I: series.psi_I(I) for I in A}
    theta, cells = lower_envelope(fns, shifts, G)
    bad = []
    sigma, delta = delta_vector(theta, D, G, m)
    if sum(delta) != m * D.degree:
        bad.append("sum of delta != md")
    Delta = divisor_add(D.divisor(G), divisor_of(theta, G), coeffs=[m, 1])
    if any(v < 0 for v in Delta.values()):
        bad.append("theta not in R(mD)")
    for t in range(1, G.g + 1):
        for I in loop_achievers(cells, t):
            f = fns[I]
            if f.sigma(G, t - 1) > sigma[t - 1] or f.sigma(G, t) < sigma[t]:
                bad.append(f"achiever {I} on loop {t} not permissible")
    for c in cells[::7]:
        mid = (c.a + c.b) / 2
        pt = GraphPoint(c.edge, mid)
        val = theta(pt)
        vals = {I: f(pt) + shifts[I] for I, f in fns.items()}
        if any(v < val for v in vals.values()):
            bad.append("envelope above a function")
        if {I for I, v in vals.items() if v == val} != set(achievers_at([c], G, pt)):
            bad.append("achiever set mismatch")
    return bad
