from math import comb, factorial

import pytest
from hypothesis import given, settings, strategies as st

from troprank.graph import instantiate_admissible
from troprank.parameters import ParameterQuadruple
from troprank.series import (COORD, DOWN, LINGER, LingeringLatticePath, Tableau, TableauError,
                             all_multisets, all_tableaux, build_divisor, column_start_bridges,
                             multiset_str, parse_multiset, path_to_tableau, sigma_of,
                             slope_table, standard_tableau, tableau_to_path)


def hook_count(cols, rows):
    """Standard Young tableaux of a rows x cols rectangle (hook length formula)."""
    n = rows * cols
    hooks = 1
    for i in range(rows):
        for j in range(cols):
            hooks *= (rows - i - 1) + (cols - j - 1) + 1
    return factorial(n) // hooks


SHAPES_UP_TO_8 = [(r, s, rho) for r in range(1, 8) for s in range(1, 5) for rho in range(0, 7)
                  if (r + 1) * s + rho <= 8]


def test_canonical_path_points():
    t = standard_tableau(ParameterQuadruple(2, 1, 0, 3))
    assert tableau_to_path(t).points() == [(2, 1), (3, 1), (3, 2), (2, 1)]


@pytest.mark.parametrize("r,s", [(2, 1), (3, 2), (4, 3), (5, 5)])
def test_standard_tableau_point_after_first_column(r, s):
    pts = tableau_to_path(standard_tableau(ParameterQuadruple(r, s, 0, 3))).points()
    assert pts[s] == (r + s,) + tuple(range(r - 1, 0, -1))


@pytest.mark.parametrize("r,s,rho", SHAPES_UP_TO_8)
def test_roundtrip_every_small_tableau(r, s, rho):
    ts = all_tableaux(r, s, rho)
    assert len(ts) == comb((r + 1) * s + rho, rho) * hook_count(r + 1, s)
    assert len(set(ts)) == len(ts)
    for t in ts:
        path = tableau_to_path(t)
        assert path_to_tableau(path) == t
        assert Tableau.from_text(t.to_text()) == t


def test_text_format_with_comments_and_lingering():
    text = "# a comment\n1 4 5 6\n3 7 8 9   # trailing\nlinger: 2\n"
    t = Tableau.from_text(text)
    assert t.columns == ((1, 3), (4, 7), (5, 8), (6, 9))
    assert t.omitted == {2}
    assert t.to_text() == "1 4 5 6\n3 7 8 9\nlinger: 2\n"


@pytest.mark.parametrize("text,msg", [
    ("1 2\n3 x\n", "line 2"),
    ("1 2 3\n4 5\n", "row 2"),
    ("", "no tableau rows"),
    ("1 2\n4 3\n", "increasing"),
    ("1 2\n3 5\n", "exactly 1..4"),
])
def test_malformed_tableaux(text, msg):
    with pytest.raises(TableauError, match=msg):
        Tableau.from_text(text)


def test_path_leaving_chamber_rejected():
    with pytest.raises(TableauError):
        LingeringLatticePath(2, ((COORD, 2), (DOWN,), (COORD, 1))).validate()


def test_lingering_steps_follow_omitted_numbers():
    t = Tableau(((1,), (3,), (4,), (5,)), frozenset({2}))
    steps = tableau_to_path(t).steps
    assert steps == ((COORD, 1), (LINGER,), (COORD, 2), (COORD, 3), (DOWN,))


@pytest.mark.parametrize("r,s", [(3, 1), (3, 2), (4, 3), (5, 5)])
def test_slope_sum_at_end_of_first_column(r, s):
    tbl = slope_table(tableau_to_path(standard_tableau(ParameterQuadruple(r, s, 0, 3))))
    assert sigma_of((0, 1, 3), s, tbl) == 3 * r + s - 4
    assert sigma_of((0, 0, 0), 0, tbl) == 3 * r


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SHAPES_UP_TO_8), st.data())
def test_slopes_change_by_one_step(shape, data):
    r, s, rho = shape
    t = data.draw(st.sampled_from(all_tableaux(r, s, rho)))
    path = tableau_to_path(t)
    tbl = slope_table(path)
    assert tbl.p[0] == tbl.p[-1] == tuple(range(r, -1, -1))
    for k, step in enumerate(path.steps, 1):
        diff = [b - a for a, b in zip(tbl.p[k - 1], tbl.p[k])]
        if step[0] == LINGER:
            assert diff == [0] * (r + 1)
        elif step[0] == DOWN:
            assert diff == [-1] * r + [0]
        else:
            assert diff == [int(i == step[1] - 1) for i in range(r + 1)]
        assert all(a > b for a, b in zip(tbl.p[k], tbl.p[k][1:]))


def test_column_start_bridges():
    t = standard_tableau(ParameterQuadruple(3, 2, 0, 3))
    assert column_start_bridges(t) == {0, 2, 4, 6, 8}
    t = Tableau(((1,), (3,), (4,), (5,)), frozenset({2}))
    assert column_start_bridges(t) == {0, 2, 3, 4, 5}


def test_multiset_text():
    assert parse_multiset("013") == (0, 1, 3)
    assert parse_multiset("psi_{3,1,0}") == (0, 1, 3)
    assert multiset_str((0, 1, 3)) == "013"
    assert multiset_str((0, 10, 11)) == "0,10,11"
    assert len(all_multisets(3, 3)) == comb(6, 3)


@pytest.mark.parametrize("r,s,rho", [(2, 1, 0), (3, 2, 0), (3, 1, 2), (4, 3, 1)])
def test_divisor_degrees(r, s, rho):
    p = ParameterQuadruple(r, s, rho, 3)
    t = all_tableaux(r, s, rho)[-1] if p.g <= 8 else \
        Tableau(((1, 2, 3), (4, 5, 6), (7, 8, 9), (11, 12, 13), (14, 15, 16)), frozenset({10}))
    G = instantiate_admissible(p)
    D, tbl = build_divisor(t, G, seed=3)
    assert D.degree == p.d
    assert sum(D.divisor(G).values()) == p.d
    for i in range(r + 1):
        Di = D.rep_divisor(G, i)
        assert sum(Di.values()) == p.d
        assert Di.get(("w", 0), 0) == i
        assert Di.get(("v", p.g + 1), 0) == r - i


def test_divisor_avoids_vertices_and_depends_on_seed_only():
    p = ParameterQuadruple(3, 1, 2, 3)
    t = Tableau(((1,), (3,), (5,), (6,)), frozenset({2, 4}))
    G = instantiate_admissible(p)
    D1, _ = build_divisor(t, G, seed=5)
    D2, _ = build_divisor(t, G, seed=5)
    assert D1 == D2
    for key in D1.divisor(G):
        assert key[0] not in ("v", "w") or key == ("w", 0)
