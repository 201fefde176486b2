from fractions import Fraction
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from troprank.graph import (BRIDGE, ChainOfLoops, GraphError, GraphPoint, PieceRange, bridge,
                            decompose, default_long_bridges, instantiate_admissible, piece_of,
                            top, verify_admissible, _no_small_relation)
from troprank.parameters import ParameterQuadruple


def test_bottom_lengths_use_primes_above_genus_plus_one():
    G = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3))
    assert [x.denominator for x in G.bottom[1:]] == [5, 7, 11]
    assert all(x.numerator == 1 for x in G.bottom[1:])
    assert G.top[1:] == (4, 4, 4)


def test_instantiated_graph_is_admissible():
    p = ParameterQuadruple(3, 2, 0, 3)
    G = instantiate_admissible(p)
    ok, problems = verify_admissible(G, p)
    assert ok, problems


def test_loop_shorter_than_bottom_violates_clause_one():
    p = ParameterQuadruple(2, 1, 0, 3)
    G = instantiate_admissible(p)
    bad = replace(G, top=(None,) + tuple(G.bottom[1:]))
    ok, problems = verify_admissible(bad, p)
    assert not ok
    assert any(msg.startswith("(i)") for msg in problems)


def test_equal_bottom_lengths_violate_relation_clause():
    p = ParameterQuadruple(2, 1, 0, 3)
    G = instantiate_admissible(p)
    bad = replace(G, bottom=(None,) + (Fraction(1, 5),) * 3)
    ok, problems = verify_admissible(bad, p)
    assert not ok
    assert any(msg.startswith("(iii)") for msg in problems)


def test_short_bridges_violate_scale_clauses():
    p = ParameterQuadruple(2, 1, 0, 3)
    G = instantiate_admissible(p)
    bad = replace(G, bridges=(Fraction(1),) * 4)
    ok, problems = verify_admissible(bad, p)
    assert any(msg.startswith("(ii)") for msg in problems)
    assert any(msg.startswith("(iv)") for msg in problems)


def test_genus_mismatch_reported():
    G = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3))
    ok, problems = verify_admissible(G, ParameterQuadruple(3, 1, 0, 3))
    assert not ok and "genus mismatch" in problems[0]


def test_relation_check_small_examples():
    assert not _no_small_relation([Fraction(1, 2), Fraction(1, 3), Fraction(5, 6)], 2)
    assert _no_small_relation([Fraction(1, 7), Fraction(1, 11)], 3)
    # 3 * (1/2) - 1 * (3/2) = 0 needs coefficient 3
    assert _no_small_relation([Fraction(1, 2), Fraction(3, 2)], 2)
    assert not _no_small_relation([Fraction(1, 2), Fraction(3, 2)], 3)


def test_decompose_gives_g_plus_two_pieces():
    G = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3))
    pieces = decompose(G)
    assert len(pieces) == G.g + 2
    assert [pc.lo for pc in pieces] == list(range(G.g + 2))


def test_piece_membership_of_named_points():
    G = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3))
    assert piece_of(G, G.midpoint(1)) == 2          # u_1 opens gamma_2
    assert piece_of(G, GraphPoint(bridge(0), Fraction(0))) == 0   # w_0
    assert piece_of(G, GraphPoint(bridge(G.g), G.bridges[G.g])) == G.g + 1
    assert piece_of(G, GraphPoint(top(2), Fraction(1))) == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 3), st.data())
def test_pieces_partition_the_graph(k, data):
    G = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3))
    e = data.draw(st.sampled_from(G.edges()))
    off = data.draw(st.fractions(0, 1)) * G.length(e)
    pt = GraphPoint(e, off)
    hits = [pc for pc in decompose(G) if piece_of(G, pt) in pc]
    assert len(hits) == 1


def test_piece_range_validation():
    with pytest.raises(GraphError):
        PieceRange(3, 1)
    assert 2 in PieceRange(1, 3) and 4 not in PieceRange(1, 3)


def test_rank4_interior_override_accepted():
    p = ParameterQuadruple(4, 3, 1, 3)
    G = instantiate_admissible(p, {3, 6, 10, 13})
    ok, problems = verify_admissible(G, p)
    assert ok, problems
    assert G.blocks() == [(3, 6), (6, 10), (10, 13)]


def test_default_long_bridges_are_column_boundaries():
    assert default_long_bridges(ParameterQuadruple(3, 2, 0, 3)) == {0, 2, 4, 6, 8}


def test_out_of_range_long_bridge_rejected():
    with pytest.raises(GraphError):
        instantiate_admissible(ParameterQuadruple(2, 1, 0, 3), {7})


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 4))
def test_admissible_up_to_genus_forty(r, s, rho):
    p = ParameterQuadruple(r, s, rho, 3)
    if p.g > 40:
        return
    ok, problems = verify_admissible(instantiate_admissible(p), p)
    assert ok, problems


def test_json_roundtrip():
    G = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3))
    assert ChainOfLoops.from_json(G.to_json()) == G


def test_json_rejects_wrong_counts():
    data = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3)).to_json()
    data["bridge"] = data["bridge"][:-1]
    with pytest.raises(GraphError):
        ChainOfLoops.from_json(data)
    data = {"top": ["4"], "bottom": ["x"], "bridge": ["1", "1"]}
    with pytest.raises(GraphError):
        ChainOfLoops.from_json(data)


def test_vertices_have_one_identity():
    G = instantiate_admissible(ParameterQuadruple(2, 1, 0, 3))
    a = GraphPoint(bridge(1), Fraction(0))
    b = GraphPoint(top(1), G.top[1])
    assert a.key(G) == b.key(G) == ("w", 1)
    assert a.edge[0] == BRIDGE
