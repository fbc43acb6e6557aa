import networkx as nx
import pytest
from hypothesis import given, strategies as st

from dbfabric.errors import IncompatibleLabelsError, InvalidDigitError
from dbfabric.labels import (FORWARD, REVERSE, Label, all_labels, debruijn_distance, forward_neighbor,
                             longest_overlap, reverse_neighbor)

from conftest import debruijn_digraph, label


@st.composite
def labels(draw, d=None, m=None):
    d = d or draw(st.integers(2, 5))
    m = m or draw(st.integers(1, 6))
    return Label(tuple(draw(st.lists(st.integers(0, d - 1), min_size=m, max_size=m))), d, m)


def test_parse_and_format():
    assert str(Label.parse("3102", 4, 4)) == "3102"
    assert Label.parse("101", 2, 3).value == 5
    assert Label.from_int(5, 2, 3) == label("101")
    with pytest.raises(InvalidDigitError):
        Label.parse("102", 2, 3)
    with pytest.raises(ValueError):
        Label.parse("10", 2, 3)


@pytest.mark.parametrize("src,digit,dst", [("110", 1, "101"), ("111", 0, "110"), ("000", 0, "000")])
def test_forward_neighbor(src, digit, dst):
    assert forward_neighbor(label(src), digit) == label(dst)


@pytest.mark.parametrize("src,digit,dst", [("110", 1, "111"), ("000", 0, "000"), ("101", 0, "010")])
def test_reverse_neighbor(src, digit, dst):
    assert reverse_neighbor(label(src), digit) == label(dst)


@pytest.mark.parametrize("fn", [forward_neighbor, reverse_neighbor])
def test_invalid_digit(fn):
    with pytest.raises(InvalidDigitError):
        fn(label("101"), 2)


def test_longest_overlap_examples():
    assert longest_overlap(label("001"), label("111")) == 1
    assert longest_overlap(label("101"), label("101")) == 3
    assert longest_overlap(label("000"), label("111")) == 0
    with pytest.raises(IncompatibleLabelsError):
        longest_overlap(label("001"), label("0011"))
    with pytest.raises(IncompatibleLabelsError):
        longest_overlap(Label.parse("01", 2, 2), Label.parse("01", 3, 2))


def test_distance_examples(b23_bfs):
    # expected values come from BFS on an independently built digraph
    assert b23_bfs["001"]["111"] == 2
    assert b23_bfs["000"]["111"] == 3
    assert debruijn_distance(label("001"), label("111"), FORWARD) == 2
    assert debruijn_distance(label("000"), label("111"), FORWARD) == 3
    for text in ("000", "011", "101"):
        assert debruijn_distance(label(text), label(text), FORWARD) == 0
        assert debruijn_distance(label(text), label(text), REVERSE) == 0


@pytest.mark.parametrize("m", [3, 5])
@pytest.mark.parametrize("direction", [FORWARD, REVERSE])
def test_distance_matches_bfs(m, direction):
    g = debruijn_digraph(2, m, reverse=direction is REVERSE)
    bfs = dict(nx.all_pairs_shortest_path_length(g))
    for u in all_labels(2, m):
        for v in all_labels(2, m):
            assert debruijn_distance(u, v, direction) == bfs[str(u)][str(v)]


@given(labels(), st.data())
def test_reverse_undoes_forward(u, data):
    x = data.draw(st.integers(0, u.d - 1))
    assert reverse_neighbor(forward_neighbor(u, x), u.digits[0]) == u
    assert forward_neighbor(reverse_neighbor(u, x), u.digits[-1]) == u


@given(labels())
def test_out_degree_is_d(u):
    assert len({forward_neighbor(u, x) for x in range(u.d)}) == u.d
    assert len({reverse_neighbor(u, x) for x in range(u.d)}) == u.d


@given(st.data())
def test_distance_bounds(data):
    u = data.draw(labels())
    v = data.draw(labels(d=u.d, m=u.m))
    for direction in (FORWARD, REVERSE):
        dist = debruijn_distance(u, v, direction)
        assert 0 <= dist <= u.m
        assert (dist == 0) == (u == v)
