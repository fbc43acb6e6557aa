from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dbfabric import kernels
from dbfabric.errors import ConfigurationError, MalformedInputError
from dbfabric.fabric import build_debruijn_fabric, build_leaf_spine
from dbfabric.sim import (DB_ECMP, DB_ROUTING, LS_ECMP, RANDOM_ECMP, Connection, check_allocation,
                          generate_traffic, inter_rack_fraction, maxmin_allocate, route_connections, run_cell,
                          summarize)


def exact_maxmin(paths, caps):
    """Rational progressive filling: raise the common level to the tightest
    remaining fair share, freeze everyone on tight channels, repeat."""
    caps = [Fraction(c) for c in caps]
    rate = {}
    level = Fraction(0)
    while len(rate) < len(paths):
        live = [i for i in range(len(paths)) if i not in rate]
        shares = {}
        for c in range(len(caps)):
            users = [i for i in live if c in paths[i]]
            if users:
                used = sum(rate[i] for i in rate if c in paths[i])
                shares[c] = (caps[c] - used) / len(users)
        level = min(shares.values())
        tight = {c for c, s in shares.items() if s == level}
        for i in live:
            if tight & set(paths[i]):
                rate[i] = level
    return [rate[i] for i in range(len(paths))]


def allocate(paths, caps):
    conns = [Connection(i, 0, 1, channels=list(p)) for i, p in enumerate(paths)]
    alloc = maxmin_allocate(conns, caps)
    return conns, alloc


def test_two_share_one_channel():
    _, alloc = allocate([[0], [0]], [10e9])
    assert list(alloc.rates) == [5e9, 5e9]


def test_single_bottleneck():
    _, alloc = allocate([[0, 1, 2, 3]], [1e9, 10e9, 10e9, 1e9])
    assert list(alloc.rates) == [1e9]


def test_three_connections_two_channels():
    # A,B on X (cap 10); B,C on Y (cap 4) -> B = C = 2, A = 8
    paths, caps = [[0], [0, 1], [1]], [10.0, 4.0]
    assert exact_maxmin(paths, caps) == [8, 2, 2]
    conns, alloc = allocate(paths, caps)
    assert list(alloc.rates) == [8.0, 2.0, 2.0]
    assert check_allocation(conns, alloc) == []


def test_malformed_inputs():
    with pytest.raises(MalformedInputError):
        allocate([[0], []], [1.0])
    with pytest.raises(MalformedInputError):
        allocate([[0]], [0.0])


instances = st.integers(1, 6).flatmap(lambda nc: st.tuples(
    st.lists(st.lists(st.integers(0, nc - 1), min_size=1, max_size=nc, unique=True), min_size=1, max_size=12),
    st.lists(st.integers(1, 40), min_size=nc, max_size=nc)))


@settings(max_examples=200, deadline=None)
@given(instances)
def test_matches_exact_oracle(inst):
    paths, caps = inst
    expected = exact_maxmin(paths, caps)
    conns, alloc = allocate(paths, caps)
    for got, want in zip(alloc.rates, expected):
        assert got == pytest.approx(float(want), rel=1e-9)
    assert check_allocation(conns, alloc) == []


@settings(max_examples=100, deadline=None)
@given(instances, st.sampled_from([2.0, 4.0, 0.5]))
def test_scale_free(inst, c):
    paths, caps = inst
    _, base = allocate(paths, caps)
    _, scaled = allocate(paths, [c * x for x in caps])
    assert list(scaled.rates) == [c * r for r in base.rates]


@pytest.mark.skipif(kernels.compiled_maxmin_fill() is None, reason="compiled kernel not built")
@settings(max_examples=100, deadline=None)
@given(instances)
def test_backends_bit_identical(inst):
    paths, caps = inst
    ptr = np.cumsum([0] + [len(p) for p in paths]).astype(np.int64)
    flat = np.array([c for p in paths for c in p], dtype=np.int64)
    cap = np.array(caps, dtype=np.float64) * 1e9 / 7
    a = kernels.compiled_maxmin_fill()(ptr, flat, cap)
    b = kernels.python_maxmin_fill(ptr, flat, cap)
    assert a.tobytes() == b.tobytes()


def test_traffic():
    fab = build_leaf_spine(8, 1, 40)
    conns = generate_traffic(fab, 3)
    assert len(conns) == 320
    assert all(c.src_host == i and c.dst_host != c.src_host for i, c in enumerate(conns))
    assert [c.dst_host for c in conns] == [c.dst_host for c in generate_traffic(fab, 3)]
    assert [c.dst_host for c in conns] != [c.dst_host for c in generate_traffic(fab, 4)]
    assert 0.8 < inter_rack_fraction(fab, conns) < 0.95
    pair = build_leaf_spine(1, 1, 2)
    assert [(c.src_host, c.dst_host) for c in generate_traffic(pair, 0)] == [(0, 1), (1, 0)]


def test_route_db_routing_channels():
    fab = build_debruijn_fabric(2, 3, 1)
    src, dst = fab.hosts[1], fab.hosts[7]          # ToR 001 -> ToR 111
    conn = Connection(0, src.id, dst.id)
    route_connections(fab, DB_ROUTING, [conn])
    names = list(fab.channels)
    walk = [names[c] for c in conn.channels]
    assert walk == [(src.vswitch, "tor:001"), ("tor:001", "tor:011"), ("tor:011", "tor:111"),
                    ("tor:111", dst.vswitch)]
    assert conn.path_len == 2


@pytest.mark.parametrize("scheme,builder", [
    (LS_ECMP, lambda: build_leaf_spine(4, 4, 3)),
    (DB_ROUTING, lambda: build_debruijn_fabric(2, 2, 3)),
    (DB_ECMP, lambda: build_debruijn_fabric(2, 2, 3)),
])
def test_intra_rack_walks(scheme, builder):
    fab = builder()
    conn = Connection(0, 0, 1)
    route_connections(fab, scheme, [conn])
    names = list(fab.channels)
    assert [names[c] for c in conn.channels] == [("vsw:0.0", "tor:0" if scheme == LS_ECMP else "tor:00"),
                                                 (fab.hosts[1].tor, "vsw:0.1")]


def test_leaf_spine_walks_have_two_switch_hops():
    fab = build_leaf_spine(8, 4, 5)
    conns = route_connections(fab, LS_ECMP, generate_traffic(fab, 0))
    for c in conns:
        inter = fab.hosts[c.src_host].rack != fab.hosts[c.dst_host].rack
        assert len(c.channels) == (4 if inter else 2)


def test_scheme_mismatch():
    fab = build_leaf_spine(2, 2, 2)
    with pytest.raises(ConfigurationError):
        route_connections(fab, DB_ROUTING, generate_traffic(fab, 0))
    with pytest.raises(ConfigurationError):
        route_connections(fab, "Torus/DOR", generate_traffic(fab, 0))


def test_summarize_intra_rack_only():
    fab = build_leaf_spine(1, 1, 4)
    res = run_cell(LS_ECMP, 1, 0, hosts_per_tor=4, n_spine=1, fabric=fab)
    assert res.metrics.inter_rack_fraction == 0
    assert res.metrics.max_path_len == 0
    assert res.metrics.mean_bps <= fab.host_link_bps


def test_summarize_path_bound():
    res = run_cell(DB_ROUTING, 8, 11, hosts_per_tor=1)
    assert res.metrics.max_path_len <= 3
    assert res.metrics.mean_bps <= 1e9
    again = summarize(res.allocation, res.fabric, res.connections, DB_ROUTING, 11)
    assert again == res.metrics


def test_leaf_spine_beats_debruijn_at_8():
    for seed in range(3):
        ls = run_cell(LS_ECMP, 8, seed).metrics.mean_bps
        db = run_cell(DB_ROUTING, 8, seed).metrics.mean_bps
        assert db < ls


@pytest.mark.parametrize("scheme", [LS_ECMP, RANDOM_ECMP, DB_ROUTING, DB_ECMP])
def test_cell_deterministic_and_valid(scheme):
    a = run_cell(scheme, 16, 2, hosts_per_tor=10)
    b = run_cell(scheme, 16, 2, hosts_per_tor=10)
    assert a.metrics == b.metrics
    assert a.allocation.rates.tobytes() == b.allocation.rates.tobytes()
    assert check_allocation(a.connections, a.allocation) == []


@pytest.mark.skipif(kernels.compiled_maxmin_fill() is None, reason="compiled kernel not built")
@pytest.mark.parametrize("scheme", [RANDOM_ECMP, DB_ROUTING])
def test_backends_agree_on_real_cell(scheme, monkeypatch):
    monkeypatch.setattr(kernels, "maxmin_fill", kernels.compiled_maxmin_fill())
    a = run_cell(scheme, 32, 1)
    monkeypatch.setattr(kernels, "maxmin_fill", kernels.python_maxmin_fill)
    b = run_cell(scheme, 32, 1)
    assert a.allocation.rates.tobytes() == b.allocation.rates.tobytes()
