"""Flow-level throughput evaluation with max-min fair sharing.

One long-lived connection per host toward a uniformly chosen other host;
each connection is pinned to a channel walk by the scheme's routing and
receives its max-min fair rate over all directed channels it crosses.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import ConfigurationError, MalformedInputError
from .fabric import (DEFAULT_HOST_LINK_BPS, DEFAULT_UPLINK_BPS, Fabric, TopologyKind, build_debruijn_fabric,
                     build_leaf_spine, build_random_flat)
from .routing import DEFAULT_MAX_PATHS, best_route, ecmp_paths, ecmp_select

LS_ECMP = "LS/ECMP"
RANDOM_ECMP = "Random/ECMP"
DB_ROUTING = "DB/DBRouting"
DB_ECMP = "DB/ECMP"
SCHEMES = (LS_ECMP, RANDOM_ECMP, DB_ROUTING, DB_ECMP)

SCHEME_TOPOLOGY = {
    LS_ECMP: TopologyKind.LEAF_SPINE,
    RANDOM_ECMP: TopologyKind.RANDOM,
    DB_ROUTING: TopologyKind.DEBRUIJN,
    DB_ECMP: TopologyKind.DEBRUIJN,
}

CSV_FIELDS = ["topology", "routing", "n_tor", "hosts_per_tor", "seed", "conn_id", "src_host",
              "dst_host", "inter_rack", "path_len", "rate_bps"]


@dataclass
class Connection:
    id: int
    src_host: int
    dst_host: int
    switch_path: tuple = ()
    channels: list[int] = field(default_factory=list)
    rate: float = 0.0

    @property
    def path_len(self) -> int:
        return max(len(self.switch_path) - 1, 0)


@dataclass
class Allocation:
    rates: np.ndarray
    loads: np.ndarray          # per fabric channel
    capacities: np.ndarray


@dataclass
class Metrics:
    topology: str
    routing: str
    n_tor: int
    hosts_per_tor: int
    seed: int
    n_connections: int
    mean_bps: float
    p5_bps: float
    p50_bps: float
    p95_bps: float
    min_bps: float
    max_bps: float
    mean_path_len: float
    max_path_len: int
    inter_rack_fraction: float

    def to_dict(self) -> dict:
        return asdict(self)


def generate_traffic(fabric: Fabric, seed: int) -> list[Connection]:
    n = len(fabric.hosts)
    if n < 2:
        raise ConfigurationError("need at least two hosts")
    rng = random.Random(f"traffic:{seed}")
    conns = []
    for h in range(n):
        r = rng.randrange(n - 1)
        conns.append(Connection(h, h, r + 1 if r >= h else r))
    return conns


def inter_rack_fraction(fabric: Fabric, connections: Sequence[Connection]) -> float:
    if not connections:
        return 0.0
    hosts = fabric.hosts
    inter = sum(1 for c in connections if hosts[c.src_host].rack != hosts[c.dst_host].rack)
    return inter / len(connections)


def route_connections(fabric: Fabric, scheme: str, connections: Sequence[Connection], seed: int = 0,
                      max_paths: int = DEFAULT_MAX_PATHS, tie_break: str = "forward") -> list[Connection]:
    """Fill in each connection's switch path and directed channel walk (in place)."""
    if scheme not in SCHEME_TOPOLOGY:
        raise ConfigurationError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")
    if SCHEME_TOPOLOGY[scheme] is not fabric.kind:
        raise ConfigurationError(f"scheme {scheme} cannot run on a {fabric.kind.value} fabric")
    index = fabric.channel_index
    hosts = fabric.hosts
    graph = fabric.switch_graph() if scheme != DB_ROUTING else None
    path_cache: dict[tuple[str, str], list[tuple]] = {}
    for conn in connections:
        src, dst = hosts[conn.src_host], hosts[conn.dst_host]
        if src.tor == dst.tor:
            path: tuple = (src.tor,)
        elif scheme == DB_ROUTING:
            route = best_route(fabric.label_of(src.tor), fabric.label_of(dst.tor), tie_break=tie_break,
                               key=conn.id)
            path = tuple(fabric.tor_by_label[l] for l in route.hops)
        else:
            pair = (src.tor, dst.tor)
            if pair not in path_cache:
                path_cache[pair] = ecmp_paths(graph, src.tor, dst.tor, max_paths)
            path = ecmp_select(path_cache[pair], (conn.id, conn.src_host, conn.dst_host), seed).hops
        walk = [(src.vswitch, src.tor)]
        walk.extend(zip(path[:-1], path[1:]))
        walk.append((dst.tor, dst.vswitch))
        conn.switch_path = path
        conn.channels = [index[ch] for ch in walk]
    return list(connections)


def maxmin_allocate(connections: Sequence[Connection], capacities: Sequence[float]) -> Allocation:
    """Max-min fair rates; writes each connection's ``rate`` and returns the allocation."""
    caps = np.asarray(capacities, dtype=np.float64)
    if np.any(~np.isfinite(caps)) or np.any(caps <= 0):
        raise MalformedInputError("channel capacities must be finite and positive")
    lengths = np.fromiter((len(c.channels) for c in connections), dtype=np.int64, count=len(connections))
    if len(connections) and lengths.min() == 0:
        bad = next(c.id for c in connections if not c.channels)
        raise MalformedInputError(f"connection {bad} has an empty channel list")
    flat = np.fromiter((ch for c in connections for ch in c.channels), dtype=np.int64, count=int(lengths.sum()))
    # compact to the channels actually used so the kernel scans fewer of them
    used, local = np.unique(flat, return_inverse=True)
    ptr = np.zeros(len(connections) + 1, dtype=np.int64)
    np.cumsum(lengths, out=ptr[1:])
    rates = kernels.maxmin_fill(ptr, np.ascontiguousarray(local, dtype=np.int64),
                                np.ascontiguousarray(caps[used]))
    rates = np.asarray(rates, dtype=np.float64)
    loads = np.zeros(len(caps), dtype=np.float64)
    for conn, r in zip(connections, rates):
        conn.rate = float(r)
        for ch in conn.channels:
            loads[ch] += r
    return Allocation(rates, loads, caps)


def check_allocation(connections: Sequence[Connection], alloc: Allocation, rel_tol: float = 1e-6) -> list[str]:
    """Feasibility and max-min bottleneck violations; empty list when the allocation is valid."""
    problems = []
    caps, loads = alloc.capacities, alloc.loads
    over = np.nonzero(loads > caps * (1 + rel_tol))[0]
    for ch in over:
        problems.append(f"channel {ch} overloaded: {loads[ch]!r} > {caps[ch]!r}")
    max_rate = np.zeros(len(caps))
    for conn in connections:
        for ch in conn.channels:
            if conn.rate > max_rate[ch]:
                max_rate[ch] = conn.rate
    saturated = loads >= caps * (1 - rel_tol)
    for conn in connections:
        if conn.rate <= 0:
            problems.append(f"connection {conn.id} has non-positive rate {conn.rate!r}")
            continue
        if not any(saturated[ch] and conn.rate >= max_rate[ch] * (1 - rel_tol) for ch in conn.channels):
            problems.append(f"connection {conn.id} has no bottleneck channel")
    return problems


def summarize(alloc: Allocation, fabric: Fabric, connections: Sequence[Connection], scheme: str = "",
              seed: int = 0) -> Metrics:
    rates = np.array([c.rate for c in connections], dtype=np.float64)
    plen = np.array([c.path_len for c in connections], dtype=np.int64)
    return Metrics(
        topology=fabric.kind.value, routing=scheme, n_tor=fabric.n_tor, hosts_per_tor=fabric.hosts_per_tor,
        seed=seed, n_connections=len(connections),
        mean_bps=float(rates.mean()), p5_bps=float(np.percentile(rates, 5)),
        p50_bps=float(np.percentile(rates, 50)), p95_bps=float(np.percentile(rates, 95)),
        min_bps=float(rates.min()), max_bps=float(rates.max()),
        mean_path_len=float(plen.mean()), max_path_len=int(plen.max()),
        inter_rack_fraction=inter_rack_fraction(fabric, connections),
    )


def debruijn_shape(n_tor: int, d: int = 2) -> int:
    """m with d**m == n_tor."""
    m = round(math.log(n_tor, d)) if n_tor > 1 else 0
    if m < 1 or d ** m != n_tor:
        raise ConfigurationError(f"{n_tor} ToRs is not a power of d={d}")
    return m


def build_for_scheme(scheme: str, n_tor: int, seed: int, hosts_per_tor: int = 40, d: int = 2,
                     n_spine: int = 4, uplinks_per_tor: int = 4,
                     host_link_bps: float = DEFAULT_HOST_LINK_BPS,
                     uplink_bps: float = DEFAULT_UPLINK_BPS) -> Fabric:
    kind = SCHEME_TOPOLOGY.get(scheme)
    if kind is None:
        raise ConfigurationError(f"unknown scheme {scheme!r}")
    if kind is TopologyKind.LEAF_SPINE:
        return build_leaf_spine(n_tor, n_spine, hosts_per_tor, host_link_bps, uplink_bps)
    if kind is TopologyKind.RANDOM:
        return build_random_flat(n_tor, uplinks_per_tor, hosts_per_tor, seed, host_link_bps, uplink_bps)
    return build_debruijn_fabric(d, debruijn_shape(n_tor, d), hosts_per_tor, host_link_bps, uplink_bps)


@dataclass
class CellResult:
    metrics: Metrics
    connections: list[Connection]
    allocation: Allocation
    fabric: Fabric


def run_cell(scheme: str, n_tor: int, seed: int, hosts_per_tor: int = 40, d: int = 2, n_spine: int = 4,
             uplinks_per_tor: int = 4, host_link_bps: float = DEFAULT_HOST_LINK_BPS,
             uplink_bps: float = DEFAULT_UPLINK_BPS, max_paths: int = DEFAULT_MAX_PATHS,
             tie_break: str = "forward", fabric: Optional[Fabric] = None) -> CellResult:
    if fabric is None:
        fabric = build_for_scheme(scheme, n_tor, seed, hosts_per_tor, d, n_spine, uplinks_per_tor,
                                  host_link_bps, uplink_bps)
    conns = generate_traffic(fabric, seed)
    route_connections(fabric, scheme, conns, seed, max_paths=max_paths, tie_break=tie_break)
    alloc = maxmin_allocate(conns, fabric.channel_capacities())
    return CellResult(summarize(alloc, fabric, conns, scheme, seed), conns, alloc, fabric)


def csv_rows(result: CellResult) -> list[list]:
    m, hosts = result.metrics, result.fabric.hosts
    return [[m.topology, m.routing, m.n_tor, m.hosts_per_tor, m.seed, c.id, c.src_host, c.dst_host,
             int(hosts[c.src_host].rack != hosts[c.dst_host].rack), c.path_len, repr(c.rate)]
            for c in result.connections]


def write_csv(rows, fh=None, header: bool = True) -> str:
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_FIELDS)
    w.writerows(rows)
    return buf.getvalue() if fh is None else ""
