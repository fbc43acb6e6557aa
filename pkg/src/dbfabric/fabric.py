"""Device, port and link model plus builders for the compared topologies.

Device naming:
    ``tor:<id>``     ToR switch (``<id>`` is the label string for De Bruijn
                     fabrics, the rack index otherwise)
    ``spine:<j>``    spine switch (Leaf-Spine only)
    ``host:<t>.<i>`` host i in rack t; ``vsw:<t>.<i>`` its vSwitch;
    ``vm:<t>.<i>``   the single VM on that host

Port layout:
    ToR    ports 0..hosts_per_tor-1 face hosts, uplinks follow
    vSwitch port 0 faces the ToR, port 1 the VM
    VM     port 0
"""
from __future__ import annotations

import enum
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Optional

from .errors import ConfigurationError, GenerationFailureError
from .labels import FORWARD, REVERSE, Label, all_labels, neighbor

GBPS = 1_000_000_000
DEFAULT_HOST_LINK_BPS = 1 * GBPS
DEFAULT_UPLINK_BPS = 10 * GBPS

VSW_UPLINK_PORT = 0
VSW_VM_PORT = 1
VM_PORT = 0


class TopologyKind(str, enum.Enum):
    DEBRUIJN = "debruijn"
    LEAF_SPINE = "leaf_spine"
    RANDOM = "random"


class DeviceKind(str, enum.Enum):
    VM = "vm"
    HOST = "host"
    VSWITCH = "vswitch"
    TOR = "tor"
    SPINE = "spine"


class LinkKind(str, enum.Enum):
    VIRTUAL = "virtual"    # VM <-> vSwitch
    ACCESS = "access"      # vSwitch (host NIC) <-> ToR
    UPLINK = "uplink"      # switch <-> switch


@dataclass(frozen=True)
class Device:
    name: str
    kind: DeviceKind
    rack: Optional[int] = None
    host: Optional[int] = None
    mac: Optional[str] = None
    ip: Optional[int] = None
    label: Optional[Label] = None


@dataclass(frozen=True)
class Link:
    a: str
    a_port: int
    b: str
    b_port: int
    capacity_bps: float
    kind: LinkKind


@dataclass(frozen=True)
class Host:
    """Everything the controller knows about one host and its VM."""
    id: int
    rack: int
    index: int
    name: str
    vswitch: str
    vm: str
    tor: str
    tor_port: int


@dataclass
class PortMap:
    """Per-ToR host ports and keyed uplink ports.

    Uplink keys are ``(GraphDirection, digit)`` on De Bruijn fabrics (value
    ``None`` for a self-loop edge, which has no cable), the spine index on
    Leaf-Spine fabrics and the link index on random fabrics.
    """
    host_ports: dict[str, list[int]] = field(default_factory=dict)
    uplinks: dict[str, dict[Hashable, Optional[int]]] = field(default_factory=dict)

    def port(self, tor: str, key: Hashable) -> Optional[int]:
        return self.uplinks[tor][key]


def mac_for(rack: int, index: int) -> str:
    return "02:00:%02x:%02x:%02x:%02x" % (rack >> 8 & 0xFF, rack & 0xFF, index >> 8 & 0xFF, index & 0xFF)


def ip_for(rack: int, index: int) -> int:
    # 10.0.0.0/8, rack in the middle 16 bits
    return (10 << 24) | (rack << 8) | index


def format_ip(value: int) -> str:
    return ".".join(str(value >> s & 0xFF) for s in (24, 16, 8, 0))


def parse_ip(text: str) -> int:
    parts = [int(p) for p in text.split(".")]
    if len(parts) != 4 or any(not 0 <= p <= 255 for p in parts):
        raise ValueError(f"bad IPv4 address {text!r}")
    return parts[0] << 24 | parts[1] << 16 | parts[2] << 8 | parts[3]


def bits_per_digit(d: int) -> int:
    return (d - 1).bit_length()


class Fabric:
    """A built network. Treat as read-only once a builder returns it."""

    def __init__(self, kind: TopologyKind, *, hosts_per_tor: int, host_link_bps: float,
                 uplink_bps: float, d: Optional[int] = None, m: Optional[int] = None,
                 seed: Optional[int] = None):
        self.kind = kind
        self.hosts_per_tor = hosts_per_tor
        self.host_link_bps = float(host_link_bps)
        self.uplink_bps = float(uplink_bps)
        self.d = d
        self.m = m
        self.seed = seed
        self.devices: dict[str, Device] = {}
        self.links: list[Link] = []
        self.ports: dict[str, dict[int, tuple[str, int]]] = {}
        self.channels: dict[tuple[str, str], float] = {}
        self.tors: list[str] = []
        self.spines: list[str] = []
        self.hosts: list[Host] = []
        self.tor_by_label: dict[Label, str] = {}
        self.port_map = PortMap()
        self._channel_index: Optional[dict[tuple[str, str], int]] = None

    # -- construction helpers -------------------------------------------------

    def _add_device(self, dev: Device) -> None:
        if dev.name in self.devices:
            raise ConfigurationError(f"duplicate device {dev.name}")
        self.devices[dev.name] = dev
        self.ports[dev.name] = {}

    def _connect(self, a: str, a_port: int, b: str, b_port: int, capacity: float, kind: LinkKind) -> Link:
        if a_port in self.ports[a] or b_port in self.ports[b]:
            raise ConfigurationError(f"port already in use connecting {a}:{a_port} <-> {b}:{b_port}")
        if (a, b) in self.channels:
            raise ConfigurationError(f"parallel link between {a} and {b}")
        link = Link(a, a_port, b, b_port, capacity, kind)
        self.links.append(link)
        self.ports[a][a_port] = (b, b_port)
        self.ports[b][b_port] = (a, a_port)
        self.channels[(a, b)] = capacity
        self.channels[(b, a)] = capacity
        return link

    def _add_tor(self, name: str, rack: int, label: Optional[Label] = None) -> None:
        self._add_device(Device(name, DeviceKind.TOR, rack=rack, label=label))
        self.tors.append(name)
        if label is not None:
            self.tor_by_label[label] = name
        ports = []
        for i in range(self.hosts_per_tor):
            host = f"host:{rack}.{i}"
            vsw = f"vsw:{rack}.{i}"
            vm = f"vm:{rack}.{i}"
            mac, ip = mac_for(rack, i), ip_for(rack, i)
            self._add_device(Device(host, DeviceKind.HOST, rack=rack, host=i, mac=mac, ip=ip))
            self._add_device(Device(vsw, DeviceKind.VSWITCH, rack=rack, host=i))
            self._add_device(Device(vm, DeviceKind.VM, rack=rack, host=i, mac=mac, ip=ip))
            self._connect(vm, VM_PORT, vsw, VSW_VM_PORT, self.host_link_bps, LinkKind.VIRTUAL)
            self._connect(vsw, VSW_UPLINK_PORT, name, i, self.host_link_bps, LinkKind.ACCESS)
            self.hosts.append(Host(len(self.hosts), rack, i, host, vsw, vm, name, i))
            ports.append(i)
        self.port_map.host_ports[name] = ports
        self.port_map.uplinks[name] = {}

    def _next_port(self, dev: str) -> int:
        p = self.ports[dev]
        return max(p) + 1 if p else 0

    def _next_uplink_port(self, tor: str) -> int:
        return max(self.hosts_per_tor, self._next_port(tor))

    # -- queries --------------------------------------------------------------

    @property
    def n_tor(self) -> int:
        return len(self.tors)

    def label_of(self, tor: str) -> Label:
        label = self.devices[tor].label
        if label is None:
            raise ConfigurationError(f"{tor} has no De Bruijn label")
        return label

    def peer(self, device: str, port: int) -> tuple[str, int]:
        return self.ports[device][port]

    def port_toward(self, device: str, neighbor_device: str) -> int:
        for port, (peer, _) in self.ports[device].items():
            if peer == neighbor_device:
                return port
        raise KeyError(f"{device} has no link to {neighbor_device}")

    def vm_by_mac(self) -> dict[str, Host]:
        return {self.devices[h.vm].mac: h for h in self.hosts}

    def host_of_vm(self, vm: str) -> Host:
        dev = self.devices.get(vm)
        if dev is None or dev.kind is not DeviceKind.VM:
            raise KeyError(vm)
        return self.hosts[dev.rack * self.hosts_per_tor + dev.host]

    def switches(self) -> list[str]:
        return self.tors + self.spines

    def switch_graph(self) -> dict[str, list[str]]:
        """Undirected inter-switch adjacency (physical links only), neighbors sorted."""
        adj: dict[str, list[str]] = {s: [] for s in self.switches()}
        for link in self.links:
            if link.kind is LinkKind.UPLINK:
                adj[link.a].append(link.b)
                adj[link.b].append(link.a)
        for nbrs in adj.values():
            nbrs.sort()
        return adj

    @property
    def channel_index(self) -> dict[tuple[str, str], int]:
        if self._channel_index is None:
            self._channel_index = {ch: i for i, ch in enumerate(self.channels)}
        return self._channel_index

    def channel_capacities(self) -> list[float]:
        return list(self.channels.values())

    # -- export ---------------------------------------------------------------

    def to_dict(self) -> dict:
        devices = []
        for dev in self.devices.values():
            rec = {"name": dev.name, "kind": dev.kind.value}
            if dev.rack is not None:
                rec["rack"] = dev.rack
            if dev.host is not None:
                rec["host"] = dev.host
            if dev.mac is not None:
                rec["mac"] = dev.mac
                rec["ip"] = format_ip(dev.ip)
            if dev.label is not None:
                rec["label"] = str(dev.label)
            devices.append(rec)
        links = [{"a": l.a, "a_port": l.a_port, "b": l.b, "b_port": l.b_port,
                  "capacity_bps": l.capacity_bps, "kind": l.kind.value} for l in self.links]
        doc = {
            "topology": self.kind.value,
            "params": {"n_tor": self.n_tor, "n_spine": len(self.spines),
                       "hosts_per_tor": self.hosts_per_tor,
                       "host_link_bps": self.host_link_bps, "uplink_bps": self.uplink_bps,
                       "d": self.d, "m": self.m, "seed": self.seed},
            "devices": devices,
            "links": links,
            "labels": {tor: str(self.devices[tor].label) for tor in self.tors
                       if self.devices[tor].label is not None},
        }
        return doc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _check_common(hosts_per_tor: int, host_link_bps: float, uplink_bps: float) -> None:
    if hosts_per_tor < 0 or hosts_per_tor > 255:
        raise ConfigurationError(f"hosts_per_tor must be in 0..255, got {hosts_per_tor}")
    if host_link_bps <= 0 or uplink_bps <= 0:
        raise ConfigurationError("link capacities must be positive")


def build_debruijn_fabric(d: int, m: int, hosts_per_tor: int = 40,
                          host_link_bps: float = DEFAULT_HOST_LINK_BPS,
                          uplink_bps: float = DEFAULT_UPLINK_BPS) -> Fabric:
    """Flat fabric of d**m ToRs wired along both embedded De Bruijn graphs.

    Each unordered neighbor pair gets one full-duplex link; when both a
    forward and a reverse edge join the same pair, both port keys alias it.
    Self-loop edges get no link.
    """
    if d < 2 or m < 1:
        raise ConfigurationError(f"need d >= 2 and m >= 1, got d={d}, m={m}")
    if m * bits_per_digit(d) + 1 > 32:
        raise ConfigurationError(f"locator for d={d}, m={m} does not fit in 32 bits")
    _check_common(hosts_per_tor, host_link_bps, uplink_bps)
    n = d ** m
    if n > 65536:
        raise ConfigurationError(f"{n} ToRs exceeds the 65536 rack address space")
    fab = Fabric(TopologyKind.DEBRUIJN, hosts_per_tor=hosts_per_tor, host_link_bps=host_link_bps,
                 uplink_bps=uplink_bps, d=d, m=m)
    labels = list(all_labels(d, m))
    for rack, label in enumerate(labels):
        fab._add_tor(f"tor:{label}", rack, label)

    keys = [(FORWARD, x) for x in range(d)] + [(REVERSE, x) for x in range(d)]
    for label in labels:
        u = fab.tor_by_label[label]
        uplinks = fab.port_map.uplinks[u]
        for direction, digit in keys:
            v = fab.tor_by_label[neighbor(label, digit, direction)]
            if v == u:
                uplinks[(direction, digit)] = None
                continue
            if (u, v) not in fab.channels:
                fab._connect(u, fab._next_uplink_port(u), v, fab._next_uplink_port(v),
                             uplink_bps, LinkKind.UPLINK)
            uplinks[(direction, digit)] = fab.port_toward(u, v)
    return fab


def build_leaf_spine(n_leaf: int, n_spine: int, hosts_per_tor: int = 40,
                     host_link_bps: float = DEFAULT_HOST_LINK_BPS,
                     uplink_bps: float = DEFAULT_UPLINK_BPS) -> Fabric:
    if n_leaf < 1 or n_spine < 1:
        raise ConfigurationError(f"need n_leaf >= 1 and n_spine >= 1, got {n_leaf}, {n_spine}")
    if n_leaf > 65536:
        raise ConfigurationError("too many leaves")
    _check_common(hosts_per_tor, host_link_bps, uplink_bps)
    fab = Fabric(TopologyKind.LEAF_SPINE, hosts_per_tor=hosts_per_tor,
                 host_link_bps=host_link_bps, uplink_bps=uplink_bps)
    for i in range(n_leaf):
        fab._add_tor(f"tor:{i}", i)
    for j in range(n_spine):
        name = f"spine:{j}"
        fab._add_device(Device(name, DeviceKind.SPINE, rack=None))
        fab.spines.append(name)
    for i, leaf in enumerate(fab.tors):
        for j, spine in enumerate(fab.spines):
            port = hosts_per_tor + j
            fab._connect(leaf, port, spine, i, uplink_bps, LinkKind.UPLINK)
            fab.port_map.uplinks[leaf][j] = port
    return fab


MAX_RANDOM_RETRIES = 1000


def _is_connected(n: int, edges) -> bool:
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    queue = deque([0])
    while queue:
        for w in adj[queue.popleft()]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == n


def random_regular_edges(n: int, k: int, seed: int, max_retries: int = MAX_RANDOM_RETRIES) -> list[tuple[int, int]]:
    """Simple connected k-regular graph by configuration-model pairing.

    Each attempt shuffles the n*k stubs with its own sub-seed and pairs
    them in order; attempts with self-loops, parallel edges or more than
    one component are rejected.
    """
    if n < 2 or (n * k) % 2:
        raise ConfigurationError(f"need n >= 2 and n*k even, got n={n}, k={k}")
    if not 1 <= k < n:
        raise ConfigurationError(f"a simple {k}-regular graph on {n} vertices needs 1 <= k < n")
    for attempt in range(max_retries):
        rng = random.Random(f"random-flat:{seed}:{attempt}")
        stubs = [v for v in range(n) for _ in range(k)]
        rng.shuffle(stubs)
        edges = set()
        ok = True
        for a, b in zip(stubs[::2], stubs[1::2]):
            if a == b:
                ok = False
                break
            e = (a, b) if a < b else (b, a)
            if e in edges:
                ok = False
                break
            edges.add(e)
        if ok and _is_connected(n, edges):
            return sorted(edges)
    raise GenerationFailureError(
        f"no simple connected {k}-regular graph on {n} nodes after {max_retries} attempts", seed)


def build_random_flat(n_tor: int, uplinks_per_tor: int = 4, hosts_per_tor: int = 40, seed: int = 0,
                      host_link_bps: float = DEFAULT_HOST_LINK_BPS,
                      uplink_bps: float = DEFAULT_UPLINK_BPS) -> Fabric:
    _check_common(hosts_per_tor, host_link_bps, uplink_bps)
    if n_tor > 65536:
        raise ConfigurationError("too many ToRs")
    edges = random_regular_edges(n_tor, uplinks_per_tor, seed)
    fab = Fabric(TopologyKind.RANDOM, hosts_per_tor=hosts_per_tor, host_link_bps=host_link_bps,
                 uplink_bps=uplink_bps, seed=seed)
    for i in range(n_tor):
        fab._add_tor(f"tor:{i}", i)
    for a, b in edges:
        ta, tb = fab.tors[a], fab.tors[b]
        pa, pb = fab._next_uplink_port(ta), fab._next_uplink_port(tb)
        fab._connect(ta, pa, tb, pb, uplink_bps, LinkKind.UPLINK)
        fab.port_map.uplinks[ta][len(fab.port_map.uplinks[ta])] = pa
        fab.port_map.uplinks[tb][len(fab.port_map.uplinks[tb])] = pb
    return fab
