"""Compile routing into prioritized match-action entries.

Locator layout (b = ceil(log2 d) bits per digit, right-aligned)::

    bit m*b        direction discriminator (0 forward, 1 reverse)
    bits m*b-1..0  label digits, one b-bit field per digit

A forward locator stores the label as written, so a label *prefix* is an
IPv4 prefix. A reverse locator stores the digits reversed, so a label
*suffix* (what the right-shift graph extends) is an IPv4 prefix instead.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import ConfigurationError, InvalidDigitError, MisplacementError, UnknownDestinationError
from .fabric import VSW_UPLINK_PORT, VSW_VM_PORT, DeviceKind, Fabric, TopologyKind, bits_per_digit, format_ip
from .labels import FORWARD, GraphDirection, Label

log = logging.getLogger(__name__)

IDENT_PRIORITY = 10000
RESTORE_PRIORITY = IDENT_PRIORITY + 1


@dataclass(frozen=True)
class LocatorAddress:
    ipv4: int
    mask_len: int

    def __post_init__(self):
        if not 0 <= self.mask_len <= 32:
            raise ValueError(f"mask length {self.mask_len} out of range")
        if self.ipv4 & ~self.netmask & 0xFFFFFFFF:
            raise ValueError(f"{format_ip(self.ipv4)} has bits outside /{self.mask_len}")

    @property
    def netmask(self) -> int:
        return (0xFFFFFFFF << (32 - self.mask_len)) & 0xFFFFFFFF

    def matches(self, ip: int) -> bool:
        return (ip & self.netmask) == self.ipv4

    def __str__(self) -> str:
        return f"{format_ip(self.ipv4)}/{self.mask_len}"


class ActionKind(str, enum.Enum):
    OUTPUT = "output"
    REWRITE_OUTPUT = "rewrite"
    CONTROLLER = "controller"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    port: Optional[int] = None
    ip: Optional[int] = None

    def __str__(self) -> str:
        if self.kind is ActionKind.OUTPUT:
            return f"output:{self.port}"
        if self.kind is ActionKind.REWRITE_OUTPUT:
            return f"rewrite:{format_ip(self.ip)},output:{self.port}"
        return "controller"


def output(port: int) -> Action:
    return Action(ActionKind.OUTPUT, port=port)


def rewrite_output(ip: int, port: int) -> Action:
    return Action(ActionKind.REWRITE_OUTPUT, port=port, ip=ip)


SEND_TO_CONTROLLER = Action(ActionKind.CONTROLLER)


class EntryKind(str, enum.Enum):
    DEBRUIJN = "debruijn"
    IDENTIFIER = "identifier"
    REWRITE = "rewrite"      # source vSwitch: VM address -> locator
    RESTORE = "restore"      # destination vSwitch: locator -> VM address


@dataclass(frozen=True)
class FlowEntry:
    priority: int
    action: Action
    match_mac: Optional[str] = None
    match_ip: Optional[LocatorAddress] = None
    kind: EntryKind = EntryKind.DEBRUIJN
    # bookkeeping for De Bruijn entries, not part of the match
    direction: Optional[GraphDirection] = None
    digit: Optional[int] = None

    def __post_init__(self):
        if self.match_mac is None and self.match_ip is None:
            raise ValueError("flow entry needs at least one match field")
        if self.priority < 0:
            raise ValueError("priority must be non-negative")

    def matches(self, dst_mac: str, dst_ip: int) -> bool:
        if self.match_mac is not None and self.match_mac != dst_mac:
            return False
        if self.match_ip is not None and not self.match_ip.matches(dst_ip):
            return False
        return True


@dataclass
class FlowTable:
    """Ordered entry list; lookup semantics live in :mod:`dbfabric.dataplane`."""
    device: str
    entries: list[FlowEntry] = field(default_factory=list)

    def add(self, entry: FlowEntry) -> None:
        self.entries.append(entry)

    def extend(self, entries: Iterable[FlowEntry]) -> None:
        self.entries.extend(entries)

    def remove_mac(self, mac: str, kind: EntryKind) -> int:
        before = len(self.entries)
        self.entries = [e for e in self.entries if not (e.match_mac == mac and e.kind is kind)]
        return before - len(self.entries)

    def find_mac(self, mac: str, kind: EntryKind) -> Optional[FlowEntry]:
        for e in self.entries:
            if e.match_mac == mac and e.kind is kind:
                return e
        return None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def dump(self) -> list[str]:
        return [dump_entry(self.device, e) for e in self.entries]


def dump_entry(device: str, entry: FlowEntry) -> str:
    mac = entry.match_mac or "-"
    ip = str(entry.match_ip) if entry.match_ip is not None else "-"
    return f"table={device} match_mac={mac} match_ip={ip} prio={entry.priority} action={entry.action}"


def encode_locator(digits: Sequence[int], direction: GraphDirection, d: int, m: int) -> LocatorAddress:
    """Locator prefix for a partial label.

    ``digits`` is a label prefix for FORWARD and a label suffix (in label
    order) for REVERSE; unspecified digits are left as zero bits outside
    the mask.
    """
    b = bits_per_digit(d)
    k = len(digits)
    if k > m:
        raise ConfigurationError(f"{k} digits exceed label length {m}")
    if m * b + 1 > 32:
        raise ConfigurationError(f"locator for d={d}, m={m} needs {m * b + 1} bits")
    seq = digits if direction is FORWARD else tuple(reversed(digits))
    value = 0
    for i, x in enumerate(seq):
        if not 0 <= x < d:
            raise InvalidDigitError(x, d)
        value |= x << ((m - 1 - i) * b)
    if direction is not FORWARD:
        value |= 1 << (m * b)
    return LocatorAddress(value, 32 - (m - k) * b)


def locator_for(label: Label, direction: GraphDirection) -> LocatorAddress:
    return encode_locator(label.digits, direction, label.d, label.m)


def configure_debruijn_flows(switch_label: Label, direction: GraphDirection, port_map) -> list[FlowEntry]:
    """De Bruijn entries of one ToR for one embedded graph.

    For every matched length ``n`` in 0..m-1 and digit ``x`` the entry
    matches the (n+1)-digit extension of the switch's own length-n suffix
    (prefix, for REVERSE) and outputs on the x-edge port. Extensions that
    are themselves a suffix (prefix) of the switch label are skipped since
    the overlap would already be longer. Priority is the match length.
    """
    d, m, own = switch_label.d, switch_label.m, switch_label.digits
    tor = f"tor:{switch_label}"
    uplinks = port_map.uplinks[tor]
    entries = []
    for n in range(m):
        if direction is FORWARD:
            base = own[m - n:] if n else ()
            own_part = own[m - n - 1:]
        else:
            base = own[:n]
            own_part = own[:n + 1]
        for x in range(d):
            ext = base + (x,) if direction is FORWARD else (x,) + base
            if ext == own_part:
                continue
            port = uplinks[(direction, x)]
            if port is None:
                raise ConfigurationError(f"{tor}: entry {ext} would target a self-loop")
            entries.append(FlowEntry(n + 1, output(port), match_ip=encode_locator(ext, direction, d, m),
                                     kind=EntryKind.DEBRUIJN, direction=direction, digit=x))
    return entries


def compile_identifier_flows(fabric: Fabric, tor: str, local_vms: Iterable[str]) -> list[FlowEntry]:
    entries = []
    for vm in local_vms:
        try:
            host = fabric.host_of_vm(vm)
        except KeyError:
            raise UnknownDestinationError(f"unknown VM {vm}") from None
        if host.tor != tor:
            raise MisplacementError(f"{vm} is attached to {host.tor}, not {tor}")
        entries.append(FlowEntry(IDENT_PRIORITY, output(host.tor_port),
                                 match_mac=fabric.devices[vm].mac, kind=EntryKind.IDENTIFIER))
    return entries


def compile_vswitch_identifier(fabric: Fabric, vswitch: str) -> FlowEntry:
    """Static delivery entry for the VM behind ``vswitch``."""
    dev = fabric.devices[vswitch]
    vm = fabric.hosts[dev.rack * fabric.hosts_per_tor + dev.host].vm
    return FlowEntry(IDENT_PRIORITY, output(VSW_VM_PORT), match_mac=fabric.devices[vm].mac,
                     kind=EntryKind.IDENTIFIER)


def compile_vswitch_flows(fabric: Fabric, src_vswitch: str, dst_vm: str,
                          direction: GraphDirection = FORWARD) -> list[tuple[str, FlowEntry]]:
    """Reactive vSwitch entries for traffic from ``src_vswitch`` to ``dst_vm``.

    Returns ``(device, entry)`` pairs: the source-side locator rewrite (omitted
    when the destination sits behind the same vSwitch) and the destination-side
    restore of the VM address.
    """
    if fabric.kind is not TopologyKind.DEBRUIJN:
        raise ConfigurationError("vSwitch locator flows need a De Bruijn fabric")
    try:
        dst = fabric.host_of_vm(dst_vm)
    except KeyError:
        raise UnknownDestinationError(f"unknown destination VM {dst_vm}") from None
    if fabric.devices.get(src_vswitch, None) is None or fabric.devices[src_vswitch].kind is not DeviceKind.VSWITCH:
        raise ConfigurationError(f"{src_vswitch} is not a vSwitch")
    vm_dev = fabric.devices[dst_vm]
    out = []
    if src_vswitch != dst.vswitch:
        loc = locator_for(fabric.label_of(dst.tor), direction)
        out.append((src_vswitch, FlowEntry(IDENT_PRIORITY, rewrite_output(loc.ipv4, VSW_UPLINK_PORT),
                                           match_mac=vm_dev.mac, kind=EntryKind.REWRITE,
                                           direction=direction)))
    out.append((dst.vswitch, FlowEntry(RESTORE_PRIORITY, rewrite_output(vm_dev.ip, VSW_VM_PORT),
                                       match_mac=vm_dev.mac, kind=EntryKind.RESTORE)))
    return out


def compile_tables(fabric: Fabric, directions: Sequence[GraphDirection] = (FORWARD, GraphDirection.REVERSE)
                   ) -> dict[str, FlowTable]:
    """Proactive state: De Bruijn and identifier entries on every ToR, identifier entries on every vSwitch."""
    if fabric.kind is not TopologyKind.DEBRUIJN:
        raise ConfigurationError("table compilation needs a De Bruijn fabric")
    tables: dict[str, FlowTable] = {}
    by_tor: dict[str, list[str]] = {t: [] for t in fabric.tors}
    for h in fabric.hosts:
        by_tor[h.tor].append(h.vm)
    for tor in fabric.tors:
        table = FlowTable(tor)
        label = fabric.label_of(tor)
        for direction in directions:
            table.extend(configure_debruijn_flows(label, direction, fabric.port_map))
        table.extend(compile_identifier_flows(fabric, tor, by_tor[tor]))
        tables[tor] = table
    for h in fabric.hosts:
        tables[h.vswitch] = FlowTable(h.vswitch, [compile_vswitch_identifier(fabric, h.vswitch)])
    return tables
