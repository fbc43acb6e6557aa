"""Table-driven packet walk through vSwitches and ToRs.

Phases tagged on each hop:
    1  source VM -> source vSwitch (locator rewrite, controller round trip)
    2  ToR to ToR on De Bruijn (IP prefix) entries
    3  destination ToR identifier entry -> vSwitch restore -> VM
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .errors import FabricError, ForwardingLoopError, MisdeliveryError, UnknownDestinationError
from .fabric import DeviceKind, Fabric, Host, format_ip
from .flows import (SEND_TO_CONTROLLER, Action, ActionKind, EntryKind, FlowEntry, FlowTable,
                    compile_vswitch_flows)
from .labels import FORWARD, GraphDirection

log = logging.getLogger(__name__)


@dataclass
class PacketHeaders:
    src_mac: str
    dst_mac: str
    src_ip: int
    dst_ip: int


def lookup_entry(table: FlowTable, headers: PacketHeaders) -> Optional[FlowEntry]:
    """Highest-priority entry whose present match fields all match, or None."""
    best = None
    tied = False
    for e in table.entries:
        if not e.matches(headers.dst_mac, headers.dst_ip):
            continue
        if best is None or e.priority > best.priority:
            best, tied = e, False
        elif e.priority == best.priority:
            tied = True
    if tied:
        log.warning("%s: ambiguous match at priority %d for dst_mac=%s dst_ip=%s; using first inserted",
                    table.device, best.priority, headers.dst_mac, format_ip(headers.dst_ip))
    return best


def lookup(table: FlowTable, headers: PacketHeaders) -> Action:
    entry = lookup_entry(table, headers)
    return SEND_TO_CONTROLLER if entry is None else entry.action


class Controller:
    """Logically centralized controller with the fabric's global view."""

    def __init__(self, fabric: Fabric, tables: dict[str, FlowTable]):
        self.fabric = fabric
        self.tables = tables
        self.by_mac = fabric.vm_by_mac()
        self.mac_by_ip = {fabric.devices[h.vm].ip: fabric.devices[h.vm].mac for h in fabric.hosts}
        self.installs = 0

    def resolve_arp(self, ip: int) -> str:
        """Answer an intercepted ARP request; installs nothing."""
        try:
            return self.mac_by_ip[ip]
        except KeyError:
            raise UnknownDestinationError(f"no VM with address {format_ip(ip)}") from None

    def on_miss(self, vswitch: str, headers: PacketHeaders,
                direction: GraphDirection = FORWARD) -> list[tuple[str, FlowEntry]]:
        host = self.by_mac.get(headers.dst_mac)
        if host is None:
            raise UnknownDestinationError(f"no VM with MAC {headers.dst_mac}")
        installed = []
        for device, entry in compile_vswitch_flows(self.fabric, vswitch, host.vm, direction):
            table = self.tables[device]
            existing = table.find_mac(entry.match_mac, entry.kind)
            if existing == entry:
                continue
            if existing is not None:
                table.remove_mac(entry.match_mac, entry.kind)
            table.add(entry)
            installed.append((device, entry))
        self.installs += len(installed)
        return installed


def controller_on_miss(fabric: Fabric, tables: dict[str, FlowTable], vswitch: str,
                       headers: PacketHeaders, direction: GraphDirection = FORWARD):
    return Controller(fabric, tables).on_miss(vswitch, headers, direction)


@dataclass
class Hop:
    device: str
    phase: int
    event: str                 # "send", "match", "controller", "deliver"
    headers: PacketHeaders
    priority: Optional[int] = None
    entry_kind: Optional[str] = None
    matched_on: Optional[str] = None   # "mac", "ip" or "mac+ip"
    action: Optional[str] = None
    installed: int = 0


@dataclass
class Trace:
    src_vm: str
    dst_vm: str
    direction: GraphDirection
    hops: list[Hop] = field(default_factory=list)

    def tor_sequence(self) -> list[str]:
        return [h.device for h in self.hops if h.event == "match" and h.device.startswith("tor:")]

    def debruijn_hops(self) -> int:
        return sum(1 for h in self.hops if h.entry_kind == EntryKind.DEBRUIJN.value)

    def controller_events(self) -> int:
        return sum(1 for h in self.hops if h.event == "controller")

    def ip_rewrites(self) -> int:
        """Number of hops that changed dst_ip."""
        count = 0
        prev = self.hops[0].headers.dst_ip
        for h in self.hops[1:]:
            if h.headers.dst_ip != prev:
                count += 1
            prev = h.headers.dst_ip
        return count

    def to_records(self) -> list[dict]:
        out = []
        for i, h in enumerate(self.hops):
            rec = {"step": i, "device": h.device, "phase": h.phase, "event": h.event,
                   "priority": h.priority, "entry": h.entry_kind, "matched_on": h.matched_on,
                   "action": h.action}
            if h.installed:
                rec["installed"] = h.installed
            hd = asdict(h.headers)
            hd["src_ip"] = format_ip(hd["src_ip"])
            hd["dst_ip"] = format_ip(hd["dst_ip"])
            rec["headers"] = hd
            out.append(rec)
        return out

    def to_json_lines(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.to_records())


_PHASE_OF = {EntryKind.REWRITE: 1, EntryKind.DEBRUIJN: 2, EntryKind.IDENTIFIER: 3, EntryKind.RESTORE: 3}


def _matched_on(entry: FlowEntry) -> str:
    if entry.match_mac is not None and entry.match_ip is not None:
        return "mac+ip"
    return "mac" if entry.match_mac is not None else "ip"


def inject_and_trace(fabric: Fabric, tables: dict[str, FlowTable], src_vm: str, dst_vm: str,
                     direction: GraphDirection = FORWARD, controller: Optional[Controller] = None) -> Trace:
    """Send one packet from ``src_vm`` to ``dst_vm`` and record every hop.

    ``tables`` is mutated by reactive installs; pass the same store (or the
    same controller) to later calls to observe miss-free re-injection.
    """
    if controller is None:
        controller = Controller(fabric, tables)
    try:
        src: Host = fabric.host_of_vm(src_vm)
    except KeyError:
        raise UnknownDestinationError(f"unknown source VM {src_vm}") from None
    if dst_vm not in fabric.devices or fabric.devices[dst_vm].kind is not DeviceKind.VM:
        raise UnknownDestinationError(f"unknown destination VM {dst_vm}")
    src_dev = fabric.devices[src_vm]
    dst_ip = fabric.devices[dst_vm].ip
    headers = PacketHeaders(src_dev.mac, controller.resolve_arp(dst_ip), src_dev.ip, dst_ip)

    trace = Trace(src_vm, dst_vm, direction)
    trace.hops.append(Hop(src_vm, 1, "send", replace(headers)))
    limit = 2 * (fabric.m or 1) + 4
    device = src.vswitch
    forwarded = 0
    consulted = False
    while True:
        kind = fabric.devices[device].kind
        if kind is DeviceKind.VM:
            trace.hops.append(Hop(device, 3, "deliver", replace(headers)))
            if device != dst_vm:
                raise MisdeliveryError(f"packet for {dst_vm} delivered to {device}")
            return trace
        forwarded += 1
        if forwarded > limit:
            raise ForwardingLoopError(f"{src_vm} -> {dst_vm}: exceeded {limit} forwarding hops at {device}")
        entry = lookup_entry(tables[device], headers)
        stale = (entry is not None and entry.kind is EntryKind.REWRITE and entry.direction is not direction)
        if entry is None or stale:
            if kind is not DeviceKind.VSWITCH or consulted:
                raise FabricError(f"table miss at {device} for dst_mac={headers.dst_mac} "
                                  f"dst_ip={format_ip(headers.dst_ip)}")
            installed = controller.on_miss(device, headers, direction)
            consulted = True
            trace.hops.append(Hop(device, 1, "controller", replace(headers), action="controller",
                                  installed=len(installed)))
            forwarded -= 1
            continue
        act = entry.action
        if act.kind is ActionKind.REWRITE_OUTPUT:
            headers.dst_ip = act.ip
        elif act.kind is ActionKind.CONTROLLER:
            raise FabricError(f"{device}: explicit controller action is not modeled")
        trace.hops.append(Hop(device, _PHASE_OF[entry.kind], "match", replace(headers),
                              priority=entry.priority, entry_kind=entry.kind.value,
                              matched_on=_matched_on(entry), action=str(act)))
        device, _ = fabric.peer(device, act.port)
