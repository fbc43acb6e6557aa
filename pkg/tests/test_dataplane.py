import logging
import random

import pytest

from dbfabric.dataplane import (Controller, PacketHeaders, controller_on_miss, inject_and_trace, lookup,
                                lookup_entry)
from dbfabric.errors import UnknownDestinationError
from dbfabric.fabric import build_debruijn_fabric
from dbfabric.flows import (SEND_TO_CONTROLLER, EntryKind, FlowEntry, FlowTable, compile_tables,
                            configure_debruijn_flows, locator_for, output)
from dbfabric.labels import FORWARD, REVERSE
from dbfabric.routing import greedy_route

from conftest import label


def headers_to(lab, direction=FORWARD):
    return PacketHeaders("02:00:00:00:00:01", "02:00:00:00:00:02", 1, locator_for(label(lab), direction).ipv4)


def test_lookup_tor101(b23):
    table = FlowTable("tor:101", configure_debruijn_flows(label("101"), FORWARD, b23.port_map))
    port1 = b23.port_map.uplinks["tor:101"][(FORWARD, 1)]
    e = lookup_entry(table, headers_to("110"))
    assert str(e.match_ip) == "0.0.0.6/31" and e.action == output(port1)
    e = lookup_entry(table, headers_to("011"))
    assert e.priority == 3 and e.action == output(port1)
    assert lookup(FlowTable("x"), headers_to("011")) is SEND_TO_CONTROLLER


def test_lookup_tie_is_deterministic_and_logged(caplog):
    a = FlowEntry(5, output(1), match_mac="aa")
    b = FlowEntry(5, output(2), match_mac="aa")
    table = FlowTable("sw", [a, b])
    with caplog.at_level(logging.WARNING):
        assert lookup(table, PacketHeaders("x", "aa", 0, 0)) == output(1)
    assert "ambiguous" in caplog.text


def test_compiled_tables_never_tie(b23, caplog):
    tables = compile_tables(b23)
    with caplog.at_level(logging.WARNING):
        for h in b23.hosts:
            for g in b23.hosts:
                for direction in (FORWARD, REVERSE):
                    inject_and_trace(b23, tables, h.vm, g.vm, direction)
    assert "ambiguous" not in caplog.text


def test_trace_inter_rack(b23):
    tables = compile_tables(b23)
    trace = inject_and_trace(b23, tables, "vm:1.0", "vm:7.0", FORWARD)
    assert trace.tor_sequence() == ["tor:001", "tor:011", "tor:111"]
    assert trace.debruijn_hops() == 2
    assert trace.controller_events() == 1
    assert trace.ip_rewrites() == 2
    assert trace.hops[-1].device == "vm:7.0" and trace.hops[-1].headers.dst_ip == b23.devices["vm:7.0"].ip
    assert {h.headers.dst_mac for h in trace.hops} == {b23.devices["vm:7.0"].mac}
    again = inject_and_trace(b23, tables, "vm:1.0", "vm:7.0", FORWARD)
    assert again.controller_events() == 0
    assert again.to_records() == inject_and_trace(b23, tables, "vm:1.0", "vm:7.0", FORWARD).to_records()


def test_trace_same_host_and_same_rack(b23):
    tables = compile_tables(b23)
    t = inject_and_trace(b23, tables, "vm:3.0", "vm:3.0")
    assert t.tor_sequence() == [] and t.ip_rewrites() == 0 and t.controller_events() == 0
    assert [h.device for h in t.hops] == ["vm:3.0", "vsw:3.0", "vm:3.0"]
    t = inject_and_trace(b23, tables, "vm:3.0", "vm:3.1")
    assert t.tor_sequence() == ["tor:011"]
    assert t.debruijn_hops() == 0 and t.ip_rewrites() == 2


def test_trace_reverse_direction(b23):
    tables = compile_tables(b23)
    t = inject_and_trace(b23, tables, "vm:6.0", "vm:7.1", REVERSE)  # 110 -> 111
    assert t.tor_sequence() == ["tor:110", "tor:111"]
    # switching direction replaces the installed rewrite through the controller
    t = inject_and_trace(b23, tables, "vm:6.0", "vm:7.1", FORWARD)
    assert t.controller_events() == 1
    assert t.tor_sequence() == ["tor:110", "tor:101", "tor:011", "tor:111"]


def test_phase_separation(b23):
    tables = compile_tables(b23)
    for h in b23.hosts:
        for g in b23.hosts:
            t = inject_and_trace(b23, tables, h.vm, g.vm, FORWARD)
            for hop in t.hops:
                if hop.event != "match":
                    continue
                if hop.phase == 2:
                    assert hop.matched_on == "ip"
                if hop.phase == 3:
                    assert hop.matched_on == "mac"


def test_controller_arp_and_unknown(b23):
    tables = compile_tables(b23)
    ctl = Controller(b23, tables)
    before = sum(len(t) for t in tables.values())
    assert ctl.resolve_arp(b23.devices["vm:5.1"].ip) == b23.devices["vm:5.1"].mac
    assert sum(len(t) for t in tables.values()) == before
    with pytest.raises(UnknownDestinationError):
        ctl.resolve_arp(0x01020304)
    with pytest.raises(UnknownDestinationError):
        controller_on_miss(b23, tables, "vsw:0.0", PacketHeaders("a", "02:ff:ff:ff:ff:ff", 0, 0))
    with pytest.raises(UnknownDestinationError):
        inject_and_trace(b23, tables, "vm:0.0", "vm:42.0")


def test_controller_installs_both_sides(b23):
    tables = compile_tables(b23)
    hd = PacketHeaders("a", b23.devices["vm:4.1"].mac, 0, b23.devices["vm:4.1"].ip)
    installed = controller_on_miss(b23, tables, "vsw:2.0", hd)
    assert [(d, e.kind) for d, e in installed] == [("vsw:2.0", EntryKind.REWRITE), ("vsw:4.1", EntryKind.RESTORE)]
    assert controller_on_miss(b23, tables, "vsw:2.0", hd) == []


@pytest.mark.parametrize("direction", [FORWARD, REVERSE])
def test_route_equivalence_b25(direction):
    fab = build_debruijn_fabric(2, 5, hosts_per_tor=2)
    tables = compile_tables(fab)
    rng = random.Random(5)
    for _ in range(300):
        s, t = rng.sample(fab.hosts, 2)
        trace = inject_and_trace(fab, tables, s.vm, t.vm, direction)
        route = greedy_route(fab.label_of(s.tor), fab.label_of(t.tor), direction)
        assert trace.tor_sequence() == [fab.tor_by_label[l] for l in route.hops]
        assert trace.debruijn_hops() <= 5
