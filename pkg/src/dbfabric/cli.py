"""Command line entry point.

Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

from .errors import ConfigurationError, FabricError, UnknownDestinationError
from .dataplane import Controller, inject_and_trace
from .experiment import ExperimentConfig, run_sweep
from .fabric import build_debruijn_fabric, build_leaf_spine, build_random_flat
from .flows import compile_identifier_flows, compile_tables, configure_debruijn_flows, dump_entry
from .labels import FORWARD, REVERSE, GraphDirection, Label
from .routing import best_route, greedy_route
from .sim import SCHEMES, check_allocation, csv_rows, run_cell, write_csv


class UsageError(ConfigurationError):
    pass


def _directions(text: str) -> list[GraphDirection]:
    if text == "both":
        return [FORWARD, REVERSE]
    try:
        return [GraphDirection.parse(text)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _label(text: str, d: int, m: int) -> Label:
    try:
        return Label.parse(text, d, m)
    except ValueError as exc:
        raise UsageError(f"bad label {text!r}: {exc}") from None


def _db_fabric(args):
    return build_debruijn_fabric(args.d, args.m, args.hosts_per_tor, args.host_link_bps, args.uplink_bps)


def cmd_compile(args) -> int:
    fab = build_debruijn_fabric(args.d, args.m, args.hosts_per_tor)
    label = _label(args.switch, args.d, args.m)
    tor = fab.tor_by_label[label]
    lines = []
    for direction in _directions(args.dir):
        lines += [dump_entry(tor, e) for e in configure_debruijn_flows(label, direction, fab.port_map)]
    if args.identifiers:
        vms = [h.vm for h in fab.hosts if h.tor == tor]
        lines += [dump_entry(tor, e) for e in compile_identifier_flows(fab, tor, vms)]
    print("\n".join(lines))
    return 0


def cmd_route(args) -> int:
    src, dst = _label(args.src, args.d, args.m), _label(args.dst, args.d, args.m)
    fwd, rev = greedy_route(src, dst, FORWARD), greedy_route(src, dst, REVERSE)
    best = best_route(src, dst)
    print(json.dumps({
        "src": str(src), "dst": str(dst),
        "route": [str(l) for l in best.hops], "direction": best.direction.value, "hops": best.hop_count,
        "forward_len": fwd.hop_count, "reverse_len": rev.hop_count,
    }))
    return 0


def _vm_name(fab, text: str) -> str:
    """Accept ``vm:<rack>.<host>`` or ``<label>/<host>``."""
    if "/" in text:
        lab, _, host = text.partition("/")
        try:
            label = Label.parse(lab, fab.d, fab.m)
            name = f"vm:{label.value}.{int(host)}"
        except ValueError:
            raise UnknownDestinationError(f"unknown VM {text!r}") from None
    else:
        name = text
    if name not in fab.devices:
        raise UnknownDestinationError(f"unknown VM {text!r}")
    return name


def cmd_trace(args) -> int:
    fab = _db_fabric(args)
    direction = _directions(args.dir)[0]
    try:
        src, dst = _vm_name(fab, args.src), _vm_name(fab, args.dst)
    except UnknownDestinationError as exc:
        raise UsageError(str(exc)) from None
    tables = compile_tables(fab)
    ctl = Controller(fab, tables)
    for i in range(args.repeat):
        trace = inject_and_trace(fab, tables, src, dst, direction, controller=ctl)
        for rec in trace.to_records():
            rec["packet"] = i
            print(json.dumps(rec, sort_keys=True))
    return 0


def _cell_kwargs(args) -> dict:
    return dict(hosts_per_tor=args.hosts_per_tor, d=args.d, n_spine=args.n_spine,
                uplinks_per_tor=args.uplinks_per_tor, host_link_bps=args.host_link_bps,
                uplink_bps=args.uplink_bps, max_paths=args.max_paths, tie_break=args.tie_break)


def cmd_simulate(args) -> int:
    if args.scheme not in SCHEMES:
        raise UsageError(f"unknown scheme {args.scheme!r}")
    res = run_cell(args.scheme, args.n_tor, args.seed, **_cell_kwargs(args))
    summary = res.metrics.to_dict()
    summary["allocation_violations"] = len(check_allocation(res.connections, res.allocation))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_csv(csv_rows(res), fh)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_sweep(args) -> int:
    doc = {}
    if args.config:
        doc = asdict(ExperimentConfig.load(args.config))
    for key in ("schemes", "sizes", "seeds", "csv", "summary", "tie_break"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    cfg = ExperimentConfig.from_dict(doc)
    summary, text = run_sweep(cfg, jobs=args.jobs)
    if cfg.csv:
        with open(cfg.csv, "w", newline="") as fh:
            fh.write(text)
    if cfg.summary:
        with open(cfg.summary, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    failed = sum(1 for c in summary["cells"] if c["status"] != "ok")
    for row in summary["aggregate"]:
        print(f"{row['scheme']:<14} n_tor={row['n_tor']:<5} mean={row['mean_bps'] / 1e9:.4f} Gbps "
              f"path={row['mean_path_len']:.3f} inter_rack={row['inter_rack_fraction']:.4f}")
    if failed:
        print(f"{failed} cell(s) failed; see summary", file=sys.stderr)
        return 1
    return 0


def cmd_export_fabric(args) -> int:
    if args.topology == "debruijn":
        fab = build_debruijn_fabric(args.d, args.m, args.hosts_per_tor, args.host_link_bps, args.uplink_bps)
    elif args.topology == "leaf_spine":
        fab = build_leaf_spine(args.n_tor, args.n_spine, args.hosts_per_tor, args.host_link_bps, args.uplink_bps)
    else:
        fab = build_random_flat(args.n_tor, args.uplinks_per_tor, args.hosts_per_tor, args.seed,
                                args.host_link_bps, args.uplink_bps)
    text = fab.to_json(indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _add_shape(p, hosts_default=40):
    p.add_argument("--d", type=int, default=2, help="radix (digits per label position)")
    p.add_argument("--m", type=int, default=3, help="label length")
    p.add_argument("--hosts-per-tor", type=int, default=hosts_default)


def _add_caps(p):
    p.add_argument("--host-link-bps", type=float, default=1e9)
    p.add_argument("--uplink-bps", type=float, default=1e10)


def _add_sim(p):
    p.add_argument("--hosts-per-tor", type=int, default=40)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n-spine", type=int, default=4)
    p.add_argument("--uplinks-per-tor", type=int, default=4)
    p.add_argument("--max-paths", type=int, default=64)
    p.add_argument("--tie-break", choices=["forward", "hash"], default="forward")
    _add_caps(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dbfabric", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="dump the De Bruijn flow table of one ToR")
    _add_shape(p, hosts_default=0)
    p.add_argument("--switch", required=True, help="ToR label, e.g. 101")
    p.add_argument("--dir", default="both", help="forward, reverse or both")
    p.add_argument("--identifiers", action="store_true", help="also dump identifier entries")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("route", help="greedy De Bruijn route between two ToR labels")
    _add_shape(p)
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("trace", help="walk a packet through compiled tables (JSON lines)")
    _add_shape(p)
    _add_caps(p)
    p.add_argument("--src", required=True, help="source VM: vm:<rack>.<host> or <label>/<host>")
    p.add_argument("--dst", required=True, help="destination VM, same forms")
    p.add_argument("--dir", default="forward", help="forward or reverse")
    p.add_argument("--repeat", type=int, default=1, help="inject the packet this many times")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("simulate", help="run one (scheme, size, seed) cell")
    p.add_argument("--scheme", required=True, choices=list(SCHEMES))
    p.add_argument("--n-tor", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="per-connection CSV output path")
    p.add_argument("--summary", help="summary JSON output path")
    _add_sim(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the full scheme x size x seed grid")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--schemes", nargs="+")
    p.add_argument("--sizes", nargs="+", type=int)
    p.add_argument("--seeds", nargs="+", type=int)
    p.add_argument("--tie-break", choices=["forward", "hash"])
    p.add_argument("--csv")
    p.add_argument("--summary")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-fabric", help="write a fabric as JSON")
    p.add_argument("--topology", choices=["debruijn", "leaf_spine", "random"], default="debruijn")
    _add_shape(p)
    p.add_argument("--n-tor", type=int, default=8)
    p.add_argument("--n-spine", type=int, default=4)
    p.add_argument("--uplinks-per-tor", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    _add_caps(p)
    p.set_defaults(func=cmd_export_fabric)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"dbfabric {args.command}: {exc}", file=sys.stderr)
        return 2
    except FabricError as exc:
        print(f"dbfabric {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
