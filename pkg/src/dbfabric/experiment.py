"""Sweep configuration and the (scheme x size x seed) grid runner.

Config file (JSON)::

    {
      "schemes": ["LS/ECMP", "Random/ECMP", "DB/DBRouting", "DB/ECMP"],
      "sizes": [8, 16, 32, 64],          # ToR counts; powers of d for De Bruijn
      "seeds": [0, 1, 2, 3, 4],
      "hosts_per_tor": 40,
      "d": 2, "n_spine": 4, "uplinks_per_tor": 4,
      "host_link_bps": 1e9, "uplink_bps": 1e10,
      "max_paths": 64, "tie_break": "forward",
      "csv": "results.csv", "summary": "summary.json"
    }

Every key is optional; the values above are the defaults.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .fabric import DEFAULT_HOST_LINK_BPS, DEFAULT_UPLINK_BPS, TopologyKind
from .routing import DEFAULT_MAX_PATHS
from .sim import SCHEME_TOPOLOGY, SCHEMES, check_allocation, csv_rows, debruijn_shape, run_cell, write_csv

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    schemes: list[str] = field(default_factory=lambda: list(SCHEMES))
    sizes: list[int] = field(default_factory=lambda: [8, 16, 32, 64])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    hosts_per_tor: int = 40
    d: int = 2
    n_spine: int = 4
    uplinks_per_tor: int = 4
    host_link_bps: float = DEFAULT_HOST_LINK_BPS
    uplink_bps: float = DEFAULT_UPLINK_BPS
    max_paths: int = DEFAULT_MAX_PATHS
    tie_break: str = "forward"
    csv: Optional[str] = "results.csv"
    summary: Optional[str] = "summary.json"

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigurationError("config must be a JSON object")
        return cls.from_dict(doc)

    def validate(self) -> None:
        for s in self.schemes:
            if s not in SCHEME_TOPOLOGY:
                raise ConfigurationError(f"unknown scheme {s!r}")
        if not self.sizes or not self.seeds or not self.schemes:
            raise ConfigurationError("schemes, sizes and seeds must be non-empty")
        if any(SCHEME_TOPOLOGY[s] is TopologyKind.DEBRUIJN for s in self.schemes):
            for n in self.sizes:
                debruijn_shape(n, self.d)
        if self.hosts_per_tor < 1:
            raise ConfigurationError("hosts_per_tor must be >= 1")
        if self.tie_break not in ("forward", "hash"):
            raise ConfigurationError(f"unknown tie_break {self.tie_break!r}")
        if self.max_paths < 1:
            raise ConfigurationError("max_paths must be >= 1")

    def cells(self) -> list[tuple[str, int, int]]:
        return [(scheme, n, seed) for n in self.sizes for scheme in self.schemes for seed in self.seeds]


def _run_one(args):
    cfg, (scheme, n, seed) = args
    try:
        res = run_cell(scheme, n, seed, hosts_per_tor=cfg.hosts_per_tor, d=cfg.d, n_spine=cfg.n_spine,
                       uplinks_per_tor=cfg.uplinks_per_tor, host_link_bps=cfg.host_link_bps,
                       uplink_bps=cfg.uplink_bps, max_paths=cfg.max_paths, tie_break=cfg.tie_break)
        violations = check_allocation(res.connections, res.allocation)
        return {"scheme": scheme, "n_tor": n, "seed": seed, "status": "ok",
                "metrics": res.metrics.to_dict(), "allocation_violations": len(violations)}, csv_rows(res)
    except Exception as exc:  # a failed cell must not take down the sweep
        log.warning("cell %s n=%d seed=%d failed: %s", scheme, n, seed, exc)
        return {"scheme": scheme, "n_tor": n, "seed": seed, "status": "failed",
                "error": f"{type(exc).__name__}: {exc}"}, []


def aggregate(cells: list[dict]) -> list[dict]:
    groups: dict[tuple[str, int], list[dict]] = {}
    for c in cells:
        if c["status"] == "ok":
            groups.setdefault((c["scheme"], c["n_tor"]), []).append(c["metrics"])
    out = []
    for (scheme, n), ms in groups.items():
        out.append({"scheme": scheme, "n_tor": n, "runs": len(ms),
                    "mean_bps": float(np.mean([m["mean_bps"] for m in ms])),
                    "mean_path_len": float(np.mean([m["mean_path_len"] for m in ms])),
                    "inter_rack_fraction": float(np.mean([m["inter_rack_fraction"] for m in ms]))})
    return out


def run_sweep(cfg: ExperimentConfig, jobs: int = 1) -> tuple[dict, str]:
    """Run every cell; returns (summary document, CSV text). Output order follows the grid."""
    work = [(cfg, cell) for cell in cfg.cells()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    rows = [row for _, cell_rows in results for row in cell_rows]
    cells = [summary for summary, _ in results]
    summary = {"config": asdict(cfg), "cells": cells, "aggregate": aggregate(cells)}
    return summary, write_csv(rows)
