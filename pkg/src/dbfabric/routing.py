"""Abstract route computation over labels and inter-switch graphs."""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence, Union

from .errors import NoPathError
from .labels import FORWARD, REVERSE, GraphDirection, Label, debruijn_distance, neighbor, overlap_digits

ECMP = "ecmp"
DEFAULT_MAX_PATHS = 64


@dataclass(frozen=True)
class Route:
    hops: tuple
    direction: Union[GraphDirection, str]

    @property
    def hop_count(self) -> int:
        return len(self.hops) - 1

    @property
    def source(self):
        return self.hops[0]

    @property
    def destination(self):
        return self.hops[-1]


def greedy_step_digit(current: Label, dst: Label, direction: GraphDirection) -> int:
    """Digit whose edge extends the current overlap with ``dst`` by one."""
    m = current.m
    if direction is FORWARD:
        k = overlap_digits(current.digits, dst.digits)
        return dst.digits[k]
    k = overlap_digits(dst.digits, current.digits)
    return dst.digits[m - k - 1]


def greedy_route(src: Label, dst: Label, direction: GraphDirection = FORWARD) -> Route:
    # validates compatibility
    debruijn_distance(src, dst, direction)
    hops = [src]
    cur = src
    while cur != dst:
        cur = neighbor(cur, greedy_step_digit(cur, dst, direction), direction)
        hops.append(cur)
    return Route(tuple(hops), direction)


def best_route(src: Label, dst: Label, tie_break: str = "forward", key: Hashable = None) -> Route:
    """Shorter of the two single-graph greedy routes.

    ``tie_break="forward"`` prefers the left-shift graph on equal length;
    ``"hash"`` picks the direction from a stable hash of ``key`` instead.
    """
    fwd = greedy_route(src, dst, FORWARD)
    rev = greedy_route(src, dst, REVERSE)
    if fwd.hop_count != rev.hop_count:
        return fwd if fwd.hop_count < rev.hop_count else rev
    if tie_break == "hash" and src != dst:
        return (fwd, rev)[stable_hash((key, str(src), str(dst))) % 2]
    if tie_break not in ("forward", "hash"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    return fwd


def bfs_levels(graph: Mapping[Hashable, Sequence[Hashable]], source: Hashable) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in graph[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def ecmp_paths(graph: Mapping[Hashable, Sequence[Hashable]], src: Hashable, dst: Hashable,
               max_paths: int = DEFAULT_MAX_PATHS) -> list[tuple]:
    """All shortest src->dst paths in lexicographic order, truncated to ``max_paths``.

    Works on the BFS DAG rooted at ``dst``: a neighbor is a valid next hop iff
    it is one level closer to ``dst``. Depth-first expansion over sorted
    successors yields paths already sorted, so the cap keeps the
    lexicographically smallest ones.
    """
    if max_paths < 1:
        raise ValueError("max_paths must be >= 1")
    dist = bfs_levels(graph, dst)
    if src not in dist:
        raise NoPathError(f"no path from {src} to {dst}")
    paths: list[tuple] = []
    stack = [(src,)]
    while stack and len(paths) < max_paths:
        path = stack.pop()
        v = path[-1]
        if v == dst:
            paths.append(path)
            continue
        nxt = sorted(w for w in graph[v] if dist.get(w) == dist[v] - 1)
        for w in reversed(nxt):
            stack.append(path + (w,))
    return paths


def stable_hash(key: Hashable) -> int:
    digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def ecmp_select(paths: Sequence[tuple], connection_key: Hashable, seed: int = 0) -> Route:
    if not paths:
        raise NoPathError("empty path set")
    ordered = sorted(paths)
    return Route(tuple(ordered[stable_hash((connection_key, seed)) % len(ordered)]), ECMP)
