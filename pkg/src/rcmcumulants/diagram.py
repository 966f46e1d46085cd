"""Template graphs, merged partition diagrams and their Gram matrices.

Stacking one copy of each template per row of the ground set, merging the
vertices that share a block and dropping repeated edges gives the merged
graph.  Its Gaussian integral at origin endpoints is
``(pi/beta)^(k*d/2) * det(M)^(-d/2)`` where ``M`` is the integer matrix
built by :func:`assemble_gram_matrix`.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .algebra import det_fraction_free
from .errors import DomainError
from .partitions import GroundSet, SetPartition


@dataclass(frozen=True)
class GraphSpec:
    """Connected core graph on vertices ``1..r`` plus endpoint attachments.

    ``endpoints[j]`` lists the core vertices adjacent to the j-th endpoint of
    this template; ``attaches[j]`` is the 1-based index of that endpoint in
    the global endpoint list shared by several templates (defaults to
    ``1..m``).
    """

    r: int
    edges: tuple[tuple[int, int], ...]
    endpoints: tuple[tuple[int, ...], ...] = ()
    attaches: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "r", int(self.r))
        object.__setattr__(self, "edges", tuple(tuple(int(v) for v in e) for e in self.edges))
        object.__setattr__(self, "endpoints", tuple(tuple(int(v) for v in ep) for ep in self.endpoints))
        if self.attaches is None:
            object.__setattr__(self, "attaches", tuple(range(1, len(self.endpoints) + 1)))
        else:
            object.__setattr__(self, "attaches", tuple(int(j) for j in self.attaches))

    @classmethod
    def from_edges(cls, edges, endpoints=(), attaches=None, r=None) -> "GraphSpec":
        edges = [tuple(e) for e in edges]
        if r is None:
            r = max((max(e) for e in edges if e), default=0)
        return cls(r, tuple(edges), tuple(tuple(ep) for ep in endpoints), attaches)

    @classmethod
    def from_json(cls, data) -> "GraphSpec":
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict) or "edges" not in data:
            raise DomainError("graph spec must be an object with an 'edges' list")
        try:
            return cls.from_edges(data["edges"], data.get("endpoints", []),
                                  data.get("attaches"), data.get("r"))
        except (TypeError, ValueError) as exc:
            raise DomainError(f"malformed graph spec: {exc}") from None

    def to_json(self) -> dict:
        out = {"edges": [list(e) for e in self.edges], "endpoints": [list(ep) for ep in self.endpoints]}
        if self.attaches != tuple(range(1, len(self.endpoints) + 1)):
            out["attaches"] = list(self.attaches)
        return out

    @property
    def m(self) -> int:
        return len(self.endpoints)

    @property
    def global_m(self) -> int:
        return max(self.attaches, default=0)


def validate_graph_spec(s: GraphSpec) -> list[str]:
    """Diagnostics for every violated template invariant (empty when valid)."""
    diags = []
    if s.r < 2:
        diags.append(f"core must have at least 2 vertices, has {s.r}")
    seen = set()
    for e in s.edges:
        if len(e) != 2:
            diags.append(f"edge {list(e)} does not have two ends")
            continue
        a, b = e
        if not (1 <= a <= s.r and 1 <= b <= s.r):
            diags.append(f"edge {list(e)} references a vertex outside 1..{s.r}")
        if a == b:
            diags.append(f"self-loop at vertex {a}")
        key = (min(a, b), max(a, b))
        if key in seen:
            diags.append(f"duplicate edge {list(key)}")
        seen.add(key)
    for j, ep in enumerate(s.endpoints, 1):
        if not ep:
            diags.append(f"empty endpoint attachment {j}")
        for v in ep:
            if not 1 <= v <= s.r:
                diags.append(f"endpoint {j} attaches to unknown vertex {v}")
        if len(set(ep)) != len(ep):
            diags.append(f"endpoint {j} lists a vertex twice")
    if len(s.attaches) != len(s.endpoints):
        diags.append("attaches must list one global endpoint index per endpoint")
    elif any(j < 1 for j in s.attaches) or len(set(s.attaches)) != len(s.attaches):
        diags.append("attaches must be distinct positive endpoint indices")
    if s.r >= 1 and not any(d.startswith("edge") for d in diags):
        adj = {v: set() for v in range(1, s.r + 1)}
        for a, b in s.edges:
            if a != b:
                adj[a].add(b)
                adj[b].add(a)
        reached = {1}
        todo = deque([1])
        while todo:
            v = todo.popleft()
            for w in adj[v] - reached:
                reached.add(w)
                todo.append(w)
        if len(reached) != s.r:
            diags.append("core not connected")
    return diags


def require_valid(specs: Sequence[GraphSpec]):
    for i, s in enumerate(specs, 1):
        diags = validate_graph_spec(s)
        if diags:
            raise DomainError(f"graph spec {i} is invalid: " + "; ".join(diags))


@dataclass(frozen=True)
class RhoGraph:
    """Merged graph: core vertices ``1..k`` are blocks, endpoints come after."""

    core_vertex_count: int
    m: int
    edges: frozenset
    endpoint_neighborhoods: tuple[frozenset, ...]

    def adjacency(self) -> dict[int, set[int]]:
        """Adjacency over all ``k+m`` vertices, endpoints numbered ``k+1..k+m``."""
        k = self.core_vertex_count
        adj = {v: set() for v in range(1, k + self.m + 1)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        for j, A in enumerate(self.endpoint_neighborhoods, 1):
            for a in A:
                adj[a].add(k + j)
                adj[k + j].add(a)
        return adj

    def is_connected(self) -> bool:
        adj = self.adjacency()
        if not adj:
            return True
        start = next(iter(adj))
        seen = {start}
        todo = [start]
        while todo:
            v = todo.pop()
            for w in adj[v] - seen:
                seen.add(w)
                todo.append(w)
        return len(seen) == len(adj)


def _check_rows(specs: Sequence[GraphSpec], ground: GroundSet):
    if tuple(s.r for s in specs) != ground.row_sizes:
        raise DomainError(
            f"row sizes {ground.row_sizes} do not match template vertex counts {[s.r for s in specs]}")


def build_rho_graph(specs: Sequence[GraphSpec], p: SetPartition) -> RhoGraph:
    """Merge one template copy per row according to ``p``."""
    specs = list(specs)
    _check_rows(specs, p.ground)
    off = p.ground.offsets
    edges = set()
    m = max((s.global_m for s in specs), default=0)
    hoods = [set() for _ in range(m)]
    for i, s in enumerate(specs):
        for a, b in s.edges:
            ba = p.codes[off[i] + a - 1] + 1
            bb = p.codes[off[i] + b - 1] + 1
            if ba == bb:
                raise DomainError(
                    f"partition {p} merges both ends of edge {[a, b]} in row {i + 1} (flat partition)")
            edges.add((min(ba, bb), max(ba, bb)))
        for ep, j in zip(s.endpoints, s.attaches):
            for v in ep:
                hoods[j - 1].add(p.codes[off[i] + v - 1] + 1)
    return RhoGraph(len(p), m, frozenset(edges), tuple(frozenset(h) for h in hoods))


@dataclass(frozen=True)
class IntegerGramMatrix:
    """Symmetric integer matrix of the per-coordinate quadratic form."""

    entries: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64).reshape(self.size, self.size)

    @cached_property
    def det(self) -> int:
        return det_fraction_free(self.entries)

    def key(self) -> bytes:
        return self.as_array().tobytes()


def assemble_gram_matrix(rg: RhoGraph, model=None, *, gaussian: bool | None = None) -> IntegerGramMatrix:
    """Integer matrix ``M`` with ``beta * x^T M x`` the integrand's exponent.

    Off-diagonal entries are ``-1`` on merged edges; the diagonal carries
    the core degree, the number of endpoints adjacent to the vertex and one
    more for Gaussian intensity.
    """
    if gaussian is None:
        gaussian = model is not None and model.intensity == "gaussian"
    k = rg.core_vertex_count
    M = [[0] * k for _ in range(k)]
    for a, b in rg.edges:
        M[a - 1][b - 1] = M[b - 1][a - 1] = -1
        M[a - 1][a - 1] += 1
        M[b - 1][b - 1] += 1
    for A in rg.endpoint_neighborhoods:
        for a in A:
            M[a - 1][a - 1] += 1
    if gaussian:
        for a in range(k):
            M[a][a] += 1
    return IntegerGramMatrix(tuple(tuple(row) for row in M))


def kernel_arrays(specs: Sequence[GraphSpec], ground: GroundSet):
    """Element-index edge and anchor arrays for the batched determinant kernel."""
    _check_rows(specs, ground)
    off = ground.offsets
    edges, anchors = [], []
    for i, s in enumerate(specs):
        for a, b in s.edges:
            edges.append((off[i] + a - 1, off[i] + b - 1))
        for ep, j in zip(s.endpoints, s.attaches):
            for v in ep:
                anchors.append((off[i] + v - 1, j - 1))
    m = max((s.global_m for s in specs), default=0)
    return (np.array(edges, dtype=np.int64).reshape(-1, 2),
            np.array(anchors, dtype=np.int64).reshape(-1, 2), m)
