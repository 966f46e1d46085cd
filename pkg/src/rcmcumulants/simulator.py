"""Monte Carlo sampling of the random-connection model with fixed endpoints.

Replications are grouped into fixed-size blocks and block ``b`` draws from
its own stream ``SeedSequence(seed, spawn_key=(b,))``, so estimates depend
only on the seed and the configuration, never on the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from ._accel import backend as _backend
from .diagram import GraphSpec, require_valid
from .errors import DomainError
from .model import ModelConfig


@dataclass(frozen=True)
class SimConfig:
    lam: float
    replications: int = 10_000
    seed: int = 0
    batches: int = 20
    L: float | None = None
    block_size: int = 1000

    def __post_init__(self):
        if not self.lam >= 0:
            raise DomainError(f"lambda must be non-negative, got {self.lam}")
        if self.replications < 1 or self.batches < 1 or self.block_size < 1:
            raise DomainError("replications, batches and block size must be positive")
        if self.replications < 2 * self.batches:
            raise DomainError(f"need at least {2 * self.batches} replications for {self.batches} batches")
        if self.L is not None and not self.L > 0:
            raise DomainError(f"window half-width must be positive, got {self.L}")

    def window(self, model: ModelConfig, m: int) -> float:
        ys = model.endpoint_positions(m)
        reach = max((abs(c) for y in ys for c in y), default=0.0)
        if self.L is None:
            return reach + 5.0 / math.sqrt(model.beta_value)
        if self.L <= reach:
            raise DomainError(f"window half-width {self.L} does not contain every endpoint")
        return float(self.L)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SampleGraph:
    points: np.ndarray         # (k, d)
    adj: np.ndarray            # (k, k) bool, symmetric, zero diagonal
    endpoint_adj: np.ndarray   # (m, k) bool
    endpoints: np.ndarray      # (m, d)

    @property
    def size(self) -> int:
        return self.points.shape[0]


def _connect(u: np.ndarray, sq_dist: np.ndarray, beta: float) -> np.ndarray:
    return u < np.exp(-beta * sq_dist)


def sample_rcm(model: ModelConfig, sim: SimConfig, rng: np.random.Generator, m: int = 0) -> SampleGraph:
    """One sample of the point process with all pairwise edges drawn.

    Flat intensity samples on ``[-L, L]^d``; Gaussian intensity samples the
    whole space, points being normal with variance ``1/(2 beta)``.
    """
    d, beta = model.d, model.beta_value
    ys = np.array(model.endpoint_positions(m), dtype=float).reshape(m, d)
    if model.intensity == "flat":
        L = sim.window(model, m)
        k = rng.poisson(sim.lam * (2 * L) ** d)
        pts = rng.uniform(-L, L, size=(k, d))
    else:
        k = rng.poisson(sim.lam * (math.pi / beta) ** (d / 2))
        pts = rng.normal(0.0, math.sqrt(0.5 / beta), size=(k, d))
    iu = np.triu_indices(k, 1)
    u = rng.random(iu[0].size)
    diff = pts[:, None, :] - pts[None, :, :]
    sq = np.einsum("ijk,ijk->ij", diff, diff)
    adj = np.zeros((k, k), dtype=bool)
    adj[iu] = _connect(u, sq[iu], beta)
    adj |= adj.T
    ue = rng.random((m, k))
    ediff = ys[:, None, :] - pts[None, :, :]
    eadj = _connect(ue, np.einsum("ijk,ijk->ij", ediff, ediff), beta)
    return SampleGraph(pts, adj, eadj, ys)


@dataclass(frozen=True)
class _Plan:
    """Placement order and back-edge lists for one template."""

    order: np.ndarray
    back_edges: np.ndarray
    back_ptr: np.ndarray
    attach: tuple[tuple[int, ...], ...]   # per core vertex: 0-based global endpoints


def _plan(spec: GraphSpec) -> _Plan:
    r = spec.r
    nbrs = {v: set() for v in range(r)}
    for a, b in spec.edges:
        nbrs[a - 1].add(b - 1)
        nbrs[b - 1].add(a - 1)
    attach = [[] for _ in range(r)]
    for ep, j in zip(spec.endpoints, spec.attaches):
        for v in ep:
            attach[v - 1].append(j - 1)
    # most constrained first, then greedily the vertex with most placed neighbours
    start = max(range(r), key=lambda v: (len(attach[v]), len(nbrs[v]), -v))
    order = [start]
    while len(order) < r:
        placed = set(order)
        rest = [v for v in range(r) if v not in placed]
        order.append(max(rest, key=lambda v: (len(nbrs[v] & placed), len(attach[v]), -v)))
    pos = {v: t for t, v in enumerate(order)}
    back, ptr = [], [0]
    for t, v in enumerate(order):
        back.extend(sorted(pos[w] for w in nbrs[v] if pos[w] < t))
        ptr.append(len(back))
    return _Plan(np.array(order, dtype=np.int64), np.array(back, dtype=np.int64),
                 np.array(ptr, dtype=np.int64), tuple(tuple(a) for a in attach))


def _count(g: SampleGraph, plan: _Plan, backend: str) -> int:
    k = g.size
    cand = np.ones((len(plan.attach), k), dtype=bool)
    for v, js in enumerate(plan.attach):
        for j in js:
            cand[v] &= g.endpoint_adj[j]
    return _kernels.count_embeddings_arrays(g.adj, cand, plan.order, plan.back_edges,
                                            plan.back_ptr, backend)


def count_embeddings(g: SampleGraph, spec: GraphSpec, backend: str | None = None) -> int:
    """Ordered injections of the template core into the sample, endpoints fixed."""
    if spec.global_m > g.endpoint_adj.shape[0]:
        raise DomainError(f"template needs {spec.global_m} endpoints, sample has {g.endpoint_adj.shape[0]}")
    return _count(g, _plan(spec), _backend(backend))


def _run_block(block: int, *, model, spec, sim, n, be) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(sim.seed, spawn_key=(block,)))
    plan = _plan(spec)
    m = spec.global_m
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = _count(sample_rcm(model, sim, rng, m), plan, be)
    return out


def simulate_counts(model: ModelConfig, spec: GraphSpec, sim: SimConfig, *, workers: int = 1,
                    backend: str | None = None) -> np.ndarray:
    """Per-replication subgraph counts, in replication order."""
    require_valid([spec])
    model.endpoint_positions(spec.global_m)
    be = _backend(backend)
    sizes = [min(sim.block_size, sim.replications - s) for s in range(0, sim.replications, sim.block_size)]
    if workers is None or workers <= 1 or len(sizes) == 1:
        parts = [_run_block(b, model=model, spec=spec, sim=sim, n=n, be=be) for b, n in enumerate(sizes)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_run_block, b, model=model, spec=spec, sim=sim, n=n, be=be)
                    for b, n in enumerate(sizes)]
            parts = [f.result() for f in futs]
    return np.concatenate(parts)


def k_statistics(x: np.ndarray) -> tuple[float, float, float]:
    """Unbiased cumulant estimates ``k1, k2, k3`` of a sample."""
    x = np.asarray(x, dtype=float)
    R = x.size
    if R < 3:
        raise DomainError("k-statistics up to order 3 need at least 3 replications")
    mean = x.mean()
    c = x - mean
    m2 = math.fsum(c * c) / R
    m3 = math.fsum(c * c * c) / R
    return mean, m2 * R / (R - 1), m3 * R * R / ((R - 1) * (R - 2))


def _statistics(x: np.ndarray) -> dict[str, float]:
    k1, k2, k3 = k_statistics(x)
    xf = x.astype(float)
    return {"mean": k1, "second_moment": math.fsum(xf * xf) / xf.size,
            "kappa2": k2, "kappa3": k3, "p_positive": float(np.mean(x > 0))}


@dataclass
class SimEstimate:
    estimates: dict[str, float]
    standard_errors: dict[str, float]
    config: SimConfig
    window: float | None
    counts: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {"estimates": self.estimates, "standard_errors": self.standard_errors,
                "config": self.config.to_json(), "window": self.window, "seed": self.config.seed}


def estimate(model: ModelConfig, spec: GraphSpec, sim: SimConfig, *, workers: int = 1,
             backend: str | None = None, counts: np.ndarray | None = None) -> SimEstimate:
    """Moment and cumulant estimates with batch-means standard errors."""
    if counts is None:
        counts = simulate_counts(model, spec, sim, workers=workers, backend=backend)
    est = _statistics(counts)
    batches = np.array_split(counts, sim.batches)
    if min(b.size for b in batches) < 3:
        raise DomainError("each batch needs at least 3 replications")
    per = [_statistics(b) for b in batches]
    se = {key: float(np.std([p[key] for p in per], ddof=1) / math.sqrt(sim.batches)) if sim.batches > 1
          else float("nan") for key in est}
    window = sim.window(model, spec.global_m) if model.intensity == "flat" else None
    return SimEstimate(est, se, sim, window, counts)

