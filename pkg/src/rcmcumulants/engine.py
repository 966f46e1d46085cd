"""Exact moments, cumulants and joint cumulants of subgraph counts.

Each qualifying partition contributes ``lambda^|rho|`` times the Gaussian
integral of its merged diagram.  On the exact path (``beta="pi"``, endpoints
at the origin) that integral is ``det(M)^(-d/2)``; determinants for whole
enumeration chunks come from the batched kernel and are grouped by
``(blocks, det)`` before the exact scalar sum.
"""
from __future__ import annotations

import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache, partial
from math import factorial
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from ._accel import backend as _backend
from .algebra import AlgebraicScalar, LambdaPoly, det_fraction_free, inverse_power_sqrt
from .diagram import (GraphSpec, assemble_gram_matrix, build_rho_graph, kernel_arrays,
                      require_valid)
from .errors import DivergenceError, DomainError
from .model import ModelConfig
from .partitions import (GroundSet, SetPartition, enumerate_partitions, map_partition_chunks)

log = logging.getLogger(__name__)

_CHOLESKY_TOL = 1e-12
_PROGRESS_EVERY = 1000


@dataclass
class CumulantResult:
    kind: str
    order: int
    value: LambdaPoly
    partition_count: int
    census: dict[int, int]
    elapsed: float = 0.0
    specs: tuple = field(default=(), repr=False)
    model: ModelConfig | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "order": self.order,
            "value": self.value.to_json(),
            "exact": self.value.is_exact(),
            "partition_count": self.partition_count,
            "census": {str(k): v for k, v in sorted(self.census.items())},
            "elapsed_seconds": self.elapsed,
        }


# ---------------------------------------------------------------------------
# single partition
# ---------------------------------------------------------------------------


def _numeric_integral(rg, M, model: ModelConfig) -> float:
    """Float value of the diagram integral for general beta and endpoints."""
    beta = model.beta_value
    d = model.d
    k = M.size
    A = M.as_array().astype(float)
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        L = None
    if L is None or np.min(np.diag(L)) < _CHOLESKY_TOL:
        raise DivergenceError("singular quadratic form")
    logdet = 2.0 * np.sum(np.log(np.diag(L)))
    ys = np.array(model.endpoint_positions(rg.m), dtype=float).reshape(rg.m, d)
    expo = 0.0
    if rg.m:
        b = np.zeros((k, d))
        c = 0.0
        for j, hood in enumerate(rg.endpoint_neighborhoods):
            for a in hood:
                b[a - 1] += ys[j]
                c += float(ys[j] @ ys[j])
        z = np.linalg.solve(L, b)
        expo = beta * (float(np.sum(z * z)) - c)
    return math.exp(0.5 * k * d * math.log(math.pi / beta) - 0.5 * d * logdet + expo)


def partition_term(p: SetPartition, specs: Sequence[GraphSpec], model: ModelConfig) -> LambdaPoly:
    """``lambda^|p|`` times the Gaussian integral of the merged diagram of ``p``."""
    specs = list(specs)
    rg = build_rho_graph(specs, p)
    M = assemble_gram_matrix(rg, model)
    if model.is_exact():
        det = M.det
        if det == 0:
            raise DivergenceError(f"divergent integral: singular Gram matrix for partition {p}", p)
        return LambdaPoly.monomial(len(p), inverse_power_sqrt(det, model.d))
    try:
        val = _numeric_integral(rg, M, model)
    except DivergenceError:
        raise DivergenceError(f"divergent integral: singular Gram matrix for partition {p}", p) from None
    return LambdaPoly.monomial(len(p), val)


# ---------------------------------------------------------------------------
# sums over partition classes
# ---------------------------------------------------------------------------


def _chunk_dets(codes, nblocks, *, edges, anchors, m, diag_extra, backend):
    """Group one chunk's partitions by (blocks, det); report the first singular one."""
    dets, status = _kernels.gram_determinants(codes, nblocks, edges, anchors, m, diag_extra, backend)
    if np.any(status == _kernels.DET_LOOP):
        i = int(np.argmax(status == _kernels.DET_LOOP))
        raise DomainError(f"partition {codes[i].tolist()} merges both ends of a template edge")
    counts: Counter = Counter()
    over = np.nonzero(status == _kernels.DET_OVERFLOW)[0]
    if over.size:
        keep = np.ones(len(dets), dtype=bool)
        keep[over] = False
        for i in over:
            counts[(int(nblocks[i]), _det_bigint(codes[i], edges, anchors, m, diag_extra))] += 1
        codes_ok, nb_ok, dets_ok = codes[keep], nblocks[keep], dets[keep]
    else:
        nb_ok, dets_ok = nblocks, dets
    singular = None
    zero = np.nonzero(dets_ok == 0)[0]
    if zero.size:
        src = codes if not over.size else codes_ok
        singular = src[zero[0]].tolist()
    if len(dets_ok):
        pairs, cnt = np.unique(np.stack([nb_ok, dets_ok], axis=1), axis=0, return_counts=True)
        for (k, det), c in zip(pairs.tolist(), cnt.tolist()):
            counts[(k, det)] += c
    return counts, singular, len(codes)


def _det_bigint(code, edges, anchors, m, diag_extra) -> int:
    k = int(max(code)) + 1
    M = [[0] * k for _ in range(k)]
    seen = set()
    for u, v in edges:
        a, b = sorted((int(code[u]), int(code[v])))
        if (a, b) not in seen:
            seen.add((a, b))
            M[a][b] = M[b][a] = -1
            M[a][a] += 1
            M[b][b] += 1
    seen_a = set()
    for u, j in anchors:
        a = int(code[u])
        if (a, int(j)) not in seen_a:
            seen_a.add((a, int(j)))
            M[a][a] += 1
    for a in range(k):
        M[a][a] += diag_extra
    return det_fraction_free(M)


def _sum_exact(specs, model, ground, filter, workers, backend, limit):
    edges, anchors, m = kernel_arrays(specs, ground)
    be = _backend(backend)
    func = partial(_chunk_dets, edges=edges, anchors=anchors, m=m,
                   diag_extra=int(model.intensity == "gaussian"), backend=be)
    totals: Counter = Counter()
    done = 0
    next_report = _PROGRESS_EVERY
    t0 = time.perf_counter()
    for counts, singular, size in map_partition_chunks(ground, filter, func, limit=limit,
                                                      backend=be, workers=workers):
        if singular is not None:
            p = SetPartition(ground, tuple(singular))
            raise DivergenceError(
                f"divergent integral: singular Gram matrix for partition {p} "
                f"(flat intensity without endpoints has infinite mass)", p)
        totals.update(counts)
        done += size
        if done >= next_report:
            log.info("[%d partitions] %.1fs elapsed", done, time.perf_counter() - t0)
            next_report = (done // _PROGRESS_EVERY + 1) * _PROGRESS_EVERY
    coeffs: dict[int, AlgebraicScalar] = {}
    census: Counter = Counter()
    for (k, det), c in sorted(totals.items()):
        census[k] += c
        term = inverse_power_sqrt(det, model.d) * c
        coeffs[k] = coeffs[k] + term if k in coeffs else term
    return LambdaPoly(coeffs), dict(sorted(census.items())), sum(census.values())


def _sum_numeric(specs, model, ground, filter, backend, limit):
    parts: dict[int, list[float]] = {}
    cache: dict[bytes, float] = {}
    census: Counter = Counter()
    for p in enumerate_partitions(ground, filter, limit=limit, backend=backend):
        rg = build_rho_graph(specs, p)
        M = assemble_gram_matrix(rg, model)
        key = M.key() + repr(sorted(tuple(sorted(h)) for h in rg.endpoint_neighborhoods)).encode()
        if key not in cache:
            try:
                cache[key] = _numeric_integral(rg, M, model)
            except DivergenceError:
                raise DivergenceError(f"divergent integral: singular Gram matrix for partition {p}", p) from None
        parts.setdefault(len(p), []).append(cache[key])
        census[len(p)] += 1
    coeffs = {k: math.fsum(v) for k, v in parts.items()}
    return LambdaPoly(coeffs), dict(sorted(census.items())), sum(census.values())


def _summed(kind, order, specs, model, filter, workers, backend, limit) -> CumulantResult:
    specs = tuple(specs)
    if not specs:
        raise DomainError("at least one graph spec is required")
    require_valid(specs)
    m = max(s.global_m for s in specs)
    model.endpoint_positions(m)
    ground = GroundSet(tuple(s.r for s in specs))
    t0 = time.perf_counter()
    if model.is_exact():
        value, census, total = _sum_exact(specs, model, ground, filter, workers, backend, limit)
    else:
        value, census, total = _sum_numeric(specs, model, ground, filter, backend, limit)
    elapsed = time.perf_counter() - t0
    log.info("%s over %s: %d partitions in %.2fs", kind, ground.row_sizes, total, elapsed)
    return CumulantResult(kind, order, value, total, census, elapsed, specs, model)


def moment(n: int, spec: GraphSpec, model: ModelConfig, *, workers=1, backend=None, limit=None) -> CumulantResult:
    """``E[N^n]``: sum over non-flat partitions of ``[n] x [r]``."""
    if n < 1:
        raise DomainError("moment order must be >= 1")
    return _summed("moment", n, [spec] * n, model, "non_flat", workers, backend, limit)


def cumulant(n: int, spec: GraphSpec, model: ModelConfig, *, workers=1, backend=None, limit=None) -> CumulantResult:
    """``kappa_n(N)``: sum over connected non-flat partitions of ``[n] x [r]``."""
    if n < 1:
        raise DomainError("cumulant order must be >= 1")
    return _summed("cumulant", n, [spec] * n, model, "connected_non_flat", workers, backend, limit)


def joint_moment(specs: Sequence[GraphSpec], model: ModelConfig, *, workers=1, backend=None,
                 limit=None) -> CumulantResult:
    """``E[N_1 ... N_n]`` for templates sharing one endpoint list."""
    return _summed("joint_moment", len(specs), specs, model, "non_flat", workers, backend, limit)


def joint_cumulant(specs: Sequence[GraphSpec], model: ModelConfig, *, workers=1, backend=None,
                   limit=None) -> CumulantResult:
    """Joint cumulant ``kappa(N_1, ..., N_n)``."""
    return _summed("joint_cumulant", len(specs), specs, model, "connected_non_flat", workers, backend, limit)


@lru_cache(maxsize=256)
def _cached(kind: str, n: int, spec: GraphSpec, model: ModelConfig) -> LambdaPoly:
    fn = cumulant if kind == "cumulant" else moment
    return fn(n, spec, model).value


def cumulant_poly(n: int, spec: GraphSpec, model: ModelConfig) -> LambdaPoly:
    """Memoised ``cumulant(n, spec, model).value``."""
    return _cached("cumulant", n, spec, model)


def moment_poly(n: int, spec: GraphSpec, model: ModelConfig) -> LambdaPoly:
    """Memoised ``moment(n, spec, model).value``."""
    return _cached("moment", n, spec, model)


# ---------------------------------------------------------------------------
# moment / cumulant conversion
# ---------------------------------------------------------------------------


def _integer_partitions(n: int, largest: int | None = None):
    """Integer partitions of ``n`` as non-increasing tuples."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _integer_partitions(n - k, k):
            yield (k,) + rest


def _set_partition_count(shape: tuple[int, ...]) -> int:
    """Number of set partitions of ``[sum(shape)]`` with these block sizes."""
    n = sum(shape)
    out = factorial(n)
    for b in shape:
        out //= factorial(b)
    for mult in Counter(shape).values():
        out //= factorial(mult)
    return out


def _product(values):
    out = None
    for v in values:
        out = v if out is None else out * v
    return out


def moments_to_cumulants(moments: Sequence) -> list:
    """Cumulants ``kappa_1..kappa_n`` from raw moments ``m_1..m_n``.

    ``kappa_n = sum over set partitions rho of [n] of
    (-1)^(|rho|-1) (|rho|-1)! prod_b m_|b|``, grouped by block-size shape.
    Works for any ring elements (ints, Fractions, LambdaPoly, floats).
    """
    moments = list(moments)
    if not moments:
        raise DomainError("at least one moment is required")
    out = []
    for n in range(1, len(moments) + 1):
        total = None
        for shape in _integer_partitions(n):
            k = len(shape)
            w = (-1) ** (k - 1) * factorial(k - 1) * _set_partition_count(shape)
            term = _product(moments[b - 1] for b in shape) * w
            total = term if total is None else total + term
        out.append(total)
    return out


def cumulants_to_moments(cumulants: Sequence) -> list:
    """Raw moments ``m_1..m_n`` from cumulants: ``m_n = sum_rho prod_b kappa_|b|``."""
    cumulants = list(cumulants)
    if not cumulants:
        raise DomainError("at least one cumulant is required")
    out = []
    for n in range(1, len(cumulants) + 1):
        total = None
        for shape in _integer_partitions(n):
            term = _product(cumulants[b - 1] for b in shape) * _set_partition_count(shape)
            total = term if total is None else total + term
        out.append(total)
    return out


def mixed_cumulant(moment_of: Callable[[tuple[int, ...]], object], n: int):
    """Joint cumulant of ``X_1..X_n`` from mixed moments of index subsets.

    ``moment_of(indices)`` returns ``E[prod_{i in indices} X_i]`` for a
    sorted tuple of 1-based indices.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    memo = {}

    def mm(block):
        if block not in memo:
            memo[block] = moment_of(block)
        return memo[block]

    total = None
    for p in enumerate_partitions(GroundSet((1,) * n)):
        k = len(p)
        w = (-1) ** (k - 1) * factorial(k - 1)
        term = _product(mm(tuple(i for i, _ in b)) for b in p.blocks) * w
        total = term if total is None else total + term
    return total


def normalized_cumulant(n: int, spec: GraphSpec, model: ModelConfig, lam: float) -> float:
    """``kappa_n(lam) / kappa_2(lam)^(n/2)`` of the standardized count."""
    if n < 2:
        raise DomainError("normalized cumulants start at order 2")
    if not lam > 0:
        raise DomainError("the intensity must be positive")
    k2 = cumulant_poly(2, spec, model).evaluate(lam)
    if k2 <= 0:
        raise DomainError("zero variance")
    if n == 2:
        return 1.0
    return cumulant_poly(n, spec, model).evaluate(lam) / k2 ** (n / 2)
