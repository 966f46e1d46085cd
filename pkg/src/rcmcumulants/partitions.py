"""Set partitions of multirow ground sets.

A ground set with row sizes ``(r_1, ..., r_n)`` has elements ``(i, j)`` with
``1 <= i <= n`` and ``1 <= j <= r_i``.  Partitions are stored as
restricted-growth strings (RGS) over the elements in row-major order, which
gives a unique, hashable canonical encoding whose block order is the order
of each block's smallest element.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _kernels
from ._accel import backend as _backend
from .errors import DomainError, ResourceLimitError

LIMIT_ENV = "RCM_MAX_GROUND_SET"
DEFAULT_LIMIT = 16

# number of trailing elements completed inside one enumeration task
_TASK_DEPTH = 8

FILTERS = ("all", "non_flat", "connected_non_flat", "reference_scan")
_FILTER_ALIASES = {
    "all": "all",
    "non_flat": "non_flat",
    "nonflat": "non_flat",
    "non-flat": "non_flat",
    "connected_non_flat": "connected_non_flat",
    "connected-nonflat": "connected_non_flat",
    "connected-non-flat": "connected_non_flat",
    "connected_nonflat": "connected_non_flat",
    "reference_scan": "reference_scan",
    "reference-scan": "reference_scan",
}


def normalize_filter(name: str) -> str:
    try:
        return _FILTER_ALIASES[name.strip().lower()]
    except KeyError:
        raise DomainError(f"unknown partition filter {name!r}; expected one of {FILTERS}") from None


def ground_set_limit(limit: int | None = None) -> int:
    if limit is not None:
        return int(limit)
    return int(os.environ.get(LIMIT_ENV, DEFAULT_LIMIT))


@dataclass(frozen=True)
class GroundSet:
    """Disjoint union of rows ``pi_i = {(i,1), ..., (i,r_i)}``."""

    row_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(r) for r in self.row_sizes)
        if not sizes or any(r < 1 for r in sizes):
            raise DomainError(f"row sizes must be a non-empty list of positive integers, got {sizes}")
        object.__setattr__(self, "row_sizes", sizes)

    @classmethod
    def uniform(cls, n: int, r: int) -> "GroundSet":
        """The rectangular ground set ``[n] x [r]``."""
        return cls((r,) * n)

    @property
    def n_rows(self) -> int:
        return len(self.row_sizes)

    @property
    def size(self) -> int:
        return sum(self.row_sizes)

    @cached_property
    def elements(self) -> tuple[tuple[int, int], ...]:
        return tuple((i + 1, j + 1) for i, r in enumerate(self.row_sizes) for j in range(r))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for r in self.row_sizes:
            out.append(acc)
            acc += r
        return tuple(out)

    @cached_property
    def row_of(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_rows, dtype=np.int64), self.row_sizes)

    def index(self, e: tuple[int, int]) -> int:
        """0-based position of element ``e`` in row-major order."""
        i, j = e
        if not (1 <= i <= self.n_rows and 1 <= j <= self.row_sizes[i - 1]):
            raise DomainError(f"element {e} is outside the ground set with rows {self.row_sizes}")
        return self.offsets[i - 1] + j - 1


@dataclass(frozen=True)
class SetPartition:
    """A partition of a :class:`GroundSet` in canonical RGS form."""

    ground: GroundSet
    codes: tuple[int, ...]
    _blocks: tuple = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        codes = tuple(int(c) for c in self.codes)
        if len(codes) != self.ground.size:
            raise DomainError("RGS length does not match the ground set size")
        top = -1
        for c in codes:
            if c < 0 or c > top + 1:
                raise DomainError(f"{codes} is not a restricted-growth string")
            top = max(top, c)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_blocks(cls, ground: GroundSet, blocks: Iterable[Iterable[tuple[int, int]]]) -> "SetPartition":
        """Build from blocks of ``(row, column)`` pairs in any order."""
        label = [-1] * ground.size
        for b, block in enumerate(blocks):
            members = list(block)
            if not members:
                raise DomainError("partition blocks must be non-empty")
            for e in members:
                k = ground.index(tuple(e))
                if label[k] != -1:
                    raise DomainError(f"element {tuple(e)} appears in two blocks")
                label[k] = b
        if -1 in label:
            missing = ground.elements[label.index(-1)]
            raise DomainError(f"element {missing} is not covered by any block")
        remap: dict[int, int] = {}
        codes = []
        for b in label:
            codes.append(remap.setdefault(b, len(remap)))
        return cls(ground, tuple(codes))

    @classmethod
    def from_codes(cls, ground: GroundSet, codes: Sequence[int]) -> "SetPartition":
        return cls(ground, tuple(int(c) for c in codes))

    def __len__(self) -> int:
        return max(self.codes) + 1

    @property
    def blocks(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        if self._blocks is None:
            out: list[list] = [[] for _ in range(len(self))]
            for e, c in zip(self.ground.elements, self.codes):
                out[c].append(e)
            object.__setattr__(self, "_blocks", tuple(tuple(b) for b in out))
        return self._blocks

    def encode(self) -> bytes:
        """Byte encoding; equal partitions of one ground set give equal bytes."""
        return bytes(self.codes)

    def __str__(self) -> str:
        inner = ", ".join("{" + ", ".join(f"({i},{j})" for i, j in b) + "}" for b in self.blocks)
        return "{" + inner + "}"


def block_index(p: SetPartition, e: tuple[int, int]) -> int:
    """1-based canonical index of the block of ``p`` containing ``e``."""
    return p.codes[p.ground.index(tuple(e))] + 1


def is_non_flat(p: SetPartition) -> bool:
    """True iff no block holds two elements of the same row."""
    seen = set()
    for (i, _), c in zip(p.ground.elements, p.codes):
        if (c, i) in seen:
            return False
        seen.add((c, i))
    return True


def row_components(p: SetPartition) -> list[tuple[int, ...]]:
    """Partition of the rows ``[n]`` into components linked by blocks.

    Rows are 1-based; components are sorted by their smallest row.
    """
    n = p.ground.n_rows
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for block in p.blocks:
        rows = [i - 1 for i, _ in block]
        for a in rows[1:]:
            ra, rb = find(rows[0]), find(a)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[int]] = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(i + 1)
    return sorted((tuple(c) for c in comps.values()), key=lambda c: c[0])


def is_connected(p: SetPartition) -> bool:
    """True iff the blocks link all rows into one component (n=1 always is)."""
    return len(row_components(p)) == 1


def is_reference_scan_connected(p: SetPartition) -> bool:
    """Single left-to-right scan over blocks in canonical order.

    The first block touching two or more rows seeds a row set; later
    multi-row blocks are merged only if they meet the current set.  Blocks
    that would only link up after a later merge are never revisited, so this
    accepts a strict subset of the connected partitions once ``n >= 4``.
    """
    if p.ground.n_rows == 1:
        return True
    rows: set[int] = set()
    for block in p.blocks:
        brows = {i for i, _ in block}
        if len(brows) > 1:
            if not rows:
                rows = set(brows)
            elif rows & brows:
                rows |= brows
    return len(rows) == p.ground.n_rows


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------


def _check_limit(g: GroundSet, limit: int | None):
    lim = ground_set_limit(limit)
    if g.size > lim:
        raise ResourceLimitError(
            f"ground set has {g.size} elements, above the enumeration limit of {lim} "
            f"(raise it with {LIMIT_ENV} or limit=)", limit=lim)


def _reference_scan_mask(codes: np.ndarray, row_of: np.ndarray, n_rows: int) -> np.ndarray:
    P, N = codes.shape
    if n_rows == 1:
        return np.ones(P, dtype=bool)
    width = int(codes.max()) + 1 if P else 0
    masks = np.zeros((P, width), dtype=np.int64)
    rows = np.arange(P)
    c64 = codes.astype(np.int64)
    for e in range(N):
        masks[rows, c64[:, e]] |= np.int64(1) << int(row_of[e])
    q = np.zeros(P, dtype=np.int64)
    for b in range(width):
        m = masks[:, b]
        cross = (m & (m - 1)) != 0
        seed = cross & (q == 0)
        grow = cross & (q != 0) & ((q & m) != 0)
        q = np.where(seed | grow, q | m, q)
    return q == np.int64((1 << n_rows) - 1)


def _tasks(g: GroundSet, nonflat: bool, be: str) -> np.ndarray:
    plen = max(1, g.size - _TASK_DEPTH)
    if plen == 1:
        return np.zeros((1, 1), dtype=np.int64)
    prefixes, _ = _kernels.partitions_from_prefix(
        g.row_of[:plen], g.n_rows, np.array([0]), nonflat, False, be)
    return prefixes.astype(np.int64)


def _run_task(args):
    row_of, n_rows, prefix, kind, be, store = args
    nonflat = kind != "all"
    connected = kind == "connected_non_flat"
    if kind == "reference_scan":
        codes, nb = _kernels.partitions_from_prefix(row_of, n_rows, prefix, True, False, be)
        keep = _reference_scan_mask(codes, row_of, n_rows)
        codes, nb = codes[keep], nb[keep]
        if store:
            return codes, nb
        return None, np.bincount(nb, minlength=len(row_of) + 1)[: len(row_of) + 1]
    return _kernels.partitions_from_prefix(row_of, n_rows, prefix, nonflat, connected, be, store=store)


def _run_task_then(args):
    func, task = args
    codes, nb = _run_task(task)
    return func(codes, nb)


def _map_tasks(g, kind, be, store, workers, func=None):
    nonflat = kind != "all"
    jobs = [(g.row_of, g.n_rows, pre, kind, be, store) for pre in _tasks(g, nonflat, be)]
    run = _run_task
    if func is not None:
        jobs = [(func, job) for job in jobs]
        run = _run_task_then
    if workers is None or workers <= 1 or len(jobs) <= 1:
        yield from map(run, jobs)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(run, jobs)


def map_partition_chunks(g: GroundSet, filter: str, func, *, limit: int | None = None,
                         backend: str | None = None, workers: int | None = 1) -> Iterator:
    """Apply ``func(codes, nblocks)`` to every enumeration chunk, in order.

    With ``workers > 1`` chunks are processed in a process pool, so ``func``
    must be picklable.
    """
    kind = normalize_filter(filter)
    _check_limit(g, limit)
    be = _backend(backend)
    yield from _map_tasks(g, kind, be, True, workers, func)


def iter_partition_chunks(g: GroundSet, filter: str = "all", *, limit: int | None = None,
                          backend: str | None = None, workers: int | None = 1
                          ) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield ``(codes, nblocks)`` array chunks of qualifying partitions.

    Chunks come in a fixed order and their concatenation is the
    lexicographic list of RGS codes, whatever the worker count.
    """
    kind = normalize_filter(filter)
    _check_limit(g, limit)
    be = _backend(backend)
    for codes, nb in _map_tasks(g, kind, be, True, workers):
        if codes.shape[0]:
            yield codes, nb


def enumerate_partitions(g: GroundSet, filter: str = "all", *, limit: int | None = None,
                         backend: str | None = None, workers: int | None = 1) -> Iterator[SetPartition]:
    """Stream every partition of ``g`` passing ``filter`` exactly once.

    ``filter`` is ``"all"``, ``"non_flat"``, ``"connected_non_flat"`` or
    ``"reference_scan"``.  Non-flat filters prune during generation, so
    flat partitions are never materialised.  Raises
    :class:`ResourceLimitError` past the ground-set limit.
    """
    for codes, _ in iter_partition_chunks(g, filter, limit=limit, backend=backend, workers=workers):
        for row in codes.tolist():
            yield SetPartition(g, tuple(row))


@dataclass(frozen=True)
class Census:
    histogram: dict[int, int]
    total: int

    def to_json(self) -> dict:
        return {"histogram": {str(k): v for k, v in sorted(self.histogram.items())}, "total": self.total}


def partition_census(g: GroundSet, filter: str = "all", *, limit: int | None = None,
                     backend: str | None = None, workers: int | None = 1) -> Census:
    """Histogram of block counts over the qualifying partitions."""
    kind = normalize_filter(filter)
    _check_limit(g, limit)
    be = _backend(backend)
    hist = np.zeros(g.size + 1, dtype=np.int64)
    for _, h in _map_tasks(g, kind, be, False, workers):
        hist += h
    histogram = {k: int(v) for k, v in enumerate(hist) if v}
    return Census(histogram, int(hist.sum()))


def bell_number(n: int) -> int:
    """Bell number via the Bell triangle."""
    if n < 0:
        raise DomainError("Bell numbers are defined for n >= 0")
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def connected_nonflat_upper_bound(n: int, r: int) -> int:
    """``n!^r * r!^(n-1)``, an upper bound on connected non-flat partitions of [n]x[r]."""
    from math import factorial

    return factorial(n) ** r * factorial(r) ** (n - 1)


def maximal_partition_count(n: int, r: int) -> int:
    """Closed-form count of maximal connected non-flat partitions.

    Matches enumeration for ``n <= 2`` only; see the README note.
    """
    out = r ** (n - 1)
    for i in range(1, n):
        out *= 1 + (r - 1) * i
    return out
