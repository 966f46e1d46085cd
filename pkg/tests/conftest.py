"""Shared brute-force oracles.  None of them reuse package internals."""
import itertools
import math
import os

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def set_partitions(items):
    """All set partitions of a list, as lists of blocks (recursive, textbook)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def ground(rows):
    return [(i + 1, j + 1) for i, r in enumerate(rows) for j in range(r)]


def brute_non_flat(blocks):
    return all(len({i for i, _ in b}) == len(b) for b in blocks)


def brute_connected(blocks, n_rows):
    seen, todo = {1}, [1]
    while todo:
        row = todo.pop()
        for b in blocks:
            rows = {i for i, _ in b}
            if row in rows:
                for q in rows - seen:
                    seen.add(q)
                    todo.append(q)
    return len(seen) == n_rows


def brute_census(rows, kind):
    hist = {}
    for blocks in set_partitions(ground(rows)):
        if kind != "all" and not brute_non_flat(blocks):
            continue
        if kind == "connected_non_flat" and not brute_connected(blocks, len(rows)):
            continue
        hist[len(blocks)] = hist.get(len(blocks), 0) + 1
    return hist


def cofactor_det(M):
    """Laplace expansion along the first row, exact on Python ints."""
    n = len(M)
    if n == 0:
        return 1
    if n == 1:
        return M[0][0]
    total = 0
    for j in range(n):
        if M[0][j]:
            minor = [row[:j] + row[j + 1:] for row in M[1:]]
            total += (-1) ** j * M[0][j] * cofactor_det(minor)
    return total


def brute_embeddings(adj, eadj, spec):
    """Count ordered injections by scanning every r-tuple of sample points."""
    k = adj.shape[0]
    count = 0
    for tup in itertools.permutations(range(k), spec.r):
        if all(adj[tup[a - 1], tup[b - 1]] for a, b in spec.edges) and all(
                eadj[j - 1, tup[v - 1]] for ep, j in zip(spec.endpoints, spec.attaches) for v in ep):
            count += 1
    return count


def poly_float(poly, lam):
    return math.fsum(float(c) * lam ** k for k, c in poly.coeffs.items())


def rel_close(a, b, tol):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1e-300)


RNG = np.random.default_rng


_ACCEPTANCE: dict = {}


@pytest.fixture
def acceptance_lines():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for i in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[i])
