"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs once untimed on both backends so that JIT compilation is
excluded, then the best of ``--repeat`` runs is reported.
"""
import argparse
import time

import numpy as np

from rcmcumulants import _kernels, golden
from rcmcumulants._accel import HAVE_NUMBA
from rcmcumulants.diagram import kernel_arrays
from rcmcumulants.model import ModelConfig
from rcmcumulants.partitions import GroundSet, iter_partition_chunks, partition_census
from rcmcumulants.simulator import SimConfig, _plan, sample_rcm


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_enumeration(backend, repeat):
    g = GroundSet.uniform(6, 2)
    return _best(lambda: partition_census(g, "connected_non_flat", backend=backend), repeat)


def bench_determinants(backend, repeat):
    specs = [golden.TRIANGLE_THREE_ENDPOINTS] * 4
    g = GroundSet((3, 3, 3, 3))
    edges, anchors, m = kernel_arrays(specs, g)
    chunks = list(iter_partition_chunks(g, "connected_non_flat"))

    def run():
        for codes, nblocks in chunks:
            _kernels.gram_determinants(codes, nblocks, edges, anchors, m, 0, backend)
    return _best(run, repeat)


def bench_embeddings(backend, repeat):
    model = ModelConfig(d=1)
    plan = _plan(golden.THREE_VERTEX_PATH)
    rng = np.random.default_rng(7)
    samples = [sample_rcm(model, SimConfig(10.0, replications=40, L=4.0), rng, m=2) for _ in range(200)]
    args = []
    for s in samples:
        cand = np.ones((len(plan.attach), s.size), dtype=bool)
        for v, js in enumerate(plan.attach):
            for j in js:
                cand[v] &= s.endpoint_adj[j]
        args.append((s.adj, cand))

    def run():
        for adj, cand in args:
            _kernels.count_embeddings_arrays(adj, cand, plan.order, plan.back_edges, plan.back_ptr, backend)
    return _best(run, repeat)


BENCHES = {
    "enumeration [6]x[2]": bench_enumeration,
    "determinants [4]x[3] triangle": bench_determinants,
    "embeddings 200 samples": bench_embeddings,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; both columns time the numpy fallback")
    print(f"{'kernel':32s} {'numba (s)':>10s} {'numpy (s)':>10s} {'speedup':>8s}")
    for name, fn in BENCHES.items():
        fast = fn("numba" if HAVE_NUMBA else "numpy", args.repeat)
        slow = fn("numpy", args.repeat)
        print(f"{name:32s} {fast:10.4f} {slow:10.4f} {slow / fast:8.1f}")


if __name__ == "__main__":
    main()
