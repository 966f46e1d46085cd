"""``rcm`` command-line front end.

Results go to stdout as a single JSON document (or CSV for sweeps); logs and
progress go to stderr.  Every document echoes the job that produced it, and
``rcm run JOBFILE`` replays such a job.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import engine, golden, stats
from .diagram import GraphSpec
from .errors import DomainError, RCMError
from .model import ModelConfig
from .partitions import GroundSet, partition_census
from .simulator import SimConfig, estimate

log = logging.getLogger("rcmcumulants")

COMMANDS = ("partitions", "moment", "cumulant", "joint-moment", "joint-cumulant", "connectivity",
            "gram-charlier", "simulate", "validate")


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _dump(obj, indent, 0)


def _float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def _dump(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if len(obj) <= 4 and all(isinstance(v, (int, float, str, np.number)) or v is None for v in obj.values()):
            return "{" + ", ".join(f"{json.dumps(str(k))}: {_dump(v, indent, level + 1)}"
                                   for k, v in obj.items()) + "}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _dump(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# job description
# ---------------------------------------------------------------------------


@dataclass
class JobSpec:
    command: str
    graphs: list = field(default_factory=list)
    model: dict = field(default_factory=lambda: ModelConfig().to_json())
    order: int | None = None
    lambdas: list = field(default_factory=list)
    format: str = "json"
    workers: int = 1
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise DomainError(f"unknown output format {self.format!r}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data) -> "JobSpec":
        if isinstance(data, str):
            data = json.loads(data)
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise DomainError(f"unknown job fields: {sorted(extra)}")
        return cls(**data)

    def specs(self) -> list[GraphSpec]:
        return [GraphSpec.from_json(g) for g in self.graphs]

    def model_config(self) -> ModelConfig:
        return ModelConfig.from_json(self.model)


def _read_graph(text: str) -> dict:
    """Inline JSON, ``@path``, a path to a JSON file, or a named reference graph."""
    if text in golden.GRAPHS:
        return golden.GRAPHS[text].to_json()
    if text.startswith("@"):
        text = text[1:]
    elif not os.path.exists(text):
        return _loads(text, "graph spec")
    try:
        with open(text) as fh:
            return _loads(fh.read(), f"graph spec file {text}")
    except OSError as exc:
        raise DomainError(f"cannot read graph spec: {exc}") from None


def _loads(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"malformed {what}: {exc}") from None


def _float_list(text: str) -> list[float]:
    try:
        if ":" in text:
            parts = text.split(":")
            a, b, num = float(parts[0]), float(parts[1]), int(parts[2])
            scale = parts[3] if len(parts) > 3 else "lin"
            grid = np.geomspace(a, b, num) if scale == "log" else np.linspace(a, b, num)
            return [float(v) for v in grid]
        return [float(v) for v in text.split(",") if v.strip()]
    except (ValueError, IndexError):
        raise DomainError(f"cannot parse number list {text!r} (use a,b,c or start:stop:num[:log])") from None


def _job_from_args(args) -> JobSpec:
    graphs = []
    for g in getattr(args, "graph", None) or []:
        data = _read_graph(g)
        graphs.extend(data if isinstance(data, list) else [data])
    model = None
    if hasattr(args, "d"):
        endpoints = None if args.endpoints is None else _loads(args.endpoints, "endpoint list")
        model = ModelConfig(d=args.d, beta=args.beta, intensity=args.intensity,
                            endpoints=None if endpoints is None else tuple(tuple(y) for y in endpoints)).to_json()
    opts = {}
    for key in ("rows", "r", "filter", "x_grid", "kappas", "series_order", "replications", "batches",
                "window", "per_replication_csv", "suite", "backend", "lam"):
        if getattr(args, key, None) is not None:
            opts[key] = getattr(args, key)
    lambdas = _float_list(args.lambdas) if getattr(args, "lambdas", None) else []
    return JobSpec(command=args.command, graphs=graphs, model=model or ModelConfig().to_json(),
                   order=getattr(args, "n", None), lambdas=lambdas,
                   format=getattr(args, "format", "json") or "json",
                   workers=args.workers if args.workers is not None else (os.cpu_count() or 1),
                   seed=getattr(args, "seed", 0) or 0, options=opts)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _need_order(job) -> int:
    if job.order is None:
        raise DomainError(f"{job.command} needs an order (-n)")
    return int(job.order)


def _one_spec(job) -> GraphSpec:
    specs = job.specs()
    if len(specs) != 1:
        raise DomainError(f"{job.command} needs exactly one graph spec, got {len(specs)}")
    return specs[0]


def _result_doc(job, res: engine.CumulantResult) -> dict:
    doc = res.to_json()
    doc["polynomial"] = repr(res.value)
    doc["float_coefficients"] = {str(k): float(v) for k, v in sorted(res.value.coeffs.items())}
    doc["job"] = job.to_json()
    return doc


def _cmd_partitions(job) -> str:
    o = job.options
    if "rows" in o:
        rows = tuple(int(v) for v in str(o["rows"]).split(","))
    else:
        if job.order is None or "r" not in o:
            raise DomainError("partitions needs -n and -r, or --rows")
        rows = (int(o["r"]),) * _need_order(job)
    g = GroundSet(rows)
    t0 = time.perf_counter()
    c = partition_census(g, o.get("filter", "connected_non_flat"), backend=o.get("backend"),
                         workers=job.workers)
    doc = {"row_sizes": list(rows), "filter": o.get("filter", "connected_non_flat"), **c.to_json(),
           "elapsed_seconds": time.perf_counter() - t0, "job": job.to_json()}
    return dumps(doc)


def _cmd_summed(job) -> str:
    model = job.model_config()
    be = job.options.get("backend")
    if job.command in ("moment", "cumulant"):
        fn = engine.moment if job.command == "moment" else engine.cumulant
        res = fn(_need_order(job), _one_spec(job), model, workers=job.workers, backend=be)
    else:
        fn = engine.joint_moment if job.command == "joint-moment" else engine.joint_cumulant
        res = fn(job.specs(), model, workers=job.workers, backend=be)
    return dumps(_result_doc(job, res))


def _cmd_connectivity(job) -> str:
    spec, model = _one_spec(job), job.model_config()
    if not job.lambdas:
        raise DomainError("connectivity needs a lambda grid (--lambdas)")
    order = int(job.options.get("series_order", 4))
    rows = []
    for lam in job.lambdas:
        lb = stats.connectivity_lower_bound(spec, model, lam)
        s = stats.connectivity_series(spec, model, lam, order)
        rows.append((lam, lb, s.value, s.last_gap))
    if job.format == "json":
        keys = ("lambda", "lower_bound", "series_estimate", "last_gap")
        return dumps({"rows": [dict(zip(keys, r)) for r in rows], "series_order": order, "job": job.to_json()})
    return _csv(("lambda", "lower_bound", "series_estimate", "last_gap"), rows)


def _cmd_gram_charlier(job) -> str:
    order = _need_order(job)
    o = job.options
    if "kappas" in o:
        kap = _float_list(o["kappas"])
        coeffs = stats.GramCharlierCoeffs(*kap[:4], *kap[4:6])
    else:
        if "lam" not in o:
            raise DomainError("gram-charlier needs --lambda or --kappas")
        spec, model = _one_spec(job), job.model_config()
        polys = [engine.cumulant_poly(k, spec, model) for k in range(1, min(order, 4) + 1)]
        coeffs = stats.GramCharlierCoeffs.from_polys(polys, float(o["lam"]))
    if "x_grid" in o:
        xs = _float_list(o["x_grid"])
    else:
        s = math.sqrt(coeffs.kappa2)
        xs = [float(v) for v in np.linspace(coeffs.kappa1 - 5 * s, coeffs.kappa1 + 5 * s, 201)]
    rows = [(x, stats.gc_density(order, coeffs, x)) for x in xs]
    if job.format == "json":
        return dumps({"order": order, "coefficients": {"c3": coeffs.c3, "c4": coeffs.c4, "c6": coeffs.c6},
                      "x": [r[0] for r in rows], "density": [r[1] for r in rows], "job": job.to_json()})
    return _csv(("x", "density"), rows)


def _cmd_simulate(job) -> str:
    spec, model = _one_spec(job), job.model_config()
    o = job.options
    lam = float(o.get("lam", job.lambdas[0] if job.lambdas else float("nan")))
    sim = SimConfig(lam=lam, replications=int(o.get("replications", 10_000)), seed=int(job.seed),
                    batches=int(o.get("batches", 20)), L=o.get("window"))
    res = estimate(model, spec, sim, workers=job.workers, backend=o.get("backend"))
    path = o.get("per_replication_csv")
    if path:
        with open(path, "w") as fh:
            fh.write(_csv(("replication", "count"), enumerate(res.counts.tolist())))
    doc = res.to_json()
    doc["job"] = job.to_json()
    return dumps(doc)


def run_table_suite() -> dict:
    """Every reference exact value and census, checked against this package."""
    checks = []

    def add(name, passed, detail):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})
        log.info("%s %s", "PASS" if passed else "FAIL", name)

    for g in golden.CUMULANTS:
        res = engine.joint_cumulant(g.specs, g.model)
        ok = res.value == g.value and res.partition_count == g.partitions
        add(f"cumulant {g.name}", ok, {"expected": repr(g.value), "got": repr(res.value),
                                       "partitions": res.partition_count})
    deg, lead, count = golden.FIVE_VERTEX_PATH_VARIANCE_LEADING
    res = engine.cumulant(2, golden.FIVE_VERTEX_PATH, golden.GAUSSIAN_D2)
    add("cumulant five_vertex_path_second leading term",
        res.value.degree == deg and res.value.leading() == lead and res.partition_count == count,
        {"expected": repr(lead), "got": repr(res.value.leading()), "partitions": res.partition_count})
    corr = stats.limit_correlation([golden.TRIANGLE, golden.FIVE_VERTEX_PATH], golden.GAUSSIAN_D2)
    add("limit correlation", f"{corr:.6g}" == f"{golden.LIMIT_CORRELATION:.6g}", {"got": corr})
    for c in golden.CENSUSES:
        got = partition_census(GroundSet(c.row_sizes), "connected_non_flat")
        ok = got.total == c.printed_total and (not c.histogram or got.histogram == c.histogram)
        add(f"census {c.name}", ok, {"expected_total": c.printed_total, "got_total": got.total,
                                     "expected": c.histogram, "got": got.histogram})
        # the reference counts came from a single-pass connectivity scan; reproduce them too
        ref = partition_census(GroundSet(c.row_sizes), "reference_scan")
        ok = ref.total == c.printed_total and (not c.histogram or ref.histogram == c.histogram)
        add(f"census {c.name} (reference scan)", ok, {"expected_total": c.printed_total,
                                                      "got_total": ref.total, "got": ref.histogram})
    return {"suite": "tables", "checks": checks, "passed": sum(c["passed"] for c in checks),
            "failed": sum(not c["passed"] for c in checks)}


def _cmd_validate(job) -> tuple[str, int]:
    suite = job.options.get("suite", "tables")
    if suite != "tables":
        raise DomainError(f"unknown validation suite {suite!r}")
    doc = run_table_suite()
    doc["job"] = job.to_json()
    return dumps(doc), (1 if doc["failed"] else 0)


def run(job: JobSpec) -> tuple[str, int]:
    """Execute a job; returns the output document and the exit code."""
    if job.command == "validate":
        return _cmd_validate(job)
    handler = {
        "partitions": _cmd_partitions,
        "moment": _cmd_summed,
        "cumulant": _cmd_summed,
        "joint-moment": _cmd_summed,
        "joint-cumulant": _cmd_summed,
        "connectivity": _cmd_connectivity,
        "gram-charlier": _cmd_gram_charlier,
        "simulate": _cmd_simulate,
    }[job.command]
    return handler(job), 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _model_args(p):
    p.add_argument("-d", type=int, default=1, help="spatial dimension")
    p.add_argument("--beta", default="pi", help="'pi' for the exact path, or a positive decimal")
    p.add_argument("--intensity", choices=("flat", "gaussian"), default="flat")
    p.add_argument("--endpoints", help="endpoint positions as JSON, e.g. '[[0.0],[1.5]]'")


def _graph_args(p, many=False):
    p.add_argument("--graph", "-g", action="append", required=True,
                   help="graph spec: inline JSON, @file, a file path or a reference name"
                   + ("; repeat for several templates" if many else ""))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcm", description="Exact subgraph-count cumulants in the "
                                     "random-connection model.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")
    parser.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", help="census of set partitions")
    p.add_argument("-n", type=int)
    p.add_argument("-r", type=int)
    p.add_argument("--rows", help="comma-separated row sizes, e.g. 3,5")
    p.add_argument("--filter", default="connected_non_flat",
                   help="all | non_flat | connected_non_flat | reference_scan")
    p.add_argument("--backend", choices=("numba", "numpy"))

    for name in ("moment", "cumulant"):
        p = sub.add_parser(name, help=f"exact {name} polynomial in lambda")
        p.add_argument("-n", type=int, required=True)
        _graph_args(p)
        _model_args(p)
        p.add_argument("--backend", choices=("numba", "numpy"))
    for name in ("joint-moment", "joint-cumulant"):
        p = sub.add_parser(name, help=f"exact {name.replace('-', ' ')} of several templates")
        _graph_args(p, many=True)
        _model_args(p)
        p.add_argument("--backend", choices=("numba", "numpy"))

    p = sub.add_parser("connectivity", help="P(N>0) bounds and series over a lambda grid")
    _graph_args(p)
    _model_args(p)
    p.add_argument("--lambdas", required=True, help="a,b,c or start:stop:num[:log]")
    p.add_argument("--series-order", type=int, default=4)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("gram-charlier", help="Gram-Charlier density over an x grid")
    p.add_argument("-n", type=int, default=4, choices=(2, 3, 4), help="expansion order")
    p.add_argument("--graph", "-g", action="append")
    _model_args(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--kappas", help="kappa1,...,kappa4[,kappa5,kappa6] instead of a graph")
    p.add_argument("--x-grid", help="a,b,c or start:stop:num")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("simulate", help="Monte Carlo estimates")
    _graph_args(p)
    _model_args(p)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--replications", type=int, default=10_000)
    p.add_argument("--batches", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=float, help="half-width L of the sampling window")
    p.add_argument("--per-replication-csv", help="also write per-replication counts here")
    p.add_argument("--backend", choices=("numba", "numpy"))

    p = sub.add_parser("validate", help="check every reference table value")
    p.add_argument("--suite", default="tables")

    p = sub.add_parser("run", help="replay a serialized job file")
    p.add_argument("jobfile")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            try:
                with open(args.jobfile) as fh:
                    text = fh.read()
            except OSError as exc:
                raise DomainError(f"cannot read job file: {exc}") from None
            data = _loads(text, "job file")
            job = JobSpec.from_json(data.get("job", data) if isinstance(data, dict) else data)
            if args.workers is not None:
                job.workers = args.workers
        else:
            job = _job_from_args(args)
        out, code = run(job)
    except RCMError as exc:
        print(f"rcm: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except TypeError as exc:
        print(f"rcm: error: malformed job: {exc}", file=sys.stderr)
        return DomainError.exit_code
    sys.stdout.write(out if out.endswith("\n") else out + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
