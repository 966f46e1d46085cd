import csv
import io
import json
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from rcmcumulants import golden
from rcmcumulants.algebra import LambdaPoly
from rcmcumulants.cli import JobSpec, dumps, main, run

EDGE_JSON = '{"edges":[[1,2]],"endpoints":[[1],[2]]}'


def _run(capsys, *argv):
    code = main(["--workers", "1", *argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_cumulant_command_matches_reference(capsys):
    code, out, _ = _run(capsys, "cumulant", "-n", "2", "-d", "1", "--graph", EDGE_JSON)
    assert code == 0
    doc = json.loads(out)
    assert LambdaPoly.from_json(doc["value"]) == golden.CUMULANTS[1].value
    assert doc["partition_count"] == 6 and doc["exact"] is True
    assert doc["job"]["command"] == "cumulant" and doc["job"]["order"] == 2


def test_partitions_command_census(capsys):
    code, out, _ = _run(capsys, "partitions", "-n", "3", "-r", "2", "--filter", "connected-nonflat")
    assert code == 0
    doc = json.loads(out)
    assert {int(k): v for k, v in doc["histogram"].items()} == {2: 4, 3: 32, 4: 32}
    assert doc["total"] == 68


def test_named_graph_and_joint_cumulant(capsys):
    code, out, _ = _run(capsys, "joint-cumulant", "-g", "single_edge", "-g", "single_edge", "-d", "1")
    assert code == 0
    assert LambdaPoly.from_json(json.loads(out)["value"]) == golden.CUMULANTS[1].value


def test_graph_from_file(capsys, tmp_path):
    path = tmp_path / "edge.json"
    path.write_text(EDGE_JSON)
    code, out, _ = _run(capsys, "moment", "-n", "1", "-g", f"@{path}")
    assert code == 0
    assert LambdaPoly.from_json(json.loads(out)["value"]) == golden.CUMULANTS[0].value


def test_validate_reports_each_check(capsys):
    code, out, _ = _run(capsys, "validate", "--suite", "tables")
    doc = json.loads(out)
    names = {c["name"]: c["passed"] for c in doc["checks"]}
    assert all(names[f"cumulant {g.name}"] for g in golden.CUMULANTS)
    assert names["limit correlation"]
    assert names["census pairs_order3"]
    # reference counts that disagree with the connectivity definition make it fail
    assert not names["census pairs_order4"] and names["census pairs_order4 (reference scan)"]
    assert doc["failed"] > 0 and code == 1


@pytest.mark.parametrize("argv, code", [
    (["cumulant", "-n", "2", "--graph", "{not json"], 3),
    (["cumulant", "-n", "2", "--graph", '{"edges":[[1,1]]}'], 3),
    (["cumulant", "-n", "1", "--graph", '{"edges":[[1,2]]}'], 4),
    (["partitions", "-n", "9", "-r", "2"], 5),
    (["gram-charlier", "-n", "3"], 3),
    (["simulate", "-g", "single_edge", "--lambda", "-1"], 3),
])
def test_exit_codes(capsys, argv, code):
    got, out, err = _run(capsys, *argv)
    assert got == code
    assert out == ""
    assert err.startswith("rcm: error:") and err.count("\n") == 1


def test_argparse_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_divergence_names_partition(capsys):
    _, _, err = _run(capsys, "cumulant", "-n", "1", "--graph", '{"edges":[[1,2]]}')
    assert "{{(1,1)}, {(1,2)}}" in err


def test_connectivity_csv_has_header(capsys):
    code, out, _ = _run(capsys, "connectivity", "-g", "single_edge", "--lambdas", "0.5,1,2")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["lambda", "lower_bound", "series_estimate", "last_gap"]
    assert len(rows) == 4
    lb = float(rows[2][1])
    assert 0 < lb <= 1
    assert len(rows[2][1].replace("-", "").replace(".", "").split("e")[0].lstrip("0")) <= 17


def test_gram_charlier_grid(capsys):
    code, out, _ = _run(capsys, "gram-charlier", "-n", "2", "--kappas", "0,1", "--x-grid=-1:1:3")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "density"]
    assert [float(r[0]) for r in rows[1:]] == [-1.0, 0.0, 1.0]
    assert float(rows[2][1]) == pytest.approx(0.3989422804014327, rel=1e-15)


def test_simulate_and_replay(capsys, tmp_path):
    per = tmp_path / "counts.csv"
    argv = ["simulate", "-g", "single_edge", "--lambda", "1", "--replications", "200", "--batches", "10",
            "--seed", "5", "--per-replication-csv", str(per)]
    code, out, _ = _run(capsys, *argv)
    assert code == 0
    doc = json.loads(out)
    assert set(doc) >= {"estimates", "standard_errors", "config", "seed"}
    assert per.read_text().splitlines()[0] == "replication,count"
    job = tmp_path / "job.json"
    job.write_text(out)
    code, again, _ = _run(capsys, "run", str(job))
    assert code == 0
    assert json.loads(again)["estimates"] == doc["estimates"]


def test_replay_of_cumulant_job(capsys, tmp_path):
    _, out, _ = _run(capsys, "cumulant", "-n", "2", "-g", "single_edge")
    job = tmp_path / "job.json"
    job.write_text(json.dumps(json.loads(out)["job"]))
    code, again, _ = _run(capsys, "run", str(job))
    assert code == 0
    assert json.loads(again)["value"] == json.loads(out)["value"]


def test_floats_have_seventeen_digits():
    assert dumps(0.1) == "0.10000000000000001"
    assert json.loads(dumps({"x": [1 / 3]}))["x"][0] == 1 / 3


def test_stdout_is_only_the_document():
    proc = subprocess.run([sys.executable, "-m", "rcmcumulants.cli", "-v", "--workers", "1", "cumulant",
                           "-n", "1", "-g", "single_edge"], capture_output=True, text=True, check=True)
    json.loads(proc.stdout)
    assert "INFO" in proc.stderr


_model = st.fixed_dictionaries({
    "d": st.integers(1, 3),
    "beta": st.one_of(st.just("pi"), st.floats(0.1, 5.0)),
    "intensity": st.sampled_from(["flat", "gaussian"]),
    "endpoints": st.none(),
})

_jobs = st.builds(
    JobSpec,
    command=st.sampled_from(["partitions", "moment", "cumulant", "joint-cumulant", "connectivity",
                             "gram-charlier", "simulate", "validate"]),
    graphs=st.lists(st.sampled_from([g.to_json() for g in golden.GRAPHS.values()]), max_size=2),
    model=_model,
    order=st.one_of(st.none(), st.integers(1, 4)),
    lambdas=st.lists(st.floats(0.01, 100.0), max_size=3),
    format=st.sampled_from(["json", "csv"]),
    workers=st.integers(1, 8),
    seed=st.integers(0, 2 ** 32),
    options=st.dictionaries(st.sampled_from(["filter", "series_order", "replications"]),
                            st.one_of(st.integers(1, 50), st.text(max_size=5)), max_size=2),
)


@given(_jobs)
def test_jobspec_round_trip(job):
    assert JobSpec.from_json(json.loads(json.dumps(job.to_json()))) == job
    assert JobSpec.from_json(json.loads(dumps(job.to_json()))) == job


def test_run_returns_exit_code():
    job = JobSpec("partitions", order=2, options={"r": 2})
    out, code = run(job)
    assert code == 0 and json.loads(out)["total"] == 6
