import csv
import subprocess
import sys
from pathlib import Path

import pytest

from speedsched.cli import main
from speedsched.experiment import ConfigError, load_config

DATA = Path(__file__).parent / "data"


def write_cfg(tmp_path, body, name="exp.ini"):
    p = tmp_path / name
    p.write_text(body)
    return p


SMALL = """
[workload]
source = synthetic
n_jobs = 100

[experiment]
policies = FCFS, UDSU, NUBSU, FSU
rho = 1.1
urgent_fractions = 0, 0.5
seeds = 0, 1

[output]
dir = out
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_writes_reports(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["simulate", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    for name in ("raw.csv", "summary.csv", "summary.md", "dnuji.csv", "records/index.csv"):
        assert (out / name).exists(), name
    rows = read_csv(out / "summary.csv")
    assert len(rows) == 4 * 2
    fcfs = [r for r in rows if r["policy"] == "FCFS"]
    assert {r["achieved_ratio"] for r in fcfs} == {"-", "0.0"}
    assert {r["slowdown_nonurgent"] for r in fcfs} == {"0.0"}
    assert "| Urgent jobs" in (out / "summary.md").read_text()


def test_reruns_are_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b")])
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert files
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


def test_unknown_policy_lists_valid_names(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["simulate", "--config", str(cfg), "--policy", "LIFO"]) == 2
    err = capsys.readouterr().err
    assert "LIFO" in err and "FCFS" in err and "NUBSU" in err


def test_fine_grained_forbids_positional(tmp_path, capsys):
    cfg = write_cfg(tmp_path, SMALL.replace("seeds = 0, 1", "seeds = 0\nmode = fine-grained")
                    .replace("FCFS, UDSU", "MPF, UDSU"))
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert "MPF" in capsys.readouterr().err


def test_invalid_configs(tmp_path, capsys):
    bad = write_cfg(tmp_path, "[workload]\nsource = martian\n", "bad.ini")
    assert main(["simulate", "--config", str(bad)]) == 2
    assert main(["simulate", "--config", str(tmp_path / "missing.ini")]) == 2
    frac = write_cfg(tmp_path, SMALL.replace("0, 0.5", "0, 1.5"), "frac.ini")
    with pytest.raises(ConfigError):
        load_config(frac).validate()


def test_policy_flags_share_jobs(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    assert main(["simulate", "--config", str(cfg), "--policy", "FCFS", "--policy", "SRPT",
                 "--seed-override", "3", "--format", "csv"]) == 0
    out = tmp_path / "out"
    assert not (out / "summary.md").exists()
    index = read_csv(out / "records" / "index.csv")
    assert {r["policy"] for r in index} == {"FCFS", "SRPT"} and {r["seed"] for r in index} == {"3"}
    by = {}
    for r in index:
        recs = read_csv(out / r["file"])
        by.setdefault(r["urgent_fraction"], []).append([(x["job_id"], x["arrival"], x["duration"]) for x in recs])
    for lists in by.values():
        assert lists[0] == lists[1]


def test_compare_single_policy_is_diagonal(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    main(["simulate", "--config", str(cfg), "--policy", "SJF"])
    assert main(["compare", "--runs", str(tmp_path / "out")]) == 0
    rows = read_csv(tmp_path / "out" / "pairwise.csv")
    assert rows and all(r["policy"] == r["versus"] == "SJF" for r in rows)
    assert all(float(r["speedup_pct"]) == float(r["slowdown_pct"]) == 0.0 for r in rows)


def test_compare_matrix_antisymmetric(tmp_path):
    cfg = write_cfg(tmp_path, SMALL)
    main(["simulate", "--config", str(cfg), "--policy", "FCFS", "--policy", "SRPT", "--policy", "RR"])
    main(["compare", "--runs", str(tmp_path / "out"), "--out", str(tmp_path / "cmp")])
    rows = read_csv(tmp_path / "cmp" / "pairwise.csv")
    cell = {(r["rho"], r["urgent_fraction"], r["policy"], r["versus"]): r for r in rows}
    for (rho, frac, x, y), r in cell.items():
        assert r["speedup_pct"] == cell[rho, frac, y, x]["slowdown_pct"]


def test_compare_without_records(tmp_path):
    assert main(["compare", "--runs", str(tmp_path)]) == 2


TRACE = """arrival,url,size,status
10.0,/a,2048,200
10.2,/b,900000,200
10.3,/c,40000,200
10.31,/d,120000,200
10.5,/e,5000,200
11.0,/f,30,200
11.1,/g,300000,200
"""


def test_ingest_then_simulate_matches_direct_trace(tmp_path):
    trace = tmp_path / "trace.csv"
    trace.write_text(TRACE)
    jobs = tmp_path / "jobs.csv"
    assert main(["ingest", "--webtrace", str(trace), "--scenario", "1", "--out", str(jobs)]) == 0
    common = "[experiment]\npolicies = PS, SRPT(by=bytes), SSU, DSU, FCFS\nseeds = 0\nquantum = 0.01\nuser_abort = yes\n"
    two = write_cfg(tmp_path, f"[workload]\nsource = jobs\npath = jobs.csv\n{common}[output]\ndir = two\n", "two.ini")
    one = write_cfg(tmp_path, f"[workload]\nsource = webtrace\nscenario = 1\npath = trace.csv\n{common}"
                    "[output]\ndir = one\n", "one.ini")
    assert main(["simulate", "--config", str(two)]) == 0
    assert main(["simulate", "--config", str(one)]) == 0
    for f in ("summary.csv", "raw.csv"):
        assert (tmp_path / "one" / f).read_bytes() == (tmp_path / "two" / f).read_bytes()
    assert len(read_csv(tmp_path / "one" / "records" / "index.csv")) == 5


def test_ingest_pacct(tmp_path, capsys):
    out = tmp_path / "jobs.csv"
    assert main(["ingest", "--pacct", str(DATA / "pacct_sample.txt"), "--out", str(out)]) == 0
    assert "3 jobs" in capsys.readouterr().out
    assert len(read_csv(out)) == 3


def test_conflicting_flags_are_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["ingest", "--pacct", "a", "--webtrace", "b", "--out", str(tmp_path / "x")])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["ingest", "--webtrace", "b", "--out", str(tmp_path / "x")])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["ingest", "--pacct", "a", "--scenario", "1", "--out", str(tmp_path / "x")])
    assert e.value.code == 2


def test_help_documents_experiments():
    res = subprocess.run([sys.executable, "-m", "speedsched", "simulate", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for phrase in ("no_constraints.ini", "fine_grained.ini", "--pacct", "web_scenario2.ini", "cpu.ini",
                   "compare --runs"):
        assert phrase in res.stdout


def test_shipped_configs_parse():
    for cfg in (Path(__file__).parents[1] / "configs").glob("*.ini"):
        load_config(cfg).validate()
