"""Config-driven sweeps over policy x load x urgent fraction x seed.

Config files are INI.  Example::

    [workload]
    source = synthetic        ; synthetic | web-synthetic | pacct | webtrace | jobs
    n_jobs = 10000
    mu = 0.04

    [experiment]
    policies = UDSU, NUBSU, FSU
    rho = 1.1
    urgent_fractions = 0, 0.1, 0.2
    seeds = 0, 1, 2, 3, 4
    mode = no-constraints     ; or fine-grained

    [output]
    dir = out/no_constraints
    formats = csv, md

``web-synthetic`` takes ``scenario`` and ``load``; the trace sources take
``path`` (and ``scenario`` for web traces).  ``user_abort = yes`` also runs
processor sharing on each workload and reports the abort percentage
against 95 % of its worst response time.  ``quantum`` sets the time slice of
preemptive policies.
"""
from __future__ import annotations

import configparser
import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import metrics, workload
from .engine import run
from .registry import POSITIONAL, PolicySpec
from .speedup import FINE_GRAINED, NO_CONSTRAINTS

SOURCES = ("synthetic", "web-synthetic", "pacct", "webtrace", "jobs")
FORMATS = ("csv", "md")
MISSING = "-"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    source: str = "synthetic"
    policies: list = field(default_factory=list)
    rho_values: list = field(default_factory=lambda: [1.1])
    urgent_fractions: list = field(default_factory=lambda: [0.0])
    seeds: list = field(default_factory=lambda: [0])
    mode: str = NO_CONSTRAINTS
    out_dir: Path = Path("out")
    formats: tuple = FORMATS
    n_jobs: int = 10_000
    mu: float = 0.04
    path: Optional[Path] = None
    scenario: int = 1
    load: float = 3.0
    quantum: Optional[float] = None
    user_abort: bool = False

    def validate(self) -> None:
        if self.source not in SOURCES:
            raise ConfigError(f"unknown workload source {self.source!r}; choose from {', '.join(SOURCES)}")
        if not self.policies:
            raise ConfigError("no policies given")
        if not self.seeds:
            raise ConfigError("no seeds given")
        if not self.urgent_fractions:
            raise ConfigError("no urgent fractions given")
        if any(not 0.0 <= f <= 1.0 for f in self.urgent_fractions):
            raise ConfigError("urgent fractions must lie in [0, 1]")
        if self.mode not in (NO_CONSTRAINTS, FINE_GRAINED):
            raise ConfigError(f"mode must be {NO_CONSTRAINTS!r} or {FINE_GRAINED!r}")
        if self.mode == FINE_GRAINED:
            bad = [p.label for p in self.policies if p.name in POSITIONAL]
            if bad:
                raise ConfigError(f"{', '.join(bad)} cannot serve per-job speed-up requests (fine-grained mode)")
        if self.source in ("pacct", "webtrace", "jobs") and self.path is None:
            raise ConfigError(f"source {self.source} needs a path")
        if self.source in ("webtrace", "web-synthetic") and self.scenario not in (1, 2):
            raise ConfigError("scenario must be 1 or 2")
        if self.source == "synthetic" and (not self.rho_values or any(r <= 0 for r in self.rho_values)):
            raise ConfigError("rho values must be positive")
        if self.n_jobs <= 0 or self.mu <= 0 or self.load <= 0:
            raise ConfigError("n_jobs, mu and load must be positive")
        if self.quantum is not None and not self.quantum > 0:
            raise ConfigError("quantum must be positive")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError(f"formats must be drawn from {', '.join(FORMATS)}")

    @property
    def sweeps_load(self) -> bool:
        return self.source == "synthetic"


def split_list(text: str) -> list:
    """Split on commas and newlines that are not inside parentheses."""
    items, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in ",\n" and depth == 0:
            items.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    items.append("".join(cur))
    return [s.strip() for s in items if s.strip()]


def _floats(text: str, what: str) -> list:
    try:
        return [float(x) for x in split_list(text)]
    except ValueError:
        raise ConfigError(f"{what}: expected numbers, got {text!r}") from None


def _fraction(text: str) -> float:
    text = text.strip()
    return float(text[:-1]) / 100.0 if text.endswith("%") else float(text)


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    base = Path(path).resolve().parent
    norm = lambda p: p if p.is_absolute() else (base / p).resolve()
    cfg = ExperimentConfig()
    try:
        if cp.has_section("workload"):
            w = cp["workload"]
            cfg.source = w.get("source", cfg.source).strip()
            cfg.n_jobs = w.getint("n_jobs", cfg.n_jobs)
            cfg.mu = w.getfloat("mu", cfg.mu)
            cfg.scenario = w.getint("scenario", cfg.scenario)
            cfg.load = w.getfloat("load", cfg.load)
            if "path" in w:
                p = Path(w["path"].strip())
                cfg.path = norm(p)
        if cp.has_section("experiment"):
            e = cp["experiment"]
            if "policies" in e:
                cfg.policies = [PolicySpec.parse(s) for s in split_list(e["policies"])]
            if "rho" in e:
                cfg.rho_values = _floats(e["rho"], "rho")
            if "urgent_fractions" in e:
                try:
                    cfg.urgent_fractions = [_fraction(x) for x in split_list(e["urgent_fractions"])]
                except ValueError:
                    raise ConfigError(f"urgent_fractions: cannot parse {e['urgent_fractions']!r}") from None
            if "seeds" in e:
                cfg.seeds = [int(x) for x in split_list(e["seeds"])]
            cfg.mode = e.get("mode", cfg.mode).strip()
            if "quantum" in e:
                cfg.quantum = e.getfloat("quantum")
            cfg.user_abort = e.getboolean("user_abort", cfg.user_abort)
        if cp.has_section("output"):
            o = cp["output"]
            if "dir" in o:
                d = Path(o["dir"].strip())
                cfg.out_dir = norm(d)
            if "formats" in o:
                cfg.formats = tuple(f.lower() for f in split_list(o["formats"]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def fmt(v) -> str:
    """Exact, reproducible text for CSV cells."""
    if v is None:
        return MISSING
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def fmt_md(v, digits: int = 2) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return MISSING
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return str(v)


def _safe(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9.=+-]+", "_", text).strip("_")


@dataclass
class Cell:
    policy: str
    rho: Optional[float]
    fraction: float
    seed: int
    report: metrics.ExperimentReport
    records_file: str


def _base_workloads(cfg: ExperimentConfig):
    """Yield ``(rho, seed, jobs)`` with urgency not yet assigned."""
    if cfg.source == "synthetic":
        for rho in cfg.rho_values:
            for seed in cfg.seeds:
                yield rho, seed, workload.generate(workload.SyntheticSpec(cfg.n_jobs, cfg.mu, rho, 0.0, seed=seed))
        return
    if cfg.source == "web-synthetic":
        for seed in cfg.seeds:
            yield None, seed, workload.generate_web(cfg.n_jobs, cfg.scenario, cfg.load, seed)
        return
    if cfg.source == "pacct":
        jobs = workload.ingest_process_log(cfg.path)
    elif cfg.source == "webtrace":
        jobs = workload.ingest_web_trace(cfg.path, cfg.scenario)
    else:
        jobs = workload.read_jobs_csv(cfg.path)
    for seed in cfg.seeds:
        yield None, seed, jobs


def _run(jobs, spec: PolicySpec, cfg: ExperimentConfig, seed: int):
    policy = spec.build(cfg.mode)
    q = cfg.quantum if (policy.is_preemptive and getattr(policy, "default_quantum", 1.0) != math.inf) else None
    return run(jobs, policy, quantum=q, seed=seed)


RECORD_COLUMNS = ("job_id", "arrival", "duration", "urgent", "t_exp", "finish", "wait")


def _write_records(path: Path, result, jobs) -> None:
    urgent = {j.id: j.urgent for j in jobs}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for r in sorted(result.records, key=lambda r: r.job_id):
            w.writerow([r.job_id, fmt(r.arrival), fmt(r.duration), int(urgent[r.job_id]), fmt(r.t_exp),
                        fmt(r.finish), fmt(r.wait)])


def run_experiment(cfg: ExperimentConfig) -> list:
    """Run the sweep and write the reports; returns the paths written."""
    cfg.validate()
    out = Path(cfg.out_dir)
    rec_dir = out / "records"
    rec_dir.mkdir(parents=True, exist_ok=True)
    cells = []
    fine = cfg.mode == FINE_GRAINED
    for rho, seed, base in _base_workloads(cfg):
        for frac in cfg.urgent_fractions:
            # every policy sees the very same job list
            jobs = workload.label_urgent(base, frac, fine, seed)
            threshold = None
            if cfg.user_abort:
                threshold = metrics.abort_threshold(run(jobs, PolicySpec("PS").build(), seed=seed))
            for spec in cfg.policies:
                result = _run(jobs, spec, cfg, seed)
                report = metrics.summarize(result, jobs, threshold)
                name = _safe(f"{spec.label}__rho={fmt(rho)}__frac={fmt(frac)}__seed={seed}") + ".csv"
                _write_records(rec_dir / name, result, jobs)
                cells.append(Cell(spec.label, rho, frac, seed, report, f"records/{name}"))
    return write_reports(cells, cfg, out)


def _group(cells: list) -> dict:
    groups = {}
    for c in cells:
        groups.setdefault((c.policy, c.rho, c.fraction), []).append(c.report)
    return groups


def write_reports(cells: list, cfg: ExperimentConfig, out: Path) -> list:
    written = []
    fields_ = metrics.REPORT_FIELDS
    index = out / "records" / "index.csv"
    with open(index, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("policy", "rho", "urgent_fraction", "seed", "file"))
        for c in cells:
            w.writerow((c.policy, fmt(c.rho), fmt(c.fraction), c.seed, c.records_file))
    written.append(index)

    means = {k: metrics.mean_reports(v) for k, v in _group(cells).items()}
    if "csv" in cfg.formats:
        raw = out / "raw.csv"
        with open(raw, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("policy", "rho", "urgent_fraction", "seed") + fields_)
            for c in cells:
                w.writerow([c.policy, fmt(c.rho), fmt(c.fraction), c.seed]
                           + [fmt(getattr(c.report, f)) for f in fields_])
        summary = out / "summary.csv"
        with open(summary, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("policy", "rho", "urgent_fraction", "seeds") + fields_)
            for (pol, rho, frac), rep in means.items():
                w.writerow([pol, fmt(rho), fmt(frac), len(cfg.seeds)] + [fmt(getattr(rep, f)) for f in fields_])
        written += [raw, summary]
        if any(rep.dnuji is not None for rep in means.values()):
            dn = out / "dnuji.csv"
            with open(dn, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("policy", "rho", "urgent_fraction", "dnuji"))
                for (pol, rho, frac), rep in means.items():
                    if rep.dnuji is not None:
                        w.writerow([pol, fmt(rho), fmt(frac), fmt(rep.dnuji)])
            written.append(dn)
    if "md" in cfg.formats:
        md = out / "summary.md"
        md.write_text(summary_markdown(means, cfg))
        written.append(md)
    return written


MD_METRICS = (
    ("achieved_ratio", "Urgent jobs sped up (%)"),
    ("successful_ratio", "Urgent jobs reaching their requested speed-up (%)"),
    ("slowdown_nonurgent", "Non-urgent jobs slowed down (%)"),
    ("mean_wait", "Mean wait"),
    ("p95_wait", "95th percentile wait"),
    ("max_wait", "Maximum wait"),
    ("std_wait", "Standard deviation of wait"),
    ("mean_response", "Mean response time"),
    ("max_response", "Maximum response time"),
    ("sped_up", "All jobs sped up (%)"),
    ("slowed_down", "All jobs slowed down (%)"),
    ("dnuji", "Share of unsuccessful forwards (DNUJI)"),
    ("user_abort", "User abort (%)"),
)


def md_table(header: list, rows: list) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    line = lambda cells: "| " + " | ".join(str(c).ljust(w) for c, w in zip(cells, widths)) + " |"
    sep = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    return "\n".join([line(header), sep] + [line(r) for r in rows]) + "\n"


def summary_markdown(means: dict, cfg: ExperimentConfig) -> str:
    policies = [p.label for p in cfg.policies]
    rhos = cfg.rho_values if cfg.sweeps_load else [None]
    parts = []
    for rho in rhos:
        tag = f"rho = {rho:g}" if rho is not None else f"{cfg.source}"
        for key, title in MD_METRICS:
            vals = {k: getattr(v, key) for k, v in means.items() if k[1] == rho}
            if all(v is None for v in vals.values()):
                continue
            rows = []
            for frac in cfg.urgent_fractions:
                rows.append([f"{frac * 100:g}%"] + [fmt_md(vals.get((p, rho, frac))) for p in policies])
            parts.append(f"### {title}, {tag}\n\n" + md_table(["Urgent jobs"] + policies, rows))
    return "\n".join(parts)


def read_index(run_dir) -> list:
    path = Path(run_dir) / "records" / "index.csv"
    if not path.exists():
        raise ConfigError(f"{run_dir} holds no run records (missing records/index.csv)")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def load_records(run_dir, entry) -> list:
    from .core import CompletionRecord
    from .engine import RunResult

    with open(Path(run_dir) / entry["file"], newline="") as fh:
        recs = [CompletionRecord(int(r["job_id"]), float(r["arrival"]), float(r["duration"]), float(r["t_exp"]),
                                 float(r["finish"])) for r in csv.DictReader(fh)]
    return RunResult(recs, 0, entry["policy"], int(entry["seed"]))


def compare_runs(run_dir, out=None) -> list:
    """Pairwise speed-up/slow-down matrix per (rho, fraction), averaged over seeds."""
    entries = read_index(run_dir)
    groups = {}
    for e in entries:
        groups.setdefault((e["rho"], e["urgent_fraction"]), {}).setdefault(e["seed"], []).append(e)
    out = Path(out) if out is not None else Path(run_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows, md = [], []
    for (rho, frac), by_seed in groups.items():
        acc = {}
        for seed, es in by_seed.items():
            m = metrics.pairwise({e["policy"]: load_records(run_dir, e) for e in es})
            for k, cell in m.cells.items():
                acc.setdefault(k, []).append(cell)
        names = list(dict.fromkeys(x for x, _ in acc))
        mean = {k: (math.fsum(c.speedup for c in v) / len(v), math.fsum(c.slowdown for c in v) / len(v))
                for k, v in acc.items()}
        for (x, y), (su, sd) in mean.items():
            rows.append([rho, frac, x, y, fmt(su), fmt(sd)])
        header = ["Policy"] + [f"{y} SU / SD" for y in names]
        table = [[x] + [f"{mean[x, y][0]:.1f}% / {mean[x, y][1]:.1f}%" for y in names] for x in names]
        md.append(f"### Pairwise speed-up / slow-down, rho = {rho}, urgent fraction = {frac}\n\n"
                  + md_table(header, table))
    csv_path = out / "pairwise.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rho", "urgent_fraction", "policy", "versus", "speedup_pct", "slowdown_pct"))
        w.writerows(rows)
    md_path = out / "pairwise.md"
    md_path.write_text("\n".join(md))
    return [csv_path, md_path]
