"""Workload sources: synthetic M/M/1 streams, process-accounting logs, web traces.

All generators are deterministic in their seed.  Job ids follow arrival
order.

Process logs
    Headered CSV with the columns ``command, version, utime, systime, etime,
    uid, gid, mem, char, pid, ppid, finish_time``.  Only ``utime``,
    ``systime``, ``etime`` and ``finish_time`` are required.  Raw ``dump-acct``
    output (``|``-separated, same field order) and whitespace-aligned dumps
    whose last columns hold a ctime-style date are read as well.
    ``finish_time`` is either epoch seconds or e.g. ``Sun Dec 15 16:47:50 2013``.

Web traces
    Headered CSV with ``arrival, url, size, status`` (arrival in seconds,
    size in bytes), or a Squid native access log.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Job

log = logging.getLogger(__name__)

KB = 1024
MB = 1024 * KB
MBPS = 125_000.0  # bytes per second in one megabit per second
MIN_WEB_SIZE = 56
MAX_WEB_SIZE = 15 * MB
MIN_BURST, MAX_BURST = 1.0, 185.0

SMALL_LIMIT = 50 * KB
MEDIUM_LIMIT = 500 * KB
SIZE_MIX = {"small": 0.64, "medium": 0.32, "large": 0.04}
SCENARIO_BANDWIDTH = {
    1: {"small": 1 * MBPS, "medium": 10 * MBPS, "large": 100 * MBPS},
    2: {"small": 100 * MBPS, "medium": 10 * MBPS, "large": 1 * MBPS},
}

JOB_COLUMNS = ("id", "arrival", "duration", "urgent", "requested_pct", "file_size", "bandwidth")


@dataclass(frozen=True)
class SyntheticSpec:
    n_jobs: int = 10_000
    mu: float = 0.04
    rho: float = 1.1
    urgent_fraction: float = 0.0
    fine_grained: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n_jobs <= 0:
            raise ValueError("n_jobs must be positive")
        if self.mu <= 0 or self.rho <= 0:
            raise ValueError("mu and rho must be positive")
        if not 0.0 <= self.urgent_fraction <= 1.0:
            raise ValueError("urgent_fraction must lie in [0, 1]")

    @property
    def lam(self) -> float:
        return self.rho * self.mu


def _streams(seed: int, n: int) -> list:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def generate(spec: SyntheticSpec) -> list:
    """Poisson arrivals at rate rho*mu, exponential service at rate mu.

    Arrival times and durations depend only on ``(n_jobs, mu, rho, seed)``, so
    sweeping the urgent fraction relabels the very same jobs.
    """
    arr_rng, dur_rng = _streams(spec.seed, 2)
    arrivals = np.cumsum(arr_rng.exponential(1.0 / spec.lam, spec.n_jobs))
    durations = dur_rng.exponential(1.0 / spec.mu, spec.n_jobs)
    durations = np.maximum(durations, np.finfo(float).tiny)
    jobs = [Job(i, float(a), float(d)) for i, (a, d) in enumerate(zip(arrivals, durations))]
    return label_urgent(jobs, spec.urgent_fraction, spec.fine_grained, spec.seed)


def label_urgent(jobs: Sequence[Job], fraction: float, fine_grained: bool = False, seed: int = 0) -> list:
    """Flag each job urgent independently with probability ``fraction``.

    In fine-grained mode every urgent job also gets a requested percentage
    drawn uniformly from (0, 100].
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("urgent fraction must lie in [0, 1]")
    flag_rng, pct_rng = _streams(seed + 0x5EED, 2)
    flags = flag_rng.random(len(jobs)) < fraction
    pcts = 100.0 * (1.0 - pct_rng.random(len(jobs)))
    out = []
    for job, urgent, pct in zip(jobs, flags, pcts):
        urgent = bool(urgent)
        out.append(Job(job.id, job.arrival, job.duration, urgent,
                       float(pct) if urgent and fine_grained else None,
                       job.file_size, job.bandwidth))
    return out


def size_class(size: float) -> str:
    if size <= SMALL_LIMIT:
        return "small"
    if size <= MEDIUM_LIMIT:
        return "medium"
    return "large"


def scenario_bandwidth(size: float, scenario: int) -> float:
    try:
        table = SCENARIO_BANDWIDTH[int(scenario)]
    except (KeyError, ValueError):
        raise ValueError(f"scenario must be 1 or 2, got {scenario!r}") from None
    return table[size_class(size)]


def web_jobs(arrivals: Iterable[float], sizes: Iterable[float], scenario: int) -> list:
    """Requests with bandwidth from the scenario's size-class mapping, ids in arrival order."""
    pairs = sorted(zip(arrivals, sizes), key=lambda p: p[0])
    if not pairs:
        return []
    t0 = pairs[0][0]
    return [Job.web(i, float(a - t0), float(s), scenario_bandwidth(s, scenario))
            for i, (a, s) in enumerate(pairs)]


def generate_web(n: int, scenario: int, load: float = 0.9, seed: int = 0) -> list:
    """Synthetic stand-in for a proxy trace.

    Sizes follow the 64/32/4 % small/medium/large mix, log-uniform within
    each class (56 B .. 50 KB, 50 .. 500 KB, 500 KB .. 15 MB).  Arrivals are
    Poisson, scaled so the offered load under the scenario's bandwidths is
    ``load``.  The size sequence and the unit-rate arrival pattern are the
    same for both scenarios at a given seed.
    """
    cls_rng, size_rng, arr_rng = _streams(seed, 3)
    classes = cls_rng.choice(3, size=n, p=list(SIZE_MIX.values()))
    bounds = np.array([(MIN_WEB_SIZE, SMALL_LIMIT), (SMALL_LIMIT, MEDIUM_LIMIT), (MEDIUM_LIMIT, MAX_WEB_SIZE)],
                      dtype=float)
    lo, hi = bounds[classes, 0], bounds[classes, 1]
    sizes = np.exp(np.log(lo) + size_rng.random(n) * (np.log(hi) - np.log(lo)))
    sizes = np.clip(np.round(sizes), MIN_WEB_SIZE, MAX_WEB_SIZE)
    # keep rounding from pushing a size across a class boundary
    sizes = np.where((classes == 1) & (sizes <= SMALL_LIMIT), SMALL_LIMIT + 1, sizes)
    sizes = np.where((classes == 2) & (sizes <= MEDIUM_LIMIT), MEDIUM_LIMIT + 1, sizes)
    mean_service = float(np.mean([s / scenario_bandwidth(s, scenario) for s in sizes]))
    gaps = arr_rng.exponential(1.0, n) * mean_service / load
    arrivals = np.cumsum(gaps) - gaps[0]
    return web_jobs(arrivals.tolist(), sizes.tolist(), scenario)


@dataclass(frozen=True)
class ProcessLogRecord:
    command: str
    utime: float
    systime: float
    etime: float
    finish_time: float
    uid: Optional[int] = None
    gid: Optional[int] = None
    mem: Optional[float] = None
    pid: Optional[int] = None
    ppid: Optional[int] = None

    @property
    def burst(self) -> float:
        return self.utime + self.systime


_CTIME_FORMATS = ("%a %b %d %H:%M:%S %Y", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S")
_PACCT_FIELDS = ("command", "version", "utime", "systime", "etime", "uid", "gid", "mem", "char", "pid", "ppid",
                 "finish_time")


def _parse_time(text: str) -> float:
    text = " ".join(text.split())
    try:
        return float(text)
    except ValueError:
        pass
    for fmt in _CTIME_FORMATS:
        try:
            return datetime.strptime(text, fmt).timestamp()
        except ValueError:
            continue
    raise ValueError(f"unrecognised time {text!r}")


def _opt(row: dict, key: str, conv):
    v = row.get(key)
    if v is None or str(v).strip() == "":
        return None
    return conv(float(v)) if conv is int else conv(v)


def _pacct_rows(lines: list) -> Iterable:
    first = lines[0]
    if "," in first:
        reader = csv.DictReader(lines)
        missing = {"utime", "systime", "etime", "finish_time"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"process log lacks columns: {', '.join(sorted(missing))}")
        for lineno, row in enumerate(reader, start=2):
            yield lineno, row
        return
    for lineno, line in enumerate(lines, start=1):
        if "|" in line:
            parts = [p.strip() for p in line.split("|")]
        else:
            toks = line.split()
            parts = toks[:11] + [" ".join(toks[11:])]
        if lineno == 1 and parts and parts[0].lower() == "command":
            continue
        if len(parts) != len(_PACCT_FIELDS):
            yield lineno, None
            continue
        yield lineno, dict(zip(_PACCT_FIELDS, parts))


def parse_process_log(path) -> tuple:
    """Read a process-accounting dump.  Returns ``(records, skipped_line_count)``."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"process log {path} is empty")
    records, skipped = [], 0
    for lineno, row in _pacct_rows(lines):
        try:
            if row is None:
                raise ValueError("wrong field count")
            rec = ProcessLogRecord(
                command=(row.get("command") or "").strip(),
                utime=float(row["utime"]), systime=float(row["systime"]), etime=float(row["etime"]),
                finish_time=_parse_time(row["finish_time"]),
                uid=_opt(row, "uid", int), gid=_opt(row, "gid", int), mem=_opt(row, "mem", float),
                pid=_opt(row, "pid", int), ppid=_opt(row, "ppid", int),
            )
            if rec.etime < 0 or rec.utime < 0 or rec.systime < 0:
                raise ValueError("negative time")
        except (ValueError, KeyError, TypeError) as exc:
            skipped += 1
            log.warning("%s:%d: skipping malformed process record (%s)", path, lineno, exc)
            continue
        records.append(rec)
    if skipped:
        log.warning("%s: skipped %d malformed line(s)", path, skipped)
    return records, skipped


def ingest_process_log(path) -> list:
    """Jobs from a process log: burst = utime + systime, arrival = finish - etime.

    Zero-burst records are dropped, bursts are clamped to [1, 185] and
    arrivals shifted so the earliest is 0.
    """
    records, _ = parse_process_log(path)
    kept = [r for r in records if r.burst > 0]
    if not kept:
        raise ValueError(f"process log {path} holds no usable records")
    starts = [r.finish_time - r.etime for r in kept]
    t0 = min(starts)
    rows = sorted(((s - t0, min(max(r.burst, MIN_BURST), MAX_BURST)) for s, r in zip(starts, kept)),
                  key=lambda p: p[0])
    return [Job(i, a, d) for i, (a, d) in enumerate(rows)]


def _web_rows(lines: list) -> Iterable:
    if "," in lines[0] and "size" in lines[0].lower():
        for lineno, row in enumerate(csv.DictReader(lines), start=2):
            yield lineno, row.get("arrival"), row.get("size")
        return
    # Squid native: time elapsed client code/status bytes method url ...
    for lineno, line in enumerate(lines, start=1):
        toks = line.split()
        yield lineno, (toks[0] if toks else None), (toks[4] if len(toks) > 4 else None)


def ingest_web_trace(path, scenario: int) -> list:
    """Requests from a proxy log; sizes outside 56 B .. 15 MB are dropped."""
    scenario_bandwidth(MIN_WEB_SIZE, scenario)  # validates the scenario
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"web trace {path} is empty")
    arrivals, sizes, skipped = [], [], 0
    for lineno, a, s in _web_rows(lines):
        try:
            a, s = float(a), float(s)
            if not (math.isfinite(a) and math.isfinite(s)):
                raise ValueError("non-finite value")
        except (TypeError, ValueError) as exc:
            skipped += 1
            log.warning("%s:%d: skipping unparsable request (%s)", path, lineno, exc)
            continue
        if MIN_WEB_SIZE <= s <= MAX_WEB_SIZE:
            arrivals.append(a)
            sizes.append(s)
    if skipped:
        log.warning("%s: skipped %d unparsable line(s)", path, skipped)
    if not arrivals:
        raise ValueError(f"web trace {path} holds no usable requests")
    return web_jobs(arrivals, sizes, scenario)


def write_jobs_csv(jobs: Sequence[Job], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(JOB_COLUMNS)
        for j in jobs:
            w.writerow([j.id, repr(j.arrival), repr(j.duration), int(j.urgent),
                        "" if j.requested_pct is None else repr(j.requested_pct),
                        "" if j.file_size is None else repr(j.file_size),
                        "" if j.bandwidth is None else repr(j.bandwidth)])


def read_jobs_csv(path) -> list:
    def opt(v):
        return None if v in ("", None) else float(v)

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"job file {path} is empty")
    return [Job(int(r["id"]), float(r["arrival"]), float(r["duration"]), bool(int(r.get("urgent") or 0)),
                opt(r.get("requested_pct")), opt(r.get("file_size")), opt(r.get("bandwidth")))
            for r in rows]
