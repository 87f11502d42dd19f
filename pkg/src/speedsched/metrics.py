"""Evaluation metrics for completed runs.

Waits exclude service (``finish - arrival - duration``); response time is
the whole sojourn.  Ratios over an empty population are ``None`` and print
as ``-``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import TIME_EPS, Job, classify
from .engine import RunResult


@dataclass(frozen=True)
class ExperimentReport:
    achieved_ratio: Optional[float]
    successful_ratio: Optional[float]
    slowdown_nonurgent: Optional[float]
    mean_wait: float
    p95_wait: float
    max_wait: float
    std_wait: float
    dnuji: Optional[float] = None
    user_abort: Optional[float] = None
    mean_response: float = 0.0
    max_response: float = 0.0
    sped_up: float = 0.0
    slowed_down: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


REPORT_FIELDS = tuple(f.name for f in fields(ExperimentReport))


def percent(count: int, total: int) -> Optional[float]:
    return None if total == 0 else 100.0 * count / total


def nearest_rank(values: Sequence[float], q: float) -> float:
    """Smallest value with at least ``q`` percent of the sample at or below it."""
    if not len(values):
        raise ValueError("percentile of an empty sample")
    if not 0 < q <= 100:
        raise ValueError("percentile must lie in (0, 100]")
    ordered = np.sort(np.asarray(values, dtype=float))
    rank = max(1, math.ceil(q / 100.0 * len(ordered) - 1e-12))
    return float(ordered[rank - 1])


def summarize(run: RunResult, jobs: Sequence[Job], abort_threshold: Optional[float] = None) -> ExperimentReport:
    """Aggregate one run.  ``abort_threshold`` adds the user-abort percentage.

    The successful ratio covers urgent jobs that carry a requested
    percentage; it is absent when none do.
    """
    by_id = {j.id: j for j in jobs}
    records = run.records
    if set(by_id) != {r.job_id for r in records}:
        raise ValueError("run records and job list cover different jobs")
    if not records:
        raise ValueError("cannot summarise an empty run")

    urgent = achieved = requesting = successful = nonurgent = slowed_nonurgent = 0
    total_up = total_down = 0
    for r in records:
        sc = classify(r)
        total_up += sc.sped_up
        total_down += sc.slowed_down
        if by_id[r.job_id].urgent:
            urgent += 1
            achieved += sc.sped_up
            pct = by_id[r.job_id].requested_pct
            if pct is not None:
                requesting += 1
                successful += r.t_exp - r.t_actual >= pct / 100.0 * r.queue_work - TIME_EPS
        else:
            nonurgent += 1
            slowed_nonurgent += sc.slowed_down

    waits = np.array([r.wait for r in records])
    waits = np.where(np.abs(waits) < TIME_EPS, 0.0, waits)
    resp = np.array([r.t_actual for r in records])
    return ExperimentReport(
        achieved_ratio=percent(achieved, urgent),
        successful_ratio=percent(successful, requesting),
        slowdown_nonurgent=percent(slowed_nonurgent, nonurgent),
        mean_wait=math.fsum(waits) / len(waits),
        p95_wait=nearest_rank(waits, 95),
        max_wait=float(waits.max()),
        std_wait=float(waits.std()),
        dnuji=run.dnuji,
        user_abort=None if abort_threshold is None else user_abort(run, abort_threshold),
        mean_response=math.fsum(resp) / len(resp),
        max_response=float(resp.max()),
        sped_up=percent(total_up, len(records)),
        slowed_down=percent(total_down, len(records)),
    )


def abort_threshold(ps_run: RunResult, factor: float = 0.95) -> float:
    """Patience limit just under the worst response processor sharing gives."""
    if not ps_run.records:
        raise ValueError("reference run is empty")
    return factor * max(r.t_actual for r in ps_run.records)


def user_abort(run: RunResult, threshold: Optional[float] = None, ps_run: Optional[RunResult] = None) -> float:
    """Percentage of requests whose response time exceeds ``threshold``."""
    if threshold is None:
        if ps_run is None:
            raise ValueError("user_abort needs a threshold or a processor-sharing reference run")
        threshold = abort_threshold(ps_run)
    if not run.records:
        raise ValueError("cannot measure aborts on an empty run")
    over = sum(r.t_actual > threshold for r in run.records)
    return 100.0 * over / len(run.records)


@dataclass(frozen=True)
class PairwiseCell:
    speedup: float
    slowdown: float

    @property
    def tie(self) -> float:
        return 100.0 - self.speedup - self.slowdown


@dataclass
class PairwiseMatrix:
    policies: tuple
    cells: dict  # (x, y) -> PairwiseCell, X's waits compared against Y's

    def __getitem__(self, pair) -> PairwiseCell:
        return self.cells[pair]


def pairwise(runs: Mapping[str, RunResult]) -> PairwiseMatrix:
    """Per-job wait comparison for every ordered pair of runs.

    Cell ``(X, Y)`` holds the share of jobs X serves strictly faster than Y
    (speed-up) and strictly slower (slow-down); differences within 1e-9 tie.
    """
    names = tuple(runs)
    waits = {}
    ref = None
    for name in names:
        recs = sorted(runs[name].records, key=lambda r: r.job_id)
        ids = [r.job_id for r in recs]
        if ref is None:
            ref = ids
        elif ids != ref:
            raise ValueError(f"run {name!r} covers a different job set")
        waits[name] = np.array([r.wait for r in recs])
    n = len(ref or ())
    cells = {}
    for x in names:
        for y in names:
            if n == 0:
                cells[x, y] = PairwiseCell(0.0, 0.0)
                continue
            diff = waits[x] - waits[y]
            cells[x, y] = PairwiseCell(100.0 * np.count_nonzero(diff < -TIME_EPS) / n,
                                       100.0 * np.count_nonzero(diff > TIME_EPS) / n)
    return PairwiseMatrix(names, cells)


def mean_reports(reports: Sequence[ExperimentReport]) -> ExperimentReport:
    """Field-wise mean over seeds; a field absent in every report stays absent."""
    if not reports:
        raise ValueError("no reports to average")
    out = {}
    for name in REPORT_FIELDS:
        vals = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        out[name] = math.fsum(vals) / len(vals) if vals else None
    return ExperimentReport(**out)
