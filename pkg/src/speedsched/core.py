"""Domain types and the FCFS-referenced speed-up bookkeeping.

Times are plain floats (simulation time units).  Two times are considered
equal when they differ by at most :data:`TIME_EPS`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

TIME_EPS = 1e-9


def time_eq(a: float, b: float) -> bool:
    return abs(a - b) <= TIME_EPS


@dataclass(frozen=True)
class Job:
    """One unit of work.

    ``duration`` is the service demand.  Web requests carry ``file_size``
    (bytes) and ``bandwidth`` (bytes/sec); when both are given the duration
    must equal ``file_size / bandwidth``.
    """

    id: int
    arrival: float
    duration: float
    urgent: bool = False
    requested_pct: Optional[float] = None
    file_size: Optional[float] = None
    bandwidth: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "arrival", float(self.arrival))
        object.__setattr__(self, "duration", float(self.duration))
        object.__setattr__(self, "urgent", bool(self.urgent))
        if not self.arrival >= 0 or math.isinf(self.arrival):
            raise ValueError(f"job {self.id}: arrival must be finite and >= 0, got {self.arrival}")
        if not self.duration > 0 or math.isinf(self.duration):
            raise ValueError(f"job {self.id}: duration must be finite and > 0, got {self.duration}")
        if self.requested_pct is not None:
            if not self.urgent:
                raise ValueError(f"job {self.id}: requested_pct given for a non-urgent job")
            if not 0 < self.requested_pct <= 100:
                raise ValueError(f"job {self.id}: requested_pct must lie in (0, 100]")
        if (self.file_size is None) != (self.bandwidth is None):
            raise ValueError(f"job {self.id}: file_size and bandwidth come together")
        if self.file_size is not None:
            if self.file_size <= 0 or self.bandwidth <= 0:
                raise ValueError(f"job {self.id}: file_size and bandwidth must be positive")
            expected = self.file_size / self.bandwidth
            if abs(expected - self.duration) > 1e-9 * max(1.0, expected):
                raise ValueError(f"job {self.id}: duration must equal file_size / bandwidth")

    @classmethod
    def web(cls, id: int, arrival: float, file_size: float, bandwidth: float, **kw) -> "Job":
        return cls(id, arrival, file_size / bandwidth, file_size=file_size, bandwidth=bandwidth, **kw)


@dataclass(frozen=True)
class SystemState:
    """Snapshot of the queue at ``now``.

    ``waiting`` holds the queued jobs (arrival strictly before ``now`` for the
    arriving job's own view); the job in service is kept apart together with
    its remaining service demand.
    """

    now: float
    waiting: tuple = ()
    in_service: Optional[Job] = None
    remaining: float = 0.0

    def __post_init__(self):
        if self.in_service is None and self.remaining != 0:
            raise ValueError("remaining work given for an idle server")
        if self.in_service is not None:
            if not 0 <= self.remaining <= self.in_service.duration + TIME_EPS:
                raise ValueError("remaining service out of range")
            if any(j.id == self.in_service.id for j in self.waiting):
                raise ValueError("job in service is also waiting")

    @property
    def d_rem(self) -> float:
        return self.remaining if self.in_service is not None else 0.0

    def queued_work(self) -> float:
        return math.fsum(j.duration for j in self.waiting)


@dataclass(frozen=True)
class CompletionRecord:
    """Outcome of one completed job.

    ``queue_work`` is the work queued ahead of the job at its arrival
    (excluding the job in service); it is what a requested speed-up is a
    percentage of.
    """

    job_id: int
    arrival: float
    duration: float
    t_exp: float
    finish: float
    queue_work: float = 0.0
    attained: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.attained is None:
            object.__setattr__(self, "attained", self.duration)

    @property
    def t_actual(self) -> float:
        return self.finish - self.arrival

    @property
    def wait(self) -> float:
        return self.finish - self.arrival - self.duration


class SpeedKind(enum.Enum):
    SPED_UP = "sped_up"
    SLOWED_DOWN = "slowed_down"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class SpeedClass:
    kind: SpeedKind
    amount: float = 0.0

    @property
    def sped_up(self) -> bool:
        return self.kind is SpeedKind.SPED_UP

    @property
    def slowed_down(self) -> bool:
        return self.kind is SpeedKind.SLOWED_DOWN


NEUTRAL = SpeedClass(SpeedKind.NEUTRAL)


def expected_execution(job: Job, state: SystemState) -> float:
    """FCFS-referenced sojourn of ``job`` arriving into ``state``.

    Own duration plus everything queued plus what is left of the job in
    service.
    """
    return job.duration + state.queued_work() + state.d_rem


def classify(record: CompletionRecord) -> SpeedClass:
    gain = record.t_exp - record.t_actual
    if gain > TIME_EPS:
        return SpeedClass(SpeedKind.SPED_UP, gain)
    if gain < -TIME_EPS:
        return SpeedClass(SpeedKind.SLOWED_DOWN, -gain)
    return NEUTRAL


def requested_speedup(job: Job, state: SystemState) -> float:
    """Speed-up an urgent job asks for: its percentage of the queued work."""
    if not job.urgent:
        raise ValueError(f"job {job.id} is not urgent")
    pct = 100.0 if job.requested_pct is None else job.requested_pct
    return pct / 100.0 * state.queued_work()


def requested_speedup_from_texp(pct: float, t_exp: float, duration: float, d_rem: float) -> float:
    """Same quantity rewritten through the expected execution time."""
    return pct / 100.0 * (t_exp - duration - d_rem)


def current_speedup(t_exp: float, arrival: float, duration: float, now: float, d_rem: float = 0.0) -> float:
    """Speed-up a waiting job would get if it were served right after the job in service."""
    return t_exp - ((now - arrival) + duration + d_rem)


def state_at(jobs: Sequence[Job], now: float, in_service: Optional[Job] = None,
             remaining: float = 0.0) -> SystemState:
    return SystemState(now, tuple(jobs), in_service, remaining if in_service is not None else 0.0)
