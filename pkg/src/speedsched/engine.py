"""Deterministic single-server discrete-event loop.

A run feeds a list of jobs through one :class:`Policy`.  Non-preemptive
policies are asked for the next job whenever the server frees up;
preemptive ones are also consulted at every quantum expiry and, when they
ask for it, at every arrival.  Processor sharing is simulated exactly as a
fluid model.

Same-instant events are handled completions first, then quantum expiries,
then arrivals, so a job arriving exactly when another finishes is eligible
for the decision taken at that instant.
"""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import CompletionRecord, Job

DEFAULT_QUANTUM = 1.0
# leftover service below this is treated as finished (float residue of slicing)
_RESIDUE = 1e-12


class ProtocolError(RuntimeError):
    """A policy broke the engine contract (e.g. selected a job that is not waiting)."""


class EventKind(enum.IntEnum):
    # value is the same-timestamp rank
    COMPLETION = 0
    QUANTUM_EXPIRY = 1
    ARRIVAL = 2


_DONE, _EXPIRY, _ARR = int(EventKind.COMPLETION), int(EventKind.QUANTUM_EXPIRY), int(EventKind.ARRIVAL)


@dataclass(order=True, frozen=True)
class Event:
    time: float
    kind: EventKind
    seq: int
    job_id: int = field(compare=False)
    token: int = field(default=0, compare=False)


@dataclass
class RunResult:
    records: list
    events_processed: int
    policy_name: str
    seed: int
    busy_time: float = 0.0
    extras: dict = field(default_factory=dict)
    slices: Optional[list] = None

    def by_job(self) -> dict:
        return {r.job_id: r for r in self.records}

    @property
    def dnuji(self) -> Optional[float]:
        return self.extras.get("dnuji")


class Sim:
    """What a policy may look at while deciding.

    Per-job dictionaries are keyed by job id and cover every job that has
    arrived so far.  ``d_rem`` is the remaining demand of the job still
    holding the server at a decision instant (always 0 for non-preemptive
    decisions, since those are taken on an idle server).
    """

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.now = 0.0
        self.d_rem = 0.0
        self.jobs: dict = {}
        self.t_exp: dict = {}
        self.queue_work: dict = {}
        self.attained: dict = {}
        self.remaining: dict = {}
        self.waiting: set = set()


class Policy:
    """Base class for schedulers plugged into :func:`run`.

    Subclasses keep their own index of waiting jobs: ``on_arrival`` adds a
    job, ``select_next`` removes and returns the chosen id, ``on_preempt``
    puts a preempted job back.
    """

    name = "policy"
    is_preemptive = False
    preempt_on_arrival = False
    processor_sharing = False

    def reset(self) -> None:
        pass

    def on_arrival(self, job: Job, sim: Sim) -> None:
        raise NotImplementedError

    def select_next(self, sim: Sim) -> int:
        raise NotImplementedError

    def on_preempt(self, job: Job, sim: Sim) -> None:
        self.on_arrival(job, sim)

    def on_completion(self, job: Job, sim: Sim) -> None:
        pass

    def finalize(self, records: Sequence[CompletionRecord], sim: Sim) -> dict:
        return {}

    def __repr__(self):
        return f"{type(self).__name__}()"


def _sorted_jobs(jobs: Iterable[Job]) -> list:
    out = sorted(jobs, key=lambda j: (j.arrival, j.id))
    ids = [j.id for j in out]
    if len(set(ids)) != len(ids):
        raise ValueError("job ids must be unique")
    return out


def run(jobs: Sequence[Job], policy: Policy, quantum: Optional[float] = None, seed: int = 0,
        trace: bool = False) -> RunResult:
    """Simulate ``jobs`` under ``policy`` and return one record per job.

    ``quantum`` applies to preemptive policies only (default 1.0 time unit,
    unless the policy declares its own ``default_quantum``).
    ``trace=True`` keeps the list of service slices ``(job_id, start, end)``.
    """
    if policy.is_preemptive or policy.processor_sharing:
        if quantum is None:
            quantum = getattr(policy, "default_quantum", DEFAULT_QUANTUM)
        if not quantum > 0:
            raise ValueError("quantum must be positive")
    elif quantum is not None:
        raise ValueError(f"{policy.name} is non-preemptive; a quantum makes no sense")

    ordered = _sorted_jobs(jobs)
    policy.reset()
    sim = Sim(np.random.default_rng(seed))
    if not ordered:
        return RunResult([], 0, policy.name, seed, slices=[] if trace else None)
    if policy.processor_sharing:
        result = _run_shared(ordered, policy, sim, trace)
    elif policy.is_preemptive:
        result = _run_preemptive(ordered, policy, quantum, sim, trace)
    else:
        result = _run_nonpreemptive(ordered, policy, sim, trace)
    result.seed = seed
    result.extras.update(policy.finalize(result.records, sim))
    return result


def _admit(job: Job, sim: Sim, horizon: float, waiting_work: float) -> float:
    # horizon = instant at which all work present so far would be done; the
    # same for every work-conserving schedule, hence policy independent
    horizon = max(horizon, job.arrival) + job.duration
    sim.jobs[job.id] = job
    sim.t_exp[job.id] = horizon - job.arrival
    sim.queue_work[job.id] = waiting_work
    sim.attained[job.id] = 0.0
    sim.remaining[job.id] = job.duration
    sim.waiting.add(job.id)
    return horizon


def _take(policy: Policy, sim: Sim) -> int:
    jid = policy.select_next(sim)
    if jid not in sim.waiting:
        raise ProtocolError(f"{policy.name} selected job {jid!r}, which is not waiting at t={sim.now}")
    sim.waiting.discard(jid)
    return jid


def _record(job: Job, sim: Sim, finish: float) -> CompletionRecord:
    return CompletionRecord(job.id, job.arrival, job.duration, sim.t_exp[job.id], finish,
                            sim.queue_work[job.id], job.duration)


def _run_nonpreemptive(jobs: list, policy: Policy, sim: Sim, trace: bool) -> RunResult:
    n = len(jobs)
    i = 0
    now = 0.0
    horizon = 0.0
    waiting_work = 0.0
    busy = 0.0
    events = 0
    records = []
    slices = [] if trace else None
    while i < n or sim.waiting:
        if not sim.waiting and jobs[i].arrival > now:
            now = jobs[i].arrival
        sim.now = now
        sim.d_rem = 0.0
        # arrivals since the previous decision; they queued behind whatever
        # was in service, which finishes exactly at `now`
        while i < n and jobs[i].arrival <= now:
            job = jobs[i]
            horizon = _admit(job, sim, horizon, waiting_work)
            waiting_work += job.duration
            policy.on_arrival(job, sim)
            events += 1
            i += 1
        jid = _take(policy, sim)
        job = sim.jobs[jid]
        waiting_work = waiting_work - job.duration if sim.waiting else 0.0
        start = now
        now = start + job.duration
        busy += job.duration
        if trace:
            slices.append((jid, start, now))
        sim.attained[jid] = job.duration
        sim.remaining[jid] = 0.0
        sim.now = now
        records.append(_record(job, sim, now))
        events += 1
        policy.on_completion(job, sim)
    return RunResult(records, events, policy.name, 0, busy, slices=slices)


def _run_preemptive(jobs: list, policy: Policy, quantum: float, sim: Sim, trace: bool) -> RunResult:
    # heap entries mirror Event: (time, kind rank, seq, job id, dispatch token)
    heap = [(j.arrival, _ARR, k, j.id, 0) for k, j in enumerate(jobs)]
    heapq.heapify(heap)
    seq = len(jobs)
    current = None
    slice_start = 0.0
    token = 0
    horizon = 0.0
    waiting_work = 0.0
    busy = 0.0
    events = 0
    records = []
    slices = [] if trace else None
    remaining = sim.remaining
    attained = sim.attained

    while heap:
        t = heap[0][0]
        if current is not None and t > slice_start:
            served = t - slice_start
            remaining[current] -= served
            attained[current] += served
            busy += served
            if trace:
                slices.append((current, slice_start, t))
            slice_start = t
        sim.now = t
        preempt = False
        while heap and heap[0][0] == t:
            _, kind, evseq, _, evtoken = heapq.heappop(heap)
            if kind == _ARR:
                job = jobs[evseq]
                horizon = _admit(job, sim, horizon, waiting_work)
                waiting_work += job.duration
                sim.d_rem = remaining[current] if current is not None else 0.0
                policy.on_arrival(job, sim)
                events += 1
                if current is not None and policy.preempt_on_arrival:
                    preempt = True
                continue
            if evtoken != token or current is None:
                continue  # superseded by a later dispatch
            events += 1
            if kind == _DONE or remaining[current] <= _RESIDUE:
                job = sim.jobs[current]
                remaining[current] = 0.0
                attained[current] = job.duration
                records.append(_record(job, sim, t))
                current = None
                policy.on_completion(job, sim)
            else:
                preempt = True
        if current is not None and preempt:
            if remaining[current] <= _RESIDUE:
                job = sim.jobs[current]
                remaining[current] = 0.0
                attained[current] = job.duration
                records.append(_record(job, sim, t))
                current = None
                policy.on_completion(job, sim)
            else:
                job = sim.jobs[current]
                sim.waiting.add(current)
                waiting_work += remaining[current]
                current = None
                sim.d_rem = 0.0
                policy.on_preempt(job, sim)
        if current is None and sim.waiting:
            sim.d_rem = 0.0
            current = _take(policy, sim)
            waiting_work = waiting_work - remaining[current] if sim.waiting else 0.0
            token += 1
            slice_start = t
            rem = remaining[current]
            if rem <= quantum:
                heapq.heappush(heap, (t + rem, _DONE, seq, current, token))
            else:
                heapq.heappush(heap, (t + quantum, _EXPIRY, seq, current, token))
            seq += 1
    return RunResult(records, events, policy.name, 0, busy, slices=slices)


def _run_shared(jobs: list, policy: Policy, sim: Sim, trace: bool) -> RunResult:
    """Egalitarian processor sharing: n present jobs each progress at rate 1/n.

    Tracked in virtual time (service received by a job present throughout),
    so each job completes when virtual time reaches its entry mark plus its
    demand.
    """
    records = []
    heap = []  # (virtual finish, id)
    entry_v = {}
    v = 0.0
    t = 0.0
    horizon = 0.0
    events = 0

    def complete_until(limit: float) -> None:
        nonlocal v, t, events
        while heap:
            vf, jid = heap[0]
            tc = t + (vf - v) * len(heap)
            if tc > limit:
                return
            heapq.heappop(heap)
            t, v = tc, vf
            job = sim.jobs[jid]
            sim.waiting.discard(jid)
            sim.now = t
            sim.attained[jid] = job.duration
            sim.remaining[jid] = 0.0
            records.append(_record(job, sim, t))
            events += 1
            policy.on_completion(job, sim)

    for job in jobs:
        complete_until(job.arrival)
        if heap:
            v += (job.arrival - t) / len(heap)
        t = job.arrival
        sim.now = t
        waiting_work = math.fsum(sim.jobs[k].duration - (v - entry_v[k]) for _, k in heap)
        horizon = _admit(job, sim, horizon, waiting_work)
        entry_v[job.id] = v
        heapq.heappush(heap, (v + job.duration, job.id))
        policy.on_arrival(job, sim)
        events += 1
    complete_until(math.inf)
    busy = math.fsum(j.duration for j in jobs)
    return RunResult(records, events, policy.name, 0, busy, slices=[] if trace else None)


def replay_fixed_order(jobs: Sequence[Job], order: Sequence[int]) -> RunResult:
    """Serve ``jobs`` non-preemptively in exactly the given order.

    The server idles when the next job in ``order`` has not arrived yet, so
    expected execution times are taken from the queue each job actually
    finds on arrival rather than from a work-conserving backlog.
    """
    by_id = {j.id: j for j in jobs}
    if len(order) != len(by_id) or set(order) != set(by_id):
        raise ValueError("order must be a permutation of the job ids")
    start = {}
    t = 0.0
    slices = []
    for jid in order:
        job = by_id[jid]
        s = max(t, job.arrival)
        start[jid] = s
        t = s + job.duration
        slices.append((jid, s, t))
    records = []
    for jid, s, f in slices:
        job = by_id[jid]
        a = job.arrival
        queued = []
        d_rem = 0.0
        for other in by_id.values():
            if other.id == jid or (other.arrival, other.id) > (a, jid):
                continue
            os_ = start[other.id]
            of = os_ + other.duration
            if os_ < a < of:
                d_rem = of - a
            elif os_ >= a:
                queued.append(other.duration)
        queue_work = math.fsum(queued)
        t_exp = job.duration + queue_work + d_rem
        records.append(CompletionRecord(jid, a, job.duration, t_exp, f, queue_work, job.duration))
    busy = math.fsum(j.duration for j in by_id.values())
    return RunResult(records, 2 * len(records), "fixed-order", 0, busy, slices=slices)
