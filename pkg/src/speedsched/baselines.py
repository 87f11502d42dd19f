"""Classical schedulers and the positional speed-up baselines.

FCFS, SJF (non-preemptive), SRPT (preemptive), round robin and processor
sharing, plus MPF / MPF-SD / MinPF.  The three positional ones rearrange a
location table each time an urgent job arrives; the rearrangement rules are
reconstructions and only meant for qualitative comparison.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from typing import Mapping, Sequence

from .engine import Policy

MPF, MPF_SD, MIN_PF = "MPF", "MPF-SD", "MinPF"


class KeyPolicy(Policy):
    """Serve the waiting job with the smallest ``key``; keys end with the job id."""

    def key(self, job, sim) -> tuple:
        raise NotImplementedError

    def reset(self):
        self._heap = []

    def on_arrival(self, job, sim):
        heapq.heappush(self._heap, self.key(job, sim))

    def select_next(self, sim):
        return heapq.heappop(self._heap)[-1]


class FCFS(KeyPolicy):
    name = "FCFS"

    def key(self, job, sim):
        return (job.arrival, job.id)


class SJF(KeyPolicy):
    name = "SJF"

    def key(self, job, sim):
        return (job.duration, job.id)


class SRPT(KeyPolicy):
    """Shortest remaining processing time, preemptive at arrivals.

    ``by="bytes"`` ranks web requests by remaining file bytes rather than
    remaining transfer time, which is what a size-based web server sees.
    """

    is_preemptive = True
    preempt_on_arrival = True
    # the ranking only changes at arrivals, so no quantum is needed
    default_quantum = math.inf

    def __init__(self, by: str = "time"):
        if by not in ("time", "bytes"):
            raise ValueError("SRPT ranks by 'time' or 'bytes'")
        self.by = by

    @property
    def name(self):
        return "SRPT" if self.by == "time" else "SRPT(bytes)"

    def __repr__(self):
        return f"SRPT(by={self.by!r})"

    def key(self, job, sim):
        rem = sim.remaining[job.id]
        if self.by == "bytes":
            if job.file_size is None:
                raise ValueError(f"job {job.id} has no file size to rank by")
            rem = job.file_size * rem / job.duration
        return (rem, job.id)


class RR(Policy):
    """Round robin: cyclic service, a preempted job rejoins at the tail."""

    name = "RR"
    is_preemptive = True

    def reset(self):
        self._queue = deque()

    def on_arrival(self, job, sim):
        self._queue.append(job.id)

    def select_next(self, sim):
        return self._queue.popleft()


class PS(Policy):
    """Processor sharing; the engine runs it as an exact fluid model."""

    name = "PS"
    processor_sharing = True

    def on_arrival(self, job, sim):
        pass

    def select_next(self, sim):
        raise RuntimeError("processor sharing never selects a single job")


def mpf_rearrange(table: Sequence[int], job_id: int, variant: str,
                  urgent: Mapping[int, bool], duration: Mapping[int, float]) -> list:
    """Rearrange a location table after urgent ``job_id`` was appended at its tail.

    MPF swaps the newcomer with the non-urgent job nearest the head.  MPF-SD
    does the same swap only when the newcomer is strictly shorter, so no
    urgent job is ever pushed back.  MinPF moves the newcomer forward one
    position at a time past non-urgent jobs and stops at the first urgent
    job (or the head).
    """
    out = list(table)
    pos = out.index(job_id)
    if variant in (MPF, MPF_SD):
        target = next((i for i in range(pos) if not urgent[out[i]]), None)
        if target is None:
            return out
        if variant == MPF_SD and not duration[job_id] < duration[out[target]]:
            return out
        out[target], out[pos] = out[pos], out[target]
        return out
    if variant == MIN_PF:
        stop = pos
        while stop > 0 and not urgent[out[stop - 1]]:
            stop -= 1
        if stop < pos:
            del out[pos]
            out.insert(stop, job_id)
        return out
    raise ValueError(f"unknown positional variant {variant!r}")


class Positional(Policy):
    """Location-table scheduler: serve the head, rearrange on urgent arrival."""

    def __init__(self, variant: str = MPF):
        if variant not in (MPF, MPF_SD, MIN_PF):
            raise ValueError(f"unknown positional variant {variant!r}")
        self.variant = variant

    @property
    def name(self):
        return self.variant

    def __repr__(self):
        return f"Positional({self.variant!r})"

    def reset(self):
        self.table = []
        self._urgent = {}
        self._duration = {}

    def on_arrival(self, job, sim):
        self.table.append(job.id)
        self._urgent[job.id] = job.urgent
        self._duration[job.id] = job.duration
        if job.urgent:
            self._rearrange(job.id)

    def _rearrange(self, jid):
        # same rules as mpf_rearrange, in place
        t = self.table
        pos = len(t) - 1
        if self.variant == MIN_PF:
            stop = pos
            while stop > 0 and not self._urgent[t[stop - 1]]:
                stop -= 1
            if stop < pos:
                t.pop()
                t.insert(stop, jid)
            return
        target = next((i for i in range(pos) if not self._urgent[t[i]]), None)
        if target is None:
            return
        if self.variant == MPF_SD and not self._duration[jid] < self._duration[t[target]]:
            return
        t[target], t[pos] = t[pos], t[target]

    def select_next(self, sim):
        return self.table.pop(0)
