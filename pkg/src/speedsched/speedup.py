"""Speed-up schedulers: UDSU, NUBSU, FSU and GPSU.

All four rank jobs by ``arrival * duration`` (lower is served first), which
favours short jobs while letting long-waiting ones age to the front.  GPSU in
fine-grained mode ranks urgent jobs by how much of their requested speed-up
is still reachable instead.

Indexes are kept sorted by ``(priority, duration, id)`` so the minimum is
the candidate and ties resolve deterministically.
"""
from __future__ import annotations

import bisect
from typing import Iterable, Mapping, Optional

import numpy as np

from .core import TIME_EPS, Job, current_speedup
from .engine import Policy, Sim

__all__ = [
    "priority_p", "priority_urgent", "OrderedIndex", "candidate", "is_opportunistically_forwardable",
    "UDSU", "NUBSU", "FSU", "GPSU", "current_speedup", "NO_CONSTRAINTS", "FINE_GRAINED",
]

NO_CONSTRAINTS = "no-constraints"
FINE_GRAINED = "fine-grained"


def priority_p(job: Job) -> float:
    return job.arrival * job.duration


def priority_urgent(job: Job, t_exp: float) -> float:
    pct = 100.0 if job.requested_pct is None else job.requested_pct
    return job.arrival + (1.0 - pct / 100.0) * (t_exp - job.duration)


def key_p(job: Job) -> tuple:
    return (job.arrival * job.duration, job.duration, job.id)


class OrderedIndex:
    """Sorted collection of ``(priority, duration, id)`` keys."""

    def __init__(self, keys: Iterable[tuple] = ()):
        self._keys = sorted(keys)

    def add(self, key: tuple) -> int:
        pos = bisect.bisect_left(self._keys, key)
        self._keys.insert(pos, key)
        return pos

    def remove(self, key: tuple) -> None:
        pos = bisect.bisect_left(self._keys, key)
        if pos == len(self._keys) or self._keys[pos] != key:
            raise KeyError(key)
        del self._keys[pos]

    def peek(self) -> Optional[int]:
        return self._keys[0][-1] if self._keys else None

    def pop_min(self) -> int:
        return self._keys.pop(0)[-1]

    def keys(self) -> list:
        return list(self._keys)

    def __iter__(self):
        return (k[-1] for k in self._keys)

    def __len__(self):
        return len(self._keys)

    def __bool__(self):
        return bool(self._keys)


def candidate(index: OrderedIndex) -> Optional[int]:
    """Minimum-priority job id; shorter duration, then smaller id, break ties."""
    return index.peek()


def is_opportunistically_forwardable(job: Job, urgent: Iterable[Job], t_exp: Mapping[int, float],
                                     now: float, d_rem: float = 0.0) -> bool:
    """Can non-urgent ``job`` go first without costing any waiting urgent job its speed-up?

    Each urgent job ``k`` still has to wait for ``job`` plus every urgent job
    ranked at or before it (its own duration included); all of that, on top
    of the time it has already waited, must stay strictly below its
    expected execution time.
    """
    ranked = sorted(urgent, key=key_p)
    i = 0
    prefix = 0.0
    while i < len(ranked):
        p = priority_p(ranked[i])
        group_end = i
        while group_end < len(ranked) and priority_p(ranked[group_end]) == p:
            prefix += ranked[group_end].duration
            group_end += 1
        for k in ranked[i:group_end]:
            if not (now - k.arrival) + job.duration + prefix + d_rem < t_exp[k.id]:
                return False
        i = group_end
    return True


class UDSU(Policy):
    """Urgent jobs first (by P); non-urgent ones only when no urgent job waits."""

    name = "UDSU"

    def reset(self):
        self.urgent = OrderedIndex()
        self.nonurgent = OrderedIndex()

    def on_arrival(self, job, sim):
        (self.urgent if job.urgent else self.nonurgent).add(key_p(job))

    def select_next(self, sim):
        if self.urgent:
            return self.urgent.pop_min()
        return self.nonurgent.pop_min()


class FSU(Policy):
    """Single ranking by P over all waiting jobs; the urgent flag is ignored."""

    name = "FSU"

    def reset(self):
        self.index = OrderedIndex()

    def on_arrival(self, job, sim):
        self.index.add(key_p(job))

    def select_next(self, sim):
        return self.index.pop_min()


class NUBSU(Policy):
    """UDSU that lets the non-urgent candidate jump ahead when that is harmless.

    The urgent set is mirrored into arrays in rank order so the
    forwardability walk becomes one cumulative sum, and is only redone when
    the urgent set changes.

    Every forward is re-examined when the forwarded job completes, i.e. at
    the next decision.  It counts as unsuccessful when some urgent job that
    was waiting at forwarding time can no longer be sped up even if it is
    served in rank order from now on, but could have been without the
    forwarded job's duration.  Urgent jobs that arrived meanwhile with a
    better rank are what usually breaks the earlier guarantee.
    """

    name = "NUBSU"

    def reset(self):
        self.urgent = OrderedIndex()
        self.nonurgent = OrderedIndex()
        # urgent jobs in rank order, rows: P, duration, arrival, expected time
        self._cols = np.empty((4, 0))
        self._ties = False
        self._slack = None  # T + A - prefix, recomputed lazily
        self.forwarded = 0
        self.unsuccessful = 0
        self._pending = None  # (forwarding time, forwarded duration)

    def on_arrival(self, job, sim):
        if not job.urgent:
            self.nonurgent.add(key_p(job))
            return
        pos = self.urgent.add(key_p(job))
        p = priority_p(job)
        c = self._cols
        n = c.shape[1]
        self._ties = self._ties or (pos > 0 and c[0, pos - 1] == p) or (pos < n and c[0, pos] == p)
        col = np.array([[p], [job.duration], [job.arrival], [sim.t_exp[job.id]]])
        self._cols = np.concatenate((c[:, :pos], col, c[:, pos:]), axis=1)
        self._slack = None

    def slack(self) -> np.ndarray:
        """Latest instant at which each urgent job's rank-order wait may start and still beat its expected time.

        Job k keeps its speed-up while ``now + extra < slack[k]``, where
        ``extra`` is whatever runs before the urgent jobs.
        """
        if self._slack is None:
            p, d, a, t = self._cols
            prefix = np.cumsum(d)
            if self._ties:
                # ties in P count fully: every k' with P(k') <= P(k)
                prefix = prefix[np.searchsorted(p, p, side="right") - 1]
            self._slack = t + a - prefix
        return self._slack

    def forwardable(self, job: Job, now: float, d_rem: float = 0.0) -> bool:
        if not self._cols.shape[1]:
            return True
        return bool(now + job.duration + d_rem < self.slack().min())

    def _settle(self, now: float) -> None:
        if self._pending is None:
            return
        t, d = self._pending
        self._pending = None
        if not self._cols.shape[1]:
            return
        slack = self.slack()
        if slack.min() > now:
            return
        # only the forwarded job ran since t, so the urgent jobs overtaken
        # are exactly those still waiting that had arrived by then
        if np.any((slack <= now) & (slack > now - d) & (self._cols[2] <= t)):
            self.unsuccessful += 1

    def select_next(self, sim):
        self._settle(sim.now)
        if self.nonurgent:
            if not self.urgent:
                return self.nonurgent.pop_min()
            cand = sim.jobs[self.nonurgent.peek()]
            if self.forwardable(cand, sim.now, sim.d_rem):
                self.forwarded += 1
                self._pending = (sim.now, cand.duration)
                return self.nonurgent.pop_min()
        self._cols = self._cols[:, 1:]
        self._slack = None
        if not self._cols.shape[1]:
            self._ties = False
        return self.urgent.pop_min()

    def finalize(self, records, sim):
        # a forward still pending here ran last; nothing was left to overtake
        self._pending = None
        total = self.forwarded
        dnuji = self.unsuccessful / total if total else None
        return {"dnuji": dnuji, "forwarded": total, "unsuccessful_forwards": self.unsuccessful}


class GPSU(Policy):
    """Serve the urgent candidate with probability ``p``, else the non-urgent one.

    One uniform draw is consumed per decision, and only when both classes
    are non-empty.  ``mode="fine-grained"`` ranks urgent jobs by how much of
    their requested speed-up is still within reach; ``"no-constraints"``
    ranks them by P like the other policies.
    """

    def __init__(self, p: float = 1.0, mode: str = FINE_GRAINED):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"GPSU probability must lie in [0, 1], got {p}")
        if mode not in (NO_CONSTRAINTS, FINE_GRAINED):
            raise ValueError(f"unknown GPSU mode {mode!r}")
        self.p = p
        self.mode = mode

    @property
    def name(self):
        return f"GPSU(p={self.p:g})"

    def __repr__(self):
        return f"GPSU(p={self.p!r}, mode={self.mode!r})"

    def reset(self):
        self.urgent = OrderedIndex()
        self.nonurgent = OrderedIndex()

    def on_arrival(self, job, sim):
        if not job.urgent:
            self.nonurgent.add(key_p(job))
        elif self.mode == FINE_GRAINED:
            self.urgent.add((priority_urgent(job, sim.t_exp[job.id]), job.duration, job.id))
        else:
            self.urgent.add(key_p(job))

    def select_next(self, sim):
        if not self.urgent:
            return self.nonurgent.pop_min()
        if not self.nonurgent:
            return self.urgent.pop_min()
        if sim.rng.random() <= self.p:
            return self.urgent.pop_min()
        return self.nonurgent.pop_min()
