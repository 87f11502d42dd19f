"""Speed-up priorities specialised to web requests and CPU processes.

SSU / SSUPS know the service demand up front and are non-preemptive.
DSU / DSUPS only see attained service, so they are preemptive and
re-ranked at every preemption point; a fresh arrival has zero attained
service and therefore the best possible rank.
"""
from __future__ import annotations

from .baselines import KeyPolicy
from .core import Job


def _need_link(job: Job) -> None:
    if job.file_size is None or job.bandwidth is None:
        raise ValueError(f"job {job.id} lacks file size / link bandwidth")


def ssu_priority(job: Job) -> float:
    _need_link(job)
    return job.arrival * job.file_size / job.bandwidth


def dsu_priority(job: Job, attained: float) -> float:
    if job.bandwidth is None:
        raise ValueError(f"job {job.id} lacks link bandwidth")
    return job.arrival * attained / job.bandwidth


def ssups_priority(job: Job) -> float:
    return job.arrival * job.duration


def dsups_priority(job: Job, attained: float) -> float:
    return job.arrival * attained


class SSU(KeyPolicy):
    """Static speed-up for web requests; ties go to the smaller file."""

    name = "SSU"

    def key(self, job, sim):
        return (ssu_priority(job), job.file_size, job.id)


class DSU(KeyPolicy):
    """Dynamic speed-up for web requests of unknown size."""

    name = "DSU"
    is_preemptive = True
    preempt_on_arrival = True

    def key(self, job, sim):
        return (dsu_priority(job, sim.attained[job.id]), job.arrival, job.id)


class SSUPS(KeyPolicy):
    name = "SSUPS"

    def key(self, job, sim):
        return (ssups_priority(job), job.duration, job.id)


class DSUPS(KeyPolicy):
    name = "DSUPS"
    is_preemptive = True
    preempt_on_arrival = True

    def key(self, job, sim):
        return (dsups_priority(job, sim.attained[job.id]), job.arrival, job.id)
