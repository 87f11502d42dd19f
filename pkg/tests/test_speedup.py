import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from speedsched import GPSU, NUBSU, UDSU, Job, OrderedIndex, make_policy, run
from speedsched.core import SpeedKind, classify
from speedsched.engine import Sim
from speedsched.speedup import (FINE_GRAINED, NO_CONSTRAINTS, candidate, is_opportunistically_forwardable,
                                priority_urgent)
from strategies import workloads


def finishes(res):
    return {r.job_id: r.finish for r in res.records}


def test_candidate_minimum_with_tie_breaks():
    idx = OrderedIndex([(6.0, 3.0, 4), (6.0, 2.0, 9), (6.0, 2.0, 7), (8.0, 1.0, 1)])
    assert candidate(idx) == 7
    assert candidate(OrderedIndex()) is None
    with pytest.raises(KeyError):
        idx.remove((1.0, 1.0, 1))


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(1, 5)), min_size=1, max_size=20, unique=True))
def test_candidate_matches_linear_scan(pairs):
    jobs = [Job(i, a, d) for i, (a, d) in enumerate(pairs)]
    idx = OrderedIndex((j.arrival * j.duration, j.duration, j.id) for j in jobs)
    best = min(jobs, key=lambda j: (j.arrival * j.duration, j.duration, j.id))
    assert candidate(idx) == best.id


def test_forwardable_examples():
    k = Job(1, 0, 3, urgent=True)
    cand = Job(2, 0, 4)
    # waited 3, forwarded 4, own 3: 10 < 11 holds
    assert is_opportunistically_forwardable(cand, [k], {1: 11.0}, now=3.0)
    # one more unit of waiting reaches 11, which is not strictly below
    assert not is_opportunistically_forwardable(cand, [k], {1: 11.0}, now=4.0)
    assert is_opportunistically_forwardable(cand, [], {}, now=100.0)


def test_forwardable_counts_equal_priority_jobs():
    # both urgent jobs share P = 0; each has to wait for the other
    a, b = Job(1, 0, 2, urgent=True), Job(2, 0, 2, urgent=True)
    t = {1: 7.0, 2: 7.0}
    assert is_opportunistically_forwardable(Job(3, 0, 2), [a, b], t, now=0.0)
    assert not is_opportunistically_forwardable(Job(3, 0, 3), [a, b], t, now=0.0)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 10), st.integers(1, 6), st.integers(0, 30)), min_size=0, max_size=10),
       st.integers(1, 8), st.integers(0, 15), st.integers(0, 4))
def test_vectorised_forwardable_matches_definition(specs, d_cand, now, d_rem):
    urgent = [Job(i, a, d, urgent=True) for i, (a, d, _) in enumerate(specs)]
    t_exp = {j.id: j.duration + extra for j, (_, _, extra) in zip(urgent, specs)}
    sim = Sim(np.random.default_rng(0))
    sim.t_exp = t_exp
    pol = NUBSU()
    pol.reset()
    for j in urgent:
        pol.on_arrival(j, sim)
    cand = Job(99, 0, d_cand)
    assert pol.forwardable(cand, float(now), float(d_rem)) == \
        is_opportunistically_forwardable(cand, urgent, t_exp, float(now), float(d_rem))


def test_priority_urgent_collapses_to_arrival_at_full_request():
    j = Job(0, 7.0, 3.0, urgent=True, requested_pct=100.0)
    assert priority_urgent(j, 50.0) == 7.0
    half = Job(0, 7.0, 3.0, urgent=True, requested_pct=50.0)
    assert priority_urgent(half, 13.0) == pytest.approx(7.0 + 0.5 * 10.0)


@settings(max_examples=150, deadline=None)
@given(workloads())
def test_nubsu_matches_reference(jobs):
    ref = oracle.Nubsu()
    sched, _ = oracle.simulate(jobs, ref)
    res = run(jobs, NUBSU())
    assert finishes(res) == {k: f for k, (_, f) in sched.items()}
    assert res.extras["forwarded"] == ref.forwards
    assert res.extras["unsuccessful_forwards"] == ref.unsuccessful
    assert res.dnuji == (ref.unsuccessful / ref.forwards if ref.forwards else None)


def test_nubsu_forward_that_is_harmless():
    # urgent job 2 expects 14; after the short job 3 it still finishes at 12
    jobs = [Job(0, 0, 10), Job(1, 1, 5), Job(2, 2, 1, urgent=True), Job(3, 3, 1)]
    res = run(jobs, NUBSU())
    assert finishes(res) == {0: 10.0, 3: 11.0, 2: 12.0, 1: 17.0}
    assert res.extras["forwarded"] == 1 and res.dnuji == 0.0
    assert classify(res.by_job()[2]).kind is SpeedKind.SPED_UP


@settings(max_examples=150, deadline=None)
@given(workloads(pct=True), st.sampled_from([0.0, 0.3, 0.7, 1.0]), st.booleans(), st.integers(0, 5))
def test_gpsu_matches_reference(jobs, p, fine, seed):
    mode = FINE_GRAINED if fine else NO_CONSTRAINTS
    sched, _ = oracle.simulate(jobs, oracle.Gpsu(p, seed, fine))
    assert finishes(run(jobs, GPSU(p, mode), seed=seed)) == {k: f for k, (_, f) in sched.items()}


@settings(max_examples=80, deadline=None)
@given(workloads(), st.integers(0, 3))
def test_gpsu_certain_urgent_equals_udsu(jobs, seed):
    assert finishes(run(jobs, GPSU(1.0, NO_CONSTRAINTS), seed=seed)) == finishes(run(jobs, UDSU()))


@settings(max_examples=80, deadline=None)
@given(workloads())
def test_gpsu_never_urgent_prefers_nonurgent(jobs):
    res = run(jobs, GPSU(0.0, NO_CONSTRAINTS), trace=True)
    ref, _ = oracle.simulate(jobs, lambda w, t, te: min([j for j in w if not j.urgent] or w, key=oracle.key_p))
    assert finishes(res) == {k: f for k, (_, f) in ref.items()}


def test_gpsu_draws_only_when_both_classes_wait():
    class CountingRng:
        def __init__(self):
            self.calls = 0

        def random(self):
            self.calls += 1
            return 0.0

    jobs = [Job(i, i * 10, 1, urgent=i % 2 == 0) for i in range(6)]
    pol = GPSU(0.5, NO_CONSTRAINTS)
    pol.reset()
    sim = Sim(CountingRng())
    sim.t_exp = {j.id: j.duration for j in jobs}
    for j in jobs:  # never more than one waiting job at a time
        pol.on_arrival(j, sim)
        pol.select_next(sim)
    assert sim.rng.calls == 0


def test_gpsu_rejects_bad_parameters():
    with pytest.raises(ValueError):
        GPSU(1.5)
    with pytest.raises(ValueError):
        GPSU(0.5, "sometimes")
    assert make_policy("GPSU(p=0.9)").p == 0.9


@settings(max_examples=60, deadline=None)
@given(workloads())
def test_fsu_ignores_urgency(jobs):
    flipped = [Job(j.id, j.arrival, j.duration, not j.urgent) for j in jobs]
    assert finishes(run(jobs, make_policy("FSU"))) == finishes(run(flipped, make_policy("FSU")))


@settings(max_examples=60, deadline=None)
@given(workloads())
def test_udsu_serves_urgent_before_nonurgent_when_both_wait(jobs):
    res = run(jobs, UDSU(), trace=True)
    by = {j.id: j for j in jobs}
    for jid, start, _ in res.slices:
        if by[jid].urgent:
            continue
        waiting_urgent = [r for r in res.records if by[r.job_id].urgent
                          and r.arrival <= start and r.finish - r.duration > start]
        assert not waiting_urgent


def test_nubsu_forward_undone_by_later_urgent_arrival():
    # the forward keeps urgent job 2 ahead of schedule, but urgent job 4
    # arrives during it with a better rank and pushes job 2 past 39
    jobs = [Job(0, 0, 10), Job(1, 1, 6), Job(2, 2, 25, urgent=True), Job(3, 3, 1.9),
            Job(4, 11, 4.2, urgent=True)]
    res = run(jobs, NUBSU())
    assert res.extras == {"dnuji": 1.0, "forwarded": 1, "unsuccessful_forwards": 1}
    assert classify(res.by_job()[2]).kind is SpeedKind.SLOWED_DOWN
