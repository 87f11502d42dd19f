# %% [markdown]
# # Web requests and CPU bursts
#
# The speed-up priority carries over to two settings where no job is marked
# urgent.  For web requests it becomes arrival time x transfer time (SSU), or
# arrival time x attained service when the size is unknown (DSU).  For CPU
# bursts it is arrival time x burst (SSUPS) or x attained service (DSUPS).

# %%
from speedsched import make_policy, pairwise, run, summarize
from speedsched.metrics import abort_threshold
from speedsched.workload import SyntheticSpec, generate, generate_web

# %% [markdown]
# ## Web: two link scenarios
#
# Scenario 1 gives small files the slowest link, scenario 2 the fastest.  A
# request aborts when it takes longer than 95 % of the worst response under
# processor sharing.

# %%
for scenario in (1, 2):
    jobs = generate_web(600, scenario, load=3.0, seed=5)
    runs = {p: run(jobs, make_policy(p), quantum=0.01 if p == "DSU" else None)
            for p in ("PS", "SRPT(by=bytes)", "SSU", "DSU")}
    thr = abort_threshold(runs["PS"])
    print(f"scenario {scenario}")
    for p, r in runs.items():
        rep = summarize(r, jobs, thr)
        print(f"  {p:>14}: mean {rep.mean_response:7.2f}  max {rep.max_response:8.1f}  abort {rep.user_abort:5.2f}%")

# %% [markdown]
# ## CPU: who wins job by job?
#
# Each cell is the share of processes the row policy serves with a strictly
# shorter wait than the column policy.

# %%
jobs = generate(SyntheticSpec(n_jobs=2000, rho=1.1, seed=5))
names = ("FCFS", "SJF", "SRPT", "RR", "SSUPS", "DSUPS")
m = pairwise({p: run(jobs, make_policy(p)) for p in names})
print(" " * 6 + "".join(f"{y:>8}" for y in names))
for x in names:
    print(f"{x:>6}" + "".join(f"{m[x, y].speedup:8.1f}" for y in names))
