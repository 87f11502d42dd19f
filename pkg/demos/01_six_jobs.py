# %% [markdown]
# # Six jobs, one server
#
# A small hand-sized workload makes the bookkeeping visible.  Each job gets an
# expected execution time at arrival: what it would experience if everyone
# were served in arrival order.  Any other schedule is then judged job by job
# against that reference.

# %%
from speedsched import Job, classify, make_policy, replay_fixed_order, run

jobs = [Job(0, 0, 5), Job(1, 1, 5), Job(2, 2, 3, urgent=True), Job(3, 3, 4, urgent=True),
        Job(4, 4, 3), Job(5, 5, 5, urgent=True)]

# %% [markdown]
# Replay a hand-picked order: the last urgent job jumps straight to the front.

# %%
res = replay_fixed_order(jobs, [0, 5, 3, 2, 4, 1])
print(f"{'job':>3} {'urgent':>6} {'T_exp':>6} {'T_actual':>8}  outcome")
for r in sorted(res.records, key=lambda r: r.job_id):
    c = classify(r)
    tag = c.kind.value if c.amount == 0 else f"{c.kind.value} by {c.amount:g}"
    print(f"{r.job_id:>3} {str(jobs[r.job_id].urgent):>6} {r.t_exp:>6g} {r.t_actual:>8g}  {tag}")

# %% [markdown]
# The same jobs under the built-in policies (+ sped up, - slowed down,
# . unchanged).  FCFS is the reference, so it never moves anyone.

# %%
for name in ("FCFS", "UDSU", "NUBSU", "FSU", "MPF", "MinPF", "SRPT"):
    r = run(jobs, make_policy(name))
    marks = {"sped_up": "+", "slowed_down": "-", "neutral": "."}
    kinds = [marks[classify(x).kind.value] for x in sorted(r.records, key=lambda x: x.job_id)]
    print(f"{name:>6}: " + " ".join(kinds))
