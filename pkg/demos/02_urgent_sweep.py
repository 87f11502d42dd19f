# %% [markdown]
# # How far can urgent jobs be pushed ahead?
#
# A Poisson stream of 2000 jobs (mean service 25, load 1.1) is labelled urgent
# at increasing rates.  Three speed-up policies share every job list:
#
# * UDSU always serves urgent work first,
# * NUBSU lets a non-urgent job go first when that provably costs no urgent
#   job its speed-up,
# * FSU ignores the flag and ranks everyone by arrival time x duration.

# %%
import numpy as np

from speedsched import make_policy, run, summarize
from speedsched.workload import SyntheticSpec, generate, label_urgent

base = generate(SyntheticSpec(n_jobs=2000, mu=0.04, rho=1.1, seed=11))
fractions = [0.1, 0.3, 0.5, 0.7, 0.9]

print("urgent  | achieved %  UDSU  NUBSU   FSU | non-urgent slowed %  UDSU  NUBSU   FSU")
for f in fractions:
    jobs = label_urgent(base, f, seed=11)
    reps = {p: summarize(run(jobs, make_policy(p)), jobs) for p in ("UDSU", "NUBSU", "FSU")}
    ach = "".join(f"{reps[p].achieved_ratio:6.1f}" for p in reps)
    slow = "".join(f"{reps[p].slowdown_nonurgent:6.1f}" for p in reps)
    print(f"{f:6.0%}  |           {ach} |                    {slow}")

# %% [markdown]
# NUBSU keeps count of forwards that later turn out to have cost an urgent
# job its speed-up (DNUJI).

# %%
for f in fractions:
    jobs = label_urgent(base, f, seed=11)
    r = run(jobs, make_policy("NUBSU"))
    print(f"{f:4.0%}: {r.extras['forwarded']:5d} forwards, DNUJI = {r.dnuji if r.dnuji is not None else float('nan'):.4f}")

# %% [markdown]
# FSU never looks at the flag, so its waits do not move with the fraction.

# %%
waits = [summarize(run(label_urgent(base, f, seed=11), make_policy("FSU")), base).mean_wait for f in fractions]
print("FSU mean wait:", np.round(waits, 3))
