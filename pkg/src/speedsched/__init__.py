"""Single-server scheduling simulator with speed-up policies for urgent jobs."""
from .applications import DSU, DSUPS, SSU, SSUPS
from .baselines import FCFS, MIN_PF, MPF, MPF_SD, PS, RR, SJF, SRPT, Positional, mpf_rearrange
from .core import (CompletionRecord, Job, SpeedClass, SpeedKind, SystemState, classify, current_speedup,
                   expected_execution, requested_speedup)
from .engine import Policy, ProtocolError, RunResult, replay_fixed_order, run
from .metrics import ExperimentReport, PairwiseMatrix, pairwise, summarize, user_abort
from .registry import POLICY_NAMES, PolicySpec, UnknownPolicy, make_policy
from .speedup import FINE_GRAINED, FSU, GPSU, NO_CONSTRAINTS, NUBSU, UDSU, OrderedIndex
from .workload import (SyntheticSpec, generate, generate_web, ingest_process_log, ingest_web_trace,
                       label_urgent, read_jobs_csv, write_jobs_csv)

__version__ = "0.1.0"
