"""Command line entry point: ``simulate``, ``compare`` and ``ingest``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import workload
from .experiment import ConfigError, compare_runs, load_config, run_experiment
from .registry import PolicySpec, UnknownPolicy

EPILOG = """\
experiments and the command that reproduces each (configs/ holds the files):
  urgent jobs sped up, non-urgent slowed down, mean / 95th percentile / max
  wait, by urgent fraction (rho 1.1, 1.3, 1.5)
      simulate --config configs/no_constraints.ini
  share of unsuccessful opportunistic forwards (DNUJI) per load, plot-ready
      simulate --config configs/no_constraints.ini        -> dnuji.csv
  urgent jobs reaching their requested speed-up, slowed-down non-urgent
  jobs and mean wait under GPSU for p = 1, 0.9, 0.8, 0.7
      simulate --config configs/fine_grained.ini
  the same two families of tables on a process-accounting log
      ingest --pacct LOG --out jobs.csv
      simulate --config configs/process_log.ini
  web requests: overall and per size class mean / max response time,
  share sped up / slowed down against FCFS, user abort, for scenario 1 and 2
      simulate --config configs/web_scenario1.ini
      simulate --config configs/web_scenario2.ini
      (or ingest --webtrace LOG --scenario N --out jobs.csv for a real trace)
  CPU scheduling: mean / max / standard deviation of wait for FCFS, SJF,
  SRPT, RR, SSUPS, DSUPS at rho 0.8 .. 1.3
      simulate --config configs/cpu.ini
  pairwise speed-up / slow-down matrix between CPU policies (rho 1.1)
      simulate --config configs/cpu_pairwise.ini
      compare --runs out/cpu_pairwise
"""


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="speedsched", description=__doc__, epilog=EPILOG,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress and skipped input lines")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured sweep and write report tables",
                         epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sim.add_argument("--config", required=True, type=Path, help="INI experiment description")
    sim.add_argument("--seed-override", type=int, metavar="N", help="run only seed N")
    sim.add_argument("--policy", action="append", metavar="NAME",
                     help="policy to run (repeatable); replaces the config's list")
    sim.add_argument("--out", type=Path, metavar="DIR", help="output directory")
    sim.add_argument("--format", choices=("csv", "md"), help="emit only this report format")

    cmp_ = sub.add_parser("compare", help="pairwise speed-up / slow-down matrix of a finished run")
    cmp_.add_argument("--runs", required=True, type=Path, metavar="DIR", help="output directory of simulate")
    cmp_.add_argument("--out", type=Path, metavar="DIR", help="where to write pairwise.csv / .md")

    ing = sub.add_parser("ingest", help="convert a trace into a job file")
    src = ing.add_mutually_exclusive_group(required=True)
    src.add_argument("--pacct", type=Path, metavar="PATH", help="process-accounting dump")
    src.add_argument("--webtrace", type=Path, metavar="PATH", help="proxy access log")
    ing.add_argument("--scenario", type=int, choices=(1, 2), help="bandwidth mapping for web traces")
    ing.add_argument("--out", required=True, type=Path, metavar="FILE", help="jobs CSV to write")
    return ap


def _simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed_override is not None:
        cfg.seeds = [args.seed_override]
    if args.policy:
        cfg.policies = [PolicySpec.parse(p) for p in args.policy]
    if args.out is not None:
        cfg.out_dir = args.out
    if args.format:
        cfg.formats = (args.format,)
    for path in run_experiment(cfg):
        print(path)
    return 0


def _ingest(args, parser) -> int:
    if args.pacct is not None:
        if args.scenario is not None:
            parser.error("--scenario only applies to --webtrace")
        jobs = workload.ingest_process_log(args.pacct)
    else:
        if args.scenario is None:
            parser.error("--webtrace needs --scenario 1 or 2")
        jobs = workload.ingest_web_trace(args.webtrace, args.scenario)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    workload.write_jobs_csv(jobs, args.out)
    print(f"{len(jobs)} jobs -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "compare":
            for path in compare_runs(args.runs, args.out):
                print(path)
            return 0
        return _ingest(args, parser)
    except (ConfigError, UnknownPolicy) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
