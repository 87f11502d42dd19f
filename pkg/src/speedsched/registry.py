"""Policy names as used in configs and on the command line.

A policy is written ``NAME`` or ``NAME(key=value, ...)``, e.g. ``GPSU(p=0.9)``
or ``SRPT(by=bytes)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import applications, baselines, speedup
from .engine import Policy

_FACTORIES = {
    "FCFS": lambda **kw: baselines.FCFS(),
    "SJF": lambda **kw: baselines.SJF(),
    "SRPT": lambda by="time", **kw: baselines.SRPT(by),
    "RR": lambda **kw: baselines.RR(),
    "PS": lambda **kw: baselines.PS(),
    "MPF": lambda **kw: baselines.Positional(baselines.MPF),
    "MPF-SD": lambda **kw: baselines.Positional(baselines.MPF_SD),
    "MinPF": lambda **kw: baselines.Positional(baselines.MIN_PF),
    "UDSU": lambda **kw: speedup.UDSU(),
    "NUBSU": lambda **kw: speedup.NUBSU(),
    "FSU": lambda **kw: speedup.FSU(),
    "GPSU": lambda p=1.0, mode=speedup.FINE_GRAINED, **kw: speedup.GPSU(float(p), mode),
    "SSU": lambda **kw: applications.SSU(),
    "DSU": lambda **kw: applications.DSU(),
    "SSUPS": lambda **kw: applications.SSUPS(),
    "DSUPS": lambda **kw: applications.DSUPS(),
}
POLICY_NAMES = tuple(_FACTORIES)
POSITIONAL = ("MPF", "MPF-SD", "MinPF")
_PARAMS = {"SRPT": {"by"}, "GPSU": {"p", "mode"}}

_SPEC_RE = re.compile(r"^\s*([A-Za-z][\w-]*)\s*(?:\((.*)\))?\s*$")


class UnknownPolicy(ValueError):
    def __init__(self, name):
        super().__init__(f"unknown policy {name!r}; valid names: {', '.join(POLICY_NAMES)}")


@dataclass(frozen=True)
class PolicySpec:
    name: str
    params: tuple = field(default=())  # sorted (key, value) pairs

    @classmethod
    def parse(cls, text: str) -> "PolicySpec":
        m = _SPEC_RE.match(text)
        if not m:
            raise ValueError(f"cannot parse policy {text!r}")
        name, args = m.group(1), m.group(2)
        canon = {n.lower(): n for n in POLICY_NAMES}.get(name.lower())
        if canon is None:
            raise UnknownPolicy(name)
        params = {}
        if args and args.strip():
            for part in args.split(","):
                if "=" not in part:
                    raise ValueError(f"policy parameter {part!r} must be key=value")
                k, v = (s.strip() for s in part.split("=", 1))
                if k not in _PARAMS.get(canon, ()):
                    raise ValueError(f"{canon} takes no parameter {k!r}")
                params[k] = v
        return cls(canon, tuple(sorted(params.items())))

    def build(self, mode: str | None = None) -> Policy:
        params = dict(self.params)
        if self.name == "GPSU" and mode is not None:
            params.setdefault("mode", mode)
        return _FACTORIES[self.name](**params)

    @property
    def label(self) -> str:
        shown = [(k, v) for k, v in self.params if k != "mode"]
        if not shown:
            return self.name
        return f"{self.name}({','.join(f'{k}={v}' for k, v in shown)})"

    def __str__(self):
        return self.label


def make_policy(text: str, mode: str | None = None) -> Policy:
    return PolicySpec.parse(text).build(mode)
