"""Verification reports: named residual checks with tolerances and verdicts."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class Check:
    name: str
    anchor: str
    residuals: np.ndarray
    tol: float
    points: Optional[np.ndarray] = None
    note: str = ""

    @property
    def max_residual(self):
        r = np.asarray(self.residuals, dtype=float)
        return float(np.max(r)) if r.size else 0.0

    @property
    def passed(self):
        return bool(np.all(np.isfinite(self.residuals))) and self.max_residual < self.tol

    def as_dict(self):
        return {
            "name": self.name,
            "paper_anchor": self.anchor,
            "max_residual": self.max_residual,
            "tol": self.tol,
            "pass": self.passed,
            "samples": int(np.size(self.residuals)),
        }


@dataclass
class SplittingReport:
    scenario: str
    seed: int = 0
    checks: List[Check] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def add(self, name, anchor, residuals, tol, points=None, note=""):
        c = Check(name, anchor, np.atleast_1d(np.asarray(residuals, dtype=float)), tol, points, note)
        self.checks.append(c)
        return c

    def extend(self, other):
        self.checks.extend(other.checks)
        self.extras.update(other.extras)
        return self

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self):
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark}  {c.name:<40s} max={c.max_residual:.3e}  tol={c.tol:.1e}")
        return "\n".join(lines)

    def as_dict(self):
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "checks": [c.as_dict() for c in self.checks],
            "verdict": "pass" if self.passed else "fail",
        }
