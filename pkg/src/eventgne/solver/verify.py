"""Checks that a solved result is a feasible, properly masked equilibrium."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..imaging import ModelParams, exact_objective_batch
from .constraints import CLAIM_THRESHOLD, LevelConstraint

FEASIBILITY_SLACK = 1e-9


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    violations: list = field(default_factory=list)

    def to_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "violations": self.violations}


@dataclass
class VerificationReport:
    checks: list
    strict: bool = False

    # Feasibility and masking decide the verdict; bit-flip optimality only
    # does so in strict mode.
    REQUIRED = ("box", "budget", "masking")

    def counts(self, check):
        return self.strict or check.name.split(":")[0] in self.REQUIRED

    @property
    def passed(self):
        return all(c.passed for c in self.checks if self.counts(c))

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {"passed": self.passed, "strict": self.strict,
                "checks": [c.to_dict() for c in self.checks]}

    def summary(self):
        lines = []
        for c in self.checks:
            tag = "ok" if c.passed else ("FAIL" if self.counts(c) else "warn")
            lines.append(f"{tag:4s} {c.name}" + (f": {c.detail}" if c.detail else ""))
        lines.append("verdict: " + ("pass" if self.passed else "fail"))
        return "\n".join(lines)


def _first(idx, limit=20):
    return [int(i) for i in idx[:limit]]


def check_box(strategies, slack=FEASIBILITY_SLACK):
    bad = []
    for j, z in enumerate(strategies, start=1):
        out = np.flatnonzero((z < -slack) | (z > 1 + slack) | ~np.isfinite(z))
        if out.size:
            bad.append({"player": j, "events": _first(out)})
    detail = "" if not bad else f"{len(bad)} player(s) leave [0, 1]"
    return CheckResult("box", not bad, detail, bad)


def check_budget(strategies, slack=FEASIBILITY_SLACK):
    total = np.sum(strategies, axis=0)
    over = np.flatnonzero(total > 1 + slack)
    detail = "" if not over.size else f"{over.size} event(s) with summed confidence above 1"
    return CheckResult("budget", not over.size, detail, _first(over))


def check_masking(strategies):
    """Events claimed by an earlier player must carry zero later confidence."""
    bad = []
    claimed = np.zeros(len(strategies[0]), dtype=bool)
    for j, z in enumerate(strategies, start=1):
        hit = np.flatnonzero(claimed & (z != 0))
        if hit.size:
            bad.append({"player": j, "events": _first(hit)})
        claimed |= z >= CLAIM_THRESHOLD
    detail = "" if not bad else f"{len(bad)} player(s) use claimed events"
    return CheckResult("masking", not bad, detail, bad)


def check_bit_flips(j, strategies, es, params):
    """No single feasible flip of player ``j``'s binarised strategy lowers exact J."""
    n = len(es)
    cons = LevelConstraint.from_prior(strategies[: j - 1], n)
    top = cons.upper
    current = np.where(strategies[j - 1] >= CLAIM_THRESHOLD, top, 0.0)
    base = exact_objective_batch(current[None, :], es, params)[0]
    free = np.flatnonzero(cons.free)
    improving = []
    for start in range(0, free.size, 256):
        idx = free[start : start + 256]
        Z = np.repeat(current[None, :], idx.size, axis=0)
        rows = np.arange(idx.size)
        Z[rows, idx] = np.where(current[idx] > 0, 0.0, top[idx])
        vals = exact_objective_batch(Z, es, params)
        better = vals < base - 1e-9 * max(1.0, abs(base))
        improving.extend(int(k) for k in idx[better])
    name = f"bit_flip:{j}"
    if not np.isfinite(base):
        return CheckResult(name, False, "binarised strategy is degenerate", [])
    detail = "" if not improving else f"{len(improving)} improving flip(s) from J={base:.6g}"
    return CheckResult(name, not improving, detail, improving[:20])


def verify_equilibrium(res, es, params=ModelParams(), strict=False, bit_flips=True):
    """Structured pass/fail report for a solved result.

    Feasibility (box and summed budget) and masking decide the verdict.
    Single-bit-flip local optimality of each binarised strategy under the
    exact objective is reported per player and only counts when ``strict``.
    """
    strategies = [np.asarray(z, dtype=float) for z in res.strategies]
    n = len(es)
    for j, z in enumerate(strategies, start=1):
        if z.shape != (n,):
            raise ValueError(f"player {j} strategy has {z.size} entries, event set has {n}")
    checks = []
    if strategies:
        checks += [check_box(strategies), check_budget(strategies), check_masking(strategies)]
        if bit_flips:
            checks += [check_bit_flips(j, strategies, es, params) for j in range(1, len(strategies) + 1)]
    return VerificationReport(checks, strict)
