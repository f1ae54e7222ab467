"""Projected-gradient refinement of the relaxed objective on a box."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateMotionError, DegenerateSelectionError
from ..imaging import ModelParams, objective, objective_gradient


@dataclass(frozen=True)
class RefineConfig:
    tolerance: float = 1e-4
    max_iterations: int = 200
    initial_step: float = 1.0
    armijo: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 40

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if not 0 < self.armijo < 1 or not 0 < self.backtrack < 1:
            raise ValueError("armijo and backtrack must lie in (0, 1)")


@dataclass
class RefineResult:
    z: np.ndarray
    value: float
    initial_value: float
    iterations: int
    termination: str


def _value(z, es, params):
    try:
        return objective(z, es, params, "relaxed")
    except (DegenerateSelectionError, DegenerateMotionError):
        return math.inf


def projected_gradient(z, grad, upper):
    return np.clip(z - grad, 0.0, upper) - z


def refine_search(z0, es, cons, params=ModelParams(), cfg=RefineConfig()):
    """Armijo-backtracked projected gradient on ``[0, cons.upper]``.

    Stops when the projected-gradient infinity norm or the accepted decrease
    falls to ``cfg.tolerance``, when no step gives sufficient decrease, or
    after ``cfg.max_iterations``.
    """
    upper = cons.upper
    z = np.clip(np.asarray(z0, dtype=float), 0.0, upper)
    f = objective(z, es, params, "relaxed")
    f0 = f
    termination = "max_iterations"
    it = 0
    while it < cfg.max_iterations:
        g = objective_gradient(z, es, params)
        if np.max(np.abs(projected_gradient(z, g, upper)), initial=0.0) <= cfg.tolerance:
            termination = "projected_gradient"
            break
        step = cfg.initial_step
        for _ in range(cfg.max_backtracks):
            cand = np.clip(z - step * g, 0.0, upper)
            fc = _value(cand, es, params)
            if fc <= f + cfg.armijo * float(g @ (cand - z)):
                break
            step *= cfg.backtrack
        else:
            termination = "line_search"
            break
        it += 1
        decrease = f - fc
        z, f = cand, fc
        if decrease <= cfg.tolerance:
            termination = "stall"
            break
    return RefineResult(z, f, f0, it, termination)


def refine(z0, es, cons, params=ModelParams(), cfg=RefineConfig()):
    """Refined strategy; relaxed objective never above that of ``z0``."""
    return refine_search(z0, es, cons, params, cfg).z
