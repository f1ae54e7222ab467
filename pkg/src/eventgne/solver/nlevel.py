"""Sequential N-level solve: player j optimises after players 1..j-1 are fixed."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List

import numpy as np

from ..errors import EventGNEError, SolverError
from ..imaging import ModelParams, objective
from ..kinematics import Theta, estimate_theta
from .constraints import LevelConstraint
from .ga import GAConfig, ga_search
from .refine import RefineConfig, refine_search

log = logging.getLogger(__name__)

HARD_THRESHOLD = 0.5


@dataclass
class LevelResult:
    z: np.ndarray
    theta: Theta
    objective: float
    diagnostics: dict


@dataclass
class EquilibriumResult:
    """Per-player strategies, velocities, relaxed objective values and run notes."""

    strategies: List[np.ndarray]
    thetas: List[Theta]
    objectives: List[float]
    diagnostics: List[dict] = field(default_factory=list)
    t0: float = 0.0

    @property
    def n_players(self):
        return len(self.strategies)

    def assignments(self, threshold=HARD_THRESHOLD):
        """Boolean (players x events) hard assignment."""
        return np.array([np.asarray(z) >= threshold for z in self.strategies])

    def to_dict(self):
        return {
            "players": self.n_players,
            "n_events": int(len(self.strategies[0])) if self.strategies else 0,
            "t0": self.t0,
            "strategies": [np.asarray(z, dtype=float).tolist() for z in self.strategies],
            "thetas": [[float(th[0]), float(th[1])] for th in self.thetas],
            "objectives": [float(v) for v in self.objectives],
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d):
        strategies = [np.asarray(z, dtype=float) for z in d["strategies"]]
        if "n_events" in d and any(z.size != d["n_events"] for z in strategies):
            raise ValueError("strategy length disagrees with n_events")
        return cls(
            strategies=strategies,
            thetas=[Theta(float(a), float(b)) for a, b in d["thetas"]],
            objectives=[float(v) for v in d["objectives"]],
            diagnostics=list(d.get("diagnostics", [])),
            t0=float(d.get("t0", 0.0)),
        )

    def save(self, path):
        with open(path, "w", encoding="ascii") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="ascii") as fh:
            return cls.from_dict(json.load(fh))


def _level_ga_config(cfg, j):
    # Distinct, reproducible stream per level.
    return GAConfig(**{**asdict(cfg), "seed": int(np.random.SeedSequence([cfg.seed, j]).generate_state(1)[0])})


def solve_level(j, prior, es, params=ModelParams(), ga_cfg=GAConfig(), refine_cfg=RefineConfig()):
    """GA over binary strategies, then relaxed refinement, for player ``j``."""
    cons = LevelConstraint.from_prior(prior, len(es))
    ga = ga_search(es, cons, params, _level_ga_config(ga_cfg, j))
    ref = refine_search(ga.z, es, cons, params, refine_cfg)
    theta = estimate_theta(ref.z, es, "relaxed", params.relax)
    diag = {
        "level": j,
        "free_events": int(cons.free.sum()),
        "ga_generations": ga.generations,
        "ga_termination": ga.termination,
        "ga_objective": ga.fitness,
        "ga_selected": int(ga.z.sum()),
        "refine_iterations": ref.iterations,
        "refine_termination": ref.termination,
        "refine_initial_objective": ref.initial_value,
        "selected": int((ref.z >= HARD_THRESHOLD).sum()),
    }
    log.info(
        "level %d: GA %d gens (J=%.4g), refine %d its (J=%.4g), %d events selected",
        j, ga.generations, ga.fitness, ref.iterations, ref.value, diag["selected"],
    )
    return LevelResult(ref.z, theta, ref.value, diag)


def solve_nlevel(n_players, es, params=ModelParams(), ga_cfg=GAConfig(), refine_cfg=RefineConfig()):
    """Solve levels 1..N once, in ascending order."""
    if n_players < 1:
        raise ValueError("need at least one player")
    res = EquilibriumResult([], [], [], [], params.reference_time(es))
    for j in range(1, n_players + 1):
        try:
            lvl = solve_level(j, res.strategies, es, params, ga_cfg, refine_cfg)
        except EventGNEError as exc:
            raise SolverError(f"level {j} failed: {exc}", level=j, partial=res) from exc
        res.strategies.append(lvl.z)
        res.thetas.append(lvl.theta)
        res.objectives.append(lvl.objective)
        res.diagnostics.append(lvl.diagnostics)
    return res
