"""Generational genetic algorithm over binary strategies."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..imaging import ModelParams, exact_objective_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GAConfig:
    population: int = 50
    max_generations: int = 1000
    stall_tolerance: float = 1e-2
    stall_generations: int = 50
    mutation_rate: Optional[float] = None  # None -> 1 / number of free events
    crossover_rate: float = 0.8
    elite_count: int = 2
    tournament_size: int = 3
    seeding: str = "spacetime"  # or "random"
    restarts: int = 1  # independent runs, best kept
    seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be at least 2")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not 0 <= self.elite_count < self.population:
            raise ValueError("elite_count must be in [0, population)")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")
        if self.seeding not in ("spacetime", "random"):
            raise ValueError("seeding must be 'spacetime' or 'random'")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")


@dataclass
class GAResult:
    z: np.ndarray
    fitness: float
    generations: int
    termination: str
    history: list


def _tournament(rng, fitness, k, count):
    picks = rng.integers(0, fitness.size, size=(count, k))
    return picks[np.arange(count), np.argmin(fitness[picks], axis=1)]


# (spatial radius in pixels, fraction of the time span) pairs used for seeding
SEED_SCALES = ((1.0, 0.125), (1.0, 0.25), (2.0, 0.25), (2.0, 0.5), (3.0, 0.5))


def spacetime_components(x, y, t, radius, tau):
    """Connected components of events within ``radius`` px (Chebyshev) and ``tau`` s."""
    pts = np.column_stack((x / radius, y / radius, t / tau))
    pairs = cKDTree(pts).query_pairs(1.0 + 1e-9, p=np.inf, output_type="ndarray")
    n = x.size
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    return connected_components(graph, directed=False)[1]


def spacetime_seeds(es, free_idx, max_seeds, min_fraction=0.02):
    """Binary individuals, one per sizeable space-time connected group of free events.

    Groups must span at least two timestamps. Returned rows index ``free_idx``;
    largest groups first, duplicates removed.
    """
    x, y, t = es.x[free_idx], es.y[free_idx], es.t[free_idx]
    span = float(t.max() - t.min())
    if span <= 0 or max_seeds <= 0:
        return np.zeros((0, free_idx.size), dtype=np.int8)
    min_size = max(3, int(np.ceil(min_fraction * free_idx.size)))
    seen, seeds = set(), []
    for radius, frac in SEED_SCALES:
        labels = spacetime_components(x, y, t, radius, frac * span)
        counts = np.bincount(labels)
        for lab in np.argsort(-counts, kind="stable"):
            if counts[lab] < min_size:
                break
            members = labels == lab
            if t[members].min() == t[members].max():
                continue
            key = np.packbits(members).tobytes()
            if key not in seen:
                seen.add(key)
                seeds.append((int(counts[lab]), len(seeds), members.astype(np.int8)))
    seeds.sort(key=lambda s: (-s[0], s[1]))
    rows = [s[2] for s in seeds[:max_seeds]]
    if not rows:
        return np.zeros((0, free_idx.size), dtype=np.int8)
    return np.array(rows)


def ga_search(es, cons, params=ModelParams(), cfg=GAConfig(), rng=None):
    """Minimise the exact-mode objective over the vertices of the level box.

    Each bit chooses between 0 and the event's full budget ``cons.upper``
    (which is 1 unless earlier players left fractional confidence on it).
    Claimed events stay at zero. Degenerate selections get +inf fitness.
    With ``cfg.restarts > 1`` independent runs are made and the best kept
    (earliest run on ties); the first run uses ``cfg.seed`` directly.
    """
    cons.require_feasible(es.t)
    if rng is not None or cfg.restarts == 1:
        return _ga_run(es, cons, params, cfg, np.random.default_rng(cfg.seed) if rng is None else rng)
    best = _ga_run(es, cons, params, cfg, np.random.default_rng(cfg.seed))
    for r in range(1, cfg.restarts):
        sub = np.random.default_rng(np.random.SeedSequence([cfg.seed, r]))
        res = _ga_run(es, cons, params, cfg, sub)
        if res.fitness < best.fitness:
            best = res
    return best


def _ga_run(es, cons, params, cfg, rng):
    free_idx = np.flatnonzero(cons.free)
    top = cons.upper[free_idx]
    nf = free_idx.size
    n = len(es)
    mut = cfg.mutation_rate if cfg.mutation_rate is not None else 1.0 / nf

    def expand(bits):
        Z = np.zeros((bits.shape[0], n))
        Z[:, free_idx] = bits * top
        return Z

    def evaluate(bits):
        return exact_objective_batch(expand(bits), es, params)

    pop = rng.integers(0, 2, size=(cfg.population, nf)).astype(np.int8)
    pop[0] = 1
    if cfg.seeding == "spacetime":
        seeds = spacetime_seeds(es, free_idx, cfg.population // 2)
        pop[1 : 1 + len(seeds)] = seeds
    fit = evaluate(pop)
    history = [float(fit.min())]
    termination = "max_generations"
    gen = 0
    n_children = cfg.population - cfg.elite_count
    for gen in range(1, cfg.max_generations + 1):
        order = np.argsort(fit, kind="stable")
        elites = pop[order[: cfg.elite_count]]
        p1 = pop[_tournament(rng, fit, cfg.tournament_size, n_children)]
        p2 = pop[_tournament(rng, fit, cfg.tournament_size, n_children)]
        cross = rng.random(n_children) < cfg.crossover_rate
        take2 = (rng.random((n_children, nf)) < 0.5) & cross[:, None]
        children = np.where(take2, p2, p1)
        flips = rng.random((n_children, nf)) < mut
        children = np.where(flips, 1 - children, children).astype(np.int8)
        child_fit = evaluate(children)
        pop = np.concatenate([elites, children])
        fit = np.concatenate([fit[order[: cfg.elite_count]], child_fit])
        history.append(float(fit.min()))
        if gen >= cfg.stall_generations:
            past = history[gen - cfg.stall_generations]
            if np.isfinite(past) and past - history[-1] < cfg.stall_tolerance:
                termination = "stall"
                break
    best = int(np.argmin(fit))
    z = expand(pop[best : best + 1])[0]
    log.debug("GA finished after %d generations (%s), J=%.6g", gen, termination, fit[best])
    return GAResult(z, float(fit[best]), gen, termination, history)


def ga_minimize(es, cons, params=ModelParams(), cfg=GAConfig()):
    """Best box-vertex (binary when budgets are whole) strategy found."""
    return ga_search(es, cons, params, cfg).z
