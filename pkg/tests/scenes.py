"""Seeded scenes shared by the unit and acceptance tests."""

import numpy as np

from eventgne.events import EventSet, random_circle_scene, synthesize


def gradient_scene():
    """50 events drawn from a small two-circle scene with noise."""
    spec = random_circle_scene(5, n_objects=2, grid=(32, 24), radius=(2.5, 3.5), speed=(2, 4),
                               timesteps=(0.0, 1.0, 2.0), noise_fraction=0.05)
    es = synthesize(spec, seed=5)
    keep = np.zeros(len(es), dtype=bool)
    keep[np.random.default_rng(1).choice(len(es), 50, replace=False)] = True
    return es.subset(keep)


def toy_two_clusters():
    """5 + 5 events moving in opposite directions along two rows."""
    a = [(3 + i, 3, float(i)) for i in range(5)]
    b = [(14 - i, 10, float(i)) for i in range(5)]
    e = np.array(a + b, dtype=float)
    return EventSet(e[:, 0], e[:, 1], e[:, 2], (16, 12), np.array([0] * 5 + [1] * 5))


# Oracle minimum of the toy, from exhaustive enumeration with the test reference.
TOY_MIN_OBJECTIVE = -5.124187767475246


def single_object_scene():
    """A 3-pixel blob moving 2 px/s for three frames plus three noise events."""
    obj = [(4 + 2 * t + dx, 5 + dy, float(t)) for t in range(3) for dx, dy in ((0, 0), (1, 0), (0, 1))]
    noise = [(12, 2, 0.4), (2, 9, 1.3), (9, 10, 1.7)]
    e = np.array(obj + noise, dtype=float)
    return EventSet(e[:, 0], e[:, 1], e[:, 2], (14, 12), np.array([0] * 9 + [-1] * 3))


SINGLE_OBJECT_MIN_OBJECTIVE = -4.757709675265346


def small_instance(seed, n_events=14):
    """Seeded few-event instance: two short tracks plus a little noise."""
    rng = np.random.default_rng(seed)
    nx, ny = 12, 10
    rows = []
    for lab in range(2):
        x0, y0 = rng.integers(2, nx - 1), rng.integers(2, ny - 1)
        vx, vy = rng.integers(-2, 3), rng.integers(-1, 2)
        for t in range(3):
            for _ in range(2):
                x = int(np.clip(x0 + vx * t + rng.integers(0, 2), 1, nx))
                y = int(np.clip(y0 + vy * t, 1, ny))
                rows.append((x, y, float(t), lab))
    while len(rows) < n_events:
        rows.append((int(rng.integers(1, nx + 1)), int(rng.integers(1, ny + 1)),
                     float(rng.uniform(0, 2)), -1))
    e = np.array(rows[:n_events], dtype=float)
    return EventSet(e[:, 0], e[:, 1], e[:, 2], (nx, ny), e[:, 3].astype(int))


def two_object_scene(seed):
    """Two circles with distinct whole-pixel velocities, five frames, 3% noise."""
    return synthesize(random_circle_scene(seed, n_objects=2, grid=(96, 72), radius=(5, 8),
                                          noise_fraction=0.03), seed=seed)


def four_object_scene(seed):
    """Four circles, about 2000 events, 4% noise."""
    spec = random_circle_scene(seed, n_objects=4, grid=(192, 144), radius=(13, 17),
                               noise_fraction=0.04)
    return synthesize(spec, seed=seed), spec


def purity(labels, selected):
    """(majority label, fraction of selected events carrying it)."""
    if not selected.any():
        return None, 0.0
    labs, cnt = np.unique(labels[selected], return_counts=True)
    return int(labs[np.argmax(cnt)]), float(cnt.max() / cnt.sum())
