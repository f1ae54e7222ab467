"""Event data model, CSV ingestion/emission, time-window filtering and
synthetic circle scenes with ground-truth labels.

Events are stored column-wise: integer pixel coordinates ``x`` (1..N_x) and
``y`` (1..N_y), and real timestamps ``t`` in seconds. Polarity is not kept.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EventDataError, SceneSpecError

NOISE_LABEL = -1


@dataclass(frozen=True, eq=False)
class EventSet:
    """An ordered collection of events on an ``grid = (N_x, N_y)`` sensor."""

    x: np.ndarray
    y: np.ndarray
    t: np.ndarray
    grid: tuple
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.int64).reshape(-1)
        y = np.asarray(self.y, dtype=np.int64).reshape(-1)
        t = np.asarray(self.t, dtype=np.float64).reshape(-1)
        nx, ny = (int(g) for g in self.grid)
        if nx <= 0 or ny <= 0:
            raise EventDataError(f"grid dimensions must be positive, got {self.grid}")
        if not (x.size == y.size == t.size):
            raise EventDataError("x, y and t must have equal length")
        if x.size == 0:
            raise EventDataError("an EventSet needs at least one event")
        bad = (x < 1) | (x > nx) | (y < 1) | (y > ny) | ~np.isfinite(t)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise EventDataError(
                f"event {k} (x={x[k]}, y={y[k]}, t={t[k]}) lies outside grid {nx}x{ny}"
            )
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64).reshape(-1)
            if labels.size != x.size:
                raise EventDataError("labels length must equal the number of events")
            labels.setflags(write=False)
        for arr in (x, y, t):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "grid", (nx, ny))
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return int(self.x.size)

    @property
    def n_events(self):
        return len(self)

    def subset(self, mask):
        """Events where ``mask`` is true, order preserved."""
        mask = np.asarray(mask)
        labels = None if self.labels is None else self.labels[mask]
        return EventSet(self.x[mask], self.y[mask], self.t[mask], self.grid, labels)

    def without_labels(self):
        return EventSet(self.x, self.y, self.t, self.grid)

    def same_events(self, other):
        """Field-exact equality on (x, y, t) and grid; labels ignored."""
        return (
            self.grid == other.grid
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.t, other.t)
        )


def _is_number(field_text):
    try:
        float(field_text)
    except ValueError:
        return False
    return True


def load_events(path, grid, labels=True):
    """Read an event CSV (``x,y,t[,label]`` per line).

    A header line is recognised by a non-numeric first field. With
    ``labels=False`` a fourth column is ignored.
    """
    nx, ny = (int(g) for g in grid)
    if nx <= 0 or ny <= 0:
        raise EventDataError(f"grid dimensions must be positive, got {grid}")
    xs, ys, ts, ls = [], [], [], []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if lineno == 1 and not _is_number(parts[0]):
                continue
            if len(parts) not in (3, 4):
                raise EventDataError(
                    f"{path}:{lineno}: expected 3 or 4 fields, got {len(parts)}"
                )
            try:
                x, y, t = int(parts[0]), int(parts[1]), float(parts[2])
                lab = int(parts[3]) if len(parts) == 4 else None
            except ValueError as exc:
                raise EventDataError(f"{path}:{lineno}: cannot parse {line!r}") from exc
            if not (1 <= x <= nx and 1 <= y <= ny) or not math.isfinite(t):
                raise EventDataError(
                    f"{path}:{lineno}: event (x={x}, y={y}, t={t}) lies outside grid {nx}x{ny}"
                )
            xs.append(x)
            ys.append(y)
            ts.append(t)
            ls.append(lab)
    if not xs:
        raise EventDataError(f"{path}: no events found")
    lab_arr = None
    if labels and all(v is not None for v in ls):
        lab_arr = np.array(ls, dtype=np.int64)
    return EventSet(np.array(xs), np.array(ys), np.array(ts), (nx, ny), lab_arr)


def save_events(es, path):
    """Write ``es`` as CSV; the label column is emitted only when present."""
    if not path:
        raise OSError("save_events: empty path")
    lines = []
    if es.labels is None:
        for x, y, t in zip(es.x.tolist(), es.y.tolist(), es.t.tolist()):
            lines.append(f"{x},{y},{t!r}\n")
    else:
        for x, y, t, lab in zip(es.x.tolist(), es.y.tolist(), es.t.tolist(), es.labels.tolist()):
            lines.append(f"{x},{y},{t!r},{lab}\n")
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.writelines(lines)
    except OSError as exc:
        raise OSError(f"cannot write events to {os.fspath(path)!r}: {exc}") from exc


def filter_time_window(es, keep):
    """Keep events whose timestamp falls in any closed interval of ``keep``."""
    intervals = sorted((float(lo), float(hi)) for lo, hi in keep)
    if not intervals:
        raise EventDataError("at least one time window is required")
    for lo, hi in intervals:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise EventDataError(f"time window ({lo}, {hi}) must be finite")
        if not lo < hi:
            raise EventDataError(f"time window ({lo}, {hi}) needs t_lo < t_hi")
    for (_, hi), (lo, _) in zip(intervals, intervals[1:]):
        if lo <= hi:
            raise EventDataError("time windows overlap")
    mask = np.zeros(len(es), dtype=bool)
    for lo, hi in intervals:
        mask |= (es.t >= lo) & (es.t <= hi)
    if not mask.any():
        raise EventDataError("no events remain after time-window filtering")
    return es.subset(mask)


@dataclass(frozen=True)
class Circle:
    """A circle outline of ``radius`` pixels moving at ``velocity`` px/s."""

    center: tuple
    radius: float
    velocity: tuple = (0.0, 0.0)


@dataclass(frozen=True)
class SceneSpec:
    objects: Sequence[Circle]
    timesteps: Sequence[float]
    grid: tuple
    noise_events: int = 0

    def validate(self):
        if len(self.objects) == 0:
            raise SceneSpecError("objects: at least one object is required")
        nx, ny = self.grid
        if int(nx) <= 0 or int(ny) <= 0:
            raise SceneSpecError(f"grid: dimensions must be positive, got {self.grid}")
        ts = np.asarray(self.timesteps, dtype=float)
        if ts.size == 0:
            raise SceneSpecError("timesteps: at least one timestep is required")
        if not np.all(np.isfinite(ts)) or np.any(np.diff(ts) <= 0):
            raise SceneSpecError("timesteps: must be finite and strictly increasing")
        if int(self.noise_events) < 0:
            raise SceneSpecError("noise_events: must be non-negative")
        for i, obj in enumerate(self.objects):
            if not obj.radius > 0:
                raise SceneSpecError(f"objects[{i}].radius: must be positive")
            if not all(math.isfinite(v) for v in (*obj.center, *obj.velocity)):
                raise SceneSpecError(f"objects[{i}]: center and velocity must be finite")


def circle_pixels(center, radius, grid):
    """Grid pixels whose centres lie within half a pixel of the circle."""
    nx, ny = grid
    cx, cy = center
    x0 = max(1, int(math.floor(cx - radius - 1)))
    x1 = min(nx, int(math.ceil(cx + radius + 1)))
    y0 = max(1, int(math.floor(cy - radius - 1)))
    y1 = min(ny, int(math.ceil(cy + radius + 1)))
    if x0 > x1 or y0 > y1:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    gx, gy = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1), indexing="ij")
    d = np.hypot(gx - cx, gy - cy)
    on = (d >= radius - 0.5) & (d <= radius + 0.5)
    return gx[on].astype(np.int64), gy[on].astype(np.int64)


def synthesize(spec, seed=0):
    """Rasterise moving circle outlines at each timestep, plus uniform noise.

    Object events carry labels ``0..len(objects)-1``; noise carries
    ``NOISE_LABEL``. Events are returned sorted by time (stable).
    """
    spec.validate()
    grid = (int(spec.grid[0]), int(spec.grid[1]))
    rng = np.random.default_rng(seed)
    xs, ys, ts, ls = [], [], [], []
    for t in spec.timesteps:
        for i, obj in enumerate(spec.objects):
            c = (obj.center[0] + obj.velocity[0] * t, obj.center[1] + obj.velocity[1] * t)
            px, py = circle_pixels(c, obj.radius, grid)
            if px.size == 0:
                raise SceneSpecError(f"object {i} lies fully outside the grid at t={t}")
            xs.append(px)
            ys.append(py)
            ts.append(np.full(px.size, float(t)))
            ls.append(np.full(px.size, i))
    n_noise = int(spec.noise_events)
    if n_noise:
        xs.append(rng.integers(1, grid[0] + 1, n_noise))
        ys.append(rng.integers(1, grid[1] + 1, n_noise))
        ts.append(rng.uniform(spec.timesteps[0], spec.timesteps[-1], n_noise))
        ls.append(np.full(n_noise, NOISE_LABEL))
    x, y, t, lab = (np.concatenate(a) for a in (xs, ys, ts, ls))
    order = np.argsort(t, kind="stable")
    return EventSet(x[order], y[order], t[order], grid, lab[order])


def two_circle_scene(grid=(64, 48), radius=6.0, speed=4.0, noise_events=0,
                     timesteps=(0.0, 1.0, 2.0, 3.0, 4.0)):
    """Two circles crossing horizontally on separate rows."""
    nx, ny = grid
    return SceneSpec(
        objects=[
            Circle((radius + 2.0, ny / 3), radius, (speed, 0.0)),
            Circle((nx - radius - 2.0, 2 * ny / 3), radius, (-speed, 0.0)),
        ],
        timesteps=list(timesteps),
        grid=grid,
        noise_events=noise_events,
    )


def random_circle_scene(seed, n_objects=2, grid=(96, 72), radius=(5.0, 8.0),
                        speed=(2.5, 6.0), timesteps=(0.0, 1.0, 2.0, 3.0, 4.0),
                        noise_fraction=0.03, integer_velocity=True, max_tries=1000):
    """Random moving circles that stay inside the grid and never touch.

    Velocities are pairwise at least 2 px/s apart. ``integer_velocity`` rounds
    velocity components so that per-timestep displacements are whole pixels.
    """
    rng = np.random.default_rng(seed)
    nx, ny = grid
    ts = np.asarray(timesteps, dtype=float)
    objects = []
    for _ in range(max_tries):
        if len(objects) == n_objects:
            break
        r = float(rng.uniform(*radius))
        ang = rng.uniform(0, 2 * np.pi)
        sp = rng.uniform(*speed)
        v = np.array([sp * np.cos(ang), sp * np.sin(ang)])
        if integer_velocity:
            v = np.round(v)
            if np.hypot(*v) < speed[0]:
                continue
        c = np.array([rng.uniform(1, nx), rng.uniform(1, ny)])
        path = c[None, :] + ts[:, None] * v[None, :]
        if (path[:, 0] - r < 2).any() or (path[:, 0] + r > nx - 1).any():
            continue
        if (path[:, 1] - r < 2).any() or (path[:, 1] + r > ny - 1).any():
            continue
        clash = False
        for o in objects:
            opath = np.asarray(o.center)[None, :] + ts[:, None] * np.asarray(o.velocity)[None, :]
            # keep the space-time tubes well apart: compare every pair of times
            gap = np.hypot(*(path[:, None, :] - opath[None, :, :]).transpose(2, 0, 1))
            if gap.min() < r + o.radius + 4 or np.hypot(*(v - np.asarray(o.velocity))) < 2:
                clash = True
                break
        if not clash:
            objects.append(Circle((float(c[0]), float(c[1])), r, (float(v[0]), float(v[1]))))
    if len(objects) < n_objects:
        raise SceneSpecError("could not place non-overlapping objects; enlarge the grid")
    n_obj_events = 0
    for o in objects:
        for t in ts:
            c = (o.center[0] + o.velocity[0] * t, o.center[1] + o.velocity[1] * t)
            n_obj_events += circle_pixels(c, o.radius, grid)[0].size
    noise = int(np.floor(noise_fraction * n_obj_events))
    return SceneSpec(objects, list(timesteps), grid, noise)
