"""Image of warped events, modified entropy, variance penalty and the
per-player objective.

``mode="exact"`` uses the step gate and a Kronecker pixel test on rounded
warped coordinates. ``mode="relaxed"`` uses the tanh gate and a Gaussian
bump ``exp(-gamma * d**2)``, which is what the gradient is taken of.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateMotionError, DegenerateSelectionError
from .kinematics import (
    RelaxParams,
    Theta,
    gate_values,
    gated_means,
    heaviside,
    heaviside_relaxed,
    heaviside_relaxed_derivative,
    theta_from_gate,
    warp,
)

MODES = ("exact", "relaxed")
VARIANCE_GATING = ("coordinate", "residual")
BUMP_CUTOFF = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Weights and constants of the per-player objective.

    ``t0=None`` means "earliest event timestamp of the set being scored".
    ``variance="coordinate"`` gates the coordinates before centring, so
    unselected events still cost ``mu**2 / N``; ``"residual"`` gates the
    centred residuals instead and charges only selected events.
    """

    lambda1: float = 1e-3
    lambda2: float = 1.0
    alpha: float = 0.9
    beta: float = 0.1
    relax: RelaxParams = field(default_factory=RelaxParams)
    t0: Optional[float] = None
    variance: str = "coordinate"

    def __post_init__(self):
        if self.variance not in VARIANCE_GATING:
            raise ValueError(f"variance must be one of {VARIANCE_GATING}")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("lambda1 and lambda2 must be non-negative")
        if not (0 < self.alpha <= 1 and 0 <= self.beta < 1):
            raise ValueError("alpha must lie in (0, 1] and beta in [0, 1)")
        if abs(self.alpha + self.beta - 1.0) > 1e-12:
            raise ValueError(f"alpha + beta must equal 1, got {self.alpha + self.beta!r}")

    def reference_time(self, es):
        return float(es.t.min()) if self.t0 is None else float(self.t0)


@dataclass(frozen=True, eq=False)
class WarpedImage:
    """Accumulated warped mass on the N_x x N_y grid; ``values[x-1, y-1]``."""

    values: np.ndarray
    t0: float

    @property
    def total(self):
        return float(self.values.sum())


def bump_radius(gamma):
    """Pixel window beyond which the Gaussian bump is below ``BUMP_CUTOFF``."""
    return int(math.ceil(math.sqrt(math.log(1.0 / BUMP_CUTOFF) / gamma)))


def round_half_up(w):
    return np.floor(w + 0.5).astype(np.int64)


def _in_box(w, grid):
    nx, ny = grid
    return (w[:, 0] >= 0.5) & (w[:, 0] <= nx + 0.5) & (w[:, 1] >= 0.5) & (w[:, 1] <= ny + 0.5)


def _exact_image(z, w, grid):
    nx, ny = grid
    px, py = round_half_up(w[:, 0]), round_half_up(w[:, 1])
    ok = (px >= 1) & (px <= nx) & (py >= 1) & (py <= ny) & (z != 0)
    flat = (px[ok] - 1) * ny + (py[ok] - 1)
    img = np.bincount(flat, weights=z[ok], minlength=nx * ny)
    return img.reshape(nx, ny)


class _Bumps(NamedTuple):
    """Per-event Gaussian window: pixel indices, weights, offsets."""

    rows: np.ndarray     # event index per entry
    flat: np.ndarray     # flat pixel index per entry
    g: np.ndarray        # exp(-gamma d^2)
    dx: np.ndarray       # w_x - pixel_x
    dy: np.ndarray       # w_y - pixel_y


def _bumps(w, grid, gamma):
    nx, ny = grid
    r = bump_radius(gamma)
    off = np.arange(-r, r + 1)
    ox, oy = (a.ravel() for a in np.meshgrid(off, off, indexing="ij"))
    inside = np.flatnonzero(_in_box(w, grid))
    wi = w[inside]
    px = round_half_up(wi[:, 0])[:, None] + ox[None, :]
    py = round_half_up(wi[:, 1])[:, None] + oy[None, :]
    dx = wi[:, 0:1] - px
    dy = wi[:, 1:2] - py
    ok = (px >= 1) & (px <= nx) & (py >= 1) & (py <= ny)
    rows = np.broadcast_to(inside[:, None], px.shape)[ok]
    g = np.exp(-gamma * (dx[ok] ** 2 + dy[ok] ** 2))
    flat = (px[ok] - 1) * ny + (py[ok] - 1)
    return _Bumps(rows, flat, g, dx[ok], dy[ok])


def image_of_warped_events(z, es, theta, params=ModelParams(), mode="exact"):
    """Accumulate confidence ``z`` at the warped event positions."""
    z = np.asarray(z, dtype=float)
    t0 = params.reference_time(es)
    w = warp(es, theta, t0)
    if mode == "exact":
        values = _exact_image(z, w, es.grid)
    elif mode == "relaxed":
        b = _bumps(w, es.grid, params.relax.gamma)
        values = np.bincount(
            b.flat, weights=z[b.rows] * b.g, minlength=es.grid[0] * es.grid[1]
        ).reshape(es.grid)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return WarpedImage(values, t0)


def _xlogy_shift(values, alpha, beta):
    v = np.asarray(values, dtype=float)
    pos = v != 0
    out = np.zeros_like(v)
    out[pos] = v[pos] * np.log(alpha * v[pos] + beta)
    return out


def entropy(img, params=ModelParams()):
    """Sum over pixels of I * log(alpha * I + beta), with 0 * log(.) = 0."""
    values = img.values if isinstance(img, WarpedImage) else img
    return float(_xlogy_shift(values, params.alpha, params.beta).sum())


def _entropy_derivative(values, alpha, beta):
    v = np.asarray(values, dtype=float)
    return np.log(alpha * v + beta) + alpha * v / (alpha * v + beta)


def _residuals(h, c, mu, kind):
    return h * c - mu if kind == "coordinate" else h * (c - mu)


def _variance_from_gate(h, es, means, kind="coordinate"):
    _, mu_x, mu_y = means
    rx = _residuals(h, es.x, mu_x, kind)
    ry = _residuals(h, es.y, mu_y, kind)
    nx, ny = es.grid
    return float(rx @ rx) / nx + float(ry @ ry) / ny


def _variance_derivative(h, c, mu, mass, n_pixels, kind):
    # d/dh of (1/N) r.r, with mu depending on h through dmu/dh = (c - mu) / mass
    r = _residuals(h, c, mu, kind)
    if kind == "coordinate":
        return 2.0 / n_pixels * (r * c - r.sum() * (c - mu) / mass)
    return 2.0 / n_pixels * (r * (c - mu) - (h * r).sum() * (c - mu) / mass)


def variance_penalty(z, es, gate="exact", relax=RelaxParams(), kind="coordinate"):
    """V(z, x) + V(z, y) about the gated means.

    With ``kind="coordinate"`` the gate multiplies the coordinate, so
    unselected events still contribute ``mu**2 / N`` each; ``"residual"``
    gates the centred residual.
    """
    if kind not in VARIANCE_GATING:
        raise ValueError(f"kind must be one of {VARIANCE_GATING}")
    h = gate_values(z, gate, relax)
    return _variance_from_gate(h, es, gated_means(h, es), kind)


class ObjectiveTerms(NamedTuple):
    value: float
    entropy: float
    variance: float
    regularizer: float
    theta: Theta
    image: WarpedImage


def objective_terms(z, es, params=ModelParams(), mode="exact"):
    """Evaluate the objective and return its pieces."""
    z = np.asarray(z, dtype=float)
    if z.shape != (len(es),):
        raise ValueError(f"strategy has shape {z.shape}, expected ({len(es)},)")
    h = gate_values(z, mode, params.relax)
    theta, means, _ = theta_from_gate(h, es, exact=(mode == "exact"))
    img = image_of_warped_events(z, es, theta, params, mode)
    ent = entropy(img, params)
    var = _variance_from_gate(h, es, means, params.variance)
    reg = float(h @ h)
    value = -ent + 0.5 * params.lambda1 * var + 0.5 * params.lambda2 * reg
    return ObjectiveTerms(value, ent, var, reg, theta, img)


def objective(z, es, params=ModelParams(), mode="exact"):
    """-E(I) + lambda1/2 (V_x + V_y) + lambda2/2 ||gate(z)||^2."""
    return objective_terms(z, es, params, mode).value


def objective_gradient(z, es, params=ModelParams()):
    """Analytic gradient of the relaxed objective with respect to ``z``.

    The velocity depends on ``z`` through the tanh gate, so the entropy term
    is differentiated both directly (image linear in z) and through the
    warp via the least-squares slope.
    """
    z = np.asarray(z, dtype=float)
    rp = params.relax
    h = heaviside_relaxed(z, rp)
    dh = heaviside_relaxed_derivative(z, rp)
    theta, (mu_t, mu_x, mu_y), spread = theta_from_gate(h, es, exact=False)
    mass = float(h.sum())
    t0 = params.reference_time(es)
    w = warp(es, theta, t0)
    nx, ny = es.grid

    b = _bumps(w, es.grid, rp.gamma)
    img = np.bincount(b.flat, weights=z[b.rows] * b.g, minlength=nx * ny)
    phi = _entropy_derivative(img, params.alpha, params.beta)
    pg = phi[b.flat] * b.g
    n = len(es)
    direct = np.bincount(b.rows, weights=pg, minlength=n)
    bx = np.bincount(b.rows, weights=pg * b.dx, minlength=n)
    by = np.bincount(b.rows, weights=pg * b.dy, minlength=n)

    lag = t0 - es.t
    de_dtx = -2.0 * rp.gamma * float(z @ (lag * bx))
    de_dty = -2.0 * rp.gamma * float(z @ (lag * by))

    dt = es.t - mu_t
    dtx_dh = dt * ((es.x - mu_x) - theta[0] * dt) / spread
    dty_dh = dt * ((es.y - mu_y) - theta[1] * dt) / spread

    dvx_dh = _variance_derivative(h, es.x, mu_x, mass, nx, params.variance)
    dvy_dh = _variance_derivative(h, es.y, mu_y, mass, ny, params.variance)

    grad_h = (
        -(de_dtx * dtx_dh + de_dty * dty_dh)
        + 0.5 * params.lambda1 * (dvx_dh + dvy_dh)
        + params.lambda2 * h
    )
    return -direct + grad_h * dh


def exact_objective_batch(Z, es, params=ModelParams()):
    """Exact-mode objective for each row of ``Z``; degenerate rows give +inf.

    Vectorised counterpart of ``objective(z, es, params, "exact")`` used by
    the genetic search and the exhaustive oracle.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    P, n = Z.shape
    nx, ny = es.grid
    G = (Z > 0).astype(float)
    mass = G.sum(axis=1)
    out = np.full(P, np.inf)

    t = es.t
    tmax = np.where(G > 0, t, -np.inf).max(axis=1)
    tmin = np.where(G > 0, t, np.inf).min(axis=1)
    ok = (mass > 0) & (tmax > tmin)
    if not ok.any():
        return out
    G, Zo, mass = G[ok], Z[ok], mass[ok]
    mu_t = G @ t / mass
    mu_x = G @ es.x / mass
    mu_y = G @ es.y / mass
    dt = t[None, :] - mu_t[:, None]
    spread = (G * dt * dt).sum(axis=1)
    tx = (G * dt * (es.x[None, :] - mu_x[:, None])).sum(axis=1) / spread
    ty = (G * dt * (es.y[None, :] - mu_y[:, None])).sum(axis=1) / spread

    t0 = params.reference_time(es)
    lag = t0 - t
    px = np.floor(es.x[None, :] + lag[None, :] * tx[:, None] + 0.5).astype(np.int64)
    py = np.floor(es.y[None, :] + lag[None, :] * ty[:, None] + 0.5).astype(np.int64)
    keep = (px >= 1) & (px <= nx) & (py >= 1) & (py <= ny) & (Zo != 0)
    rows = np.broadcast_to(np.arange(Zo.shape[0])[:, None], Zo.shape)
    flat = rows[keep] * (nx * ny) + (px[keep] - 1) * ny + (py[keep] - 1)
    img = np.bincount(flat, weights=Zo[keep], minlength=Zo.shape[0] * nx * ny)
    ent = _xlogy_shift(img, params.alpha, params.beta).reshape(Zo.shape[0], -1).sum(axis=1)

    if params.variance == "coordinate":
        rx = G * es.x[None, :] - mu_x[:, None]
        ry = G * es.y[None, :] - mu_y[:, None]
    else:
        rx = G * (es.x[None, :] - mu_x[:, None])
        ry = G * (es.y[None, :] - mu_y[:, None])
    var = (rx * rx).sum(axis=1) / nx + (ry * ry).sum(axis=1) / ny
    out[ok] = -ent + 0.5 * params.lambda1 * var + 0.5 * params.lambda2 * mass
    return out


def safe_objective(z, es, params=ModelParams(), mode="exact"):
    """Objective, or +inf where the selection or motion is degenerate."""
    try:
        return objective(z, es, params, mode)
    except (DegenerateSelectionError, DegenerateMotionError):
        return math.inf


def write_pgm(values, path, normalize=True):
    """Write a 2-D array (indexed [x, y]) as a binary PGM.

    With ``normalize`` the maximum maps to 255; otherwise values are taken
    as gray levels and clipped to 0..255.
    """
    arr = np.asarray(values, dtype=float).T
    if normalize:
        peak = arr.max() if arr.size else 0.0
        scaled = np.zeros(arr.shape, dtype=np.uint8)
        if peak > 0:
            scaled = np.round(255.0 * arr / peak).astype(np.uint8)
    else:
        scaled = np.clip(np.round(arr), 0, 255).astype(np.uint8)
    height, width = scaled.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(scaled.tobytes())


def read_pgm(path):
    """Read a binary PGM written by :func:`write_pgm`; returns [x, y] array."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height = (int(v) for v in parts[1].split())
    arr = np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width)
    return arr.T.copy()


def write_image_csv(values, path):
    """Write the image grid as CSV, one row per y, columns over x."""
    np.savetxt(path, np.asarray(values, dtype=float).T, delimiter=",", fmt="%.17g")
