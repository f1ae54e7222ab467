"""Heaviside gating, gated means, least-squares velocity and warping.

Every function here works on the column arrays of an :class:`EventSet`.
``gate`` is ``"exact"`` (step function) or ``"relaxed"`` (tanh surrogate).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import expit

from .errors import DegenerateMotionError, DegenerateSelectionError

# Gate mass below this is treated as an empty selection in relaxed mode.
GATE_MASS_FLOOR = 1e-8
# Relaxed time spread (gated sum of squared deviations) below this is degenerate.
TIME_SPREAD_FLOOR = 1e-12

GATES = ("exact", "relaxed")


class Theta(NamedTuple):
    """Image-plane velocity in pixels per second."""

    theta_x: float
    theta_y: float


@dataclass(frozen=True)
class RelaxParams:
    """Constants of the smooth surrogates.

    ``m`` and ``n`` shape the tanh step, ``gamma`` the Gaussian pixel bump.
    """

    m: float = 25.0
    n: float = 0.25
    gamma: float = 30.0

    def __post_init__(self):
        if not self.m > 0:
            raise ValueError("m must be positive")
        if not 0 < self.n < 1:
            raise ValueError("n must lie in (0, 1)")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.m > 50:
            warnings.warn(
                f"m={self.m} > 50: the relaxed Heaviside gradient becomes unstable",
                RuntimeWarning,
                stacklevel=3,
            )


def heaviside(z):
    """Componentwise step: 1 where z > 0, else 0 (so H(0) = 0)."""
    return (np.asarray(z, dtype=float) > 0).astype(float)


# (1 + tanh u) / 2 == expit(2u); the logistic form keeps both tails
# accurate where 1 +/- tanh would cancel.
def heaviside_relaxed(z, p=RelaxParams()):
    return expit(2.0 * p.m * (np.asarray(z, dtype=float) - p.n))


def heaviside_relaxed_derivative(z, p=RelaxParams()):
    u = 2.0 * p.m * (np.asarray(z, dtype=float) - p.n)
    return p.m * 2.0 * expit(u) * expit(-u)


def gate_values(z, gate="exact", relax=RelaxParams()):
    if gate == "exact":
        return heaviside(z)
    if gate == "relaxed":
        return heaviside_relaxed(z, relax)
    raise ValueError(f"unknown gate {gate!r}; expected one of {GATES}")


def _check_mass(h):
    mass = float(h.sum())
    if not mass > GATE_MASS_FLOOR:
        raise DegenerateSelectionError(f"gate mass {mass:.3g} is zero; no events selected")
    return mass


def gated_means(h, es):
    """(mu_t, mu_x, mu_y) for precomputed gate weights ``h``."""
    mass = _check_mass(h)
    return (float(h @ es.t) / mass, float(h @ es.x) / mass, float(h @ es.y) / mass)


def selected_means(z, es, gate="exact", relax=RelaxParams()):
    """Gate-weighted means of t, x and y."""
    return gated_means(gate_values(z, gate, relax), es)


def theta_from_gate(h, es, exact):
    """Least-squares slopes of x and y on t with gate weights ``h``.

    Returns ``(theta, (mu_t, mu_x, mu_y), time_spread)``.
    """
    mu_t, mu_x, mu_y = gated_means(h, es)
    dt = es.t - mu_t
    spread = float(h @ (dt * dt))
    if exact:
        if np.unique(es.t[h > 0]).size < 2:
            raise DegenerateMotionError("selected events share a single timestamp")
    elif not spread > TIME_SPREAD_FLOOR:
        raise DegenerateMotionError(f"gated time spread {spread:.3g} is zero")
    tx = float(h @ (dt * (es.x - mu_x))) / spread
    ty = float(h @ (dt * (es.y - mu_y))) / spread
    return Theta(tx, ty), (mu_t, mu_x, mu_y), spread


def estimate_theta(z, es, gate="exact", relax=RelaxParams()):
    """Velocity of the selected events as the gated least-squares slope."""
    h = gate_values(z, gate, relax)
    return theta_from_gate(h, es, exact=(gate == "exact"))[0]


def warp(es, theta, t0):
    """Positions translated along ``theta`` to the reference time ``t0``.

    Row k is (x_k, y_k) + (t0 - t_k) * theta; returns an N_e x 2 array.
    """
    dt = float(t0) - es.t
    return np.column_stack((es.x + dt * theta[0], es.y + dt * theta[1]))


def rowwise_norm2(v):
    return np.sqrt(np.sum(np.asarray(v, dtype=float) ** 2, axis=1))


def reference_time(es, policy="min"):
    """Resolve a t0 policy: ``"min"``, ``"mid"`` or a number."""
    if policy is None or policy == "min":
        return float(es.t.min())
    if policy == "mid":
        return 0.5 * float(es.t.min() + es.t.max())
    return float(policy)
