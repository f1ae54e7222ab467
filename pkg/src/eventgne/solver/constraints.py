"""Per-level confidence budgets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LevelInfeasibleError

CLAIM_THRESHOLD = 0.5


@dataclass(frozen=True, eq=False)
class LevelConstraint:
    """Confidence budget left for the current player.

    ``remaining = b - sum(prior)`` clipped to [0, 1]. An event is *claimed*
    when some earlier player's hard assignment (confidence >= 0.5) covers
    it; claimed events are masked to zero, all others may take up to
    ``remaining``.
    """

    remaining: np.ndarray
    claimed: np.ndarray = None

    def __post_init__(self):
        rem = np.asarray(self.remaining, dtype=float)
        claimed = np.zeros(rem.shape, dtype=bool) if self.claimed is None else np.asarray(self.claimed, dtype=bool)
        object.__setattr__(self, "remaining", rem)
        object.__setattr__(self, "claimed", claimed)

    @classmethod
    def unconstrained(cls, n_events):
        return cls(np.ones(n_events))

    @classmethod
    def from_prior(cls, prior, n_events):
        used = np.zeros(n_events)
        claimed = np.zeros(n_events, dtype=bool)
        for z in prior:
            z = np.asarray(z, dtype=float)
            if z.shape != (n_events,):
                raise ValueError(f"prior strategy has shape {z.shape}, expected ({n_events},)")
            used += z
            claimed |= z >= CLAIM_THRESHOLD
        return cls(np.clip(1.0 - used, 0.0, 1.0), claimed)

    @property
    def upper(self):
        """Box upper bound used by the level solvers."""
        return np.where(self.claimed, 0.0, self.remaining)

    @property
    def free(self):
        return self.upper > 0

    def require_feasible(self, t):
        free = self.free
        if not free.any():
            raise LevelInfeasibleError("no unclaimed events left for this level")
        ts = np.asarray(t)[free]
        if free.sum() < 2 or ts.min() == ts.max():
            raise LevelInfeasibleError(
                "fewer than two unclaimed events with distinct timestamps"
            )
