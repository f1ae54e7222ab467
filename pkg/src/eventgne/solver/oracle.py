"""Exhaustive search over binary strategies, for small instances."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateSelectionError, OracleSizeError
from ..imaging import ModelParams, exact_objective_batch

MAX_ORACLE_EVENTS = 20
_CHUNK = 4096


def binary_candidates(n_bits, start=0, stop=None):
    """Rows are all binary vectors in lexicographic order (index 0 most significant)."""
    stop = 2**n_bits if stop is None else stop
    codes = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n_bits - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(np.int8)


def brute_force_oracle(es, cons, params=ModelParams()):
    """Exact-mode minimiser over every vertex of the level box (binary vectors
    on the free events, scaled by their budgets).

    Returns ``(z, value)``; ties go to the lexicographically smallest vector.
    """
    free_idx = np.flatnonzero(cons.free)
    top = cons.upper[free_idx]
    nf = free_idx.size
    if nf > MAX_ORACLE_EVENTS:
        raise OracleSizeError(f"{nf} free events exceed the oracle cap of {MAX_ORACLE_EVENTS}")
    best_val, best_bits = np.inf, None
    total = 2**nf
    for start in range(0, total, _CHUNK):
        bits = binary_candidates(nf, start, min(total, start + _CHUNK))
        Z = np.zeros((bits.shape[0], len(es)))
        Z[:, free_idx] = bits * top
        vals = exact_objective_batch(Z, es, params)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_bits = float(vals[k]), bits[k]
    if best_bits is None:
        raise DegenerateSelectionError("every candidate selection is degenerate")
    z = np.zeros(len(es))
    z[free_idx] = best_bits * top
    return z, best_val
