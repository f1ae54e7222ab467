"""Slow, independent implementations of the model used as test oracles.

Everything is written from the definitions with plain loops or full-grid
broadcasting (no pixel windows, no shared helpers from the package) and
works in any numpy float dtype, including ``np.longdouble``.
"""

import mpmath
import numpy as np


def gate(z, mode, m=25.0, n=0.25, dtype=float):
    z = np.asarray(z, dtype=dtype)
    if mode == "exact":
        return (z > 0).astype(dtype)
    return (1 + np.tanh(dtype(m) * (z - dtype(n)))) / 2


def theta(h, x, y, t, dtype=float):
    h, x, y, t = (np.asarray(a, dtype=dtype) for a in (h, x, y, t))
    mt, mx, my = (h @ a / h.sum() for a in (t, x, y))
    den = h @ ((t - mt) ** 2)
    return (h @ ((t - mt) * (x - mx))) / den, (h @ ((t - mt) * (y - my))) / den


def theta_lstsq(h, x, y, t):
    """Weighted least-squares slope via a design-matrix solve (float64)."""
    w = np.sqrt(np.asarray(h, dtype=float))
    A = np.column_stack([np.ones_like(t, dtype=float), t]) * w[:, None]
    sx = np.linalg.lstsq(A, x * w, rcond=None)[0][1]
    sy = np.linalg.lstsq(A, y * w, rcond=None)[0][1]
    return sx, sy


def exact_image(z, x, y, t, th, t0, grid):
    nx, ny = grid
    img = np.zeros((nx, ny))
    for zk, xk, yk, tk in zip(z, x, y, t):
        wx = xk + (t0 - tk) * th[0]
        wy = yk + (t0 - tk) * th[1]
        px, py = int(np.floor(wx + 0.5)), int(np.floor(wy + 0.5))
        if 1 <= px <= nx and 1 <= py <= ny and zk != 0:
            img[px - 1, py - 1] += zk
    return img


def relaxed_image(z, x, y, t, th, t0, grid, gamma=30.0, dtype=float):
    nx, ny = grid
    z, x, y, t = (np.asarray(a, dtype=dtype) for a in (z, x, y, t))
    wx = x + (dtype(t0) - t) * th[0]
    wy = y + (dtype(t0) - t) * th[1]
    inside = (wx >= 0.5) & (wx <= nx + 0.5) & (wy >= 0.5) & (wy <= ny + 0.5)
    px = np.arange(1, nx + 1, dtype=dtype)
    py = np.arange(1, ny + 1, dtype=dtype)
    d2 = (wx[:, None, None] - px[None, :, None]) ** 2 + (wy[:, None, None] - py[None, None, :]) ** 2
    bumps = np.exp(-dtype(gamma) * d2) * (z * inside)[:, None, None]
    return bumps.sum(axis=0)


def entropy(img, alpha=0.9, beta=0.1, dtype=float):
    v = np.asarray(img, dtype=dtype).ravel()
    v = v[v != 0]
    return (v * np.log(dtype(alpha) * v + dtype(beta))).sum(dtype=dtype)


def variance(h, x, y, grid, dtype=float, kind="coordinate"):
    h, x, y = (np.asarray(a, dtype=dtype) for a in (h, x, y))
    out = dtype(0)
    for c, n in ((x, grid[0]), (y, grid[1])):
        mu = h @ c / h.sum()
        r = h * c - mu if kind == "coordinate" else h * (c - mu)
        out += (r @ r) / dtype(n)
    return out


def objective(z, x, y, t, grid, mode="exact", lambda1=1e-3, lambda2=1.0, alpha=0.9, beta=0.1,
              m=25.0, n=0.25, gamma=30.0, t0=None, dtype=float, kind="coordinate"):
    t0 = float(np.min(t)) if t0 is None else t0
    h = gate(z, mode, m, n, dtype)
    th = theta(h, x, y, t, dtype)
    if mode == "exact":
        img = exact_image(z, x, y, t, (float(th[0]), float(th[1])), t0, grid)
    else:
        img = relaxed_image(z, x, y, t, th, t0, grid, gamma, dtype)
    e = entropy(img, alpha, beta, dtype)
    v = variance(h, x, y, grid, dtype, kind)
    return -e + dtype(lambda1) / 2 * v + dtype(lambda2) / 2 * (h @ h)


def relaxed_objective_mp(z, x, y, t, grid, lambda1=1e-3, lambda2=1.0, alpha=0.9, beta=0.1,
                         m=25.0, n=0.25, gamma=30.0, t0=None, kind="coordinate"):
    """Relaxed objective in mpmath arithmetic at the current working precision.

    ``z`` is a list of mpf values. The bump factors into x and y parts, which
    keeps the full-grid image affordable.
    """
    mpf = mpmath.mpf
    nx, ny = grid
    x, y, t = ([mpf(float(v)) for v in a] for a in (x, y, t))
    t0 = min(t) if t0 is None else mpf(t0)
    h = [(1 + mpmath.tanh(mpf(m) * (zk - mpf(n)))) / 2 for zk in z]
    mass = mpmath.fsum(h)
    mt, mx, my = (mpmath.fdot(h, a) / mass for a in (t, x, y))
    den = mpmath.fsum(hk * (tk - mt) ** 2 for hk, tk in zip(h, t))
    thx = mpmath.fsum(hk * (tk - mt) * (xk - mx) for hk, tk, xk in zip(h, t, x)) / den
    thy = mpmath.fsum(hk * (tk - mt) * (yk - my) for hk, tk, yk in zip(h, t, y)) / den
    img = [[mpf(0)] * ny for _ in range(nx)]
    g = mpf(gamma)
    for zk, xk, yk, tk in zip(z, x, y, t):
        wx, wy = xk + (t0 - tk) * thx, yk + (t0 - tk) * thy
        if not (mpf(0.5) <= wx <= nx + mpf(0.5) and mpf(0.5) <= wy <= ny + mpf(0.5)):
            continue
        ex = [zk * mpmath.exp(-g * (wx - i) ** 2) for i in range(1, nx + 1)]
        ey = [mpmath.exp(-g * (wy - j) ** 2) for j in range(1, ny + 1)]
        for i in range(nx):
            row = img[i]
            for j in range(ny):
                row[j] += ex[i] * ey[j]
    e = mpmath.fsum(v * mpmath.log(mpf(alpha) * v + mpf(beta)) for row in img for v in row if v != 0)
    v = mpf(0)
    for c, nn in ((x, nx), (y, ny)):
        mu = mpmath.fdot(h, c) / mass
        r = [hk * ck - mu if kind == "coordinate" else hk * (ck - mu) for hk, ck in zip(h, c)]
        v += mpmath.fdot(r, r) / nn
    return -e + mpf(lambda1) / 2 * v + mpf(lambda2) / 2 * mpmath.fdot(h, h)


def fd_component_mp(z, k, x, y, t, grid, step=1e-6, dps=40, **kw):
    """One central difference evaluated with ``dps`` significant digits."""
    with mpmath.workdps(dps):
        base = [mpmath.mpf(float(v)) for v in z]
        zp, zm = list(base), list(base)
        zp[k] += mpmath.mpf(step)
        zm[k] -= mpmath.mpf(step)
        d = relaxed_objective_mp(zp, x, y, t, grid, **kw) - relaxed_objective_mp(zm, x, y, t, grid, **kw)
        return float(d / (2 * mpmath.mpf(step)))


def fd_gradient(z, x, y, t, grid, step=1e-6, dtype=np.longdouble, resolve=None, **kw):
    """Central differences of the relaxed reference objective.

    Components whose extended-precision quotient is below ``resolve`` in
    magnitude sit near the rounding floor of that arithmetic (about
    eps * |J| / step); they are recomputed with mpmath.
    """
    z = np.asarray(z, dtype=dtype)
    g = np.zeros(z.size, dtype=dtype)
    for k in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[k] += dtype(step)
        zm[k] -= dtype(step)
        fp = objective(zp, x, y, t, grid, "relaxed", dtype=dtype, **kw)
        fm = objective(zm, x, y, t, grid, "relaxed", dtype=dtype, **kw)
        g[k] = (fp - fm) / (2 * dtype(step))
    if resolve is not None:
        for k in np.flatnonzero(np.abs(g) < resolve):
            g[k] = fd_component_mp(z, k, x, y, t, grid, step=step, **kw)
    return g
