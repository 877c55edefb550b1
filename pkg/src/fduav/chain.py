"""Optimization over waypoint chains with a per-step length limit.

The feasible set is ``{q : ||q[n] - q[n-1]|| <= radius, n = 1..N}`` with the
first and last waypoints held fixed. Two solvers are provided for the
separable quadratic problem

    minimize  sum_n weight[n] * ||q[n] - center[n]||^2

over that set: a log-barrier Newton method whose Newton systems are
block-tridiagonal (the default), and projected gradient with Dykstra's
alternating projections.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded

from .scenario import FEAS_TOL


def step_lengths(q) -> np.ndarray:
    return np.linalg.norm(np.diff(np.asarray(q, dtype=float), axis=0), axis=1)


def max_violation(q, radius) -> float:
    """Largest excess of a step length over ``radius`` (0 when feasible)."""
    q = np.asarray(q, dtype=float)
    if q.shape[0] < 2:
        return 0.0
    return float(max(0.0, np.max(step_lengths(q)) - radius))


# ---------------------------------------------------------------------------
# Dykstra projection

def _project_pairs(q, start, radius, fixed):
    """Project disjoint consecutive pairs (k-1, k), k = start, start+2, ...
    onto ``||q[k] - q[k-1]|| <= radius``."""
    out = q.copy()
    k = np.arange(start, q.shape[0], 2)
    if k.size == 0:
        return out
    a, b = q[k - 1], q[k]
    diff = b - a
    dist = np.linalg.norm(diff, axis=1)
    over = dist > radius
    if not np.any(over):
        return out
    k, a, b, diff, dist = k[over], a[over], b[over], diff[over], dist[over]
    unit = diff / dist[:, None]
    fa, fb = fixed[k - 1], fixed[k]
    new_a, new_b = a.copy(), b.copy()
    both = ~fa & ~fb
    mid = 0.5 * (a + b)
    new_a[both] = mid[both] - 0.5 * radius * unit[both]
    new_b[both] = mid[both] + 0.5 * radius * unit[both]
    only_b = fa & ~fb
    new_b[only_b] = a[only_b] + radius * unit[only_b]
    only_a = ~fa & fb
    new_a[only_a] = b[only_a] - radius * unit[only_a]
    out[k - 1] = new_a
    out[k] = new_b
    return out


def project_speed_chain(trajectory, radius, fixed=None, sweeps=200, tol=1e-10) -> np.ndarray:
    """Euclidean projection onto the chain set by Dykstra's algorithm.

    The constraints are split into odd and even links; each group is a
    product of independent two-point constraints and is projected exactly.
    At most ``sweeps`` rounds are made, so long chains with many active links
    may come back slightly infeasible.
    """
    q = np.array(trajectory, dtype=float)
    if fixed is None:
        fixed = np.zeros(q.shape[0], dtype=bool)
        fixed[0] = fixed[-1] = True
    if q.shape[0] < 2 or np.all(step_lengths(q) <= radius):
        return q
    x = q
    p = np.zeros_like(q)
    r = np.zeros_like(q)
    for _ in range(sweeps):
        y = _project_pairs(x + p, 1, radius, fixed)
        p = x + p - y
        x_new = _project_pairs(y + r, 2, radius, fixed)
        r = y + r - x_new
        change = np.max(np.abs(x_new - x))
        x = x_new
        if change <= tol and max_violation(x, radius) <= FEAS_TOL / 2:
            break
    return x


def feasible_toward(base, target, radius):
    """Furthest point on the segment from feasible ``base`` to ``target`` that
    keeps every step within ``radius`` (bisection)."""
    def ok(theta):
        return max_violation(base + theta * (target - base), radius) <= FEAS_TOL / 2

    if ok(1.0):
        return target
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return base + lo * (target - base)


def _quadratic(weight, center, q):
    return float(np.sum(weight * np.sum((q[1:] - center) ** 2, axis=1)))


def projected_gradient(weight, center, start, radius, *, max_steps=500, initial_step=None,
                       backtrack=0.5, armijo=1e-4, sweeps=200, tol=1e-6) -> np.ndarray:
    """Projected gradient descent with Armijo backtracking.

    ``weight``/``center`` index slots 1..N (waypoint rows 1..N). Trial moves
    are capped at ``initial_step`` (default ``radius``) per waypoint.
    """
    q = np.array(start, dtype=float)
    if q.shape[0] <= 2:
        return q
    fixed = np.zeros(q.shape[0], dtype=bool)
    fixed[0] = fixed[-1] = True
    first = radius if initial_step is None else initial_step

    def gradient(x):
        g = np.zeros_like(x)
        g[1:] = 2.0 * weight[:, None] * (x[1:] - center)
        g[fixed] = 0.0
        return g

    # project onto a slightly tighter chain so unconverged sweeps stay feasible
    slack = (q.shape[0] - 1) * radius - float(np.linalg.norm(q[-1] - q[0]))
    inner_radius = radius - min(1e-6 * radius, max(slack, 0.0) / (2 * (q.shape[0] - 1)))
    value = _quadratic(weight, center, q)
    scale = max(1.0, float(np.max(np.abs(q))))
    t = None
    for _ in range(max_steps):
        g = gradient(q)
        gmax = float(np.max(np.linalg.norm(g, axis=1)))
        if gmax == 0.0:
            break
        t = first / gmax if t is None else min(t, first / gmax)
        while True:
            trial = project_speed_chain(q - t * g, inner_radius, fixed, sweeps)
            trial = feasible_toward(q, trial, radius)
            trial_value = _quadratic(weight, center, trial)
            if trial_value <= value - armijo * float(np.sum(g * (q - trial))):
                break
            t *= backtrack
            if t * gmax < 1e-12 * scale:
                return q
        move = float(np.max(np.abs(trial - q)))
        q, value = trial, trial_value
        if move <= tol * scale:
            break
        t /= backtrack
    return q


# ---------------------------------------------------------------------------
# log-barrier Newton

def _barrier_terms(q, radius):
    d = np.diff(q, axis=0)                      # links 1..N
    s = radius * radius - np.sum(d * d, axis=1)
    return d, s


def _banded_hessian(diag_blocks, off_blocks):
    """Upper banded storage (3 super-diagonals) of a symmetric block-tridiagonal
    matrix with 2x2 blocks."""
    m = diag_blocks.shape[0]
    size = 2 * m
    ab = np.zeros((4, size))
    idx = 2 * np.arange(m)
    ab[3, idx] = diag_blocks[:, 0, 0]
    ab[3, idx + 1] = diag_blocks[:, 1, 1]
    ab[2, idx + 1] = diag_blocks[:, 0, 1]
    if m > 1:
        # block (m, m+1): entry (2m+a, 2m+2+b) sits on super-diagonal 2+b-a
        j0 = idx[1:]
        ab[3 - 2, j0] = off_blocks[:, 0, 0]
        ab[3 - 3, j0 + 1] = off_blocks[:, 0, 1]
        ab[3 - 1, j0] = off_blocks[:, 1, 0]
        ab[3 - 2, j0 + 1] = off_blocks[:, 1, 1]
    return ab


def _newton_step(ab, rhs):
    """Solve the banded Newton system; near the boundary the barrier Hessian
    can lose definiteness to round-off, so retry with a growing ridge.
    Returns None if no ridge helps."""
    ridge = 0.0
    top = float(np.max(ab[-1]))
    for _ in range(8):
        try:
            if ridge:
                ab = ab.copy()
                ab[-1] += ridge
            return solveh_banded(ab, rhs)
        except LinAlgError:
            ridge = 1e-12 * top if ridge == 0.0 else ridge * 100.0
    return None


def barrier_solve(weight, center, start, radius, *, gap_tol=1e-9, mu=20.0,
                  max_newton=60) -> np.ndarray:
    """Minimize the separable quadratic over the chain set by a log-barrier
    method; returns a strictly feasible point with duality gap <= ``gap_tol``
    (absolute, in objective units).
    """
    q = np.array(start, dtype=float)
    N = q.shape[0] - 1
    if N < 2:
        return q
    line = np.linspace(q[0], q[-1], N + 1)
    if np.max(step_lengths(line)) >= radius * (1.0 - 1e-12):
        return line  # rigid chain: the straight line is the only feasible point
    # strictly interior start: pull slightly toward the (strictly feasible) line
    x = 0.99 * q + 0.01 * line
    x[0], x[-1] = q[0], q[-1]
    w = np.asarray(weight, dtype=float)[:-1]   # slot N sits on the fixed end point
    c = np.asarray(center, dtype=float)[:-1]
    base = _quadratic(weight, center, x)
    if not np.any(w > 0):
        return q

    def phi(x_full, t):
        d, s = _barrier_terms(x_full, radius)
        if np.any(s <= 0):
            return np.inf
        return t * float(np.sum(w * np.sum((x_full[1:-1] - c) ** 2, axis=1))) - float(np.sum(np.log(s)))

    t = N / max(base, 1e-300)
    eye = np.eye(2)
    while True:
        for _ in range(max_newton):
            d, s = _barrier_terms(x, radius)
            gd = 2.0 * d / s[:, None]                                            # (N, 2)
            grad = 2.0 * t * w[:, None] * (x[1:-1] - c) + gd[:-1] - gd[1:]
            hd = 2.0 * eye[None] / s[:, None, None] + 4.0 * d[:, :, None] * d[:, None, :] / (s * s)[:, None, None]
            diag_blocks = 2.0 * t * w[:, None, None] * eye[None] + hd[:-1] + hd[1:]
            off_blocks = -hd[1:-1]
            ab = _banded_hessian(diag_blocks, off_blocks)
            step = _newton_step(ab, grad.ravel())
            if step is None:
                return x
            step = -step.reshape(-1, 2)
            decrement = -float(np.sum(grad * step))
            if decrement / 2.0 <= 1e-12:
                break
            f0 = phi(x, t)
            alpha = 1.0
            while True:
                trial = x.copy()
                trial[1:-1] += alpha * step
                f1 = phi(trial, t)
                if f1 <= f0 - 0.25 * alpha * decrement:
                    break
                alpha *= 0.5
                if alpha < 1e-14:
                    break
            if alpha < 1e-14:
                break
            x = trial
        if N / t <= gap_tol:
            break
        t *= mu
    return x
