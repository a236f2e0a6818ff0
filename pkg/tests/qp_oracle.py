"""Independent brute-force oracle for the soft-margin SVM dual QP.

Enumerates every active-set assignment (each alpha pinned to 0, to C, or
left free), solves the reduced stationarity system exactly, and keeps the
best feasible candidate.  Exhaustive over 3^n assignments, so exact for
the small problems the solver tests use, and entirely independent of the
SMO code path.  A dense grid search over the equality-constrained simplex
cross-checks the oracle itself on 2- and 3-point problems.
"""

from __future__ import annotations

import itertools

import numpy as np


def gram(points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return pts @ pts.T


def dual_objective(alphas, ys, kernel: np.ndarray) -> float:
    a = np.asarray(alphas, dtype=float)
    y = np.asarray(ys, dtype=float)
    ay = a * y
    return float(a.sum() - 0.5 * ay @ kernel @ ay)


def solve_qp_exact(points, ys, c: float):
    """Maximize the dual by active-set enumeration; returns (alphas, obj)."""
    y = np.asarray(ys, dtype=float)
    n = len(y)
    kernel = gram(points)
    q = kernel * np.outer(y, y)
    best_obj = -np.inf
    best_a = None
    for assign in itertools.product((0, 1, 2), repeat=n):
        a = np.zeros(n)
        fixed = [i for i, s in enumerate(assign) if s != 2]
        free = [i for i, s in enumerate(assign) if s == 2]
        for i in fixed:
            a[i] = 0.0 if assign[i] == 0 else c
        if free:
            m = len(free)
            mat = np.zeros((m + 1, m + 1))
            rhs = np.zeros(m + 1)
            for fi, f in enumerate(free):
                mat[fi, :m] = q[f, free]
                mat[fi, m] = y[f]
                rhs[fi] = 1.0 - sum(q[f, j] * a[j] for j in fixed)
            mat[m, :m] = y[free]
            rhs[m] = -sum(y[j] * a[j] for j in fixed)
            sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
            if not np.allclose(mat @ sol, rhs, atol=1e-8):
                continue  # inconsistent stationarity system
            for fi, f in enumerate(free):
                a[f] = sol[fi]
        if np.any(a < -1e-9) or np.any(a > c + 1e-9):
            continue
        if abs(float(a @ y)) > 1e-8:
            continue
        obj = dual_objective(a, y, kernel)
        if obj > best_obj:
            best_obj = obj
            best_a = np.clip(a, 0.0, c)
    return best_a, best_obj


def solve_qp_grid(points, ys, c: float, steps: int = 200) -> float:
    """Coarse dense-grid maximum for n <= 3; validates the exact oracle."""
    y = np.asarray(ys, dtype=float)
    n = len(y)
    kernel = gram(points)
    grid = np.linspace(0.0, c, steps + 1)
    best = -np.inf
    if n == 2:
        for a0 in grid:
            a1 = -(a0 * y[0]) / y[1]  # keeps sum a.y = 0
            if not 0.0 <= a1 <= c:
                continue
            obj = dual_objective([a0, a1], y, kernel)
            best = max(best, obj)
        return best
    if n == 3:
        for a0 in grid:
            for a1 in grid:
                a2 = -(a0 * y[0] + a1 * y[1]) / y[2]
                if not 0.0 <= a2 <= c:
                    continue
                obj = dual_objective([a0, a1, a2], y, kernel)
                best = max(best, obj)
        return best
    raise ValueError("grid oracle only supports n <= 3")
