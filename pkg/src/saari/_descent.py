"""Collision-aware line-search descent used by the IU² and action minimizers.

Both drivers treat a :class:`CollisionError` raised by the objective as an
infeasible trial point and halve the step, so iterates never cross the
degenerate-distance threshold.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import CollisionError

ARMIJO = 1e-4
MAX_HALVINGS = 60


@dataclass
class DescentResult:
    x: np.ndarray
    f: float
    grad: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool
    status: str


def _line_search(fg, x, fx, g, direction, step, retract, proj):
    slope = float(g @ direction)
    if slope >= 0:
        return None
    noise = 8 * np.finfo(float).eps * abs(fx)
    gnorm = float(np.linalg.norm(g))
    collided = True
    for _ in range(MAX_HALVINGS):
        trial = x + step * direction
        if retract is not None:
            trial = retract(trial)
        try:
            f_new, g_new = fg(trial)
        except CollisionError:
            step *= 0.5
            continue
        collided = False
        if np.isfinite(f_new) and f_new <= fx + ARMIJO * step * slope:
            return trial, f_new, g_new, step
        # below rounding level the decrease is invisible; accept if the gradient shrinks
        if abs(f_new - fx) <= noise and np.linalg.norm(proj(trial, g_new)) < gnorm:
            return trial, f_new, g_new, step
        step *= 0.5
    return "collision" if collided else None


def descend(
    fg: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    *,
    tol: float,
    max_iters: int,
    method: str = "bfgs",
    project: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
    retract: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    stop_at: Optional[float] = None,
) -> DescentResult:
    """Minimize ``f`` from ``x0`` by steepest descent or BFGS with Armijo backtracking.

    ``fg(x)`` returns ``(f, grad)``.  ``project(x, g)`` removes gradient
    components along symmetry directions; its norm is the convergence
    measure.  ``retract`` maps trial points back onto the constraint set.
    ``stop_at`` ends a steepest-descent phase early once the projected
    gradient norm drops below it.
    """
    x = np.array(x0, dtype=float)
    if retract is not None:
        x = retract(x)
    fx, g = fg(x)
    proj = project or (lambda _x, v: v)
    pg = proj(x, g)
    gnorm = float(np.linalg.norm(pg))
    H = None
    fresh = True
    step = 1.0
    status = "max_iters"
    it = 0
    for it in range(max_iters + 1):
        if gnorm < tol:
            return DescentResult(x, fx, g, gnorm, it, True, "converged")
        if stop_at is not None and gnorm < stop_at:
            return DescentResult(x, fx, g, gnorm, it, False, "phase_done")
        if it == max_iters:
            break
        if method == "bfgs":
            if H is None or float(-proj(x, H @ pg) @ pg) >= 0:
                H = np.eye(x.size) / max(gnorm, 1.0)
                fresh = True
            direction = -proj(x, H @ pg)
            trial_step = 1.0
        else:
            direction = -pg
            trial_step = min(2.0 * step, 1e6)
        found = _line_search(fg, x, fx, pg, direction, trial_step, retract, proj)
        if found == "collision":
            status = "collision"
            break
        if found is None:
            if method == "bfgs" and not fresh:
                H = None
                continue
            status = "line_search"
            break
        x_new, f_new, g_new, step = found
        pg_new = proj(x_new, g_new)
        if method == "bfgs":
            s = x_new - x
            y = pg_new - pg
            sy = float(s @ y)
            if sy > 1e-300:
                rho = 1.0 / sy
                if fresh:
                    H = np.eye(x.size) * (sy / float(y @ y))
                    fresh = False
                Hy = H @ y
                H = H - rho * (np.outer(s, Hy) + np.outer(Hy, s)) + (rho * rho * float(y @ Hy) + rho) * np.outer(s, s)
        x, fx, g, pg = x_new, f_new, g_new, pg_new
        gnorm = float(np.linalg.norm(pg))
    return DescentResult(x, fx, g, gnorm, it, gnorm < tol, status)
