"""Simultaneous approximation: integers k that make every k·θ_i nearly an integer.

The scan is a plain chunked brute force over ``k = 1..k_max``.  A hit list for
a larger ``k_max`` always extends the list for a smaller one.  For a single
real, :func:`convergent_denominators` gives the continued-fraction fast path.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError

__all__ = [
    "Window",
    "KroneckerQuery",
    "KroneckerHit",
    "fractional_part",
    "wrap_deviation",
    "simultaneous_approx",
    "first_hit",
    "denseness_witness",
    "convergent_denominators",
]

DEFAULT_K_MAX = 10**6
WRAP_TOL = 1e-12
CHUNK = 1 << 16


class Window(str, enum.Enum):
    NEAR_ZERO_OR_ONE = "near_zero_or_one"
    QUARTER = "quarter_window"


@dataclass(frozen=True)
class KroneckerQuery:
    theta: tuple
    epsilon: float = 0.01
    k_max: int = DEFAULT_K_MAX
    window: Window = Window.NEAR_ZERO_OR_ONE

    def __post_init__(self):
        theta = tuple(float(t) for t in np.atleast_1d(self.theta))
        if not theta or not all(math.isfinite(t) for t in theta):
            raise ValidationError("theta must be a non-empty list of finite reals")
        if not 0 < self.epsilon < 0.5:
            raise ValidationError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if int(self.k_max) < 1:
            raise ValidationError("k_max must be at least 1")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "k_max", int(self.k_max))
        object.__setattr__(self, "window", Window(self.window))

    @property
    def threshold(self) -> float:
        return 0.25 if self.window is Window.QUARTER else self.epsilon


@dataclass(frozen=True)
class KroneckerHit:
    k: int
    deviations: tuple

    def revalidate(self, theta: Sequence[float], threshold: float) -> bool:
        dev = wrap_deviation(self.k * np.asarray(theta, dtype=float))
        return bool(np.all(dev < threshold))


def fractional_part(x):
    """``x - floor(x)``, always in ``[0, 1)`` (so ``{-1.25} = 0.75``)."""
    f = np.asarray(x, dtype=float) - np.floor(x)
    # x = -1e-20 rounds to f == 1.0
    f = np.where(f >= 1.0, 0.0, f)
    return f if f.ndim else float(f)


def wrap_deviation(x):
    """Distance from ``x`` to the nearest integer, ``min({x}, 1 - {x})``.

    Distances below ``1e-12`` or below the rounding resolution of ``x``
    itself (``16 eps |x|``) are snapped to zero.
    """
    x = np.asarray(x, dtype=float)
    f = fractional_part(x)
    dev = np.minimum(f, 1.0 - f)
    floor = np.maximum(WRAP_TOL, 16 * np.finfo(float).eps * np.abs(x))
    dev = np.where(dev < floor, 0.0, dev)
    return dev if dev.ndim else float(dev)


def _scan(theta: np.ndarray, k_max: int, accept, stop_first: bool):
    hits = []
    for start in range(1, k_max + 1, CHUNK):
        k = np.arange(start, min(start + CHUNK, k_max + 1), dtype=np.int64)
        vals = k[:, None] * theta[None, :]
        ok, extra = accept(vals)
        for row in np.flatnonzero(ok):
            hits.append((int(k[row]), extra[row]))
            if stop_first:
                return hits
    return hits


def simultaneous_approx(query: KroneckerQuery) -> list[KroneckerHit]:
    """All ``k <= k_max`` whose multiples ``k θ_i`` all lie within the window of an integer.

    An empty list is a normal outcome for finite ``k_max``.
    """
    theta = np.asarray(query.theta)
    threshold = query.threshold

    def accept(vals):
        dev = wrap_deviation(vals)
        return np.all(dev < threshold, axis=1), dev

    return [KroneckerHit(k, tuple(map(float, dev))) for k, dev in _scan(theta, query.k_max, accept, False)]


def first_hit(theta, epsilon: float = 0.25, k_max: int = DEFAULT_K_MAX, window=Window.NEAR_ZERO_OR_ONE):
    """Smallest hit for ``theta`` or ``None``; stops scanning at the first success."""
    query = KroneckerQuery(tuple(np.atleast_1d(theta)), epsilon, k_max, window)
    threshold = query.threshold

    def accept(vals):
        dev = wrap_deviation(vals)
        return np.all(dev < threshold, axis=1), dev

    found = _scan(np.asarray(query.theta), query.k_max, accept, True)
    if not found:
        return None
    k, dev = found[0]
    return KroneckerHit(k, tuple(map(float, dev)))


def denseness_witness(theta, target, epsilon: float, k_max: int = DEFAULT_K_MAX) -> Optional[int]:
    """Smallest ``k <= k_max`` with ``({k θ_i})`` within ``epsilon`` of ``target`` on the torus."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if target.shape != theta.shape:
        raise ValidationError("target and theta must have the same length")

    def accept(vals):
        dist = wrap_deviation(vals - target)
        return np.all(dist < epsilon, axis=1), dist

    found = _scan(theta, int(k_max), accept, True)
    return found[0][0] if found else None


def convergent_denominators(theta: float, k_max: int) -> list[int]:
    """Denominators of the continued-fraction convergents of ``theta`` up to ``k_max``.

    These are the best approximations of the second kind, so for one real the
    smallest ``k`` with ``|| k θ || < ε`` is always among them.
    """
    x = float(theta)
    x -= math.floor(x)
    q_prev, q = 0, 1
    dens = [1]
    for _ in range(64):
        if x < 1e-15:
            break
        x = 1.0 / x
        a = math.floor(x)
        x -= a
        q_prev, q = q, a * q + q_prev
        if q > k_max:
            break
        dens.append(q)
    return dens
