"""Action minimization over planar periodic loops with zero time average.

A :class:`FourierLoop` is a truncated Fourier series without constant term,

    q_i(t) = Σ_{h=1..M} α_{i,h} cos(hωt) + β_{i,h} sin(hωt),   ω = 2π/T,

so the zero-mean condition holds exactly.  The kinetic part of the action is
a closed-form quadratic in the coefficients; the potential part is integrated
by the periodic trapezoidal rule.

The lower-bound chain for any such loop reads

    A(q) ≥ ∫ ½ω² I + U dt                 (Wirtinger, equality iff h = 1 only)
         ≥ 3 ∫ (⅛ ω² I U²)^{1/3} dt       (AM-GM, equality iff ω² I = U)
         ≥ 3 (inf IU² π²/2)^{1/3} T^{1/3}  (equality iff IU² is minimal),

and each link is exposed separately.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ._descent import descend
from .central_config import CentralConfigResult, minimize_iu2
from .errors import CollisionAbort, CollisionError, NoConvergence, ValidationError
from .mechanics import (
    MassVector,
    kinetic_energy,
    moment_of_inertia,
    pairwise_distances,
    potential,
    potential_gradient,
)
from .trig_harmonics import TrigLoop

__all__ = [
    "FourierLoop",
    "ActionReport",
    "action_functional",
    "action_and_gradient",
    "wirtinger_gap",
    "action_lower_bound",
    "amgm_pointwise_gap",
    "minimize_action",
    "classify_minimizer",
    "relative_equilibrium",
    "build_relative_equilibrium",
    "trig_to_fourier",
    "trajectory_rows",
]

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 4
DEFAULT_SAMPLES = 1024
GRAD_TOL = 1e-9
GUARD_SEPARATION = 0.05
CLASSIFY_TOL = 1e-6


@dataclass(frozen=True)
class FourierLoop:
    """Planar zero-mean loop with ``order`` harmonics per body.

    ``cos`` and ``sin`` have shape ``(N, order, 2)``.
    """

    masses: np.ndarray
    T: float
    cos: np.ndarray
    sin: np.ndarray

    def __post_init__(self):
        m = np.asarray(MassVector(self.masses))
        c = np.array(self.cos, dtype=float)
        s = np.array(self.sin, dtype=float)
        if c.ndim != 3 or c.shape != s.shape or c.shape[0] != m.size or c.shape[2] != 2:
            raise ValidationError(f"coefficients must have shape ({m.size}, M, 2), got {c.shape} and {s.shape}")
        if c.shape[1] < 1:
            raise ValidationError("order must be at least 1 (a constant term is not allowed)")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(s))):
            raise ValidationError("loop coefficients must be finite")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValidationError(f"period must be positive, got {self.T}")
        for arr in (c, s):
            arr.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "cos", c)
        object.__setattr__(self, "sin", s)
        object.__setattr__(self, "T", float(self.T))

    @classmethod
    def zeros(cls, masses, T: float, order: int) -> "FourierLoop":
        n = len(np.atleast_1d(masses))
        if order < 1:
            raise ValidationError("order must be at least 1")
        return cls(masses, T, np.zeros((n, order, 2)), np.zeros((n, order, 2)))

    @classmethod
    def from_vector(cls, masses, T: float, order: int, z) -> "FourierLoop":
        z = np.asarray(z, dtype=float)
        half = z.size // 2
        n = len(np.atleast_1d(masses))
        return cls(masses, T, z[:half].reshape(n, order, 2), z[half:].reshape(n, order, 2))

    @classmethod
    def from_samples(cls, masses, T: float, q, order: int, *, atol: float = 1e-12) -> "FourierLoop":
        """Project equispaced samples ``q[k] = q(kT/S)`` of shape ``(S, N, 2)`` onto ``order`` harmonics.

        Raises :class:`ValidationError` if the samples have a nonzero time
        average, since such a loop lies outside the zero-mean loop space.
        """
        q = np.asarray(q, dtype=float)
        S = q.shape[0]
        if S < 2 * order + 1:
            raise ValidationError(f"need at least {2 * order + 1} samples for order {order}")
        spec = np.fft.rfft(q, axis=0) / S
        scale = max(float(np.sqrt(np.mean(q * q))), 1e-300)
        if np.linalg.norm(spec[0].real) > atol * scale * math.sqrt(q[0].size):
            raise ValidationError("samples have a nonzero time average; constant terms are not representable")
        c = 2 * spec[1 : order + 1].real.transpose(1, 0, 2)
        s = -2 * spec[1 : order + 1].imag.transpose(1, 0, 2)
        return cls(masses, T, c, s)

    @property
    def order(self) -> int:
        return self.cos.shape[1]

    @property
    def omega(self) -> float:
        return 2 * np.pi / self.T

    @property
    def n_bodies(self) -> int:
        return self.cos.shape[0]

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.cos.ravel(), self.sin.ravel()])

    def sample_times(self, samples: int) -> np.ndarray:
        return self.T * np.arange(samples) / samples

    def _phases(self, t):
        h = np.arange(1, self.order + 1)
        return self.omega * np.asarray(t, dtype=float)[..., None] * h

    def positions(self, t):
        ph = self._phases(t)
        return np.einsum("...h,nhd->...nd", np.cos(ph), self.cos) + np.einsum("...h,nhd->...nd", np.sin(ph), self.sin)

    def velocities(self, t):
        ph = self._phases(t)
        w = self.omega * np.arange(1, self.order + 1)
        return np.einsum("...h,nhd->...nd", w * np.cos(ph), self.sin) - np.einsum("...h,nhd->...nd", w * np.sin(ph), self.cos)

    def accelerations(self, t):
        ph = self._phases(t)
        w2 = (self.omega * np.arange(1, self.order + 1)) ** 2
        return -(np.einsum("...h,nhd->...nd", w2 * np.cos(ph), self.cos) + np.einsum("...h,nhd->...nd", w2 * np.sin(ph), self.sin))

    def harmonic_norms(self) -> np.ndarray:
        """``|α_{i,h}|² + |β_{i,h}|²``, shape ``(N, M)``."""
        return np.sum(self.cos**2 + self.sin**2, axis=2)

    def kinetic_action(self) -> float:
        """``∫ K dt`` over one period, exactly."""
        w2 = (self.omega * np.arange(1, self.order + 1)) ** 2
        return float(0.25 * self.T * np.einsum("n,nh,h->", self.masses, self.harmonic_norms(), w2))

    def to_dict(self) -> dict:
        return {
            "masses": self.masses.tolist(),
            "T": self.T,
            "order": int(self.order),
            "cos": self.cos.tolist(),
            "sin": self.sin.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FourierLoop":
        if any(key in obj for key in ("mean", "constant")) and np.any(np.asarray(obj.get("mean", obj.get("constant")))):
            raise ValidationError("constant terms are not representable in a zero-mean loop")
        try:
            m = obj["masses"]
            order = int(obj["order"])
            c = np.asarray(obj["cos"], dtype=float).reshape(len(m), order, 2)
            s = np.asarray(obj["sin"], dtype=float).reshape(len(m), order, 2)
            return cls(m, float(obj["T"]), c, s)
        except ValidationError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed Fourier loop: {exc}") from exc


@dataclass
class ActionReport:
    action: float
    lower_bound: float
    gap: float
    inf_iu2: float
    condition_i: float
    condition_ii: float
    condition_iii: float
    passes: dict = field(default_factory=dict)
    verdict: str = ""
    centroid_rms: float = 0.0
    iterations: int = 0
    converged: bool = False
    grad_norm: float = float("nan")

    @property
    def is_relative_equilibrium(self) -> bool:
        return all(self.passes.values())

    def to_dict(self) -> dict:
        return asdict(self)


def _check_samples(samples: int, order: int):
    if samples < 8 * order or samples & (samples - 1):
        raise ValidationError(f"samples must be a power of two >= 8*order, got {samples}")


def action_functional(loop: FourierLoop, samples: int = DEFAULT_SAMPLES) -> float:
    """Kinetic part in closed form plus periodic trapezoidal quadrature of ``U(q(t))``."""
    _check_samples(samples, loop.order)
    U = potential(loop.masses, loop.positions(loop.sample_times(samples)))
    return loop.kinetic_action() + loop.T * float(np.mean(U))


class _ActionProblem:
    """Action and gradient as functions of the flat coefficient vector."""

    def __init__(self, masses, T: float, order: int, samples: int, guard: float = 0.0):
        self.m = np.asarray(masses, dtype=float)
        self.T = T
        self.order = order
        self.samples = samples
        self.guard = guard
        omega = 2 * np.pi / T
        t = T * np.arange(samples) / samples
        ph = omega * t[:, None] * np.arange(1, order + 1)
        self.basis_cos = np.cos(ph)
        self.basis_sin = np.sin(ph)
        self.w2 = (omega * np.arange(1, order + 1)) ** 2
        self.shape = (self.m.size, order, 2)

    def split(self, z):
        half = z.size // 2
        return z[:half].reshape(self.shape), z[half:].reshape(self.shape)

    def fg(self, z):
        c, s = self.split(z)
        q = np.einsum("sh,nhd->snd", self.basis_cos, c) + np.einsum("sh,nhd->snd", self.basis_sin, s)
        if self.guard > 0:
            scale = math.sqrt(float(np.mean(moment_of_inertia(self.m, q))) / self.m.sum())
            if pairwise_distances(q).min() < self.guard * scale:
                raise CollisionError("trial loop violates the separation guard")
        U, gU = potential_gradient(self.m, q, with_value=True)
        norms = np.sum(c**2 + s**2, axis=2)
        kin = 0.25 * self.T * np.einsum("n,nh,h->", self.m, norms, self.w2)
        val = kin + self.T * float(np.mean(U))
        kin_scale = 0.5 * self.T * self.m[:, None, None] * self.w2[None, :, None]
        dt = self.T / self.samples
        gc = kin_scale * c + dt * np.einsum("sh,snd->nhd", self.basis_cos, gU)
        gs = kin_scale * s + dt * np.einsum("sh,snd->nhd", self.basis_sin, gU)
        return val, np.concatenate([gc.ravel(), gs.ravel()])


def action_and_gradient(loop: FourierLoop, samples: int = DEFAULT_SAMPLES):
    """Action and its exact gradient with respect to ``loop.as_vector()``."""
    _check_samples(samples, loop.order)
    problem = _ActionProblem(loop.masses, loop.T, loop.order, samples)
    return problem.fg(loop.as_vector())


def wirtinger_gap(loop: FourierLoop) -> float:
    """``∫ K dt - ω² ∫ ½ I dt``, exactly; zero iff only first harmonics are present."""
    w = loop.omega
    excess = (w * np.arange(1, loop.order + 1)) ** 2 - w * w
    return float(0.25 * loop.T * np.einsum("n,nh,h->", loop.masses, loop.harmonic_norms(), excess))


def action_lower_bound(T: float, inf_iu2: float) -> float:
    """``3 (inf_iu2 π²/2)^{1/3} T^{1/3}``."""
    if T <= 0 or inf_iu2 <= 0:
        raise ValidationError("T and inf_iu2 must be positive")
    return 3.0 * (inf_iu2 * np.pi**2 / 2) ** (1 / 3) * T ** (1 / 3)


def amgm_pointwise_gap(loop, t):
    """``½ω²I + U - 3(⅛ω²IU²)^{1/3}`` at time(s) ``t``; zero iff ``ω²I = U``."""
    q = loop.positions(t)
    I = moment_of_inertia(loop.masses, q)
    U = potential(loop.masses, q)
    w2 = loop.omega**2
    return 0.5 * w2 * I + U - 3.0 * np.cbrt(0.125 * w2 * I * U * U)


def relative_equilibrium(m, q, T: Optional[float] = None) -> TrigLoop:
    """Rigid rotation of a central configuration ``q`` at angular speed ``sqrt(U/I)``.

    If ``T`` is given, ``q`` is first rescaled so that ``U/I = (2π/T)²``.
    Collinear configurations are embedded in the plane.
    """
    m = np.asarray(MassVector(m))
    q = np.array(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if q.shape[1] == 1:
        q = np.column_stack([q[:, 0], np.zeros(len(q))])
    if q.shape[1] != 2:
        raise ValidationError("relative equilibria are built in the plane")
    q = q - (m @ q) / m.sum()
    lam = potential(m, q) / moment_of_inertia(m, q)
    if T is None:
        T = 2 * np.pi / math.sqrt(lam)
    else:
        omega2 = (2 * np.pi / T) ** 2
        q = q * (lam / omega2) ** (1 / 3)
    jq = np.column_stack([-q[:, 1], q[:, 0]])
    return TrigLoop(m, q, jq, T)


def build_relative_equilibrium(central: CentralConfigResult, T: Optional[float] = None) -> TrigLoop:
    """Relative equilibrium through a converged central configuration.

    Without ``T`` the configuration keeps its size and the period is
    ``2π/sqrt(λ)``; with ``T`` it is rescaled to rotate with that period.
    """
    if not central.converged:
        raise ValidationError("central configuration did not converge")
    return relative_equilibrium(central.masses, central.q, T)


def trig_to_fourier(loop: TrigLoop) -> FourierLoop:
    """Embed a trigonometric loop as a first-order Fourier loop."""
    a, b = loop.a, loop.b
    if loop.dim == 1:
        a = np.column_stack([a[:, 0], np.zeros(len(a))])
        b = np.column_stack([b[:, 0], np.zeros(len(b))])
    elif loop.dim != 2:
        raise ValidationError("Fourier loops are planar")
    return FourierLoop(loop.masses, loop.T, a[:, None, :], b[:, None, :])


def classify_minimizer(
    loop: FourierLoop,
    central: CentralConfigResult,
    tol_i: float = CLASSIFY_TOL,
    tol_ii: float = CLASSIFY_TOL,
    tol_iii: float = CLASSIFY_TOL,
    samples: int = DEFAULT_SAMPLES,
) -> ActionReport:
    """Evaluate the three equality conditions of the action lower bound.

    (i)   share of ``Σ m h² (|α|²+|β|²)`` carried by the first harmonic;
    (ii)  ``max_t |ω² I - U| / U``;
    (iii) ``max_t |I U² - inf IU²| / inf IU²``.
    """
    t = loop.sample_times(samples)
    q = loop.positions(t)
    I = moment_of_inertia(loop.masses, q)
    U = potential(loop.masses, q)
    h2 = np.arange(1, loop.order + 1) ** 2
    weighted = loop.masses[:, None] * loop.harmonic_norms() * h2
    total = weighted.sum()
    frac = float(weighted[:, 0].sum() / total) if total > 0 else 0.0
    cond_ii = float(np.max(np.abs(loop.omega**2 * I - U) / U))
    cond_iii = float(np.max(np.abs(I * U * U - central.value)) / central.value)
    passes = {"i": frac > 1 - tol_i, "ii": cond_ii < tol_ii, "iii": cond_iii < tol_iii}
    action = loop.kinetic_action() + loop.T * float(np.mean(U))
    bound = action_lower_bound(loop.T, central.value)
    if all(passes.values()):
        verdict = "relative equilibrium minimizer"
    else:
        failed = ", ".join(k for k, ok in passes.items() if not ok)
        verdict = f"not a relative equilibrium minimizer (fails {failed})"
    centroid = np.einsum("n,snd->sd", loop.masses, q) / loop.masses.sum()
    return ActionReport(
        action=action,
        lower_bound=bound,
        gap=action - bound,
        inf_iu2=central.value,
        condition_i=frac,
        condition_ii=cond_ii,
        condition_iii=cond_iii,
        passes=passes,
        verdict=verdict,
        centroid_rms=float(np.sqrt(np.mean(np.sum(centroid**2, axis=1)))),
    )


def _natural_size(m: np.ndarray, T: float) -> float:
    # radius at which ω² I and U balance for a configuration of unit-order shape
    pair_sum = sum(m[i] * m[j] for i in range(m.size) for j in range(i + 1, m.size))
    return (pair_sum / ((2 * np.pi / T) ** 2 * m.sum())) ** (1 / 3)


def _random_start(m, T, order, rng, problem):
    size = _natural_size(m, T)
    decay = 1.0 / np.arange(1, order + 1) ** 2
    for _ in range(100):
        c = rng.standard_normal((m.size, order, 2)) * decay[None, :, None] * size
        s = rng.standard_normal((m.size, order, 2)) * decay[None, :, None] * size
        z = np.concatenate([c.ravel(), s.ravel()])
        try:
            problem.fg(z)
        except CollisionError:
            continue
        return z
    return None


def minimize_action(
    m,
    T: float = 2 * np.pi,
    order: int = DEFAULT_ORDER,
    *,
    samples: int = DEFAULT_SAMPLES,
    tol: float = GRAD_TOL,
    max_iters: int = 5000,
    starts: int = 4,
    seed: int = 0,
    initial: Optional[FourierLoop] = None,
    central: Optional[CentralConfigResult] = None,
) -> tuple[FourierLoop, ActionReport]:
    """Minimize the action over zero-mean planar loops of the given order.

    Runs BFGS from ``initial`` (if given) and from ``starts`` random loops,
    keeping the converged loop of least action.  Steps that bring two bodies
    closer than ``0.05`` times the loop's RMS radius are rejected by the line
    search; if every start is stopped that way, a perturbed relative
    equilibrium is tried before giving up with :class:`CollisionAbort`.
    The report compares the result with the lower bound built from the
    planar minimum of IU².
    """
    m = np.asarray(MassVector(m))
    if order < 1:
        raise ValidationError("order must be at least 1")
    _check_samples(samples, order)
    if central is None:
        central = minimize_iu2(m, 2, seed=seed)
    problem = _ActionProblem(m, T, order, samples, guard=GUARD_SEPARATION)
    rng = np.random.default_rng(seed)

    x0s = []
    if initial is not None:
        if initial.order != order or not np.isclose(initial.T, T):
            raise ValidationError("initial loop must match the requested order and period")
        x0s.append(initial.as_vector())
    for _ in range(starts):
        z = _random_start(m, T, order, rng, problem)
        if z is not None:
            x0s.append(z)

    def run(z0):
        try:
            return descend(problem.fg, z0, tol=tol, max_iters=max_iters, method="bfgs")
        except CollisionError:
            return None

    results = [r for r in map(run, x0s) if r is not None and r.status != "collision"]
    if not any(r.converged for r in results):
        base = relative_equilibrium(m, central.q, T)
        embedded = trig_to_fourier(base)
        c = np.zeros((m.size, order, 2))
        s = np.zeros((m.size, order, 2))
        c[:, :1], s[:, :1] = embedded.cos, embedded.sin
        z = np.concatenate([c.ravel(), s.ravel()])
        z = z + 1e-3 * _natural_size(m, T) * rng.standard_normal(z.size)
        fallback = run(z)
        if fallback is not None and fallback.status != "collision":
            results.append(fallback)
    if not results:
        raise CollisionAbort("every start was stopped by the collision guard")
    converged = [r for r in results if r.converged]
    if not converged:
        best = min(results, key=lambda r: r.f)
        raise NoConvergence(f"no start reached gradient norm {tol:g} (best {best.grad_norm:.3e})", best=best)
    best = min(converged, key=lambda r: r.f)
    loop = FourierLoop.from_vector(m, T, order, best.x)
    report = classify_minimizer(loop, central, samples=samples)
    report.action = best.f
    report.gap = best.f - report.lower_bound
    report.iterations = best.iterations
    report.converged = True
    report.grad_norm = best.grad_norm
    logger.debug("action %.12g, bound %.12g, %s", report.action, report.lower_bound, report.verdict)
    return loop, report


def trajectory_rows(loop, samples: int = 256) -> tuple[list[str], list[list[float]]]:
    """Header and rows ``t, x_1, y_1, ..., x_N, y_N, U, I, K`` sampled over one period."""
    t = loop.sample_times(samples)
    q = loop.positions(t)
    v = loop.velocities(t)
    U = potential(loop.masses, q)
    I = moment_of_inertia(loop.masses, q)
    K = kinetic_energy(loop.masses, v)
    n, d = q.shape[1], q.shape[2]
    axes = "xyz"[:d]
    header = ["t"] + [f"{ax}_{i + 1}" for i in range(n) for ax in axes] + ["U", "I", "K"]
    rows = [[float(t[k]), *map(float, q[k].ravel()), float(U[k]), float(I[k]), float(K[k])] for k in range(samples)]
    return header, rows
