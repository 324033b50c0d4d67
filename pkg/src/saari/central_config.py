"""Central configurations as minimizers of the scale-invariant function I·U².

The search runs in mass-weighted coordinates ``x_i = sqrt(m_i) q_i`` where
the inertia is ``|x|^2`` and the center-of-mass condition is a linear
subspace.  Each start is projected onto ``I = 1`` with zero center of mass,
descended by steepest descent with Armijo backtracking and then refined by
BFGS.  Gradient components along translations, dilations and (planar)
rotations vanish identically and are projected out.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._descent import descend
from .errors import CollisionError, NoConvergence, ValidationError
from .mechanics import (
    MassVector,
    central_config_residual,
    configuration_scale,
    moment_of_inertia,
    pairwise_distances,
    potential,
    potential_gradient,
    project_center_of_mass,
)

__all__ = [
    "CentralConfigResult",
    "objective_iu2",
    "gradient_iu2",
    "projected_gradient_iu2",
    "minimize_iu2",
    "compare_dimensions",
]

logger = logging.getLogger(__name__)

TOL_GRAD = 1e-10
TOL_CENTRAL = 1e-8
DEFAULT_STARTS = 32
MIN_START_SEPARATION = 0.05


def max_workers() -> int:
    """Worker cap for multi-start runs, read from ``NBODY_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("NBODY_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class CentralConfigResult:
    masses: np.ndarray
    q: np.ndarray
    value: float
    lam: float
    residual: float
    converged: bool
    starts_used: int
    grad_norm: float = float("nan")
    seed: int | None = None

    @classmethod
    def from_configuration(cls, m, q, *, tol_central: float = TOL_CENTRAL, normalize: bool = True):
        """Wrap a known configuration, optionally rescaled to ``I = 1`` about its center of mass."""
        m = np.asarray(MassVector(m))
        q = project_center_of_mass(m, q)
        if normalize:
            q = q / np.sqrt(moment_of_inertia(m, q))
        residual = central_config_residual(m, q)
        pg = float(np.linalg.norm(projected_gradient_iu2(m, q)))
        return cls(
            masses=m,
            q=q,
            value=float(objective_iu2(m, q)),
            lam=float(potential(m, q) / moment_of_inertia(m, q)),
            residual=residual,
            converged=residual < tol_central,
            starts_used=0,
            grad_norm=pg,
        )

    @property
    def dim(self) -> int:
        return self.q.shape[1]

    def to_dict(self) -> dict:
        return {
            "masses": self.masses.tolist(),
            "dim": int(self.dim),
            "value": self.value,
            "lambda": self.lam,
            "residual": self.residual,
            "converged": bool(self.converged),
            "grad_norm": self.grad_norm,
            "positions": self.q.tolist(),
            "starts_used": int(self.starts_used),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CentralConfigResult":
        try:
            m = np.asarray(MassVector(obj["masses"]))
            q = np.asarray(obj["positions"], dtype=float).reshape(m.size, -1)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed central configuration: {exc}") from exc
        res = cls.from_configuration(m, q, normalize=False)
        res.starts_used = int(obj.get("starts_used", 0))
        res.seed = obj.get("seed")
        return res


def objective_iu2(m, q) -> float:
    """``I(q) U(q)^2``, invariant under dilation, rotation and (at fixed center) translation."""
    U = potential(m, q)
    return moment_of_inertia(m, q) * U * U


def gradient_iu2(m, q) -> np.ndarray:
    """Exact gradient ``U² ∇I + 2 I U ∇U`` with respect to all coordinates."""
    m = np.asarray(m, dtype=float)
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    U, gU = potential_gradient(m, q, with_value=True)
    I = moment_of_inertia(m, q)
    return U * U * 2 * m[:, None] * q + 2 * I * U * gU


def _symmetry_basis(sqrt_m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of translation, dilation and rotation directions at ``x``."""
    n, d = x.shape
    cols = []
    for k in range(d):
        e = np.zeros_like(x)
        e[:, k] = sqrt_m
        cols.append(e.ravel())
    cols.append(x.ravel())
    if d == 2:
        cols.append(np.column_stack([-x[:, 1], x[:, 0]]).ravel())
    basis, _ = np.linalg.qr(np.array(cols).T)
    return basis


def projected_gradient_iu2(m, q) -> np.ndarray:
    """Gradient of IU² (in mass-weighted coordinates) with symmetry directions removed."""
    m = np.asarray(m, dtype=float)
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    sqrt_m = np.sqrt(m)
    x = sqrt_m[:, None] * q
    g = (gradient_iu2(m, q) / sqrt_m[:, None]).ravel()
    basis = _symmetry_basis(sqrt_m, x)
    return (g - basis @ (basis.T @ g)).reshape(q.shape)


def _fix_gauge(q: np.ndarray) -> np.ndarray:
    """Rotate (d = 2) or reflect (d = 1) so the first off-origin body lies on +x."""
    scale = np.sqrt(np.mean(np.sum(q * q, axis=1)))
    tiny = 1e-9 * scale
    norms = np.linalg.norm(q, axis=1)
    lead = int(np.argmax(norms > tiny))
    if q.shape[1] == 1:
        return q if q[lead, 0] >= 0 else -q
    if q.shape[1] != 2:
        return q
    angle = np.arctan2(q[lead, 1], q[lead, 0])
    c, s = np.cos(angle), np.sin(angle)
    q = q @ np.array([[c, -s], [s, c]])
    q[lead, 1] = 0.0
    rest = [k for k in range(q.shape[0]) if k != lead and abs(q[k, 1]) > tiny]
    if rest and q[rest[0], 1] < 0:
        q[:, 1] = -q[:, 1]
    return q


class _Problem:
    def __init__(self, m: np.ndarray, d: int):
        self.m = m
        self.d = d
        self.sqrt_m = np.sqrt(m)
        self.shape = (m.size, d)
        com = np.zeros((d, m.size * d))
        for k in range(d):
            e = np.zeros(self.shape)
            e[:, k] = self.sqrt_m
            com[k] = e.ravel() / np.linalg.norm(e)
        self.com = com

    def q_of(self, x):
        return x.reshape(self.shape) / self.sqrt_m[:, None]

    def fg(self, x):
        q = self.q_of(x)
        return float(objective_iu2(self.m, q)), (gradient_iu2(self.m, q) / self.sqrt_m[:, None]).ravel()

    def project(self, x, g):
        basis = _symmetry_basis(self.sqrt_m, x.reshape(self.shape))
        return g - basis @ (basis.T @ g)

    def retract(self, x):
        x = x - self.com.T @ (self.com @ x)
        return x / np.linalg.norm(x)

    def random_start(self, rng):
        floor = MIN_START_SEPARATION * np.sqrt(1.0 / self.m.sum())
        while True:
            x = self.retract(rng.standard_normal(self.m.size * self.d))
            if pairwise_distances(self.q_of(x)).min() >= floor:
                return x


def _run_start(problem: _Problem, x0, max_iters, tol_grad, tol_central):
    try:
        rough = descend(problem.fg, x0, tol=tol_grad, max_iters=min(max_iters, 500), method="gd",
                        project=problem.project, retract=problem.retract, stop_at=1e-4)
        fine = descend(problem.fg, rough.x, tol=tol_grad, max_iters=max_iters, method="bfgs",
                       project=problem.project, retract=problem.retract)
    except CollisionError:
        return None
    q = _fix_gauge(project_center_of_mass(problem.m, problem.q_of(fine.x)))
    q = q / np.sqrt(moment_of_inertia(problem.m, q))
    try:
        residual = central_config_residual(problem.m, q)
    except CollisionError:
        return None
    return {
        "q": q,
        "value": fine.f,
        "residual": residual,
        "grad_norm": fine.grad_norm,
        "converged": fine.grad_norm < tol_grad and residual < tol_central,
    }


def minimize_iu2(
    m,
    d: int = 2,
    *,
    starts: int = DEFAULT_STARTS,
    max_iters: int = 2000,
    tol_grad: float = TOL_GRAD,
    tol_central: float = TOL_CENTRAL,
    seed: int = 0,
) -> CentralConfigResult:
    """Multi-start minimization of IU² over centered, collision-free configurations in ``R^d``.

    Returns the converged start with the lowest value (ties broken by the
    central-configuration residual), normalized to ``I = 1`` with body 1 on
    the positive x-axis.  Raises :class:`NoConvergence` if no start meets
    both ``tol_grad`` and ``tol_central``.
    """
    m = np.asarray(MassVector(m))
    if d not in (1, 2):
        raise ValidationError(f"minimization supports d = 1 or 2, got {d}")
    if starts < 1:
        raise ValidationError("need at least one start")
    problem = _Problem(m, d)
    rng = np.random.default_rng(seed)
    x0s = [problem.random_start(rng) for _ in range(starts)]

    def run(x0):
        return _run_start(problem, x0, max_iters, tol_grad, tol_central)

    workers = min(max_workers(), starts)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(run, x0s))
    else:
        outcomes = [run(x0) for x0 in x0s]

    ranked = sorted(
        (o["value"], o["residual"], k) for k, o in enumerate(outcomes) if o is not None and o["converged"]
    )
    if not ranked:
        tried = [o for o in outcomes if o is not None]
        best = min(tried, key=lambda o: o["value"]) if tried else None
        raise NoConvergence(f"none of {starts} starts reached tol_grad={tol_grad:g}, tol_central={tol_central:g}",
                            best=best)
    best = outcomes[ranked[0][2]]
    logger.debug("IU2 minimum %.15g from %d/%d converged starts", best["value"], len(ranked), starts)
    q = best["q"]
    return CentralConfigResult(
        masses=m,
        q=q,
        value=float(objective_iu2(m, q)),
        lam=float(potential(m, q) / moment_of_inertia(m, q)),
        residual=best["residual"],
        converged=True,
        starts_used=starts,
        grad_norm=best["grad_norm"],
        seed=seed,
    )


def compare_dimensions(m, *, rtol: float = 1e-9, **opts) -> dict:
    """Minimize IU² on the line and in the plane and compare the two infima.

    ``relation`` is ``"less"`` when the planar infimum is strictly smaller,
    ``"equal"`` when they agree to ``rtol`` (always the case for two bodies).
    """
    inf_d1 = minimize_iu2(m, 1, **opts).value
    inf_d2 = minimize_iu2(m, 2, **opts).value
    if abs(inf_d1 - inf_d2) <= rtol * max(abs(inf_d1), abs(inf_d2)):
        relation = "equal"
    elif inf_d2 < inf_d1:
        relation = "less"
    else:
        relation = "greater"
    return {"inf_d1": inf_d1, "inf_d2": inf_d2, "relation": relation}
