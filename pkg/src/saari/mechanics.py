"""Point-mass mechanics: potential, inertia, energies and equilibrium residuals.

All functions accept either the :class:`MassVector` / :class:`Configuration`
wrappers or plain array-likes.  Positions are ``(N, d)`` arrays; a flat
length-``N`` array is read as a collinear (``d = 1``) configuration.

Internally the pair sums are vectorized over any leading batch axes, so the
same kernels evaluate a whole sampled trajectory of shape ``(S, N, d)`` at
once.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CollisionError, ValidationError

__all__ = [
    "MassVector",
    "Configuration",
    "MechanicalSnapshot",
    "DEGENERATE_DISTANCE",
    "potential",
    "potential_gradient",
    "moment_of_inertia",
    "kinetic_energy",
    "total_energy",
    "lagrangian",
    "newton_residual",
    "central_config_residual",
    "project_center_of_mass",
    "configuration_scale",
    "pairwise_distances",
    "dump_configuration",
    "load_configuration",
]

# relative to configuration_scale
DEGENERATE_DISTANCE = 1e-12
TOL_COM = 1e-10


@dataclass(frozen=True)
class MassVector:
    """Positive masses of ``N >= 2`` bodies."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(-1)
        if m.size < 2:
            raise ValidationError(f"need at least two bodies, got {m.size}")
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise ValidationError(f"masses must be finite and positive, got {m.tolist()}")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.m, dtype=dtype)

    def __len__(self):
        return self.m.size

    @property
    def total(self) -> float:
        return float(self.m.sum())


@dataclass(frozen=True)
class Configuration:
    """Positions of ``N`` bodies in ``R^d`` with ``d`` in {1, 2, 3}."""

    q: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        q = _positions(self.q)
        if q.shape[1] not in (1, 2, 3):
            raise ValidationError(f"dimension must be 1, 2 or 3, got {q.shape[1]}")
        if not np.all(np.isfinite(q)):
            raise ValidationError("positions must be finite")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "dim", q.shape[1])

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.q, dtype=dtype)

    def __len__(self):
        return self.q.shape[0]

    def is_collision_free(self) -> bool:
        if len(self) < 2:
            return True
        return bool(pairwise_distances(self.q).min() > 0)

    def is_centered(self, masses, tol_com: float = TOL_COM) -> bool:
        """Whether the center of mass sits at the origin, relative to ``Σm · scale``."""
        m = _masses(masses)
        com = m @ self.q
        return bool(np.linalg.norm(com) <= tol_com * m.sum() * configuration_scale(m, self.q))


@dataclass(frozen=True)
class MechanicalSnapshot:
    U: float
    I: float
    K: float
    L: float
    lam: float

    @property
    def E(self) -> float:
        """Total energy ``K - U``."""
        return self.K - self.U


def _masses(m) -> np.ndarray:
    return np.asarray(m, dtype=float).reshape(-1)


def _positions(q) -> np.ndarray:
    q = np.array(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if q.ndim != 2:
        raise ValidationError(f"positions must have shape (N, d), got {q.shape}")
    return q


@lru_cache(maxsize=32)
def _pairs(n: int):
    i, j = np.triu_indices(n, 1)
    incidence = np.zeros((i.size, n))
    incidence[np.arange(i.size), i] = 1.0
    incidence[np.arange(i.size), j] = -1.0
    i.setflags(write=False)
    j.setflags(write=False)
    incidence.setflags(write=False)
    return i, j, incidence


def pairwise_distances(q) -> np.ndarray:
    """Distances ``|q_j - q_i|`` for ``i < j`` in ``np.triu_indices`` order."""
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    i, j, _ = _pairs(q.shape[-2])
    return np.linalg.norm(q[..., j, :] - q[..., i, :], axis=-1)


def configuration_scale(m, q) -> np.ndarray | float:
    """``sqrt(I(q) / Σm)``, the RMS distance from the origin."""
    m = _masses(m)
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    return np.sqrt(np.einsum("n,...nd,...nd->...", m, q, q) / m.sum())


def _checked_pairs(m, q):
    """Pair differences, distances and mass products; raises on degenerate pairs."""
    m = _masses(m)
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    if q.shape[-2] != m.size:
        raise ValidationError(f"{m.size} masses but {q.shape[-2]} positions")
    i, j, incidence = _pairs(m.size)
    diff = q[..., j, :] - q[..., i, :]
    r = np.linalg.norm(diff, axis=-1)
    floor = DEGENERATE_DISTANCE * configuration_scale(m, q)
    bad = r <= np.asarray(floor)[..., None]
    if np.any(bad):
        raise CollisionError(f"collision: minimum pairwise distance {r.min():.3e}")
    return diff, r, m[i] * m[j], incidence


def potential(m, q) -> float | np.ndarray:
    """Newtonian force function ``U = Σ_{i<j} m_i m_j / |q_i - q_j|``."""
    _, r, mm, _ = _checked_pairs(m, q)
    return (mm / r).sum(axis=-1)


def potential_gradient(m, q, *, with_value: bool = False):
    """Gradient of ``U`` with respect to every position (same shape as ``q``)."""
    diff, r, mm, incidence = _checked_pairs(m, q)
    w = (mm / r**3)[..., None] * diff
    grad = np.einsum("pn,...pd->...nd", incidence, w)
    if with_value:
        return (mm / r).sum(axis=-1), grad
    return grad


def moment_of_inertia(m, q) -> float | np.ndarray:
    """``I = Σ m_j |q_j|^2`` about the origin."""
    m = _masses(m)
    q = np.asarray(q, dtype=float)
    if q.ndim == 1:
        q = q[:, None]
    return np.einsum("n,...nd,...nd->...", m, q, q)


def kinetic_energy(m, v) -> float | np.ndarray:
    return 0.5 * moment_of_inertia(m, v)


def total_energy(m, q, v) -> float:
    return float(kinetic_energy(m, v) - potential(m, q))


def lagrangian(m, q, v) -> MechanicalSnapshot:
    U = float(potential(m, q))
    I = float(moment_of_inertia(m, q))
    K = float(kinetic_energy(m, v))
    lam = U / I if I > 0 else float("inf")
    return MechanicalSnapshot(U=U, I=I, K=K, L=K + U, lam=lam)


def newton_residual(m, q, accel) -> float:
    """``max_i |m_i a_i - ∂U/∂q_i|``; zero exactly when ``accel`` solves Newton's equations."""
    m = _masses(m)
    grad = potential_gradient(m, q)
    a = _positions(accel)
    return float(np.linalg.norm(m[:, None] * a - grad, axis=-1).max())


def central_config_residual(m, q) -> float:
    """Normalized defect of the central-configuration equations.

    Returns ``max_k |F_k + λ m_k q_k| / (λ m_k scale(q))`` where ``F_k`` is the
    attraction on body ``k`` and ``λ = U/I``.
    """
    m = _masses(m)
    q = _positions(q)
    U, grad = potential_gradient(m, q, with_value=True)
    lam = U / moment_of_inertia(m, q)
    defect = np.linalg.norm(grad + lam * m[:, None] * q, axis=-1)
    return float((defect / (lam * m * configuration_scale(m, q))).max())


def project_center_of_mass(m, q) -> np.ndarray:
    """Translate ``q`` so that ``Σ m_i q_i = 0``."""
    m = _masses(m)
    q = _positions(q)
    return q - (m @ q) / m.sum()


def dump_configuration(m, q) -> dict:
    q = _positions(q)
    return {
        "masses": _masses(m).tolist(),
        "dim": int(q.shape[1]),
        "positions": q.tolist(),
    }


def load_configuration(obj: dict) -> tuple[MassVector, Configuration]:
    try:
        masses = MassVector(obj["masses"])
        q = np.asarray(obj["positions"], dtype=float)
        dim = int(obj.get("dim", q.shape[-1] if q.ndim == 2 else 1))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed configuration: {exc}") from exc
    config = Configuration(q.reshape(len(masses), dim))
    return masses, config
