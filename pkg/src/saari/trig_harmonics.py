"""Harmonic analysis of the potential along trigonometric loops.

A trigonometric loop moves every body on ``q_i(t) = a_i cos ωt + b_i sin ωt``
with ``ω = 2π/T``.  For each pair the squared distance is a single harmonic
at twice the loop frequency,

    |q_j(t) - q_k(t)|^2 = A + B cos(2ωt + θ),

so the pair potential ``m_j m_k (A + B cos φ)^{-1/2}`` expands in powers of
``C = B/A``.  Collecting powers of ``cos φ`` gives the coefficient of
``exp(i n φ)`` as ``(-1)^n D_n`` with

    D_n = m_j m_k A^{-1/2} (1/2)_n / n! (C/2)^n Σ_l c_l C^{2l},
    c_0 = 1,  c_{l+1}/c_l = (2l + n + 1/2)(2l + n + 3/2) / (4 (l+1)(l+1+n)).

Every term is non-negative.  If the total potential is constant, the
harmonic ``n`` sum ``Σ D_n exp(i n θ)`` must vanish, and choosing ``n`` so
that all ``n θ / 2π`` sit within a quarter turn of an integer makes each real
part positive.  That forces every ``D`` and hence every ``C`` to zero: the
motion is rigid.

At ``C = 1`` (a pair that collides once per half period) the coefficients
behave like ``c_l ~ 1/l``; the series diverges logarithmically, matching the
non-integrable singularity of the pair potential.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import kronecker
from .errors import CollisionError, DegeneratePair, HypothesisViolated, SearchExhausted, SlowConvergence, ValidationError
from .mechanics import DEGENERATE_DISTANCE, MassVector, potential

__all__ = [
    "TrigLoop",
    "PairHarmonics",
    "SpectralCoefficient",
    "RigidityReport",
    "CertificateReport",
    "pair_harmonics",
    "series_term_ratio",
    "series_partial_sums",
    "fourier_coefficient_series",
    "potential_spectrum_quadrature",
    "spectrum_table",
    "rigidity_check",
    "phase_alignment",
    "constant_potential_certificate",
]

logger = logging.getLogger(__name__)

SERIES_TOL = 1e-16
MAX_TERMS = 10**6
MAX_TERMS_AT_ONE = 10**7
DEFAULT_SAMPLES = 4096
RIGIDITY_TOL = 1e-10
CONSTANCY_TOL = 1e-8


@dataclass(frozen=True)
class TrigLoop:
    """Loop ``q_i(t) = a_i cos(2πt/T) + b_i sin(2πt/T)``."""

    masses: np.ndarray
    a: np.ndarray
    b: np.ndarray
    T: float = 2 * np.pi

    def __post_init__(self):
        m = np.asarray(MassVector(self.masses))
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if b.ndim == 1:
            b = b[:, None]
        if a.shape != b.shape or a.shape[0] != m.size or a.shape[1] not in (1, 2, 3):
            raise ValidationError(f"a and b must both have shape ({m.size}, d), got {a.shape} and {b.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("loop coefficients must be finite")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValidationError(f"period must be positive, got {self.T}")
        for arr in (a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "T", float(self.T))

    @property
    def omega(self) -> float:
        return 2 * np.pi / self.T

    @property
    def dim(self) -> int:
        return self.a.shape[1]

    @property
    def n_bodies(self) -> int:
        return self.a.shape[0]

    def sample_times(self, samples: int) -> np.ndarray:
        return self.T * np.arange(samples) / samples

    def positions(self, t):
        """Positions at time(s) ``t``; shape ``(*t.shape, N, d)``."""
        s = self.omega * np.asarray(t, dtype=float)[..., None, None]
        return self.a * np.cos(s) + self.b * np.sin(s)

    def velocities(self, t):
        s = self.omega * np.asarray(t, dtype=float)[..., None, None]
        return self.omega * (self.b * np.cos(s) - self.a * np.sin(s))

    def accelerations(self, t):
        return -(self.omega**2) * self.positions(t)

    def time_shift(self, dt: float) -> "TrigLoop":
        """The same motion started ``dt`` later: ``q'(t) = q(t + dt)``."""
        c, s = np.cos(self.omega * dt), np.sin(self.omega * dt)
        return TrigLoop(self.masses, self.a * c + self.b * s, self.b * c - self.a * s, self.T)

    def to_dict(self) -> dict:
        return {
            "masses": self.masses.tolist(),
            "dim": int(self.dim),
            "T": self.T,
            "a": self.a.tolist(),
            "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TrigLoop":
        try:
            m = obj["masses"]
            a = np.asarray(obj["a"], dtype=float)
            b = np.asarray(obj["b"], dtype=float)
            dim = int(obj.get("dim", a.shape[-1]))
            return cls(m, a.reshape(len(m), dim), b.reshape(len(m), dim), float(obj.get("T", 2 * np.pi)))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"malformed trigonometric loop: {exc}") from exc


@dataclass(frozen=True)
class PairHarmonics:
    j: int
    k: int
    A: float
    B: float
    C: float
    theta: float
    theta_defined: bool
    mass_product: float

    def squared_distance(self, t, T: float):
        return self.A + self.B * np.cos(4 * np.pi * np.asarray(t) / T + self.theta)


@dataclass(frozen=True)
class SpectralCoefficient:
    n: int
    D: float
    terms_used: int
    tail_bound: float
    theta: float = 0.0

    @property
    def coefficient(self) -> complex:
        """Coefficient of ``exp(i n 4πt/T)`` contributed by the pair."""
        return (-1) ** self.n * self.D * complex(math.cos(self.n * self.theta), math.sin(self.n * self.theta))


@dataclass
class RigidityReport:
    rigid: bool
    max_C: float
    distances: Optional[dict]
    pairs: list = field(repr=False, default_factory=list)


@dataclass
class CertificateReport:
    hypothesis_ratio: float
    active_pairs: list
    n: Optional[int]
    fractional_parts: list
    D: list
    cosines: list
    real_sum: float
    terms_nonnegative: bool
    quadrature_coefficient: complex
    concluded_rigid: bool
    rigidity: RigidityReport
    consistent: bool


def pair_harmonics(loop: TrigLoop) -> list[PairHarmonics]:
    """Per-pair amplitude ``A``, modulation ``B``, ratio ``C = B/A`` and phase ``θ``.

    Raises :class:`DegeneratePair` if two bodies coincide at every time.
    """
    coeff_scale = np.sqrt(np.mean(loop.a**2 + loop.b**2))
    floor = (DEGENERATE_DISTANCE * coeff_scale) ** 2
    out = []
    m = loop.masses
    for j in range(loop.n_bodies):
        for k in range(j + 1, loop.n_bodies):
            da = loop.a[j] - loop.a[k]
            db = loop.b[j] - loop.b[k]
            aa, bb, ab = float(da @ da), float(db @ db), float(da @ db)
            A = 0.5 * (aa + bb)
            if A <= floor:
                raise DegeneratePair(f"bodies {j} and {k} coincide along the whole loop")
            P = 0.5 * (aa - bb)
            B = min(math.hypot(P, ab), A)
            C = min(B / A, 1.0)
            defined = B > RIGIDITY_TOL * 1e-3 * A
            theta = math.atan2(-ab, P) % (2 * np.pi) if defined else 0.0
            out.append(PairHarmonics(j, k, A, B, C, theta, defined, float(m[j] * m[k])))
    return out


def series_term_ratio(n: int, l: int, *, exact: bool = False):
    """Ratio ``c_{l+1}/c_l`` of consecutive series coefficients, in exact rationals."""
    if n < 0 or l < 0:
        raise ValidationError("n and l must be non-negative")
    r = Fraction(4 * l + 2 * n + 1, 2) * Fraction(4 * l + 2 * n + 3, 2) / (4 * (l + 1) * (l + 1 + n))
    return r if exact else float(r)


def _prefactor(mass_product: float, A: float, C: float, n: int) -> float:
    # (1/2)_n / n! (C/2)^n, accumulated factor by factor to stay finite for large n
    p = mass_product / math.sqrt(A)
    for i in range(n):
        p *= (0.5 + i) / (i + 1) * (C / 2)
    return p


def _ratios(n: int, l0: int, l1: int) -> np.ndarray:
    l = np.arange(l0, l1, dtype=float)
    return (2 * l + n + 0.5) * (2 * l + n + 1.5) / (4 * (l + 1) * (l + 1 + n))


def series_partial_sums(C: float, n: int, terms: int) -> np.ndarray:
    """Partial sums ``Σ_{l<L} c_l C^{2l}`` for ``L = 1..terms`` (without the prefactor)."""
    c2 = C * C
    factors = _ratios(n, 0, terms - 1) * c2
    t = np.concatenate([[1.0], np.cumprod(factors)])
    return np.cumsum(t)


def _gauss_tail(n: int, L: int, last_term: float) -> dict:
    """Gauss-test diagnostics at index ``L``: ``c_L/c_{L+1} = 1 + μ/L + O(1/L²)``."""
    inv = 1.0 / series_term_ratio(n, L, exact=True)
    mu = float((inv - 1) * L)
    exact_mu = 1.0  # leading coefficient of the 1/l expansion, independent of n
    return {
        "index": L,
        "mu_estimate": mu,
        "mu_limit": exact_mu,
        "beta_estimate": float(inv - 1 - Fraction(1, L)),
        "verdict": "divergent" if exact_mu <= 1 else "convergent",
        "tail_bound": math.inf if exact_mu <= 1 else last_term * L / (exact_mu - 1),
    }


def fourier_coefficient_series(
    ph: PairHarmonics,
    n: int,
    tol: float = SERIES_TOL,
    max_terms: Optional[int] = None,
) -> SpectralCoefficient:
    """Magnitude ``D_n`` of the pair's ``n``-th potential harmonic by summing the binomial series.

    Summation stops once the current term drops below ``tol`` times the
    partial sum.  ``tail_bound`` is a geometric bound on the neglected tail.
    Raises :class:`SlowConvergence` when the term cap is reached first;
    at ``C = 1`` that always happens and the attached tail report carries
    the Gauss-test verdict.
    """
    if n < 0:
        raise ValidationError("harmonic index must be non-negative")
    C = ph.C
    if not 0.0 <= C <= 1.0:
        raise ValidationError(f"C must lie in [0, 1], got {C}")
    if n >= 1 and C == 0.0:
        return SpectralCoefficient(n, 0.0, 0, 0.0, ph.theta)
    at_one = C >= 1.0
    cap = max_terms or (MAX_TERMS_AT_ONE if at_one else MAX_TERMS)
    pref = _prefactor(ph.mass_product, ph.A, C, n)
    c2 = C * C

    total = 0.0
    term = 1.0
    l = 0
    chunk = 256
    while l < cap:
        stop = min(l + chunk, cap)
        factors = _ratios(n, l, stop) * c2
        terms = term * np.concatenate([[1.0], np.cumprod(factors[:-1])])
        partial = total + np.cumsum(terms)
        small = np.flatnonzero(terms < tol * partial)
        if small.size:
            idx = int(small[0])
            total = float(partial[idx])
            used = l + idx + 1
            q = c2 * max(series_term_ratio(n, used), 1.0)
            nxt = float(terms[idx] * factors[idx])
            tail = nxt / (1 - q) if q < 1 else math.inf
            return SpectralCoefficient(n, pref * total, used, pref * tail, ph.theta)
        total = float(partial[-1])
        term = float(terms[-1] * factors[-1])
        l = stop
        chunk = min(chunk * 2, 1 << 20)

    tail = _gauss_tail(n, cap, term)
    logger.warning("series for n=%d, C=%.6g hit the %d-term cap (Gauss test: %s)", n, C, cap, tail["verdict"])
    raise SlowConvergence(
        f"series for n={n}, C={C:g} did not reach tol={tol:g} within {cap} terms",
        partial_sum=pref * total,
        terms_used=cap,
        tail=tail,
    )


def _check_samples(samples: int, n_max: int):
    if samples < 8 * max(n_max, 1) or samples & (samples - 1):
        raise ValidationError(f"samples must be a power of two >= 8*n_max, got {samples}")


def _mp_dft(loop: TrigLoop, bins, samples: int, dps: int) -> np.ndarray:
    """Direct DFT ``bins`` of the sampled potential in ``dps``-digit arithmetic."""
    import mpmath

    with mpmath.workdps(dps):
        cos = [mpmath.cospi(mpmath.mpf(2 * k) / samples) for k in range(samples)]
        sin = [mpmath.sinpi(mpmath.mpf(2 * k) / samples) for k in range(samples)]
        m = [mpmath.mpf(float(x)) for x in loop.masses]
        a = [[mpmath.mpf(float(x)) for x in row] for row in loop.a]
        b = [[mpmath.mpf(float(x)) for x in row] for row in loop.b]
        n_bodies = len(m)
        U = []
        for k in range(samples):
            q = [[a[i][c] * cos[k] + b[i][c] * sin[k] for c in range(loop.dim)] for i in range(n_bodies)]
            u = mpmath.mpf(0)
            for i in range(n_bodies):
                for j in range(i + 1, n_bodies):
                    r2 = mpmath.fsum((q[i][c] - q[j][c]) ** 2 for c in range(loop.dim))
                    if r2 == 0:
                        raise CollisionError(f"collision between bodies {i} and {j} at sample {k}")
                    u += m[i] * m[j] / mpmath.sqrt(r2)
            U.append(u)
        out = np.zeros(max(bins) + 1, dtype=complex)
        for h in bins:
            re = mpmath.fsum(U[k] * cos[(h * k) % samples] for k in range(samples)) / samples
            im = -mpmath.fsum(U[k] * sin[(h * k) % samples] for k in range(samples)) / samples
            out[h] = complex(float(re), float(im))
    return out


def potential_spectrum_quadrature(
    loop: TrigLoop,
    n_max: int,
    samples: int = DEFAULT_SAMPLES,
    *,
    odd: bool = False,
    dps: Optional[int] = None,
):
    """Fourier coefficients of ``U(q(t))`` at frequencies ``4πn/T`` for ``n = 0..n_max``.

    Uses the discrete Fourier transform of ``samples`` equispaced values over
    one period.  With ``odd=True`` also returns the coefficients at the odd
    multiples ``2π(2n+1)/T``, which vanish because ``U`` has period ``T/2``.

    In double precision the rounding of the samples limits every coefficient
    to an absolute accuracy of roughly ``1e-18 · U``.  Passing ``dps`` runs
    the sampling and the transform with that many decimal digits instead,
    which is needed to resolve high harmonics of weakly modulated loops.
    """
    _check_samples(samples, n_max)
    if dps is not None:
        bins = range(2 * n_max + 2) if odd else range(0, 2 * n_max + 1, 2)
        spec = _mp_dft(loop, bins, samples, dps)
    else:
        U = potential(loop.masses, loop.positions(loop.sample_times(samples)))
        spec = np.fft.fft(U) / samples
    even = spec[0 : 2 * n_max + 1 : 2]
    if odd:
        return even, spec[1 : 2 * n_max + 2 : 2]
    return even


def spectrum_table(loop: TrigLoop, n_max: int, samples: int = DEFAULT_SAMPLES) -> list[tuple]:
    """Rows ``(n, re, im, series_value, quadrature_value)`` comparing both routes.

    ``re``/``im`` are the quadrature coefficient; the last two columns are
    the magnitudes of the series-built and quadrature coefficients.
    """
    quad = potential_spectrum_quadrature(loop, n_max, samples)
    pairs = pair_harmonics(loop)
    rows = []
    for n in range(n_max + 1):
        try:
            series = sum(fourier_coefficient_series(ph, n).coefficient for ph in pairs)
            series_value = abs(series)
        except SlowConvergence:
            series_value = math.nan
        c = complex(quad[n])
        rows.append((n, c.real, c.imag, series_value, abs(c)))
    return rows


def rigidity_check(loop: TrigLoop, tol: float = RIGIDITY_TOL) -> RigidityReport:
    """Rigid iff every pair has ``B <= tol * A``; then the distances are the constants ``sqrt(A)``."""
    pairs = pair_harmonics(loop)
    max_C = max(ph.C for ph in pairs)
    rigid = all(ph.B <= tol * ph.A for ph in pairs)
    distances = {(ph.j, ph.k): math.sqrt(ph.A) for ph in pairs} if rigid else None
    return RigidityReport(rigid, max_C, distances, pairs)


def phase_alignment(thetas, k_max: int = kronecker.DEFAULT_K_MAX) -> kronecker.KroneckerHit:
    """Smallest ``n`` with every ``n θ / 2π`` within a quarter turn of an integer."""
    turns = np.asarray(thetas, dtype=float) / (2 * np.pi)
    hit = kronecker.first_hit(turns, k_max=k_max, window=kronecker.Window.QUARTER)
    if hit is None:
        raise SearchExhausted(f"no multiplier n <= {k_max} aligns all phases within a quarter turn")
    return hit


def _constancy_ratio(loop: TrigLoop, samples: int) -> float:
    U = potential(loop.masses, loop.positions(loop.sample_times(samples)))
    return float(np.std(U) / np.mean(U))


def constant_potential_certificate(
    loop: TrigLoop,
    tol: float = CONSTANCY_TOL,
    k_max: int = kronecker.DEFAULT_K_MAX,
    *,
    rigidity_tol: float = RIGIDITY_TOL,
    samples: int = 1024,
    check_hypothesis: bool = True,
) -> CertificateReport:
    """Run the rigidity argument for a loop along which the potential is constant.

    Collects the phases of the modulated pairs, finds a harmonic ``n`` that
    aligns them all within a quarter turn, evaluates every ``D_n`` by the
    series and checks that ``Re Σ D_n exp(i n θ)`` is a sum of non-negative
    terms.  Since the quadrature coefficient at ``n`` bounds that sum, each
    ``D_n`` is bounded by ``|coefficient| / cos(n θ)``; the loop is concluded
    rigid when all those bounds are below ``tol`` times the mean potential.
    The conclusion is cross-checked against :func:`rigidity_check`.

    ``check_hypothesis=False`` skips the constancy test so the procedure can
    be exercised on loops that violate it.
    """
    ratio = _constancy_ratio(loop, samples)
    if check_hypothesis and ratio >= tol:
        raise HypothesisViolated(f"potential is not constant along the loop: std/mean = {ratio:.3e}")
    rigidity = rigidity_check(loop, rigidity_tol)
    active = [ph for ph in rigidity.pairs if ph.theta_defined and ph.B > rigidity_tol * ph.A]
    if not active:
        return CertificateReport(ratio, [], None, [], [], [], 0.0, True, 0j, True, rigidity, rigidity.rigid)

    hit = phase_alignment([ph.theta for ph in active], k_max)
    n = hit.k
    fracs = [float(kronecker.fractional_part(n * ph.theta / (2 * np.pi))) for ph in active]
    coeffs = [fourier_coefficient_series(ph, n) for ph in active]
    D = [c.D for c in coeffs]
    cosines = [math.cos(n * ph.theta) for ph in active]
    real_sum = float(sum(d * c for d, c in zip(D, cosines)))
    nonneg = all(d >= 0 for d in D) and all(c > 0 for c in cosines)

    quad_samples = max(DEFAULT_SAMPLES, 1 << (8 * n - 1).bit_length())
    quad = complex(potential_spectrum_quadrature(loop, n, quad_samples)[n])
    U_mean = float(np.mean(potential(loop.masses, loop.positions(loop.sample_times(samples)))))
    bounds = [abs(quad) / c for c in cosines]
    concluded = nonneg and max(bounds) <= tol * U_mean
    return CertificateReport(
        hypothesis_ratio=ratio,
        active_pairs=[(ph.j, ph.k) for ph in active],
        n=n,
        fractional_parts=fracs,
        D=D,
        cosines=cosines,
        real_sum=real_sum,
        terms_nonnegative=nonneg,
        quadrature_coefficient=quad,
        concluded_rigid=concluded,
        rigidity=rigidity,
        consistent=concluded == rigidity.rigid,
    )
