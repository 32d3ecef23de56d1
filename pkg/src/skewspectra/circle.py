"""Circle maps, cocycles over the shift, perturbed compositions and rotation steering.

Angles live in ``[0, 1)`` with the metric ``d(s, t) = min(|s - t|, 1 - |s - t|)``.
Circle maps are represented by degree-one lifts ``F(x + 1) = F(x) + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import _accel
from .symbolic import (BiSequence, ConstructionError, DomainError, EmbeddingSpec,
                       embed_orbit)

Angle = float

RATIONAL_Q_MAX = 10 ** 6
RATIONAL_TOL = 1e-15


def wrap(t):
    """Canonical representative in ``[0, 1)``."""
    out = np.mod(t, 1.0)
    if np.ndim(out) == 0:
        out = float(out)
        return 0.0 if out >= 1.0 else out
    out[out >= 1.0] = 0.0
    return out


def circle_dist(s, t):
    d = np.abs(np.mod(np.asarray(s, dtype=float) - t, 1.0))
    d = np.minimum(d, 1.0 - d)
    return float(d) if d.ndim == 0 else d


# ---------------------------------------------------------------------------
# circle maps


@dataclass(frozen=True)
class CircleMap:
    """Degree-one lift with a bound on its derivative."""

    lift: Callable[[np.ndarray], np.ndarray]
    lipschitz: float
    kind: str = "general"
    alpha: float | None = None
    inverse: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    @classmethod
    def rotation(cls, alpha: float) -> "CircleMap":
        a = float(alpha)
        return cls(lambda x: np.asarray(x, dtype=float) + a, 1.0, "rigid_rotation", a,
                   lambda y: np.asarray(y, dtype=float) - a)

    @classmethod
    def identity(cls) -> "CircleMap":
        return cls.rotation(0.0)

    def __call__(self, x):
        return self.lift(x)

    @property
    def is_rotation(self) -> bool:
        return self.kind == "rigid_rotation"

    def on_circle(self, t):
        return wrap(self.lift(t))

    def inv(self, y):
        """Inverse lift; numeric (bracketed root) when no closed form was supplied."""
        if self.inverse is not None:
            return self.inverse(y)
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(ys)
        for i, v in enumerate(ys):
            lo, hi = v - 1.0, v + 1.0
            while float(self.lift(lo)) > v:
                lo -= 1.0
            while float(self.lift(hi)) < v:
                hi += 1.0
            out[i] = brentq(lambda x: float(self.lift(x)) - v, lo, hi, xtol=1e-15, rtol=1e-15)
        return out if np.ndim(y) else float(out[0])

    def then(self, other: "CircleMap") -> "CircleMap":
        """``other ∘ self``."""
        if self.is_rotation and other.is_rotation:
            return CircleMap.rotation(self.alpha + other.alpha)
        inv = None
        if self.inverse is not None and other.inverse is not None:
            inv = lambda y: self.inverse(other.inverse(y))
        return CircleMap(lambda x: other.lift(self.lift(x)), self.lipschitz * other.lipschitz,
                         "general", None, inv)


@dataclass(frozen=True)
class TrigLift(CircleMap):
    """``x + shift + sum_i amp_i sin(2 pi (freq_i x + phase_i))`` with integer frequencies."""

    shift: float = 0.0
    amps: tuple = ()
    freqs: tuple = ()
    phases: tuple = ()

    @classmethod
    def make(cls, shift: float, amps=(), freqs=(), phases=()) -> "TrigLift":
        amps = tuple(float(a) for a in amps)
        freqs = tuple(int(f) for f in freqs)
        phases = tuple(float(p) for p in phases) or (0.0,) * len(amps)
        if not (len(amps) == len(freqs) == len(phases)):
            raise DomainError("amps, freqs and phases must have equal length")
        a = np.asarray(amps)
        f = np.asarray(freqs, dtype=float)
        p = np.asarray(phases)

        def lift(x):
            x = np.asarray(x, dtype=float)
            if a.size == 0:
                return x + shift
            return x + shift + np.sin(2 * np.pi * (np.multiply.outer(x, f) + p)) @ a

        lip = 1.0 + 2 * np.pi * float(np.abs(a * f).sum())
        return cls(lift, lip, "general" if a.size else "rigid_rotation",
                   None if a.size else float(shift), None, float(shift), amps, freqs, phases)

    @property
    def is_diffeomorphism(self) -> bool:
        return 2 * np.pi * sum(abs(a * f) for a, f in zip(self.amps, self.freqs)) < 1.0


def pack_trig(maps: Sequence[TrigLift]):
    """Arrays ``(shift, amp, freq, phase)`` for the composition kernel."""
    m = max([len(t.amps) for t in maps] + [1])
    n = len(maps)
    shift = np.array([t.shift for t in maps], dtype=float)
    amp = np.zeros((n, m))
    freq = np.zeros((n, m))
    phase = np.zeros((n, m))
    for j, t in enumerate(maps):
        k = len(t.amps)
        amp[j, :k] = t.amps
        freq[j, :k] = t.freqs
        phase[j, :k] = t.phases
    return shift, amp, freq, phase


def compose_lifts(maps: Sequence[CircleMap], x) -> np.ndarray:
    """``maps[-1] ∘ ... ∘ maps[0]`` applied to ``x`` (kernel path for trig lifts)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if maps and all(isinstance(m, TrigLift) for m in maps):
        return _accel.compose_trig(x, *pack_trig(maps))
    for m in maps:
        x = np.asarray(m.lift(x), dtype=float)
    return x


# ---------------------------------------------------------------------------
# cocycles


@dataclass(frozen=True)
class Cocycle:
    """``x -> R_x``; ``assignment`` receives the embedded coordinates ``(x_s, x_u)``."""

    assignment: Callable[[float, float], CircleMap] | None = None
    constant_rotation: float | None = None
    name: str = ""

    def __post_init__(self):
        if self.assignment is None and self.constant_rotation is None:
            raise DomainError("cocycle needs an assignment or a constant rotation")

    @classmethod
    def rotation(cls, alpha: float) -> "Cocycle":
        return cls(None, float(alpha), f"rot({alpha!r})")

    @property
    def is_rotation(self) -> bool:
        return self.constant_rotation is not None

    def map_at(self, x_s: float, x_u: float) -> CircleMap:
        if self.is_rotation:
            return CircleMap.rotation(self.constant_rotation)
        return self.assignment(x_s, x_u)


def compose_along_orbit(c: Cocycle, s: BiSequence, n: int, t: Angle,
                        spec: EmbeddingSpec | None = None, depth: int | None = None) -> Angle:
    """Fiber coordinate after ``n`` steps from ``(s, t)``; negative ``n`` runs backwards."""
    if c.is_rotation:
        return wrap(t + n * c.constant_rotation)
    if spec is None:
        raise DomainError("a non-constant cocycle needs the embedding to locate orbit points")
    if n == 0:
        return wrap(t)
    if n > 0:
        xs, xu = embed_orbit(s, spec, 0, n, depth)
        y = float(t)
        for k in range(n):
            y = float(c.map_at(xs[k], xu[k]).lift(y))
        return wrap(y)
    xs, xu = embed_orbit(s, spec, n, 0, depth)
    y = float(t)
    for k in range(-n - 1, -1, -1):
        y = float(c.map_at(xs[k], xu[k]).inv(y))
    return wrap(y)


def cocycle_maps(c: Cocycle, s: BiSequence, n: int, spec: EmbeddingSpec,
                 depth: int | None = None) -> list[CircleMap]:
    """``[R_{x}, R_{phi x}, ..., R_{phi^{n-1} x}]``."""
    if c.is_rotation:
        return [CircleMap.rotation(c.constant_rotation)] * n
    xs, xu = embed_orbit(s, spec, 0, n, depth)
    return [c.map_at(xs[k], xu[k]) for k in range(n)]


# ---------------------------------------------------------------------------
# perturbed compositions


@dataclass
class Decomposition:
    maps: list
    perturbed: list
    C: float
    r_max: np.ndarray
    term_bounds: np.ndarray
    total_bound: float

    def G(self, x) -> np.ndarray:
        return compose_lifts(self.maps, x)

    def G_tilde(self, x) -> np.ndarray:
        return compose_lifts(self.perturbed, x)

    def hybrids(self, x) -> np.ndarray:
        """Rows ``H_0 = G, H_1, ..., H_n = G~`` evaluated at ``x``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = len(self.maps)
        out = np.empty((n + 1, x.size))
        for k in range(n + 1):
            out[k] = compose_lifts(self.maps[k:], compose_lifts(self.perturbed[:k], x))
        return out

    def terms(self, x) -> np.ndarray:
        """Telescoping terms ``H_k - H_{k-1}``; they sum to ``G~ - G``."""
        return np.diff(self.hybrids(x), axis=0)


def _same_map(a: CircleMap, b: CircleMap) -> bool:
    if a is b:
        return True
    if isinstance(a, TrigLift) and isinstance(b, TrigLift):
        return (a.shift, a.amps, a.freqs, a.phases) == (b.shift, b.amps, b.freqs, b.phases)
    return a.is_rotation and b.is_rotation and a.alpha == b.alpha


def perturbed_composition_decompose(maps: Sequence[CircleMap], perturbed: Sequence[CircleMap],
                                    grid: int = 4096) -> Decomposition:
    """Compare ``G_n = R_n ∘ ... ∘ R_1`` with ``G~_n = R~_n ∘ ... ∘ R~_1``.

    Writing ``H_k = R_n ∘ ... ∘ R_{k+1} ∘ R~_k ∘ ... ∘ R~_1`` gives
    ``G~_n - G_n = sum_k (H_k - H_{k-1})`` and each term is bounded by
    ``C**(n-k) * max|r_k|`` with ``r_k = R~_k - R_k`` and ``C`` the largest
    derivative bound of the unperturbed maps.  ``max|r_k|`` is a grid maximum
    plus a Lipschitz slack, so it is an upper bound.
    """
    maps, perturbed = list(maps), list(perturbed)
    n = len(maps)
    if n != len(perturbed):
        raise DomainError("both families need the same length")
    xg = (np.arange(grid) + 0.5) / grid
    r_max = np.zeros(n)
    for k, (R, Rt) in enumerate(zip(maps, perturbed)):
        if _same_map(R, Rt):
            continue
        if isinstance(R, TrigLift) and isinstance(Rt, TrigLift):
            r = compose_lifts([Rt], xg) - compose_lifts([R], xg)
            r1 = r      # integer frequencies: periodic by construction
        else:
            r = np.asarray(Rt(xg), dtype=float) - np.asarray(R(xg), dtype=float)
            r1 = np.asarray(Rt(xg + 1.0), dtype=float) - np.asarray(R(xg + 1.0), dtype=float)
        if not (np.all(np.isfinite(r)) and np.allclose(r, r1, atol=1e-9)):
            raise DomainError(f"perturbation r_{k + 1} is not a bounded periodic function")
        if R.is_rotation and Rt.is_rotation:
            r_max[k] = abs(Rt.alpha - R.alpha)
        else:
            r_max[k] = np.abs(r).max() + (R.lipschitz + Rt.lipschitz) * 0.5 / grid
    C = max([m.lipschitz for m in maps] + [1.0])
    term_bounds = C ** np.arange(n - 1, -1, -1, dtype=float) * r_max
    return Decomposition(maps, perturbed, C, r_max, term_bounds, float(term_bounds.sum()))


# ---------------------------------------------------------------------------
# rotation steering


def convergents(x: float, q_max: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents ``p/q`` of the exact binary value of ``x`` with ``q <= q_max``."""
    fr = Fraction(x)
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    while True:
        a = fr.numerator // fr.denominator
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        if q1 > q_max:
            break
        out.append((p1, q1))
        rem = fr - a
        if rem == 0:
            break
        fr = 1 / rem
    return out


def is_probably_irrational(alpha: float, q_max: int = RATIONAL_Q_MAX, tol: float = RATIONAL_TOL) -> bool:
    """Heuristic: no convergent ``p/q`` with ``q <= q_max`` is within ``tol`` of ``alpha``.

    Every double is rational, so this only rules out rotation numbers that are
    numerically indistinguishable from a fraction with a small denominator.
    """
    fa = Fraction(alpha)
    return all(abs(fa - Fraction(p, q)) >= tol for p, q in convergents(alpha, q_max))


def steer_distance(alpha: float, k: int, r: int, t1: float, t2: float, N: int,
                   psi: CircleMap | None = None) -> float:
    """``d(psi(t1 + (N k + r) alpha), t2)``, evaluated exactly as the search does."""
    ph = t1 + float(N * k + r) * alpha
    u = ph - math.floor(ph)
    if psi is not None:
        u = float(psi.on_circle(u))
    return circle_dist(u, t2)


def steer_rotation(alpha: float, k: int, r: int, t1: Angle, t2: Angle, eps: float,
                   n_min: int = 0, psi: CircleMap | None = None, budget: int = 10 ** 8) -> int:
    """Smallest ``N >= n_min`` with ``d(psi(t1 + (N k + r) alpha), t2) < eps``.

    The target is pulled back through ``psi`` (``u* = psi^{-1}(t2)``, tolerance
    ``eps / Lip(psi)``).  A convergent denominator ``q`` of ``k alpha`` with
    ``1/q`` below that tolerance guarantees a hit in every run of ``q``
    consecutive ``N``, so windows of length ``q`` are scanned in order and
    each candidate is re-verified by direct evaluation.
    """
    if eps <= 0:
        raise DomainError("eps must be positive")
    if n_min < 0:
        raise DomainError("n_min must be >= 0")
    if k == 0:
        raise DomainError("k must be nonzero")
    if eps > 0.5 and psi is None:
        return int(n_min)
    if not is_probably_irrational(alpha):
        raise DomainError("rational rotation number: steering may be impossible")
    if psi is None or (psi.is_rotation and psi.alpha == 0.0):
        target, eps_u = float(t2), float(eps)
        psi_eff = None
    else:
        target = wrap(float(psi.inv(float(t2))))
        eps_u = eps / max(psi.lipschitz, 1.0)
        psi_eff = psi
    beta = math.fmod(k * alpha, 1.0)
    qs = [q for _, q in convergents(beta % 1.0, 10 ** 12)]
    q = next((q for q in qs if 1.0 / q < 0.5 * eps_u), None)
    window = max(q or 0, 1024)
    best = (math.inf, -1)
    n = int(n_min)
    scanned = 0
    while scanned < budget:
        count = min(window, budget - scanned)
        found, bn, bd = _accel.steer_scan(float(alpha), int(k), int(r), float(t1), target,
                                          float(eps_u), n, count)
        if bd < best[0]:
            best = (bd, bn)
        if found >= 0:
            if steer_distance(alpha, k, r, t1, t2, found, psi_eff) < eps:
                return int(found)
            # borderline after the psi push-forward; resume right after it
            count = found - n + 1
        n += count
        scanned += count
    raise ConstructionError(
        f"steering budget exceeded after {scanned} steps; best distance {best[0]:.3e} at N={best[1]}")


def steer_conjugated(g: CircleMap, rho: float, k: int, r: int, t1: Angle, t2: Angle, eps: float,
                     n_min: int = 0, psi: CircleMap | None = None, budget: int = 10 ** 8) -> int:
    """Steering for a cocycle ``R = g^{-1} ∘ rot_rho ∘ g``.

    ``R^m(t) = g^{-1}(g(t) + m rho)``, so the search runs on the rigid rotation
    from ``g(t1)`` with the observation map ``psi ∘ g^{-1}``.  The caller
    asserts that ``g`` is a smooth conjugacy; it is never computed here.
    """
    ginv = CircleMap(g.inv, _inverse_lipschitz(g), "general", None, g.lift)
    obs = ginv if psi is None else ginv.then(psi)
    return steer_rotation(rho, k, r, float(g.on_circle(t1)), t2, eps, n_min, obs, budget)


def _inverse_lipschitz(g: CircleMap, grid: int = 4096) -> float:
    x = np.arange(grid + 1) / grid
    slope = np.diff(np.asarray(g.lift(x), dtype=float)) * grid
    if slope.min() <= 0:
        raise DomainError("conjugacy must be strictly increasing")
    return float(1.0 / slope.min()) * 1.01


# ---------------------------------------------------------------------------
# equidistribution


def rotation_orbit(t: float, alpha: float, n: int) -> np.ndarray:
    return wrap(t + np.arange(n) * alpha)


def discrepancy(points) -> float:
    """Star discrepancy of a finite point set in ``[0, 1)``."""
    x = np.sort(np.asarray(points, dtype=float))
    n = x.size
    if n == 0:
        raise DomainError("empty point set")
    i = np.arange(1, n + 1)
    return float(max((i / n - x).max(), (x - (i - 1) / n).max()))
