"""Witness records separating skew spectra from base spectra, and the F_fg sublevel structure.

``F_{f+g} = f + a (g - min g)`` with a small ``a`` has a Markov value that
is a base Markov value but not a base value shifted by ``beta``;
``F_fg = (f - c)(g - min g)`` has Lagrange values ``>= 0`` everywhere and an
interval just above 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .circle import Cocycle, steer_rotation
from .classical import periodic_words
from .dimension import hd_sft, sub_sft_for_threshold
from .intervals import IntervalCertificate, construct_interval_periodic_case
from .observables import FiberPoly, LinearSurface, product_fg, sum_fg, surface_observable
from .skew import SkewSystem, markov_value_skew, markov_value_surface, validate_membership_R
from .symbolic import (BiSequence, ConstructionError, DomainError, EmbeddingSpec, Word, as_word,
                       embed_orbit, is_admissible, minimal_period, shift)


# ---------------------------------------------------------------------------
# m_skew versus M_f + beta


@dataclass
class SeparationWitness:
    z: str
    i0: int
    beta: float
    alpha_fg: float
    t_bar: float
    m_skew: float
    m_surface: float
    f_at_i0: float
    horizon: int
    horizon_error: float
    agree: bool
    separation: float
    nearest_periodic: list
    margin: float
    separated: bool
    n_periodic: int

    def to_dict(self) -> dict:
        return asdict(self)


def heteroclinic_point(a: int = 2, b: int = 2) -> BiSequence:
    """``0^inf 1^a ; 1^b 0^inf`` in the full 2-shift."""
    return BiSequence(left=(0,), core=(1,) * (a + b), right=(0,), offset=a)


def _surface_orbit(f: LinearSurface, s: BiSequence, spec: EmbeddingSpec, lo: int, hi: int):
    xs, xu = embed_orbit(s, spec, lo, hi, spec.default_depth())
    return np.asarray(f(xs, xu), dtype=float)


def _periodic_markov_surface(f: LinearSurface, sft, spec: EmbeddingSpec, max_period: int):
    """``{max_i f(sigma^i w^inf)}`` over admissible cycles of period ``<= max_period``."""
    seen: dict[Word, float] = {}
    for w in periodic_words(range(sft.size), max_period):
        w = minimal_period(w)
        if w in seen or not is_admissible(w + w, sft):
            continue
        seen[w] = float(_surface_orbit(f, BiSequence.periodic(w), spec, 0, len(w)).max())
    return seen


def spectra_difference_witness(sft, spec: EmbeddingSpec, f: LinearSurface, g: FiberPoly,
                               alpha: float, horizon: int = 1000, z: BiSequence | None = None,
                               beta_fraction: float = 0.5, max_period: int = 10) -> SeparationWitness:
    """Markov value of ``F_{f+g}`` at ``(sigma^{i0} z, t_bar)`` and its distance to ``M_f + beta``.

    ``i0`` is the unique maximizer of ``f`` along the orbit of ``z``
    (tails included) and ``beta = beta_fraction * gap``.  With
    ``g(t_bar) = min g`` the skew Markov value equals ``f(sigma^{i0} z)``.
    """
    if not 0.0 <= beta_fraction < 1.0:
        raise DomainError("beta_fraction must lie in [0, 1)")
    if g.is_constant:
        raise DomainError("g must be non-constant")
    z = heteroclinic_point() if z is None else z
    if not z.is_structural:
        raise DomainError("z must have periodic tails")
    vals = _surface_orbit(f, z, spec, -horizon, horizon + 1)
    tails = [float(_surface_orbit(f, BiSequence.periodic(q), spec, 0, len(q)).max())
             for q in (z.left, z.right)]
    k = int(np.argmax(vals))
    top = float(vals[k])
    rest = max(float(np.max(np.delete(vals, k))), *tails)
    gap = top - rest
    if gap <= 0:
        raise DomainError("beta interval is empty: f does not separate the orbit of z")
    i0 = k - horizon
    beta = beta_fraction * gap
    span = g.max - g.min
    alpha_fg = beta / span
    F = sum_fg(f, g, alpha_fg)
    sys = SkewSystem(sft, spec, Cocycle.rotation(alpha), F)
    t_bar = g.argmin
    zi = shift(z, i0)
    ms = markov_value_skew(sys, zi, t_bar, horizon=horizon)
    mf = markov_value_surface(f, f.lipschitz, z, spec, horizon=horizon)
    err = ms.error_bound + mf.error_bound
    periodic = _periodic_markov_surface(f, sft, spec, max_period)
    words = list(periodic)
    d = np.abs(np.asarray([periodic[w] for w in words]) + beta - ms.value)
    i = int(np.argmin(d))
    margin = 10.0 * err
    return SeparationWitness(
        z.notation(), i0, beta, alpha_fg, t_bar, ms.value, mf.value, top, horizon, float(err),
        bool(abs(ms.value - mf.value) <= err), float(d[i]), list(words[i]), float(margin),
        bool(d[i] > margin), len(words))


# ---------------------------------------------------------------------------
# l >= 0 for F_fg


@dataclass
class EllSample:
    word: list
    t: float
    limsup_estimate: float
    ell_exact: float
    steered: list = field(default_factory=list)


@dataclass
class EllProfile:
    samples: list
    min_estimate: float
    ok: bool
    tol: float


def random_cycle(sft, rng: np.random.Generator, min_len: int = 4, max_len: int = 12) -> Word:
    """Random-walk cycle of the shift with length in ``[min_len, max_len]``."""
    for _ in range(1000):
        n = int(rng.integers(min_len, max_len + 1))
        w = [int(rng.integers(sft.size))]
        while len(w) < n:
            nxt = sft.successors(tuple(w))
            if not nxt:
                break
            w.append(int(rng.choice(nxt)))
        w = tuple(w)
        if len(w) == n and is_admissible(w + w, sft):
            return w
    raise ConstructionError("no random cycle found")


def ell_nonnegative_profile(sys: SkewSystem, c: float, f: LinearSurface, g: FiberPoly,
                            samples: int = 100, horizon: int = 1000, seed: int = 0,
                            n_steer: int = 10, tol: float = 1e-6,
                            points: Sequence[tuple] | None = None) -> EllProfile:
    """Finite-horizon limsup of ``F_fg`` along steered times for random periodic points.

    For each point ``(w^inf, t)`` the fiber angle is steered to the minimizer
    of ``g`` at times ``n_k > horizon`` with shrinking tolerances, where the
    factor ``g - min g`` tends to 0.  When some cycle point has ``f > c``
    the angle is also steered to the maximizer of ``g`` there.  The
    estimate is the largest value seen at the steered times; the exact
    Lagrange value ``max(0, span * max (f - c))`` is reported alongside.
    """
    alpha = sys.alpha
    if alpha is None or not sys.irrational_rotation:
        raise DomainError("a constant irrational rotation is required")
    rng = np.random.default_rng(seed)
    if points is None:
        points = [(random_cycle(sys.sft, rng), float(rng.random())) for _ in range(samples)]
    span = g.max - g.min
    out = []
    for w, t in points:
        w = as_word(w)
        k = len(w)
        xs, xu = embed_orbit(BiSequence.periodic(w), sys.spec, 0, k, sys.depth)
        fv = np.asarray(f(xs, xu), dtype=float) - c
        vals = []
        n_min = horizon
        for i in range(n_steer):
            eps = 1e-2 * 0.5 ** i
            r = i % k
            N = steer_rotation(alpha, k, r, t, g.argmin, eps, n_min=n_min // k + 1)
            n = N * k + r
            vals.append(float(sys.F.func(xs[r], xu[r], t + n * alpha)))
            n_min = n
        top = int(np.argmax(fv))
        if fv[top] > 0:
            N = steer_rotation(alpha, k, top, t, g.argmax, 1e-4, n_min=horizon // k + 1)
            n = N * k + top
            vals.append(float(sys.F.func(xs[top], xu[top], t + n * alpha)))
        est = max(vals[n_steer // 2:])
        out.append(EllSample(list(w), float(t), est, max(0.0, float(fv.max()) * span), vals))
    m = min(s.limsup_estimate for s in out) if out else 0.0
    return EllProfile(out, float(m), bool(m >= -tol), tol)


# ---------------------------------------------------------------------------
# sublevel classification for F_fg


@dataclass
class SublevelClass:
    s: float
    label: str
    dimension: int
    certificate: IntervalCertificate | None = None
    info: dict = field(default_factory=dict)


def fg_inner_system(sys: SkewSystem, f: LinearSurface, g: FiberPoly, c: float, s: float,
                    windows: Sequence[int] = (8, 10, 12, 14)) -> tuple[SkewSystem, object]:
    """Sub-system on which ``f <= c + s / (2 span)`` and ``F_fg`` has an R-type maximum above 0."""
    span = g.max - g.min
    surf = sys.with_F(surface_observable(f))
    level = c + s / (2.0 * span)
    for w in windows:
        sub = sub_sft_for_threshold(surf, level, w, "inner")
        if sub.empty or not sub.is_transitive():
            continue
        inner = SkewSystem(sub, sys.spec, sys.cocycle, product_fg(f, g, c), sys.depth)
        rep = validate_membership_R(inner, depth=6)
        if rep.member_R and rep.value > 0:
            return inner, rep
    raise ConstructionError(f"no inner sub-shift below {level:.6g} with a positive R-type maximum")


def classify_fg_sublevel(sys: SkewSystem, f: LinearSurface, g: FiberPoly, c: float, s: float,
                         reps: int = 8, **kw) -> SublevelClass:
    """``L(s)``: 0 (no Lagrange value below ``s``) for ``s <= 0``, 1 with a certificate for ``s > 0``.

    For ``s > 0`` the maximum of ``F_fg`` over an inner sub-shift is a
    periodic point ``X^inf``; the interval is built with ``Q`` a fixed
    point of the sub-shift with ``f <= c`` and ``H = X^reps``.
    """
    if s <= 0:
        return SublevelClass(s, "empty", 0, None, {"reason": "every Lagrange value is >= 0"})
    inner, rep = fg_inner_system(sys, f, g, c, s)
    period = _report_period(rep)
    if period is None:
        raise ConstructionError("maximum of the inner sub-system is not periodic")
    X = rep.word[rep.center:rep.center + period]
    Q = _low_cycle(inner, f, c)
    H = X * reps
    cert = construct_interval_periodic_case(inner, Q, H, period * (reps // 2), report=rep, **kw)
    if cert.interval[1] >= s:
        raise ConstructionError("certificate interval reaches the level s")
    sub = inner.sft
    info = {"window": sub.window, "blocks": len(sub.blocks),
            "inner_dimension": hd_sft(sub, inner.spec).value, "X": list(X), "Q": list(Q),
            "max_value": rep.value}
    return SublevelClass(s, "interval", 1, cert, info)


def _report_period(rep, max_period: int = 16) -> int | None:
    """Smallest period of the argmax word near its centre (the ends are greedy padding)."""
    w, c = rep.word, rep.center
    lo, hi = c - 2 * max_period, c + 2 * max_period
    if lo < 0 or hi > len(w):
        return None
    for p in range(1, max_period + 1):
        if all(w[i] == w[i + p] for i in range(lo, hi - p)):
            return p
    return None


def _low_cycle(inner: SkewSystem, f: LinearSurface, c: float) -> Word:
    sub = inner.sft
    for p in range(1, 5):
        for w in periodic_words(range(sub.size), p, p):
            if minimal_period(w) != tuple(w) or not sub.is_admissible(w * (sub.window // p + 2)):
                continue
            xs, xu = embed_orbit(BiSequence.periodic(w), inner.spec, 0, p, inner.depth)
            if np.all(f(xs, xu) <= c):
                return tuple(w)
    raise ConstructionError("no short cycle with f <= c in the inner sub-shift")
