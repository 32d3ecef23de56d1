"""Skew products ``Phi(x, t) = (sigma x, R_x(t))`` with an observable, and their Markov/Lagrange values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .circle import Cocycle, compose_along_orbit, is_probably_irrational, wrap
from .classical import SpectrumSample
from .observables import ObservableF, f_F, fiber_max
from .symbolic import (BiSequence, DomainError, EmbeddingSpec, Word, admissible_words, as_word,
                       cylinder_boxes, embed, embed_orbit)

EPS = np.finfo(float).eps
DERIV_TOL = 1e-6
DTT_TOL = -1e-6


@dataclass(frozen=True)
class SkewSystem:
    sft: object
    spec: EmbeddingSpec
    cocycle: Cocycle
    F: ObservableF
    depth: int | None = None

    def __post_init__(self):
        if self.sft.size != self.spec.size:
            raise DomainError("alphabet size differs between the shift and the embedding")
        if self.depth is None:
            object.__setattr__(self, "depth", self.spec.default_depth())

    @property
    def alpha(self) -> float | None:
        return self.cocycle.constant_rotation

    @property
    def irrational_rotation(self) -> bool:
        return self.alpha is not None and is_probably_irrational(self.alpha)

    def with_F(self, F: ObservableF) -> "SkewSystem":
        return replace(self, F=F)

    def with_sft(self, sft) -> "SkewSystem":
        return replace(self, sft=sft)

    def tail_radius(self, m: int) -> float:
        """Per-axis distance between points agreeing on ``m`` symbols on that side."""
        r = self.spec.ratio
        return self.spec.max_digit * r ** (m + 1) / (1 - r)

    def embed_error(self) -> float:
        """Effect of truncating the embedding at ``depth`` digits on ``F``."""
        return self.F.lipschitz * math.sqrt(2.0) * self.tail_radius(self.depth)

    def fiber_value(self, s: BiSequence) -> float:
        p = embed(s, self.spec, self.depth)
        return float(f_F(self.F, p.x_s, p.x_u)[0])


def float_floor(v: float) -> float:
    return 8 * EPS * (abs(v) + 1.0)


def orbit_angles(sys: SkewSystem, s: BiSequence, t: float, n_lo: int, n_hi: int) -> np.ndarray:
    """Fiber coordinates at positions ``n_lo..n_hi-1`` starting from angle ``t`` at position 0."""
    ns = np.arange(n_lo, n_hi)
    if sys.alpha is not None:
        return wrap(t + ns.astype(float) * sys.alpha)
    out = np.empty(ns.size)
    for i, n in enumerate(ns):
        out[i] = compose_along_orbit(sys.cocycle, s, int(n), t, sys.spec, sys.depth)
    return out


def orbit_values(sys: SkewSystem, s: BiSequence, t: float, n_lo: int, n_hi: int):
    """``(positions, F values)`` along the orbit of ``(s, t)``."""
    xs, xu = embed_orbit(s, sys.spec, n_lo, n_hi, sys.depth)
    ang = orbit_angles(sys, s, t, n_lo, n_hi)
    return np.arange(n_lo, n_hi), np.asarray(sys.F(xs, xu, ang), dtype=float)


def cycle_fiber_max(sys: SkewSystem, q: Sequence[int]) -> float:
    """``max_i f_F(p_i)`` over the cycle points of ``q^inf``."""
    base = BiSequence.periodic(q)
    xs, xu = embed_orbit(base, sys.spec, 0, len(base.right), sys.depth)
    return float(f_F(sys.F, xs, xu).max())


def _fiber_err(F: ObservableF) -> float:
    # closed-form fiber maxima are exact; refined ones are good to the refinement tolerance
    return 0.0 if F.fiber_value is not None else 1e-10


def _core_reach(s: BiSequence) -> int:
    """Largest ``|n|`` of a core position."""
    return max(abs(s.offset), abs(len(s.core) - s.offset))


def markov_value_skew(sys: SkewSystem, s: BiSequence, t: float, horizon: int = 200) -> SpectrumSample:
    """``sup_n F(Phi^n(s, t))``.

    The window ``|n| <= horizon`` is evaluated directly.  For an irrational
    constant rotation and periodic tails the tail supremum is the fiber
    maximum over the tail's cycle points (the rotation orbit is dense);
    positions beyond the window are within ``L_F`` times the shadowing
    distance of those cycle points.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    ns, vals = orbit_values(sys, s, t, -horizon, horizon + 1)
    i = int(np.argmax(vals))
    win = float(vals[i])
    info = {"window_max": win, "argmax": int(ns[i])}
    err = sys.embed_error()
    if s.is_structural and sys.irrational_rotation:
        tails = (cycle_fiber_max(sys, s.right), cycle_fiber_max(sys, s.left))
        m = horizon - _core_reach(s)
        beyond = sys.F.lipschitz * math.sqrt(2.0) * sys.tail_radius(max(m, 0))
        tail = max(tails)
        info["tail_max"] = tail
        value = max(win, tail)
        if tail > win:
            info["argmax"] = "tail"
        err += beyond + _fiber_err(sys.F) + float_floor(value)
        return SpectrumSample(value, s, "markov", err, False, info=info)
    slack = sys.F.lipschitz * math.sqrt(2.0) * sys.tail_radius(0)
    info["tail_interval"] = [win, win + slack]
    return SpectrumSample(win, s, "markov", err + float_floor(win), True, info=info)


def markov_value_surface(f: Callable, lipschitz: float, s: BiSequence, spec: EmbeddingSpec,
                         horizon: int = 200, depth: int | None = None) -> SpectrumSample:
    """``sup_n f(sigma^n s)`` for a surface observable ``f(x_s, x_u)`` and structural ``s``."""
    if not s.is_structural:
        raise DomainError("surface Markov values need periodic tails")
    depth = spec.default_depth() if depth is None else depth
    xs, xu = embed_orbit(s, spec, -horizon, horizon + 1, depth)
    vals = np.asarray(f(xs, xu), dtype=float)
    best = float(vals.max())
    arg: object = int(np.argmax(vals)) - horizon
    for q in (s.right, s.left):
        cyc = BiSequence.periodic(q)
        cs, cu = embed_orbit(cyc, spec, 0, len(q), depth)
        v = float(np.max(f(cs, cu)))
        if v > best:
            best, arg = v, "tail"
    r = spec.ratio
    m = max(horizon - _core_reach(s), 0)
    tr = lambda k: spec.max_digit * r ** (k + 1) / (1 - r)
    err = lipschitz * math.sqrt(2.0) * (tr(depth) + tr(m)) + float_floor(best)
    return SpectrumSample(best, s, "markov", err, False, info={"argmax": arg})


def lagrange_value_skew(sys: SkewSystem, s: BiSequence, t: float, horizon: int = 20,
                        margin: int | None = None) -> SpectrumSample:
    """Finite-horizon ``limsup_{n -> inf} F(Phi^n(s, t))``.

    Structural ``s`` under an irrational rotation: the fiber maximum over the
    right tail's cycle points (exact up to fiber refinement).  Scheduled
    ``s``: ``horizon`` counts schedule blocks ``(word, count)``; every
    position of blocks ``horizon//2 .. horizon-1`` is covered, positions
    deeper than ``margin`` inside a long periodic block by the analytic bound
    ``max f_F(cycle) + L_F * shadowing distance`` reported in ``info``.
    """
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if s.is_structural:
        if sys.irrational_rotation:
            v = cycle_fiber_max(sys, s.right)
            return SpectrumSample(v, s, "lagrange", _fiber_err(sys.F) + float_floor(v), False,
                                  info={"source": "tail cycle"})
        lo = max(horizon // 2, _core_reach(s))
        ns, vals = orbit_values(sys, s, t, lo, lo + horizon)
        v = float(vals.max())
        return SpectrumSample(v, s, "lagrange", sys.embed_error() + float_floor(v), True,
                              info={"source": "window"})
    if sys.alpha is None:
        raise DomainError("scheduled Lagrange estimates need a constant rotation")
    sched = s.schedule
    sched.ensure_blocks(horizon)
    blocks = sched.blocks
    if len(blocks) < horizon:
        raise DomainError("schedule shorter than the requested horizon")
    margin = sys.depth if margin is None else margin
    base = len(s.core) - s.offset
    starts = sched.block_starts()
    best, best_n = -math.inf, None
    interior = -math.inf
    cyc_cache: dict[Word, float] = {}
    runs = []
    for b in range(horizon // 2, horizon):
        w, c = blocks[b]
        p0 = base + starts[b]
        length = len(w) * c
        if length <= 2 * margin + len(w):
            runs.append((p0, p0 + length))
            continue
        runs.append((p0, p0 + margin))
        runs.append((p0 + length - margin, p0 + length))
        if w not in cyc_cache:
            cyc_cache[w] = cycle_fiber_max(sys, w)
        interior = max(interior, cyc_cache[w])
    for a, b in runs:
        ns, vals = orbit_values(sys, s, t, a, b)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_n = float(vals[k]), int(ns[k])
    if interior > -math.inf:
        interior += sys.F.lipschitz * math.sqrt(2.0) * sys.tail_radius(margin)
    info = {"argmax": best_n, "interior_bound": interior, "margin": margin}
    err = sys.embed_error() + float_floor(best)
    return SpectrumSample(best, s, "lagrange", err, interior >= best, info=info)


# ---------------------------------------------------------------------------
# membership in R


@dataclass(frozen=True)
class MaxReport:
    word: Word
    center: int
    point: tuple[float, float]
    t: float
    value: float
    value_bounds: tuple[float, float]
    unique: bool
    gap: float
    ds: float
    du: float
    dtt: float
    member_R: bool
    competitor: Word | None = None
    competitor_value: float | None = None
    fiber_unique: bool = True
    finite_difference: bool = False
    thresholds: dict = field(default_factory=lambda: {"deriv": DERIV_TOL, "dtt": DTT_TOL})
    depth: int = 0

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("center", "t", "value", "unique", "gap", "ds", "du", "dtt",
                                           "member_R", "competitor_value", "fiber_unique",
                                           "finite_difference", "thresholds", "depth")}
        d["word"] = list(self.word)
        d["point"] = list(self.point)
        d["value_bounds"] = list(self.value_bounds)
        d["competitor"] = list(self.competitor) if self.competitor is not None else None
        return d


def _center_values(sys: SkewSystem, words: np.ndarray, center: int):
    xs_lo, xs_hi, xu_lo, xu_hi = cylinder_boxes(words, center, sys.spec)
    cs, cu = 0.5 * (xs_lo + xs_hi), 0.5 * (xu_lo + xu_hi)
    hd = 0.5 * np.hypot(xs_hi - xs_lo, xu_hi - xu_lo)
    return f_F(sys.F, cs, cu), hd, (xs_lo, xs_hi, xu_lo, xu_hi)


def _extend_best(sys: SkewSystem, word: Word, center: int, target_len: int) -> tuple[Word, int]:
    """Grow ``word`` one symbol on each side at a time, keeping the best box centre."""
    syms = range(sys.sft.size)
    while len(word) < target_len:
        cands, cents = [], []
        for a in syms:
            for b in syms:
                w = (a,) + word + (b,)
                if sys.sft.is_admissible(w):
                    cands.append(w)
        if not cands:
            break
        vals, _, _ = _center_values(sys, np.asarray(cands, dtype=np.int64), center + 1)
        word = cands[int(np.argmax(vals))]
        center += 1
    return word, center


def validate_membership_R(sys: SkewSystem, depth: int = 6, fiber_grid: int = 64,
                          tol: float = 1e-9) -> MaxReport:
    """Locate the maximum of ``F`` and test the conditions defining ``R``.

    All admissible words of length ``2*depth`` (position 0 at index
    ``depth``) are scanned.  Each cylinder gets a value at its box centre and
    an upper bound (closed-form box bounds or Lipschitz).  The maximum is
    unique when the best cylinder's lower bound beats every cylinder that
    differs from it within the central half-window by more than ``tol``.
    The best cylinder is then extended greedily to locate the maximizer and
    the derivatives there are tested against the thresholds.
    """
    if depth < 3:
        raise DomainError("depth must be >= 3")
    if fiber_grid < 16:
        raise DomainError("fiber_grid must be >= 16")
    F = sys.F
    words = admissible_words(sys.sft, 2 * depth)
    vals, hd, boxes = _center_values(sys, words, depth)
    lower = vals - F.lipschitz * hd
    _, upper = F.fiber_range(*boxes, grid=fiber_grid)
    upper = np.minimum(upper, vals + F.lipschitz * hd + _fiber_err(F))
    b = int(np.argmax(vals))
    half = max(depth // 2, 1)
    core = slice(depth - half, depth + half)
    far = np.any(words[:, core] != words[b, core], axis=1)
    gap = math.inf
    competitor = competitor_value = None
    if far.any():
        k = int(np.flatnonzero(far)[np.argmax(upper[far])])
        gap = float(lower[b] - upper[k])
        competitor, competitor_value = as_word(words[k]), float(vals[k])

    word, center = _extend_best(sys, as_word(words[b]), depth, 2 * sys.depth)
    xs_lo, xs_hi, xu_lo, xu_hi = (float(v[0]) for v in cylinder_boxes(np.asarray([word]), center, sys.spec))
    xs, xu = 0.5 * (xs_lo + xs_hi), 0.5 * (xu_lo + xu_hi)
    fm = fiber_max(F, (xs, xu), fiber_grid)
    ds, fd1 = F.partial("s", xs, xu, fm.t)
    du, fd2 = F.partial("u", xs, xu, fm.t)
    dtt = fm.second_deriv
    unique = bool(gap > tol and fm.unique)
    member = unique and abs(ds) > DERIV_TOL and abs(du) > DERIV_TOL and dtt < DTT_TOL
    return MaxReport(word, center, (xs, xu), fm.t, fm.value, (float(lower[b]), float(upper[b])),
                     unique, gap, ds, du, dtt, bool(member), competitor, competitor_value,
                     fm.unique, fd1 or fd2 or fm.finite_difference, depth=depth)
