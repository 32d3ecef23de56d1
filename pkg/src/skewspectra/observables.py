"""Observables ``F(x_s, x_u, t)`` on the embedded horseshoe times the circle, and fiber maximization.

An observable carries its value function (vectorized, broadcasting), a bound
on its gradient norm over ``[0,1]^2 x S^1`` and optional analytic partials.
Missing partials fall back to central differences with step ``FD_STEP``;
results that used a fallback say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .symbolic import DomainError, EmbeddedPoint

FD_STEP = 1e-5
# second differences lose ~eps/h^2 to rounding, so they use a coarser step
FD_STEP_2 = 1e-4
TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# building blocks


@dataclass(frozen=True)
class LinearSurface:
    """``a_s x_s + a_u x_u + const``."""

    a_s: float = 0.0
    a_u: float = 0.0
    const: float = 0.0

    def __call__(self, xs, xu):
        return self.a_s * np.asarray(xs, dtype=float) + self.a_u * np.asarray(xu, dtype=float) + self.const

    @property
    def lipschitz(self) -> float:
        return math.hypot(self.a_s, self.a_u)

    def box_range(self, xs_lo, xs_hi, xu_lo, xu_hi):
        lo = self.const + np.minimum(self.a_s * xs_lo, self.a_s * xs_hi) + np.minimum(self.a_u * xu_lo, self.a_u * xu_hi)
        hi = self.const + np.maximum(self.a_s * xs_lo, self.a_s * xs_hi) + np.maximum(self.a_u * xu_lo, self.a_u * xu_hi)
        return lo, hi

    def sup_abs_unit(self) -> float:
        return abs(self.const) + abs(self.a_s) + abs(self.a_u)

    def to_dict(self) -> dict:
        return {"a_s": self.a_s, "a_u": self.a_u, "const": self.const}


@dataclass(frozen=True)
class FiberPoly:
    """Trigonometric polynomial ``sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t)``, ``k >= 1``."""

    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        n = max(len(self.a), len(self.b))
        object.__setattr__(self, "a", tuple(float(v) for v in self.a) + (0.0,) * (n - len(self.a)))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b) + (0.0,) * (n - len(self.b)))

    @classmethod
    def cos(cls, amp: float = 1.0, t0: float = 0.0) -> "FiberPoly":
        """``amp * cos(2 pi (t - t0))``."""
        return cls((amp * math.cos(TWO_PI * t0),), (amp * math.sin(TWO_PI * t0),))

    def _k(self):
        return np.arange(1, len(self.a) + 1, dtype=float)

    def _eval(self, t, order: int):
        t = np.asarray(t, dtype=float)
        if not self.a:
            return np.zeros_like(t)
        k = self._k()
        ph = TWO_PI * np.multiply.outer(t, k)
        a, b = np.asarray(self.a), np.asarray(self.b)
        w = (TWO_PI * k) ** order
        c, s = np.cos(ph), np.sin(ph)
        if order == 0:
            return c @ a + s @ b
        if order == 1:
            return (-s * a + c * b) @ w
        return (-c * a - s * b) @ w

    def __call__(self, t):
        return self._eval(t, 0)

    def d1(self, t):
        return self._eval(t, 1)

    def d2(self, t):
        return self._eval(t, 2)

    @property
    def is_constant(self) -> bool:
        return not any(self.a) and not any(self.b)

    @property
    def d1_bound(self) -> float:
        return float(sum(TWO_PI * k * (abs(a) + abs(b)) for k, (a, b) in enumerate(zip(self.a, self.b), 1)))

    def scaled(self, c: float) -> "FiberPoly":
        return FiberPoly(tuple(c * v for v in self.a), tuple(c * v for v in self.b))

    def _extremum(self, sign: float) -> tuple[float, float]:
        if self.is_constant:
            return 0.0, 0.0
        n = 4096
        tg = np.arange(n) / n
        v = sign * self(tg)
        i = int(np.argmax(v))
        lo, hi = tg[i] - 1.0 / n, tg[i] + 1.0 / n
        fa, fb = sign * self.d1(lo), sign * self.d1(hi)
        if fa > 0 > fb:
            t = brentq(lambda x: sign * float(self.d1(x)), lo, hi, xtol=1e-15)
        else:
            t = float(tg[i])
        t = t % 1.0
        return t, float(self(t))

    @cached_property
    def argmax(self) -> float:
        return self._extremum(1.0)[0]

    @cached_property
    def argmin(self) -> float:
        return self._extremum(-1.0)[0]

    @cached_property
    def max(self) -> float:
        return float(self(self.argmax))

    @cached_property
    def min(self) -> float:
        return float(self(self.argmin))

    def to_dict(self) -> dict:
        return {"a": list(self.a), "b": list(self.b)}


# ---------------------------------------------------------------------------
# observables


@dataclass(frozen=True)
class ObservableF:
    """``F(x_s, x_u, t)`` with gradient bound ``lipschitz`` over ``[0,1]^2 x S^1``.

    ``box_bounds(xs_lo, xs_hi, xu_lo, xu_hi)`` optionally returns lower and
    upper bounds of the fiber maximum ``f_F`` over a box; without it the
    Lipschitz bound around the box centre is used.
    """

    func: Callable
    lipschitz: float
    d_s: Callable | None = None
    d_u: Callable | None = None
    d_t: Callable | None = None
    d_tt: Callable | None = None
    box_bounds: Callable | None = None
    t_lipschitz: float | None = None
    fiber_value: Callable | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict, compare=False)
    h: float = FD_STEP

    def __call__(self, xs, xu, t):
        return self.func(xs, xu, t)

    @property
    def lip_t(self) -> float:
        return self.lipschitz if self.t_lipschitz is None else self.t_lipschitz

    def partial(self, which: str, xs: float, xu: float, t: float) -> tuple[float, bool]:
        """``(value, used_finite_difference)`` for ``which`` in ``s, u, t, tt``."""
        fn = {"s": self.d_s, "u": self.d_u, "t": self.d_t, "tt": self.d_tt}[which]
        if fn is not None:
            return float(fn(xs, xu, t)), False
        h, F = self.h, self.func
        if which == "s":
            return float((F(xs + h, xu, t) - F(xs - h, xu, t)) / (2 * h)), True
        if which == "u":
            return float((F(xs, xu + h, t) - F(xs, xu - h, t)) / (2 * h)), True
        if which == "t":
            return float((F(xs, xu, t + h) - F(xs, xu, t - h)) / (2 * h)), True
        h2 = FD_STEP_2
        return float((F(xs, xu, t + h2) - 2 * F(xs, xu, t) + F(xs, xu, t - h2)) / (h2 * h2)), True

    def fiber_range(self, xs_lo, xs_hi, xu_lo, xu_hi, grid: int = 64):
        """Lower and upper bounds of ``f_F`` over boxes (arrays)."""
        if self.box_bounds is not None:
            return self.box_bounds(xs_lo, xs_hi, xu_lo, xu_hi)
        cs, cu = 0.5 * (xs_lo + xs_hi), 0.5 * (xu_lo + xu_hi)
        rad = 0.5 * np.hypot(xs_hi - xs_lo, xu_hi - xu_lo)
        val, _ = fiber_max_grid(self, cs, cu, grid)
        slack = self.lip_t / (2 * grid)
        return val - self.lipschitz * rad, val + slack + self.lipschitz * rad

    def to_dict(self) -> dict:
        if not self.params:
            raise DomainError("custom observables are not serializable")
        return dict(self.params)


def sum_observable(f: LinearSurface, g: FiberPoly, family: dict | None = None) -> ObservableF:
    """``F = f(x) + g(t)``."""
    gmax = g.max

    def func(xs, xu, t):
        return f(xs, xu) + g(t)

    def bounds(xs_lo, xs_hi, xu_lo, xu_hi):
        lo, hi = f.box_range(xs_lo, xs_hi, xu_lo, xu_hi)
        return lo + gmax, hi + gmax

    return ObservableF(
        func, math.sqrt(f.lipschitz ** 2 + g.d1_bound ** 2),
        d_s=lambda xs, xu, t: np.full(np.broadcast(xs, xu, t).shape, f.a_s),
        d_u=lambda xs, xu, t: np.full(np.broadcast(xs, xu, t).shape, f.a_u),
        d_t=lambda xs, xu, t: g.d1(t) + 0.0 * np.asarray(xs),
        d_tt=lambda xs, xu, t: g.d2(t) + 0.0 * np.asarray(xs),
        box_bounds=bounds, t_lipschitz=g.d1_bound, name="sum",
        fiber_value=lambda xs, xu: f(xs, xu) + gmax,
        params=family or {"family": "sum", "f": f.to_dict(), "g": g.to_dict()})


def linear_cos(a_s: float, a_u: float, amp: float, t0: float = 0.0, const: float = 0.0) -> ObservableF:
    """``a_s x_s + a_u x_u + const + amp cos(2 pi (t - t0))``."""
    return sum_observable(LinearSurface(a_s, a_u, const), FiberPoly.cos(amp, t0),
                          {"family": "linear_cos", "a_s": a_s, "a_u": a_u, "amp": amp, "t0": t0,
                           "const": const})


def surface_observable(f: LinearSurface) -> ObservableF:
    return sum_observable(f, FiberPoly(), {"family": "surface", "f": f.to_dict()})


def fiber_observable(g: FiberPoly) -> ObservableF:
    return sum_observable(LinearSurface(), g, {"family": "fiber", "g": g.to_dict()})


def zero_observable() -> ObservableF:
    return sum_observable(LinearSurface(), FiberPoly(), {"family": "zero"})


def sum_fg(f: LinearSurface, g: FiberPoly, alpha: float) -> ObservableF:
    """``F = f(x) + alpha (g(t) - min g)``."""
    shifted = LinearSurface(f.a_s, f.a_u, f.const - alpha * g.min)
    return sum_observable(shifted, g.scaled(alpha),
                          {"family": "sum_fg", "f": f.to_dict(), "g": g.to_dict(), "alpha": alpha})


def product_fg(f: LinearSurface, g: FiberPoly, c: float) -> ObservableF:
    """``F = (f(x) - c) (g(t) - min g)``."""
    gmin = g.min
    span = g.max - gmin
    fmax = f.sup_abs_unit() + abs(c)

    def func(xs, xu, t):
        return (f(xs, xu) - c) * (g(t) - gmin)

    def bounds(xs_lo, xs_hi, xu_lo, xu_hi):
        lo, hi = f.box_range(xs_lo, xs_hi, xu_lo, xu_hi)
        return np.maximum(lo - c, 0.0) * span, np.maximum(hi - c, 0.0) * span

    lip = math.sqrt((f.lipschitz * span) ** 2 + (fmax * g.d1_bound) ** 2)
    return ObservableF(
        func, lip,
        d_s=lambda xs, xu, t: f.a_s * (g(t) - gmin) + 0.0 * np.asarray(xs),
        d_u=lambda xs, xu, t: f.a_u * (g(t) - gmin) + 0.0 * np.asarray(xs),
        d_t=lambda xs, xu, t: (f(xs, xu) - c) * g.d1(t),
        d_tt=lambda xs, xu, t: (f(xs, xu) - c) * g.d2(t),
        box_bounds=bounds, t_lipschitz=fmax * g.d1_bound, name="product_fg",
        fiber_value=lambda xs, xu: np.maximum(f(xs, xu) - c, 0.0) * span,
        params={"family": "product_fg", "f": f.to_dict(), "g": g.to_dict(), "c": c})


def bump(a: float, b: float, t0: float = 0.0) -> ObservableF:
    """``-(x_s - a)^2 - (x_u - b)^2 - (1 - cos 2 pi (t - t0))``, maximal at ``(a, b, t0)``."""

    def func(xs, xu, t):
        return -(np.asarray(xs) - a) ** 2 - (np.asarray(xu) - b) ** 2 - (1 - np.cos(TWO_PI * (np.asarray(t) - t0)))

    def sq_range(lo, hi, c):
        far = np.maximum((lo - c) ** 2, (hi - c) ** 2)
        near = np.where((lo <= c) & (c <= hi), 0.0, np.minimum((lo - c) ** 2, (hi - c) ** 2))
        return near, far

    def bounds(xs_lo, xs_hi, xu_lo, xu_hi):
        ns, fs = sq_range(xs_lo, xs_hi, a)
        nu, fu = sq_range(xu_lo, xu_hi, b)
        return -fs - fu, -ns - nu

    reach = 2 * max(abs(a), abs(1 - a), abs(b), abs(1 - b))
    return ObservableF(
        func, math.sqrt(2 * reach ** 2 + TWO_PI ** 2),
        d_s=lambda xs, xu, t: -2 * (np.asarray(xs) - a) + 0.0 * np.asarray(t),
        d_u=lambda xs, xu, t: -2 * (np.asarray(xu) - b) + 0.0 * np.asarray(t),
        d_t=lambda xs, xu, t: -TWO_PI * np.sin(TWO_PI * (np.asarray(t) - t0)) + 0.0 * np.asarray(xs),
        d_tt=lambda xs, xu, t: -TWO_PI ** 2 * np.cos(TWO_PI * (np.asarray(t) - t0)) + 0.0 * np.asarray(xs),
        box_bounds=bounds, t_lipschitz=TWO_PI, name="bump",
        fiber_value=lambda xs, xu: -(np.asarray(xs) - a) ** 2 - (np.asarray(xu) - b) ** 2,
        params={"family": "bump", "a": a, "b": b, "t0": t0})


def observable_from_dict(d: dict) -> ObservableF:
    fam = d.get("family")
    f = LinearSurface(**d["f"]) if "f" in d else None
    g = FiberPoly(tuple(d["g"].get("a", ())), tuple(d["g"].get("b", ()))) if "g" in d else None
    if fam == "sum":
        return sum_observable(f, g)
    if fam == "linear_cos":
        return linear_cos(d["a_s"], d["a_u"], d["amp"], d.get("t0", 0.0), d.get("const", 0.0))
    if fam == "surface":
        return surface_observable(f)
    if fam == "fiber":
        return fiber_observable(g)
    if fam == "zero":
        return zero_observable()
    if fam == "sum_fg":
        return sum_fg(f, g, d["alpha"])
    if fam == "product_fg":
        return product_fg(f, g, d["c"])
    if fam == "bump":
        return bump(d["a"], d["b"], d.get("t0", 0.0))
    raise DomainError(f"unknown observable family {fam!r}")


# ---------------------------------------------------------------------------
# fiber maximization


@dataclass(frozen=True)
class FiberMax:
    t: float
    value: float
    second_deriv: float
    unique: bool = True
    candidates: tuple = ()
    finite_difference: bool = False


def fiber_max_grid(F: ObservableF, xs, xu, grid: int = 64):
    """Grid maxima of ``t -> F(x, t)`` for arrays of points: ``(values, argmax angles)``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    xu = np.atleast_1d(np.asarray(xu, dtype=float))
    tg = np.arange(grid) / grid
    vals = np.asarray(F(xs[:, None], xu[:, None], tg[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (xs.size, grid))
    i = np.argmax(vals, axis=1)
    return vals[np.arange(xs.size), i], tg[i]


def _refine(F: ObservableF, xs: float, xu: float, t0: float, step: float, tol: float) -> tuple[float, float]:
    lo, hi = t0 - step, t0 + step
    dt = lambda t: F.partial("t", xs, xu, t)[0]
    try:
        fa, fb = dt(lo), dt(hi)
        if fa > 0 > fb:
            t = brentq(dt, lo, hi, xtol=tol)
            return t, float(F(xs, xu, t))
    except ValueError:
        pass
    res = minimize_scalar(lambda t: -float(F(xs, xu, t)), bounds=(lo, hi), method="bounded",
                          options={"xatol": tol})
    return float(res.x), float(-res.fun)


def fiber_max(F: ObservableF, x, grid: int = 64, refine_tol: float = 1e-12,
              tie_tol: float = 1e-9) -> FiberMax:
    """``max_t F(x, t)``: grid scan, then root finding on ``dF/dt`` around each grid peak.

    Golden-section search (bounded Brent) is the fallback when the derivative
    does not change sign across the bracket.  Peaks whose refined values lie
    within ``tie_tol`` of the best are all returned and the result is flagged
    non-unique.
    """
    if grid < 16:
        raise DomainError("grid must be >= 16")
    if isinstance(x, EmbeddedPoint):
        xs, xu = x.x_s, x.x_u
    else:
        xs, xu = map(float, x)
    tg = np.arange(grid) / grid
    vals = np.broadcast_to(np.asarray(F(xs, xu, tg), dtype=float), tg.shape)
    top = float(vals.max())
    scale = 1.0 + abs(top)
    if top - float(vals.min()) <= 1e-13 * scale:
        dtt, fd = F.partial("tt", xs, xu, 0.0)
        return FiberMax(0.0, top, dtt, False,
                        tuple((float(t), top) for t in tg[:2]), fd)
    peaks = np.flatnonzero((vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1)))
    slack = F.lip_t / grid
    peaks = [int(p) for p in peaks if vals[p] >= top - slack]
    refined = []
    for p in peaks:
        t, v = _refine(F, xs, xu, float(tg[p]), 1.0 / grid, refine_tol)
        refined.append((t % 1.0, max(v, float(vals[p]))))
    refined.sort(key=lambda c: -c[1])
    best_t, best_v = refined[0]
    ties = [c for c in refined if c[1] >= best_v - tie_tol * scale
            and min(abs(c[0] - best_t), 1 - abs(c[0] - best_t)) > 1.5 / grid]
    dtt, fd = F.partial("tt", xs, xu, best_t)
    fd = fd or F.d_t is None
    cands = tuple([(best_t, best_v)] + ties)
    return FiberMax(best_t, best_v, dtt, not ties, cands, fd)


def f_F(F: ObservableF, xs, xu, grid: int = 64) -> np.ndarray:
    """Vectorized fiber maximum: closed form when the family has one, else refined per point."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    xu = np.atleast_1d(np.asarray(xu, dtype=float))
    if F.fiber_value is not None:
        return np.broadcast_to(np.asarray(F.fiber_value(xs, xu), dtype=float), xs.shape).copy()
    out = np.empty(xs.size)
    for i in range(xs.size):
        out[i] = fiber_max(F, (xs[i], xu[i]), grid).value
    return out
