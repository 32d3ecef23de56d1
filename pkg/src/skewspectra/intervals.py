"""Intervals inside the Lagrange spectrum of a skew product, with self-checking certificates.

Two constructions are provided.  In the periodic case the maximum sits on a
periodic orbit and the base point is ``Q^inf; H Q^inf``; in the
non-periodic case the maximizer itself is ``X1^inf; H X2^inf``.  For each
target angle a witness orbit repeats ``H`` separated by long runs whose
lengths are chosen by rotation steering, so that the fiber coordinate comes
back to the target at every visit of ``H``.  Each grid target then records
the predicted Lagrange value, the finite-horizon estimate and an error bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .circle import circle_dist, steer_rotation, wrap
from .observables import f_F, fiber_max, observable_from_dict
from .skew import (MaxReport, SkewSystem, cycle_fiber_max, float_floor, lagrange_value_skew,
                   validate_membership_R)
from .symbolic import (BiSequence, ConstructionError, DomainError, Word, admissible_words, as_word,
                       cylinder_boxes, embed_orbit, is_admissible)


@dataclass
class GridPoint:
    t: float
    target: float
    counts: list
    estimate: float
    error_bound: float
    validated: bool


@dataclass
class IntervalCertificate:
    construction: str
    interval: tuple
    grid: list
    parameters: dict
    model: dict = field(default_factory=dict)

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def fraction_validated(self) -> float:
        return sum(g.validated for g in self.grid) / max(len(self.grid), 1)

    def to_dict(self) -> dict:
        return {"construction": self.construction, "interval": list(self.interval),
                "parameters": self.parameters, "model": self.model,
                "grid": [asdict(g) for g in self.grid]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "IntervalCertificate":
        return cls(d["construction"], tuple(d["interval"]), [GridPoint(**g) for g in d["grid"]],
                   d["parameters"], d.get("model", {}))


# ---------------------------------------------------------------------------
# shared pieces


def _require_rotation(sys: SkewSystem):
    if sys.alpha is None or not sys.irrational_rotation:
        raise DomainError("interval constructions need a constant irrational rotation")


def _require_member(report: MaxReport):
    if not report.unique:
        raise DomainError("non-unique argmax: the maximum of F is tied, so F is not in R")
    if not report.member_R:
        raise DomainError(f"F is not in R at its maximum (ds={report.ds:.3g}, du={report.du:.3g}, "
                          f"dtt={report.dtt:.3g})")


def _check_admissible(sft, *parts: Sequence[int], what: str):
    w = sum((as_word(p) for p in parts), ())
    if not is_admissible(w, sft):
        raise DomainError(f"{what} is not admissible")


def _rep(w: Word, n: int) -> Word:
    return tuple(w) * n


def _argmax_match_depth(base: BiSequence, j: int, report: MaxReport) -> int:
    """Largest ``d <= report.depth`` with ``base`` around ``j`` in the depth-``d`` maximum cylinder."""
    best = 0
    for d in range(1, report.depth + 1):
        win = tuple(int(a) for a in base.window(j - d, j + d))
        if win != report.word[report.center - d:report.center + d]:
            break
        best = d
    if best < 1:
        raise DomainError("position j of the base sequence is not in the maximum cylinder")
    return best


def _point_dist(sys: SkewSystem, s: BiSequence, lo: int, hi: int, x: tuple) -> np.ndarray:
    xs, xu = embed_orbit(s, sys.spec, lo, hi, sys.depth)
    return np.hypot(xs - x[0], xu - x[1])


def _empirical_eps_delta(sys: SkewSystem, report: MaxReport, delta: float) -> float:
    """``max F - sup f_F`` over depth-``report.depth`` cylinders lying outside ``B(x~, delta)``."""
    d = report.depth
    words = admissible_words(sys.sft, 2 * d)
    xs_lo, xs_hi, xu_lo, xu_hi = cylinder_boxes(words, d, sys.spec)
    cs, cu = 0.5 * (xs_lo + xs_hi), 0.5 * (xu_lo + xu_hi)
    hd = 0.5 * np.hypot(xs_hi - xs_lo, xu_hi - xu_lo)
    out = np.hypot(cs - report.point[0], cu - report.point[1]) - hd >= delta
    if not out.any():
        return math.inf
    _, hi = sys.F.fiber_range(xs_lo[out], xs_hi[out], xu_lo[out], xu_hi[out])
    return float(report.value - np.max(hi))


def _steer_blocks(sys: SkewSystem, template, n_visits: int, eps: float, n0: int):
    """Block list ``[..., (H, 1)]`` repeated ``n_visits - 1`` times.

    ``template(s)`` returns the entries between visit ``s-1`` and visit
    ``s`` as ``(word, count)`` with exactly one count set to ``None``: that
    count is steered so that ``P_s * alpha`` is within ``eps`` of 0 mod 1,
    where ``P_s`` is the start of the ``s``-th visit.  The fiber coordinate
    at every visit then equals the one at position 0 up to ``eps``.
    Returns ``(blocks, starts, max_angle_error)``.
    """
    alpha = sys.alpha
    blocks: list = []
    pos = 0
    starts = [0]
    worst = 0.0
    for s in range(1, n_visits):
        entries = template(s)
        k = next(i for i, (_, c) in enumerate(entries) if c is None)
        before = sum(len(w) * c for w, c in entries[:k])
        after = sum(len(w) * c for w, c in entries[k + 1:])
        w = entries[k][0]
        r = pos + before + after
        n = steer_rotation(alpha, len(w), r, 0.0, 0.0, eps, n_min=n0 + s)
        entries = list(entries)
        entries[k] = (w, n)
        blocks.extend((tuple(wd), int(c)) for wd, c in entries if c > 0)
        pos = r + n * len(w)
        starts.append(pos)
        worst = max(worst, circle_dist(float(pos) * alpha, 0.0))
    return blocks, starts, worst


def _witness_error(sys: SkewSystem, angle_err: float, shadow_symbols: int) -> float:
    L = sys.F.lipschitz
    return (sys.embed_error() + L * angle_err
            + L * math.sqrt(2.0) * sys.tail_radius(shadow_symbols))


def _evaluate_targets(sys: SkewSystem, left: Word, core: Word, blocks, tail: Word, ts, targets,
                      angle0, err: float, tol: float, horizon: int, margin: int) -> list[GridPoint]:
    out = []
    counts = [c for _, c in blocks]
    for t, v in zip(ts, targets):
        z = BiSequence.scheduled(left, core, blocks, tail=tail)
        est = lagrange_value_skew(sys, z, angle0(t), horizon=horizon, margin=margin)
        if est.approximate:
            raise ConstructionError("deep block positions are not dominated by the H visits")
        e = err + est.error_bound + float_floor(v)
        ok = abs(est.value - v) <= e and e <= tol
        out.append(GridPoint(float(t), float(v), counts, float(est.value), float(e), bool(ok)))
    return out


def _model_dict(sys: SkewSystem) -> dict:
    from .model import system_to_dict
    return system_to_dict(sys)


# ---------------------------------------------------------------------------
# periodic case


def construct_interval_periodic_case(sys: SkewSystem, Q: Sequence[int], H: Sequence[int], j: int,
                                     delta: float | None = None, I: tuple | None = None,
                                     grid_n: int = 2000, n_targets: int = 200, visits: int = 12,
                                     tol: float = 1e-4, n0: int | None = None,
                                     report: MaxReport | None = None) -> IntervalCertificate:
    """Interval in the Lagrange spectrum near a periodic maximum.

    ``I`` is an arc ``(lo, hi)`` of fiber angles at position ``j``; it
    defaults to ``t~ +- 0.05``.  Angles ``t`` at the start of ``H`` range
    over ``J = I - j alpha``; for each grid angle the winning position of
    ``F`` along the base orbit ``Q^inf; H Q^inf`` is recorded and ``j0`` is
    the position owning the longest run of consecutive grid points.
    """
    _require_rotation(sys)
    Q, H = as_word(Q), as_word(H)
    if not Q or not H:
        raise DomainError("Q and H must be non-empty")
    if not 0 <= j < len(H):
        raise DomainError("j must index a position of H")
    span = sys.sft.memory + 1
    reps = 2 + -(-span // len(Q))
    _check_admissible(sys.sft, _rep(Q, reps), what="Q^inf")
    _check_admissible(sys.sft, _rep(Q, reps), H, _rep(Q, reps), what="QHQ")
    report = report or validate_membership_R(sys)
    _require_member(report)
    alpha, F = sys.alpha, sys.F
    base = BiSequence.eventually_periodic(Q, H, Q)
    match = _argmax_match_depth(base, j, report)

    d = report.depth
    top = report.word[report.center - d:report.center + d]
    cyc = BiSequence.periodic(Q)
    if any(tuple(int(a) for a in cyc.window(k - d, k + d)) == top for k in range(len(Q))):
        raise DomainError("the orbit of Q enters the maximum cylinder")

    x_t = report.point
    others = [l for l in range(len(H)) if l != j]
    d_H = _point_dist(sys, base, 0, len(H), x_t)[others] if others else np.array([math.inf])
    d_Q = _point_dist(sys, BiSequence.periodic(Q), 0, len(Q), x_t)
    auto = 0.5 * min(float(d_H.min()), float(d_Q.min()))
    delta = auto if delta is None else float(delta)
    if not delta > 0:
        raise DomainError("delta must be positive")
    if d_Q.min() <= delta:
        raise DomainError("the orbit of Q meets B(x~, delta)")
    bad = [l for l, d in zip(others, d_H) if d <= delta]
    if bad:
        raise DomainError(f"H positions {bad} lie inside B(x~, delta)")
    eps_delta = _empirical_eps_delta(sys, report, delta)

    if I is None:
        I = (report.t - 0.05, report.t + 0.05)
    I = (float(I[0]), float(I[1]))
    if not I[1] > I[0]:
        raise DomainError("degenerate angular interval I")
    J = (I[0] - j * alpha, I[1] - j * alpha)

    margin = sys.depth
    n0 = 2 * margin if n0 is None else n0
    lo_pos, hi_pos = -margin, len(H) + margin
    pos = np.arange(lo_pos, hi_pos)
    xs, xu = embed_orbit(base, sys.spec, lo_pos, hi_pos, sys.depth)
    tg = J[0] + (np.arange(grid_n) + 0.5) / grid_n * (J[1] - J[0])
    vals = np.asarray(F(xs[None, :], xu[None, :], wrap(tg[:, None] + pos[None, :] * alpha)))
    winner = pos[np.argmax(vals, axis=1)]
    srt = np.sort(vals, axis=1)
    if np.any(srt[:, -1] - srt[:, -2] <= 1e-12 * (1 + np.abs(srt[:, -1]))):
        raise ConstructionError("non-unique argmax along the base orbit at some grid angle")

    runs: dict[int, tuple[int, int]] = {}
    start = 0
    for g in range(1, grid_n + 1):
        if g == grid_n or winner[g] != winner[start]:
            l = int(winner[start])
            if l not in runs or g - start > runs[l][1] - runs[l][0]:
                runs[l] = (start, g)
            start = g
    j0 = min(runs, key=lambda l: (-(runs[l][1] - runs[l][0]), l))
    a, b = runs[j0]
    need = grid_n / (len(H) * 4)
    if b - a < need:
        raise ConstructionError("no interior candidate at this grid resolution")
    a, b = a + 1, b - 2
    t_lo, t_hi = float(tg[a]), float(tg[b])
    xj = (float(xs[j0 - lo_pos]), float(xu[j0 - lo_pos]))

    dense = np.linspace(t_lo, t_hi, 8 * (b - a) + 1)
    img = np.asarray(F(xj[0], xj[1], wrap(dense + j0 * alpha)))
    lo, hi = float(img.min()), float(img.max())
    if not hi > lo:
        raise ConstructionError("degenerate certificate interval")

    q_bound = cycle_fiber_max(sys, Q) + F.lipschitz * math.sqrt(2.0) * sys.tail_radius(margin)
    if q_bound >= lo:
        raise ConstructionError(f"Q positions may reach {q_bound:.6g} >= interval lower end {lo:.6g}")

    eps = tol / (10 * F.lipschitz)
    blocks, starts, ang_err = _steer_blocks(sys, lambda s: [(Q, None), (H, 1)], visits, eps, n0)
    ts = np.linspace(t_lo, t_hi, n_targets)
    targets = np.asarray(F(xj[0], xj[1], wrap(ts + j0 * alpha)))
    err = _witness_error(sys, ang_err, (n0 + 1) * len(Q) - margin)
    grid = _evaluate_targets(sys, Q, H, blocks, Q, ts, targets, lambda t: t, err, tol,
                             len(blocks), margin)
    params = {
        "Q": list(Q), "H": list(H), "j": j, "j0": j0, "delta": delta, "eps_delta": eps_delta,
        "I": list(I), "J": list(J), "run": [t_lo, t_hi], "run_points": b - a + 1, "grid_n": grid_n,
        "run_threshold": need, "alpha": alpha, "steer_eps": eps, "angle_error": ang_err,
        "visits": visits, "horizon_blocks": len(blocks), "margin": margin, "n0": n0,
        "tol": tol, "q_bound": q_bound, "x_max": list(report.point), "t_max": report.t,
        "F_max": report.value, "depth": sys.depth, "layout": "periodic", "match_depth": match,
        "visit_starts": starts,
    }
    return IntervalCertificate("rphi1", (lo, hi), grid, params, _model_dict(sys))


# ---------------------------------------------------------------------------
# non-periodic case


def _looks_periodic(s: BiSequence, center: int, max_period: int, radius: int = 200) -> bool:
    w = s.window(center - radius, center + radius)
    return any(np.array_equal(w[p:], w[:-p]) for p in range(1, max_period + 1))


def construct_interval_nonperiodic_case(sys: SkewSystem, X1: Sequence[int], X2: Sequence[int],
                                        Q: Sequence[int], H: Sequence[int], j: int,
                                        I: tuple | None = None, n_targets: int = 200,
                                        visits: int = 12, tol: float = 1e-4, n0: int | None = None,
                                        report: MaxReport | None = None) -> IntervalCertificate:
    """Interval ``[min_{t in I} F(x~, t), F(x~, t~)]`` for a non-periodic maximizer.

    ``x~`` is position ``j`` of ``X1^inf; H X2^inf``.  Witnesses follow
    ``X1^inf; H X2^{n1} Q X1^{n2} H X2^{n1'} Q X1^{n2'} H ...`` with
    ``n1`` growing by one per visit and ``n2`` steered.  ``I`` defaults to the
    arc around ``t~`` where ``F(x~, .)`` stays above ``F(x~, t~) - eps_delta/2``,
    ``eps_delta`` being the gap to every other orbit position.
    """
    _require_rotation(sys)
    X1, X2, Q, H = as_word(X1), as_word(X2), as_word(Q), as_word(H)
    if not X1 or not X2 or not H:
        raise DomainError("X1, X2 and H must be non-empty")
    span = sys.sft.memory + 1
    r1, r2 = 2 + -(-span // len(X1)), 2 + -(-span // len(X2))
    _check_admissible(sys.sft, _rep(X1, r1), H, _rep(X2, r2), what="X1 H X2")
    _check_admissible(sys.sft, _rep(X2, r2), Q, _rep(X1, r1), what="X2 Q X1")
    _check_admissible(sys.sft, _rep(X1, r1), H, what="X1 H")
    base = BiSequence.eventually_periodic(X1, H, X2)
    if _looks_periodic(base, j, 2 * (len(X1) + len(X2) + len(H))):
        raise DomainError("the maximizer is periodic: use periodic case")
    report = report or validate_membership_R(sys)
    _require_member(report)
    alpha, F = sys.alpha, sys.F
    match = _argmax_match_depth(base, j, report)

    margin = sys.depth
    n0 = 2 * margin if n0 is None else n0
    xs, xu = embed_orbit(base, sys.spec, j, j + 1, sys.depth)
    xt = (float(xs[0]), float(xu[0]))
    fm = fiber_max(F, xt)
    t_max, v_max = fm.t, fm.value

    W = margin + max(len(X1), len(X2)) + len(H)
    oxs, oxu = embed_orbit(base, sys.spec, j - W, j + W + 1, sys.depth)
    others = np.delete(f_F(F, oxs, oxu), W)
    cyc = max(cycle_fiber_max(sys, w) for w in (X1, X2) + ((Q + X1 + X2,) if Q else ()))
    eps_delta = float(v_max - max(others.max(), cyc))
    if not eps_delta > 0:
        raise DomainError("other orbit positions reach the maximum value")

    fx = lambda t: float(F(xt[0], xt[1], t))
    if I is None:
        level = v_max - eps_delta / 2
        steps = np.linspace(0.0, 0.5, 2001)[1:]
        up = next((u for u in steps if fx(t_max + u) <= level), 0.5)
        dn = next((u for u in steps if fx(t_max - u) <= level), 0.5)
        hi_t = brentq(lambda u: fx(t_max + u) - level, 0.0, up) if up < 0.5 else 0.5
        lo_t = brentq(lambda u: fx(t_max - u) - level, 0.0, dn) if dn < 0.5 else 0.5
        I = (t_max - 0.9 * lo_t, t_max + 0.9 * hi_t)
    I = (float(I[0]), float(I[1]))
    if not I[1] > I[0]:
        raise DomainError("degenerate angular interval I")
    dense = np.linspace(I[0], I[1], 20001)
    dvals = np.asarray(F(xt[0], xt[1], wrap(dense)))
    if dvals.min() <= v_max - eps_delta:
        raise DomainError("F(x~, .) drops below max - eps_delta on I")
    in_I = circle_dist(t_max, 0.5 * (I[0] + I[1])) <= 0.5 * (I[1] - I[0])
    lo = float(dvals.min())
    hi = v_max if in_I else float(dvals.max())
    if not hi > lo:
        raise ConstructionError("degenerate certificate interval")

    eps = tol / (10 * F.lipschitz)

    def template(s):
        ent = [(X2, s + n0)]
        if Q:
            ent.append((Q, 1))
        return ent + [(X1, None), (H, 1)]

    blocks, starts, ang_err = _steer_blocks(sys, template, visits, eps, n0)
    ts = np.linspace(I[0], I[1], n_targets)
    targets = np.asarray(F(xt[0], xt[1], wrap(ts)))
    shadow = (n0 + 1) * min(len(X1), len(X2)) - margin - len(H) - len(Q)
    err = _witness_error(sys, ang_err, max(shadow, 0))
    grid = _evaluate_targets(sys, X1, H, blocks, X2, ts, targets, lambda t: t - j * alpha, err,
                             tol, len(blocks), margin)
    params = {
        "X1": list(X1), "X2": list(X2), "Q": list(Q), "H": list(H), "j": j, "j0": j,
        "I": list(I), "eps_delta": eps_delta, "alpha": alpha, "steer_eps": eps,
        "angle_error": ang_err, "visits": visits, "horizon_blocks": len(blocks), "margin": margin,
        "n0": n0, "tol": tol, "x_max": list(xt), "t_max": t_max, "F_max": v_max,
        "report_value": report.value, "depth": sys.depth, "layout": "nonperiodic", "match_depth": match,
        "visit_starts": starts,
    }
    return IntervalCertificate("rphi2", (lo, hi), grid, params, _model_dict(sys))


# ---------------------------------------------------------------------------
# independent re-evaluation


def revalidate_certificate(cert: IntervalCertificate | dict) -> dict:
    """Re-check every grid point from the serialized certificate alone.

    Symbols around each visit are regenerated from the block list, embedded
    digit by digit in plain Python and combined with angles ``t + p*alpha``;
    the deep parts of long runs are bounded by the fiber maximum over their
    cycle points plus the Lipschitz shadowing term.
    """
    d = cert.to_dict() if isinstance(cert, IntervalCertificate) else cert
    p, model = d["parameters"], d["model"]
    F = observable_from_dict(model["observable"])
    base, digits = model["embedding"]["base"], model["embedding"]["digits"]
    depth = int(p["depth"])
    alpha = float(model["alpha"])
    margin = int(p["margin"])
    r = 1.0 / base
    L = F.lipschitz
    tail = lambda m: max(digits) * r ** (m + 1) / (1 - r)

    if p["layout"] == "periodic":
        left, core, tail_w = tuple(p["Q"]), tuple(p["H"]), tuple(p["Q"])
        shift_t = 0.0
    else:
        left, core, tail_w = tuple(p["X1"]), tuple(p["H"]), tuple(p["X2"])
        shift_t = -p["j"] * alpha

    results = []
    cache: dict = {}
    for g in d["grid"]:
        counts = tuple(g["counts"])
        if counts not in cache:
            cache[counts] = _naive_points(left, core, _blocks_from(p, counts), tail_w,
                                          digits, r, depth, margin, F, L, tail)
        pts, interior = cache[counts]
        t0 = g["t"] + shift_t
        est = -math.inf
        for pos, xs, xu in pts:
            ang = t0 + float(pos) * alpha
            ang -= math.floor(ang)
            est = max(est, float(F(xs, xu, ang)))
        ok = abs(est - g["target"]) <= g["error_bound"] and interior < est
        results.append({"t": g["t"], "estimate": est, "target": g["target"], "ok": bool(ok)})
    frac = sum(x["ok"] for x in results) / max(len(results), 1)
    return {"fraction": frac, "points": results}


def _blocks_from(p: dict, counts: tuple) -> list:
    """Rebuild the witness block list from the steered counts."""
    if p["layout"] == "periodic":
        Q, H = tuple(p["Q"]), tuple(p["H"])
        words = [Q, H] * (len(counts) // 2)
    else:
        X1, X2, Q, H = (tuple(p[k]) for k in ("X1", "X2", "Q", "H"))
        unit = [X2] + ([Q] if Q else []) + [X1, H]
        words = unit * (len(counts) // len(unit))
    return list(zip(words, counts))


def _naive_points(left, core, blocks, tail_w, digits, r, depth, margin, F, L, tail):
    seq: list[int] = list(core)
    spans = []
    for w, c in blocks:
        a = len(seq)
        seq.extend(list(w) * c)
        spans.append((a, len(seq), tuple(w)))
    seq.extend(list(tail_w) * (depth // len(tail_w) + 2))
    n_pad = (depth // len(left) + 2) * len(left)
    full = list(left) * (n_pad // len(left)) + seq

    def point(p):
        xu = sum(digits[full[n_pad + p + i]] * r ** (i + 1) for i in range(depth))
        xs = sum(digits[full[n_pad + p - i]] * r ** i for i in range(1, depth + 1))
        return xs, xu

    def cycle_point(w, k):
        m = len(w)
        xu = sum(digits[w[(k + i) % m]] * r ** (i + 1) for i in range(depth))
        xs = sum(digits[w[(k - i) % m]] * r ** i for i in range(1, depth + 1))
        return xs, xu

    horizon = len(blocks)
    pts = []
    interior = -math.inf
    for a, b, w in spans[horizon // 2:horizon]:
        if b - a <= 2 * margin + len(w):
            rng = range(a, b)
        else:
            rng = list(range(a, a + margin)) + list(range(b - margin, b))
            best = max(float(f_F(F, *cycle_point(w, k))[0]) for k in range(len(w)))
            interior = max(interior, best + L * math.sqrt(2.0) * tail(margin))
        pts.extend((q,) + point(q) for q in rng)
    return pts, interior
