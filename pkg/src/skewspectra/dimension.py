"""Hausdorff dimension of sub-shifts, threshold sets and their profiles.

With the uniform-ratio embedding a sub-shift with block matrix of spectral
radius ``rho`` has dimension ``log(rho) / log(b)`` per axis, so the
estimates below are exact up to the spectral-radius tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .symbolic import (DomainError, EmbeddingSpec, TransitionMatrix, Word, admissible_words,
                       as_word, cylinder_boxes)


class SubSFT:
    """Sequences of the parent shift all of whose ``window``-blocks are allowed.

    The block set is trimmed to its core (blocks with both a predecessor and
    a successor, iterated), so every remaining block extends to a
    bi-infinite sequence.  Presents the same interface as
    :class:`TransitionMatrix` with memory ``window - 1``.
    """

    def __init__(self, parent: TransitionMatrix, window: int, blocks: Iterable[Sequence[int]]):
        if window < 2:
            raise DomainError("window must be >= 2")
        self.parent = parent
        self.window = int(window)
        kept = {as_word(b) for b in blocks}
        for b in kept:
            if len(b) != window or not parent.is_admissible(b):
                raise DomainError("blocks must be parent-admissible words of the window length")
        self.blocks = self._trim(kept)
        self._index = {b: i for i, b in enumerate(self.blocks)}
        self._next: dict[Word, list[int]] = {}
        for b in self.blocks:
            self._next.setdefault(b[:-1], []).append(b[-1])
        self._factors: dict[int, set] = {}

    @staticmethod
    def _trim(blocks: set) -> list[Word]:
        while True:
            heads = {b[:-1] for b in blocks}
            tails = {b[1:] for b in blocks}
            keep = {b for b in blocks if b[1:] in heads and b[:-1] in tails}
            if keep == blocks:
                return sorted(keep)
            blocks = keep

    # interface shared with TransitionMatrix --------------------------------
    @property
    def size(self) -> int:
        return self.parent.size

    @property
    def memory(self) -> int:
        return self.window - 1

    @property
    def empty(self) -> bool:
        return not self.blocks

    def _short_factors(self, n: int) -> set:
        if n not in self._factors:
            self._factors[n] = {b[i:i + n] for b in self.blocks for i in range(self.window - n + 1)}
        return self._factors[n]

    def is_admissible(self, w: Sequence[int]) -> bool:
        w = as_word(w)
        if any(a < 0 or a >= self.size for a in w):
            raise DomainError("symbol out of range")
        if len(w) < self.window:
            return w in self._short_factors(len(w)) if w else True
        return all(w[i:i + self.window] in self._index for i in range(len(w) - self.window + 1))

    def successors(self, context: Sequence[int]) -> list[int]:
        ctx = as_word(context)
        if len(ctx) >= self.memory:
            return sorted(self._next.get(ctx[len(ctx) - self.memory:], []))
        return [a for a in range(self.size) if ctx + (a,) in self._short_factors(len(ctx) + 1)]

    def admissible_words(self, length: int) -> np.ndarray:
        if length < 1:
            return np.zeros((1, 0), dtype=np.int64)
        if length <= self.window:
            words = sorted(self._short_factors(length))
            return np.asarray(words, dtype=np.int64).reshape(len(words), length)
        words = [b for b in self.blocks]
        for _ in range(length - self.window):
            words = [w + (a,) for w in words for a in self._next.get(w[len(w) - self.memory:], [])]
        return np.asarray(words, dtype=np.int64).reshape(len(words), length)

    def is_transitive(self) -> bool:
        if self.empty:
            return False
        n, _ = connected_components(csr_matrix(self.block_matrix()), directed=True, connection="strong")
        return n == 1

    def block_matrix(self) -> np.ndarray:
        """Adjacency of ``window``-blocks overlapping in ``window - 1`` symbols."""
        n = len(self.blocks)
        A = np.zeros((n, n), dtype=np.int64)
        for i, b in enumerate(self.blocks):
            for a in self._next.get(b[1:], []):
                A[i, self._index[b[1:] + (a,)]] = 1
        return A

    def to_dict(self) -> dict:
        return {"window": self.window, "blocks": [list(b) for b in self.blocks]}

    @classmethod
    def from_dict(cls, parent: TransitionMatrix, d: dict) -> "SubSFT":
        return cls(parent, int(d["window"]), [tuple(b) for b in d["blocks"]])

    def __repr__(self):
        return f"SubSFT(window={self.window}, blocks={len(self.blocks)})"


def sub_sft_for_threshold(sys, t: float, window: int, mode: str = "inner") -> SubSFT:
    """Block approximation of ``{x : f_F(sigma^n x) <= t for all n}``.

    Blocks of length ``window`` carry position 0 at index ``window // 2``.
    ``inner`` keeps a block when the upper bound of ``f_F`` over its cylinder
    is ``<= t``, so every sequence of the result lies in the threshold set
    (lower dimension bound).  ``outer`` keeps it when the lower bound is
    ``<= t``, so the result contains the threshold set (upper bound).
    """
    if window < 2:
        raise DomainError("window must be >= 2")
    if mode not in ("inner", "outer"):
        raise DomainError("mode must be 'inner' or 'outer'")
    parent = sys.sft.parent if isinstance(sys.sft, SubSFT) else sys.sft
    words = admissible_words(parent, window)
    lo, hi = sys.F.fiber_range(*cylinder_boxes(words, window // 2, sys.spec))
    keep = (hi <= t) if mode == "inner" else (lo <= t)
    return SubSFT(parent, window, [tuple(int(a) for a in w) for w in words[keep]])


# ---------------------------------------------------------------------------
# dimension estimates


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    method: str
    params: dict = field(default_factory=dict)
    slack: float = 0.0


def _irreducible_radius(A: np.ndarray, tol: float, max_iter: int) -> tuple[float, float]:
    """Perron root of an irreducible non-negative matrix with its Collatz-Wielandt bracket width."""
    n = A.shape[0]
    M = A.astype(float) + np.eye(n)
    x = np.ones(n)
    lo, hi = 0.0, math.inf
    for _ in range(max_iter):
        y = M @ x
        ratio = y / x
        lo, hi = float(ratio.min()), float(ratio.max())
        if hi - lo <= tol * hi:
            break
        x = y / y.max()
    else:  # pragma: no cover - pathological spectra
        ev = float(np.max(np.abs(np.linalg.eigvals(M))))
        return ev - 1.0, 0.0
    return 0.5 * (lo + hi) - 1.0, hi - lo


def spectral_radius(A: np.ndarray, tol: float = 1e-12, max_iter: int = 100000) -> tuple[float, float]:
    """``(rho, bracket)`` by power iteration on ``A + I`` per strongly connected component."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0, 0.0
    n_comp, labels = connected_components(csr_matrix(A), directed=True, connection="strong")
    best, width = 0.0, 0.0
    for c in range(n_comp):
        idx = np.flatnonzero(labels == c)
        sub = A[np.ix_(idx, idx)]
        if sub.sum() == 0:
            continue
        rho, w = _irreducible_radius(sub, tol, max_iter)
        if rho > best:
            best, width = rho, w
    return best, width


def hd_sft(sub, spec: EmbeddingSpec, axes: str = "both") -> DimensionEstimate:
    """``log(rho) / log(b)`` per axis, doubled for ``axes='both'``."""
    if axes not in ("unstable", "stable", "both"):
        raise DomainError("axes must be 'unstable', 'stable' or 'both'")
    if isinstance(sub, SubSFT):
        if sub.empty:
            return DimensionEstimate(0.0, "empty", {"axes": axes})
        A = sub.block_matrix()
        params = {"axes": axes, "window": sub.window, "blocks": len(sub.blocks)}
    else:
        A = sub.adjacency().astype(np.int64)
        params = {"axes": axes, "window": 2}
    rho, width = spectral_radius(A)
    if rho <= 1.0:
        return DimensionEstimate(0.0, "spectral_radius", params | {"rho": rho})
    per_axis = math.log(rho) / math.log(spec.base)
    mult = 2.0 if axes == "both" else 1.0
    slack = mult * width / (rho * math.log(spec.base))
    return DimensionEstimate(mult * per_axis, "spectral_radius", params | {"rho": rho}, slack)


def cylinder_sampler(sft, spec: EmbeddingSpec, axes: str = "both") -> Callable[[int], tuple]:
    """Depth ``k`` -> lower corners of the embedded depth-``k`` cylinders."""

    def sample(k: int):
        if axes == "both":
            words = admissible_words(sft, 2 * k)
            xs_lo, _, xu_lo, _ = cylinder_boxes(words, k, spec)
            return xs_lo, xu_lo
        words = admissible_words(sft, k)
        _, _, xu_lo, _ = cylinder_boxes(words, 0, spec)
        return np.zeros_like(xu_lo), xu_lo

    return sample


def box_dimension(sampler: Callable[[int], tuple], depths: Sequence[int], base: int) -> DimensionEstimate:
    """Least-squares slope of ``log N_k`` against ``k log(base)``.

    ``N_k`` is the number of grid boxes of side ``base**-k`` hit by the points
    returned by ``sampler(k)``.  Depths with no points are skipped.
    """
    depths = list(depths)
    if len(depths) < 3:
        raise DomainError("box_dimension needs at least 3 depths")
    ks, logs = [], []
    for k in depths:
        xs, xu = sampler(k)
        xs, xu = np.asarray(xs), np.asarray(xu)
        if xs.size == 0:
            continue
        scale = float(base) ** k
        # nudge inwards so lower corners on a grid line land in their own box
        ix = np.floor(xs * scale + 1e-9).astype(np.int64)
        iu = np.floor(xu * scale + 1e-9).astype(np.int64)
        n = np.unique(np.stack([ix, iu], axis=1), axis=0).shape[0]
        ks.append(k * math.log(base))
        logs.append(math.log(n))
    if not ks:
        return DimensionEstimate(0.0, "empty", {"depths": depths})
    if len(ks) < 2:
        raise DomainError("fewer than 2 non-empty depths")
    x, y = np.asarray(ks), np.asarray(logs)
    slope, icept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + icept))))
    return DimensionEstimate(float(slope), "box_counting", {"depths": depths}, resid)


# ---------------------------------------------------------------------------
# profiles


@dataclass
class ProfileRow:
    t: float
    dim_lower: float
    dim_upper: float
    classification: str = ""


@dataclass
class Profile:
    rows: list
    c_estimate: float | None
    window: int


def profile_L(sys, t_grid: Sequence[float], window: int = 4, zero_tol: float = 0.01,
              classifier: Callable[[float], str] | None = None) -> Profile:
    """Dimension bounds of the threshold sets along ``t_grid``.

    ``c_estimate`` is the largest ``t`` whose upper bound is below ``zero_tol``.
    ``classifier(t)``, when given, fills the ``classification`` column.
    """
    ts = [float(t) for t in t_grid]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise DomainError("t_grid must be sorted")
    rows = []
    for t in ts:
        lo = hd_sft(sub_sft_for_threshold(sys, t, window, "inner"), sys.spec).value
        hi = hd_sft(sub_sft_for_threshold(sys, t, window, "outer"), sys.spec).value
        rows.append(ProfileRow(t, lo, hi, classifier(t) if classifier else ""))
    zero = [r.t for r in rows if r.dim_upper < zero_tol]
    return Profile(rows, max(zero) if zero else None, window)
