"""Subshifts of finite type, structural bi-infinite sequences and the Cantor embedding.

Sequences are never stored as raw streams.  A :class:`BiSequence` is a left
periodic tail, a finite core and either a right periodic tail or a block
schedule ``[(word, count), ...]`` that may be extended lazily.  Position 0 is
the first symbol after the ``;`` in ``(..., a_-1 ; a_0, a_1, ...)``.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import _accel

Word = tuple[int, ...]


class DomainError(ValueError):
    """Raised when an input lies outside an operation's domain."""


class ConstructionError(RuntimeError):
    """Raised when a search or construction fails on valid input."""


def as_word(w: Iterable[int]) -> Word:
    return tuple(int(a) for a in w)


# ---------------------------------------------------------------------------
# transition structures


@dataclass(frozen=True)
class TransitionMatrix:
    """1-step SFT on symbols ``0..size-1`` given by a boolean matrix ``B``."""

    entries: np.ndarray

    def __post_init__(self):
        b = np.array(self.entries, dtype=bool)
        if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] < 1:
            raise DomainError("transition matrix must be square and non-empty")
        if not b.any(axis=1).all() or not b.any(axis=0).all():
            raise DomainError("transition matrix has a stranded symbol (empty row or column)")
        b.setflags(write=False)
        object.__setattr__(self, "entries", b)

    @classmethod
    def full(cls, size: int) -> "TransitionMatrix":
        return cls(np.ones((size, size), dtype=bool))

    @classmethod
    def golden_mean(cls) -> "TransitionMatrix":
        """Two symbols, the pair (1, 1) forbidden."""
        return cls(np.array([[1, 1], [1, 0]], dtype=bool))

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "TransitionMatrix":
        return cls(np.array([[c == "1" for c in row] for row in rows], dtype=bool))

    def to_rows(self) -> list[str]:
        return ["".join("1" if v else "0" for v in row) for row in self.entries]

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def memory(self) -> int:
        return 1

    def allowed(self, a: int, b: int) -> bool:
        return bool(self.entries[a, b])

    def is_transitive(self) -> bool:
        n, _ = connected_components(self.entries.astype(np.int8), directed=True, connection="strong")
        return n == 1

    def is_admissible(self, w: Sequence[int]) -> bool:
        return is_admissible(w, self)

    def successors(self, context: Sequence[int]) -> list[int]:
        if len(context) == 0:
            return list(range(self.size))
        return [int(b) for b in np.flatnonzero(self.entries[context[-1]])]

    def adjacency(self) -> np.ndarray:
        return self.entries.astype(np.float64)

    def __eq__(self, other):
        return isinstance(other, TransitionMatrix) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())


def _check_symbols(w: Sequence[int], size: int) -> np.ndarray:
    arr = np.asarray(w, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= size):
        raise DomainError(f"symbol out of range 0..{size - 1}")
    return arr


def is_admissible(w: Sequence[int], sft) -> bool:
    """True iff every consecutive pair (or every window, for block SFTs) of ``w`` is allowed."""
    if isinstance(sft, TransitionMatrix):
        arr = _check_symbols(w, sft.size)
        if arr.size < 2:
            return True
        return bool(sft.entries[arr[:-1], arr[1:]].all())
    return sft.is_admissible(w)


# ---------------------------------------------------------------------------
# bi-infinite sequences


class Schedule:
    """Right-infinite concatenation of ``(word, count)`` blocks.

    ``extend(i, blocks)`` is called with the index of the next block group
    and the blocks materialized so far; it must return a non-empty list of
    new blocks and be deterministic.  Without ``extend``, ``tail`` repeats
    forever after the listed blocks.
    """

    def __init__(self, blocks: Iterable[tuple[Sequence[int], int]] = (),
                 extend: Callable[[int, list], list] | None = None,
                 tail: Sequence[int] | None = None):
        self._blocks: list[tuple[Word, int]] = []
        self._starts: list[int] = []
        self._end = 0
        self._calls = 0
        self._extend = extend
        self.tail = as_word(tail) if tail is not None else None
        self._lock = threading.Lock()
        for wd, cnt in blocks:
            self._append(as_word(wd), int(cnt))
        if extend is None and self.tail is None and not self._blocks:
            raise DomainError("schedule needs blocks plus an extender or a periodic tail")
        if self.tail is not None and len(self.tail) == 0:
            raise DomainError("empty schedule tail")

    def _append(self, wd: Word, cnt: int):
        if cnt < 0 or (cnt > 0 and len(wd) == 0):
            raise DomainError("blocks need a non-empty word and count >= 0")
        if cnt == 0:
            return
        self._blocks.append((wd, cnt))
        self._starts.append(self._end)
        self._end += len(wd) * cnt

    @property
    def blocks(self) -> list[tuple[Word, int]]:
        return list(self._blocks)

    @property
    def materialized_length(self) -> int:
        return self._end

    def ensure(self, length: int):
        if length <= self._end or self._extend is None:
            return
        with self._lock:
            while self._end < length:
                new = self._extend(self._calls, list(self._blocks))
                self._calls += 1
                if not new:
                    raise DomainError("schedule extender returned no blocks")
                for wd, cnt in new:
                    self._append(as_word(wd), int(cnt))

    def ensure_blocks(self, n_blocks: int):
        if self._extend is None:
            return
        with self._lock:
            while len(self._blocks) < n_blocks:
                new = self._extend(self._calls, list(self._blocks))
                self._calls += 1
                if not new:
                    raise DomainError("schedule extender returned no blocks")
                for wd, cnt in new:
                    self._append(as_word(wd), int(cnt))

    def block_starts(self) -> list[int]:
        return list(self._starts)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Symbols at schedule positions ``lo..hi-1`` (``lo >= 0``)."""
        out = np.empty(max(hi - lo, 0), dtype=np.int64)
        if hi <= lo:
            return out
        self.ensure(hi)
        pos = lo
        if pos < self._end:
            i = bisect.bisect_right(self._starts, pos) - 1
            while pos < min(hi, self._end):
                wd, cnt = self._blocks[i]
                start = self._starts[i]
                stop = min(start + len(wd) * cnt, hi)
                idx = np.arange(pos - start, stop - start) % len(wd)
                out[pos - lo:stop - lo] = np.asarray(wd, dtype=np.int64)[idx]
                pos = stop
                i += 1
        if pos < hi:
            if self.tail is None:
                raise DomainError("schedule exhausted and no tail or extender")
            idx = np.arange(pos - self._end, hi - self._end) % len(self.tail)
            out[pos - lo:] = np.asarray(self.tail, dtype=np.int64)[idx]
        return out

    def to_dict(self) -> dict:
        d = {"blocks": [[list(w), c] for w, c in self._blocks]}
        if self.tail is not None:
            d["tail"] = list(self.tail)
        return d


@dataclass(frozen=True, eq=False)
class BiSequence:
    """Eventually periodic or schedule-generated bi-infinite sequence.

    Base coordinates: ``core`` occupies ``0..len(core)-1``; base index
    ``k < 0`` reads ``left[k mod len(left)]``; base index ``k >= len(core)``
    reads the right periodic word or the schedule.  ``offset`` shifts:
    position ``n`` of the sequence is base index ``n + offset``.
    """

    left: Word
    core: Word = ()
    right: Word | None = None
    schedule: Schedule | None = None
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "left", as_word(self.left))
        object.__setattr__(self, "core", as_word(self.core))
        if self.right is not None:
            object.__setattr__(self, "right", as_word(self.right))
        if len(self.left) == 0:
            raise DomainError("left periodic word must be non-empty")
        if (self.right is None) == (self.schedule is None):
            raise DomainError("exactly one of right tail / schedule is required")
        if self.right is not None and len(self.right) == 0:
            raise DomainError("right periodic word must be non-empty")

    # constructors ----------------------------------------------------------
    @classmethod
    def periodic(cls, q: Sequence[int]) -> "BiSequence":
        q = as_word(q)
        return cls(left=q, core=(), right=q)

    @classmethod
    def eventually_periodic(cls, q_left: Sequence[int], core: Sequence[int],
                            q_right: Sequence[int]) -> "BiSequence":
        return cls(left=q_left, core=core, right=q_right)

    @classmethod
    def scheduled(cls, q_left: Sequence[int], core: Sequence[int], blocks=(),
                  extend=None, tail=None) -> "BiSequence":
        return cls(left=q_left, core=core, schedule=Schedule(blocks, extend=extend, tail=tail))

    @property
    def kind(self) -> str:
        if self.schedule is not None:
            return "scheduled"
        if len(self.core) == 0 and self.left == self.right:
            return "periodic"
        return "eventually_periodic"

    @property
    def is_structural(self) -> bool:
        return self.schedule is None

    # access ----------------------------------------------------------------
    def window(self, lo: int, hi: int) -> np.ndarray:
        """Symbols at positions ``lo..hi-1``."""
        blo, bhi = lo + self.offset, hi + self.offset
        out = np.empty(max(hi - lo, 0), dtype=np.int64)
        if hi <= lo:
            return out
        h = len(self.core)
        idx = np.arange(blo, bhi)
        neg = idx < 0
        if neg.any():
            out[neg] = np.asarray(self.left)[idx[neg] % len(self.left)]
        mid = (idx >= 0) & (idx < h)
        if mid.any():
            out[mid] = np.asarray(self.core)[idx[mid]]
        pos = idx >= h
        if pos.any():
            if self.right is not None:
                out[pos] = np.asarray(self.right)[(idx[pos] - h) % len(self.right)]
            else:
                first = int(idx[pos][0]) - h
                out[pos] = self.schedule.window(first, bhi - h)
        return out

    def __getitem__(self, n: int) -> int:
        return int(self.window(n, n + 1)[0])

    def shift(self, n: int) -> "BiSequence":
        return BiSequence(self.left, self.core, self.right, self.schedule, self.offset + n)

    def __eq__(self, other):
        if not isinstance(other, BiSequence):
            return NotImplemented
        return (self.left == other.left and self.core == other.core and self.right == other.right
                and self.schedule is other.schedule and self.offset == other.offset)

    def __hash__(self):
        return hash((self.left, self.core, self.right, id(self.schedule), self.offset))

    # tail structure --------------------------------------------------------
    def forward_structure(self) -> tuple[Word, Word]:
        """``(prefix, period)`` of ``a_0, a_1, ...`` (structural kinds only)."""
        if self.right is None:
            raise DomainError("scheduled sequences have no periodic right tail")
        o, h = self.offset, len(self.core)
        if o >= h:
            return (), as_word(self.window(0, len(self.right)))
        return as_word(self.window(0, h - o)), self.right

    def backward_structure(self) -> tuple[Word, Word]:
        """``(prefix, period)`` of ``a_-1, a_-2, ...``."""
        o = self.offset
        p = len(self.left)
        if o <= 0:
            return (), as_word(self.window(-p, 0)[::-1])
        return as_word(self.window(-o, 0)[::-1]), self.left[::-1]

    def right_cycle(self) -> Word:
        if self.right is None:
            raise DomainError("scheduled sequences have no periodic right tail")
        return self.right

    def notation(self, max_len: int = 40) -> str:
        """Human-readable ``(L)^inf;core(R)^inf`` form (base coordinates, plus offset)."""
        def s(w):
            return "".join(map(str, w)) if max(w, default=0) < 10 else ",".join(map(str, w))
        left = f"({s(self.left)})^inf"
        core = s(self.core)[:max_len]
        if self.right is not None:
            right = f"({s(self.right)})^inf"
        else:
            parts = [f"({s(w)})^{c}" for w, c in self.schedule.blocks[:8]]
            right = "".join(parts) + ("..." if len(self.schedule.blocks) > 8 or self.schedule.tail is None
                                      else f"({s(self.schedule.tail)})^inf")
        off = f"@{self.offset}" if self.offset else ""
        return f"{left};{core}{right}{off}"

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "left": list(self.left), "core": list(self.core), "offset": self.offset}
        if self.right is not None:
            d["right"] = list(self.right)
        else:
            d.update(self.schedule.to_dict())
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "BiSequence":
        if d.get("right") is not None:
            s = cls(left=d["left"], core=d.get("core", ()), right=d["right"])
        else:
            s = cls.scheduled(d["left"], d.get("core", ()), [(w, c) for w, c in d.get("blocks", [])],
                              tail=d.get("tail"))
        return s.shift(int(d.get("offset", 0)))


def shift(s: BiSequence, n: int) -> BiSequence:
    return s.shift(n)


def check_sequence_admissible(s: BiSequence, sft) -> bool:
    """Admissibility of every finite window, including all junctions.

    Each repeated word is capped at enough copies to contain every window of
    the SFT's span, so long blocks are never materialized.
    """
    span = sft.memory + 1

    def rep(w: Word, cnt: int) -> Word:
        return w * min(cnt, 2 + -(-span // len(w)))

    big = 1 << 30
    parts = [rep(s.left, big), s.core]
    if s.schedule is None:
        parts.append(rep(s.right, big))
    else:
        parts.extend(rep(w, c) for w, c in s.schedule.blocks)
        if s.schedule.tail is not None:
            parts.append(rep(s.schedule.tail, big))
    return is_admissible(sum(parts, ()), sft)


def seq_metric(a: BiSequence, b: BiSequence, max_depth: int) -> tuple[float, bool]:
    """``max(2**-n_plus, 2**-n_minus)`` from window comparison.

    ``n_plus`` is the first index ``k >= 0`` with ``a_k != b_k``; ``n_minus``
    the first ``k >= 1`` with ``a_-k != b_-k``.  Returns ``(value, resolved)``;
    when the windows agree the value is the upper bound ``2**-max_depth`` and
    ``resolved`` is False.
    """
    if max_depth < 1:
        raise DomainError("max_depth must be >= 1")
    fa, fb = a.window(0, max_depth), b.window(0, max_depth)
    ba, bb = a.window(-max_depth, 0)[::-1], b.window(-max_depth, 0)[::-1]
    df = np.flatnonzero(fa != fb)
    db = np.flatnonzero(ba != bb)
    n_plus = int(df[0]) if df.size else None
    n_minus = int(db[0]) + 1 if db.size else None
    if n_plus is None and n_minus is None:
        return 2.0 ** -max_depth, False
    vals = []
    if n_plus is not None:
        vals.append(2.0 ** -n_plus)
    if n_minus is not None:
        vals.append(2.0 ** -n_minus)
    return max(vals), True


# ---------------------------------------------------------------------------
# Cantor embedding


@dataclass(frozen=True)
class EmbeddingSpec:
    """Symbol ``a`` contributes digit ``digits[a]`` in base ``base`` on both axes."""

    base: int
    digits: Word

    def __post_init__(self):
        object.__setattr__(self, "digits", as_word(self.digits))
        n = len(self.digits)
        if n < 1:
            raise DomainError("empty digit map")
        if self.base < max(2, 2 * n - 1):
            raise DomainError(f"base must be >= 2*size-1 = {2 * n - 1}")
        ds = sorted(self.digits)
        if ds[0] < 0 or ds[-1] >= self.base:
            raise DomainError("digits must lie in 0..base-1")
        if any(b - a < 2 for a, b in zip(ds, ds[1:])):
            raise DomainError("digits must be pairwise separated by >= 2")

    @classmethod
    def default(cls, size: int, base: int | None = None) -> "EmbeddingSpec":
        return cls(base if base is not None else max(3, 2 * size - 1), tuple(2 * a for a in range(size)))

    @property
    def size(self) -> int:
        return len(self.digits)

    @property
    def ratio(self) -> float:
        return 1.0 / self.base

    @property
    def max_digit(self) -> int:
        return max(self.digits)

    def holder_constants(self) -> tuple[float, float]:
        """``(C, c)`` with ``|embed(a) - embed(b)| <= C * seq_metric(a, b)**c``."""
        return math.sqrt(2.0) * self.base, math.log2(self.base)

    def default_depth(self) -> int:
        """Depth at which truncation drops below double-precision resolution."""
        return int(math.ceil(54 * math.log(2) / math.log(self.base))) + 2

    def digit_array(self, symbols: np.ndarray) -> np.ndarray:
        return np.asarray(self.digits, dtype=np.float64)[symbols]

    def dimension(self, spectral_radius: float) -> float:
        return 2.0 * math.log(spectral_radius) / math.log(self.base)


@dataclass(frozen=True)
class EmbeddedPoint:
    x_s: float
    x_u: float
    radius: float


def embed(s: BiSequence, spec: EmbeddingSpec, depth: int | None = None) -> EmbeddedPoint:
    """Stable/unstable coordinates of ``s`` truncated at ``depth`` digits per axis."""
    depth = spec.default_depth() if depth is None else depth
    if depth < 1:
        raise DomainError("depth must be >= 1")
    r = spec.ratio
    fwd = spec.digit_array(s.window(0, depth))
    bwd = spec.digit_array(s.window(-depth, 0)[::-1])
    powers = r ** np.arange(1, depth + 1)
    return EmbeddedPoint(float(bwd @ powers), float(fwd @ powers), r ** depth / (1.0 - r))


def embed_orbit(s: BiSequence, spec: EmbeddingSpec, n_lo: int, n_hi: int,
                depth: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Embedded points of ``shift(s, n)`` for ``n_lo <= n < n_hi``."""
    depth = spec.default_depth() if depth is None else depth
    d = spec.digit_array(s.window(n_lo - depth, n_hi + depth))
    return _accel.embed_windows(d, depth, n_hi - n_lo, depth, spec.ratio)


def embed_word_orbit(symbols: np.ndarray, spec: EmbeddingSpec, first: int, count: int,
                     depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`embed_orbit` on a raw symbol array; needs ``depth`` symbols of context both sides."""
    return _accel.embed_windows(spec.digit_array(symbols), first, count, depth, spec.ratio)


def cylinder_box(word: Sequence[int], center: int, spec: EmbeddingSpec, exact: bool = False):
    """Bounding box ``(xs_lo, xs_hi, xu_lo, xu_hi)`` of the cylinder of ``word``.

    ``word[center]`` sits at position 0; ``word[:center]`` are positions
    ``-center..-1``.  Unknown digits are bounded by ``0..max_digit``.
    """
    r = Fraction(1, spec.base) if exact else 1.0 / spec.base
    md = spec.max_digit
    fwd = word[center:]
    bwd = list(reversed(word[:center]))
    xu = sum(spec.digits[a] * r ** (i + 1) for i, a in enumerate(fwd))
    xs = sum(spec.digits[a] * r ** (i + 1) for i, a in enumerate(bwd))
    tail_u = md * r ** (len(fwd) + 1) / (1 - r)
    tail_s = md * r ** (len(bwd) + 1) / (1 - r)
    return xs, xs + tail_s, xu, xu + tail_u


def cylinder_boxes(words: np.ndarray, center: int, spec: EmbeddingSpec):
    """Vectorized float version of :func:`cylinder_box` for a word array."""
    words = np.asarray(words, dtype=np.int64)
    r = spec.ratio
    dig = spec.digit_array(words)
    fwd = dig[:, center:]
    bwd = dig[:, :center][:, ::-1]
    xu = fwd @ (r ** np.arange(1, fwd.shape[1] + 1))
    xs = bwd @ (r ** np.arange(1, bwd.shape[1] + 1))
    tail_u = spec.max_digit * r ** (fwd.shape[1] + 1) / (1 - r)
    tail_s = spec.max_digit * r ** (bwd.shape[1] + 1) / (1 - r)
    return xs, xs + tail_s, xu, xu + tail_u


# ---------------------------------------------------------------------------
# word enumeration and connection


def admissible_words(sft, length: int) -> np.ndarray:
    """All admissible words of ``length`` as an ``(n, length)`` int array."""
    if length < 1:
        return np.zeros((1, 0), dtype=np.int64)
    if isinstance(sft, TransitionMatrix):
        words = np.arange(sft.size, dtype=np.int64)[:, None]
        for _ in range(length - 1):
            last = words[:, -1]
            rows, nxt = np.nonzero(sft.entries[last])
            words = np.concatenate([words[rows], nxt[:, None].astype(np.int64)], axis=1)
        return words
    return sft.admissible_words(length)


def connecting_word(sft, left: Sequence[int], right: Sequence[int], max_len: int = 64) -> Word:
    """Shortest ``W`` with ``left + W + right`` admissible (breadth-first search)."""
    left, right = as_word(left), as_word(right)
    m = sft.memory
    if len(left) < m or len(right) < m:
        raise DomainError(f"endpoint words need at least {m} symbols")
    if not is_admissible(left, sft) or not is_admissible(right, sft):
        raise DomainError("endpoint words must themselves be admissible")
    start = left[-m:]
    frontier: list[tuple[Word, Word]] = [(start, ())]
    seen = {start}
    for _ in range(max_len + 1):
        nxt: list[tuple[Word, Word]] = []
        for ctx, path in frontier:
            if is_admissible(ctx + right[:m], sft):
                return path
            for a in sft.successors(ctx):
                c2 = (ctx + (a,))[-m:]
                if c2 not in seen:
                    seen.add(c2)
                    nxt.append((c2, path + (a,)))
        frontier = nxt
        if not frontier:
            break
    raise DomainError("no connecting word within max_len")


def cycle_points(q: Sequence[int]) -> list[BiSequence]:
    """The ``len(q)`` shifts of the periodic point ``q^inf``."""
    base = BiSequence.periodic(q)
    return [base.shift(i) for i in range(len(q))]


def minimal_period(w: Sequence[int]) -> Word:
    w = as_word(w)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w[:p] * (n // p) == w:
            return w[:p]
    return w
