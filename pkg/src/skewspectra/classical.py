"""Classical Markov and Lagrange spectra via continued fractions.

Periodic tails are handled exactly: the value of a purely periodic
continued fraction is a quadratic surd ``(p + q*sqrt(d)) / r``, and sums and
reciprocals of surds from the same field stay in the field.  Comparisons
across fields go through rational approximations with 10**-40 accuracy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .symbolic import BiSequence, DomainError, Word, as_word

DIGIT_CAP = 10 ** 6
_PREC = 10 ** 40


# ---------------------------------------------------------------------------
# quadratic surds


@dataclass(frozen=True)
class QuadSurd:
    """``(p + q*sqrt(d)) / r`` with integers and ``r > 0``."""

    p: int
    q: int
    d: int
    r: int = 1

    def __post_init__(self):
        p, q, d, r = self.p, self.q, self.d, self.r
        if r == 0:
            raise ZeroDivisionError("surd with zero denominator")
        if d < 0:
            raise DomainError("negative radicand")
        s = math.isqrt(d)
        if s * s == d:
            p, q, d = p + q * s, 0, 0
        if q == 0:
            d = 0
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        if g > 1:
            p, q, r = p // g, q // g, r // g
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "r", r)

    @classmethod
    def rational(cls, x) -> "QuadSurd":
        x = Fraction(x)
        return cls(x.numerator, 0, 0, x.denominator)

    def _field(self, other: "QuadSurd") -> int:
        if self.d and other.d and self.d != other.d:
            raise DomainError("surds from different quadratic fields")
        return self.d or other.d

    def __add__(self, other):
        if not isinstance(other, QuadSurd):
            other = QuadSurd.rational(other)
        d = self._field(other)
        return QuadSurd(self.p * other.r + other.p * self.r, self.q * other.r + other.q * self.r,
                        d, self.r * other.r)

    __radd__ = __add__

    def __neg__(self):
        return QuadSurd(-self.p, -self.q, self.d, self.r)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QuadSurd) else -Fraction(other))

    def __mul__(self, other):
        if not isinstance(other, QuadSurd):
            other = QuadSurd.rational(other)
        d = self._field(other)
        return QuadSurd(self.p * other.p + self.q * other.q * d,
                        self.p * other.q + self.q * other.p, d, self.r * other.r)

    __rmul__ = __mul__

    def reciprocal(self) -> "QuadSurd":
        # r / (p + q sqrt d) = r (p - q sqrt d) / (p^2 - q^2 d)
        den = self.p * self.p - self.q * self.q * self.d
        if den == 0:
            raise ZeroDivisionError("reciprocal of zero surd")
        return QuadSurd(self.r * self.p, -self.r * self.q, self.d, den)

    def __truediv__(self, other):
        if not isinstance(other, QuadSurd):
            other = QuadSurd.rational(other)
        return self * other.reciprocal()

    def to_fraction(self, scale: int = _PREC) -> Fraction:
        """Rational within ``1/scale`` of the exact value (floor of the root)."""
        root = math.isqrt(self.q * self.q * self.d * scale * scale)
        num = self.p * scale + (root if self.q >= 0 else -root - 1)
        return Fraction(num, self.r * scale)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __lt__(self, other):
        return self.to_fraction() < _frac(other)

    def __le__(self, other):
        return self.to_fraction() <= _frac(other)

    def __gt__(self, other):
        return self.to_fraction() > _frac(other)

    def __ge__(self, other):
        return self.to_fraction() >= _frac(other)

    def __str__(self):
        if self.q == 0:
            return f"{self.p}/{self.r}" if self.r != 1 else f"{self.p}"
        return f"({self.p}{'+' if self.q >= 0 else '-'}{abs(self.q)}*sqrt({self.d}))/{self.r}"


def _frac(x) -> Fraction:
    return x.to_fraction() if isinstance(x, QuadSurd) else Fraction(x)


# ---------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class CFDigits:
    """``[prefix..., period, period, ...]``; an empty period means a finite expansion."""

    prefix: Word = ()
    period: Word = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", as_word(self.prefix))
        object.__setattr__(self, "period", as_word(self.period))
        if not self.prefix and not self.period:
            raise DomainError("empty continued fraction")
        if any(a < 1 for a in self.prefix + self.period):
            raise DomainError("continued fraction digits must be >= 1")


@dataclass(frozen=True)
class CFValue:
    value: float
    error_bound: float
    exact: QuadSurd | None = None


def _matrix(word: Sequence[int]) -> tuple[int, int, int, int]:
    """Product of ``[[a, 1], [1, 0]]``: returns ``(P, P', Q, Q')``."""
    a11, a12, a21, a22 = 1, 0, 0, 1
    for a in word:
        a11, a12 = a11 * a + a12, a11
        a21, a22 = a21 * a + a22, a21
    return a11, a12, a21, a22


def periodic_cf_surd(period: Sequence[int]) -> QuadSurd:
    """Exact value of ``[period, period, ...]`` (the root > 1 of its fixed-point quadratic)."""
    P, P1, Q, Q1 = _matrix(period)
    # Q x^2 + (Q1 - P) x - P1 = 0
    b = P - Q1
    return QuadSurd(b, 1, b * b + 4 * P1 * Q, 2 * Q)


def cf_surd(prefix: Sequence[int], period: Sequence[int]) -> QuadSurd:
    """Exact value of ``[prefix, period, period, ...]``."""
    if not period:
        P, _, Q, _ = _matrix(prefix)
        return QuadSurd.rational(Fraction(P, Q))
    y = periodic_cf_surd(period)
    if not prefix:
        return y
    P, P1, Q, Q1 = _matrix(prefix)
    return (y * P + P1) / (y * Q + Q1)


def cf_eval(d: CFDigits, tail_mode: str = "periodic-exact", n_terms: int | None = None) -> CFValue:
    """Evaluate a continued fraction.

    ``truncate`` uses the finite convergent of ``prefix + period*k`` (enough
    copies for ``n_terms`` digits) with the bound ``1/(q_n (q_n + q_{n-1}))``;
    ``periodic-exact`` solves the quadratic of the repeating block.
    """
    if tail_mode == "periodic-exact":
        s = cf_surd(d.prefix, d.period)
        return CFValue(float(s), 0.0, s)
    if tail_mode != "truncate":
        raise DomainError(f"unknown tail mode {tail_mode!r}")
    digits = list(d.prefix)
    if d.period:
        n_terms = n_terms or 40
        while len(digits) < n_terms:
            digits.extend(d.period)
        digits = digits[:max(n_terms, len(d.prefix))]
    P, _, Q, Q1 = _matrix(digits)
    if not d.period:
        return CFValue(P / Q, 0.0, QuadSurd.rational(Fraction(P, Q)))
    return CFValue(P / Q, 1.0 / (Q * (Q + Q1)), None)


# ---------------------------------------------------------------------------
# the Gauss-shift observable


@dataclass(frozen=True)
class SpectrumSample:
    value: float
    witness: BiSequence
    kind: str
    error_bound: float
    approximate: bool = False
    exact: str | None = None
    info: dict = field(default_factory=dict, compare=False)


def _over_cap(words: Iterable[Sequence[int]], cap: int) -> bool:
    return any(a > cap for w in words for a in w)


def f_gauss_exact(s: BiSequence):
    """``(value_fraction, surd_or_None)`` of ``[a_0; a_1, ...] + [0; a_-1, a_-2, ...]``."""
    fp, fq = s.forward_structure()
    bp, bq = s.backward_structure()
    x = cf_surd(fp, fq)
    y = cf_surd(bp, bq)
    try:
        total = x + y.reciprocal()
        return total.to_fraction(), total
    except DomainError:
        return x.to_fraction() + y.reciprocal().to_fraction(), None


def f_gauss(s: BiSequence, horizon: int = 64, cap: int = DIGIT_CAP) -> tuple[float, float]:
    """``(value, error_bound)``; exact for structural sequences, truncated otherwise."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    if s.is_structural:
        fp, fq = s.forward_structure()
        bp, bq = s.backward_structure()
        if _over_cap((fp, fq, bp, bq), cap):
            return math.inf, 0.0
        val, _ = f_gauss_exact(s)
        return float(val), 0.0
    fwd = s.window(0, horizon + 1)
    bwd = s.window(-horizon, 0)[::-1]
    if fwd.max() > cap or bwd.max() > cap:
        return math.inf, 0.0
    xv = cf_eval(CFDigits(fwd[:1], fwd[1:]), "truncate", n_terms=horizon + 1)
    yv = cf_eval(CFDigits(bwd[:1], bwd[1:]), "truncate", n_terms=horizon)
    # |1/y - 1/y'| <= |y - y'| since y, y' >= 1
    return xv.value + 1.0 / yv.value, xv.error_bound + yv.error_bound


def _fib(n: int) -> int:
    a, b = 1, 1
    for _ in range(max(n - 1, 0)):
        a, b = b, a + b
    return a


def _periodic_markov(q: Word, cap: int) -> tuple[Fraction, QuadSurd | None, int]:
    """Exact max of f over the cyclic shifts of ``q^inf``: ``(value, surd, argmax shift)``."""
    if _over_cap([q], cap):
        return Fraction(10 ** 30), None, 0
    approx = _accel.cf_shift_values(np.asarray([q], dtype=np.int64), _terms_for(q))[0]
    top = float(approx.max())
    cands = [k for k in range(len(q)) if approx[k] >= top - 1e-9 * max(1.0, top)]
    base = BiSequence.periodic(q)
    best = None
    for k in cands:
        v, surd = f_gauss_exact(base.shift(k))
        if best is None or v > best[0]:
            best = (v, surd, k)
    return best


def _terms_for(q: Sequence[int]) -> int:
    # each pair of digits at least doubles the convergent denominator
    return max(80, 4 * len(q))


def markov_value_classical(s: BiSequence, horizon: int = 64, cap: int = DIGIT_CAP) -> SpectrumSample:
    """``sup_n f(sigma^n s)`` for structural ``s``.

    Shifts with ``|n| <= horizon`` are evaluated exactly; the two periodic
    tails contribute the exact max over one period.  ``error_bound`` covers
    shifts beyond the horizon that see the core at depth > horizon.
    """
    if not s.is_structural:
        raise DomainError("markov_value_classical needs periodic tails (scheduled sequences unsupported)")
    if s.kind == "periodic":
        v, surd, k = _periodic_markov(s.right, cap)
        if v > 10 ** 29:
            return SpectrumSample(math.inf, s, "markov", 0.0, info={"over_cap": True})
        return SpectrumSample(float(v), s, "markov", 0.0, exact=str(surd) if surd else None,
                              info={"argmax_shift": k})
    best = None
    tails = []
    for q in (s.right, s.left):
        v, surd, _ = _periodic_markov(q, cap)
        tails.append(v)
        if best is None or v > best[0]:
            best = (v, surd, "tail")
    if max(tails) > 10 ** 29:
        return SpectrumSample(math.inf, s, "markov", 0.0, info={"over_cap": True})
    for n in range(-horizon, horizon + 1):
        t = s.shift(n)
        fp, fq = t.forward_structure()
        bp, bq = t.backward_structure()
        if _over_cap((fp, bp), cap):
            return SpectrumSample(math.inf, s, "markov", 0.0, info={"over_cap": True})
        v, surd = f_gauss_exact(t)
        if v > best[0]:
            best = (v, surd, n)
    extent = len(s.core) + abs(s.offset)
    m = horizon - extent
    err = 1.0 / _fib(m) ** 2 if m > 0 else math.inf
    return SpectrumSample(float(best[0]), s, "markov", err, exact=str(best[1]) if best[1] else None,
                          info={"argmax": best[2]})


def lagrange_value_classical(s: BiSequence, cap: int = DIGIT_CAP) -> SpectrumSample:
    """``limsup_{n -> inf} f(sigma^n s)``: the exact max over one right-tail period."""
    if not s.is_structural:
        raise DomainError("lagrange_value_classical needs a periodic right tail")
    v, surd, k = _periodic_markov(s.right_cycle(), cap)
    if v > 10 ** 29:
        return SpectrumSample(math.inf, s, "lagrange", 0.0, info={"over_cap": True})
    return SpectrumSample(float(v), s, "lagrange", 0.0, exact=str(surd) if surd else None,
                          info={"argmax_shift": k})


# ---------------------------------------------------------------------------
# batch enumeration of periodic words


def periodic_words(digits: Sequence[int], max_period: int, min_period: int = 1) -> Iterable[Word]:
    """Every word over ``digits`` of length ``min_period..max_period``."""
    for p in range(min_period, max_period + 1):
        yield from itertools.product(digits, repeat=p)


def periodic_markov_values(words: Sequence[Sequence[int]]) -> np.ndarray:
    """Markov values of ``w^inf`` for each word; floats from the kernel, argmax refined exactly."""
    words = [as_word(w) for w in words]
    out = np.empty(len(words))
    by_len: dict[int, list[int]] = {}
    for i, w in enumerate(words):
        by_len.setdefault(len(w), []).append(i)
    for p, idx in by_len.items():
        arr = np.asarray([words[i] for i in idx], dtype=np.int64)
        vals = _accel.cf_shift_values(arr, _terms_for(arr[0]))
        top = vals.max(axis=1)
        for row, i in enumerate(idx):
            cands = np.flatnonzero(vals[row] >= top[row] - 1e-9 * max(1.0, top[row]))
            base = BiSequence.periodic(words[i])
            out[i] = float(max(f_gauss_exact(base.shift(int(k)))[0] for k in cands))
    return out


# ---------------------------------------------------------------------------
# Markov triples and constants


@dataclass(frozen=True, order=True)
class MarkovTriple:
    z: int
    y: int
    x: int

    def __post_init__(self):
        if not (0 < self.x <= self.y <= self.z):
            raise DomainError("triple must satisfy 0 < x <= y <= z")
        if self.x ** 2 + self.y ** 2 + self.z ** 2 != 3 * self.x * self.y * self.z:
            raise DomainError("not a solution of the Markov equation")

    @classmethod
    def of(cls, x: int, y: int, z: int) -> "MarkovTriple":
        a, b, c = sorted((x, y, z))
        return cls(c, b, a)

    def as_tuple(self) -> tuple[int, int, int]:
        return self.x, self.y, self.z

    def spectrum_value(self) -> float:
        return markov_spectrum_point(self.z)


def markov_triples(z_max: int) -> list[MarkovTriple]:
    """All solutions with ``z <= z_max``, walking the Vieta tree from (1, 1, 1)."""
    if z_max < 1:
        raise DomainError("z_max must be >= 1")
    seen = {(1, 1, 1)}
    stack = [(1, 1, 1)]
    while stack:
        x, y, z = stack.pop()
        for nb in ((x, y, 3 * x * y - z), (x, z, 3 * x * z - y), (y, z, 3 * y * z - x)):
            t = tuple(sorted(nb))
            if t[0] >= 1 and t[2] <= z_max and t not in seen:
                seen.add(t)
                stack.append(t)
    return sorted(MarkovTriple.of(*t) for t in seen)


def markov_numbers(z_max: int) -> list[int]:
    return sorted({t.z for t in markov_triples(z_max)})


def markov_spectrum_point(z: int) -> float:
    """``sqrt(9 - 4/z^2)``."""
    return math.sqrt(9.0 - 4.0 / (z * z))


def freiman_constant_surd() -> QuadSurd:
    return QuadSurd(2221564096, 283748, 462, 491993569)


def freiman_constant() -> float:
    """Left end of the largest half-line in the classical spectra."""
    return (2221564096 + 283748 * math.sqrt(462)) / 491993569
