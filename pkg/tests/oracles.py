"""Independent reference implementations used to check the library.

Nothing here imports the code under test except plain data types; each
oracle recomputes its quantity the slow, obvious way (mpmath at high
precision, Fractions, brute-force loops).
"""

import itertools
import math
from fractions import Fraction

import mpmath

mpmath.mp.dps = 60


def cf_value_mp(period, prefix=(), n_periods=200):
    """``[prefix; period, period, ...]`` by backward recursion in mpmath."""
    digits = list(prefix) + list(period) * n_periods
    x = mpmath.mpf(digits[-1])
    for a in reversed(digits[:-1]):
        x = a + 1 / x
    return x


def gauss_f_periodic_mp(word, k):
    """``f`` at shift ``k`` of ``word^inf``: ``[a_k; a_k+1, ...] + [0; a_k-1, a_k-2, ...]``."""
    p = len(word)
    fwd = [word[(k + i) % p] for i in range(p)]
    bwd = [word[(k - 1 - i) % p] for i in range(p)]
    return cf_value_mp(fwd) + 1 / cf_value_mp(bwd)


def markov_periodic_mp(word):
    return max(gauss_f_periodic_mp(word, k) for k in range(len(word)))


def markov_triples_brute(z_max):
    out = []
    for z in range(1, z_max + 1):
        for y in range(1, z + 1):
            # x^2 - 3yz x + (y^2 + z^2) = 0
            disc = 9 * y * y * z * z - 4 * (y * y + z * z)
            if disc < 0:
                continue
            r = math.isqrt(disc)
            if r * r != disc:
                continue
            for x in {(3 * y * z - r) // 2, (3 * y * z + r) // 2}:
                if 1 <= x <= y and x * x + y * y + z * z == 3 * x * y * z:
                    out.append((x, y, z))
    return sorted(set(out), key=lambda t: (t[2], t[1], t[0]))


def naive_window(left, core, right, offset, lo, hi):
    """Symbols of ``left^inf core right^inf`` (shifted by ``offset``) at positions ``lo..hi-1``."""
    out = []
    for n in range(lo, hi):
        k = n + offset
        if k < 0:
            out.append(left[k % len(left)])
        elif k < len(core):
            out.append(core[k])
        else:
            out.append(right[(k - len(core)) % len(right)])
    return out


def naive_scheduled_window(left, core, blocks, tail, lo, hi):
    seq = list(core)
    for w, c in blocks:
        seq.extend(list(w) * c)
    need = hi + 1
    while len(seq) < need:
        seq.extend(tail)
    out = []
    for k in range(lo, hi):
        out.append(left[k % len(left)] if k < 0 else seq[k])
    return out


def exact_embed(fwd, bwd, digits, base):
    """Fractions ``x_u = sum d(a_i) b^-(i+1)``, ``x_s = sum d(a_-i) b^-i``."""
    r = Fraction(1, base)
    xu = sum(digits[a] * r ** (i + 1) for i, a in enumerate(fwd))
    xs = sum(digits[a] * r ** (i + 1) for i, a in enumerate(bwd))
    return xs, xu


def periodic_xu_exact(period_digits, base):
    """``x_u`` of a purely periodic forward digit string, as a Fraction."""
    p = len(period_digits)
    r = Fraction(1, base)
    one = sum(d * r ** (i + 1) for i, d in enumerate(period_digits))
    return one / (1 - r ** p)


def brute_steer(alpha, k, r, t1, t2, eps, n_min, n_max):
    for n in range(n_min, n_max):
        ph = t1 + float(n * k + r) * alpha
        u = ph - math.floor(ph)
        d = abs(u - t2)
        if min(d, 1 - d) < eps:
            return n
    return None


def cylinder_sup_xu(word, digits, base):
    """Exact sup of ``x_u`` over the cylinder fixing the forward word."""
    r = Fraction(1, base)
    xu = sum(digits[a] * r ** (i + 1) for i, a in enumerate(word))
    return xu + max(digits) * r ** (len(word) + 1) / (1 - r)


def all_words(alphabet, length):
    return list(itertools.product(range(alphabet), repeat=length))
