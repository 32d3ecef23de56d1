"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports cleanly and the environment
variable ``SKEWSPECTRA_NO_NUMBA`` is unset (or set to ``0``).  Both paths
are always importable under ``*_numba`` / ``*_numpy`` names so tests and the
benchmark can compare them directly.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("SKEWSPECTRA_NO_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by SKEWSPECTRA_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


TWO_PI = 2.0 * np.pi
_STEER_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# continued fractions over all cyclic shifts of periodic words


def cf_shift_values_numpy(words: np.ndarray, n_terms: int) -> np.ndarray:
    words = np.asarray(words, dtype=np.int64)
    n, p = words.shape
    shifts = np.arange(p)
    fwd = np.zeros((n, p))
    bwd = np.zeros((n, p))
    for i in range(n_terms - 1, 0, -1):
        fwd = 1.0 / (words[:, (shifts + i) % p] + fwd)
        bwd = 1.0 / (words[:, (shifts - 1 - i) % p] + bwd)
    x = words + fwd
    y = words[:, (shifts - 1) % p] + bwd
    return x + 1.0 / y


@njit(cache=True, nogil=True)
def cf_shift_values_numba(words, n_terms):
    n, p = words.shape
    out = np.empty((n, p))
    for w in range(n):
        for k in range(p):
            fv = 0.0
            bv = 0.0
            for i in range(n_terms - 1, 0, -1):
                fv = 1.0 / (words[w, (k + i) % p] + fv)
                bv = 1.0 / (words[w, (k - 1 - i) % p] + bv)
            x = words[w, k] + fv
            y = words[w, (k - 1) % p] + bv
            out[w, k] = x + 1.0 / y
    return out


# ---------------------------------------------------------------------------
# embedding of a run of consecutive orbit points


def embed_windows_numpy(d: np.ndarray, first: int, count: int, depth: int, r: float):
    d = np.asarray(d, dtype=np.float64)
    powers = r ** np.arange(1, depth + 1)
    win = np.lib.stride_tricks.sliding_window_view(d, depth)
    xu = win[first:first + count] @ powers
    xs = win[first - depth:first - depth + count] @ powers[::-1]
    return xs, xu


@njit(cache=True, nogil=True)
def embed_windows_numba(d, first, count, depth, r):
    xs = np.zeros(count)
    xu = np.zeros(count)
    for n in range(count):
        c = first + n
        acc_u = 0.0
        acc_s = 0.0
        p = r
        for i in range(depth):
            acc_u += d[c + i] * p
            acc_s += d[c - 1 - i] * p
            p *= r
        xu[n] = acc_u
        xs[n] = acc_s
    return xs, xu


# ---------------------------------------------------------------------------
# composition of trigonometric circle-map lifts on a grid


def compose_trig_numpy(x, shift, amp, freq, phase):
    y = np.array(x, dtype=np.float64, copy=True)
    for j in range(shift.shape[0]):
        inc = np.full_like(y, shift[j])
        for i in range(amp.shape[1]):
            if amp[j, i] != 0.0:
                inc += amp[j, i] * np.sin(TWO_PI * (freq[j, i] * y + phase[j, i]))
        y = y + inc
    return y


@njit(cache=True, nogil=True)
def compose_trig_numba(x, shift, amp, freq, phase):
    y = x.copy()
    for g in range(y.shape[0]):
        v = y[g]
        for j in range(shift.shape[0]):
            inc = shift[j]
            for i in range(amp.shape[1]):
                if amp[j, i] != 0.0:
                    inc += amp[j, i] * np.sin(TWO_PI * (freq[j, i] * v + phase[j, i]))
            v = v + inc
        y[g] = v
    return y


# ---------------------------------------------------------------------------
# first N >= n_start with d(t1 + (N k + r) alpha, t2) < eps


def steer_scan_numpy(alpha, k, r, t1, t2, eps, n_start, n_count):
    best_n = -1
    best_d = 2.0
    done = 0
    while done < n_count:
        m = min(_STEER_CHUNK, n_count - done)
        ns = np.arange(n_start + done, n_start + done + m, dtype=np.int64)
        ph = t1 + (ns * k + r).astype(np.float64) * alpha
        diff = np.abs((ph - np.floor(ph)) - t2)
        dist = np.minimum(diff, 1.0 - diff)
        hit = np.flatnonzero(dist < eps)
        if hit.size:
            return int(ns[hit[0]]), int(ns[hit[0]]), float(dist[hit[0]])
        i = int(np.argmin(dist))
        if dist[i] < best_d:
            best_d = float(dist[i])
            best_n = int(ns[i])
        done += m
    return -1, best_n, best_d


@njit(cache=True, nogil=True)
def steer_scan_numba(alpha, k, r, t1, t2, eps, n_start, n_count):
    best_n = -1
    best_d = 2.0
    for n in range(n_start, n_start + n_count):
        ph = t1 + float(n * k + r) * alpha
        diff = abs((ph - np.floor(ph)) - t2)
        dist = min(diff, 1.0 - diff)
        if dist < eps:
            return n, n, dist
        if dist < best_d:
            best_d = dist
            best_n = n
    return -1, best_n, best_d


if HAVE_NUMBA:
    cf_shift_values = cf_shift_values_numba
    embed_windows = embed_windows_numba
    compose_trig = compose_trig_numba
    steer_scan = steer_scan_numba
else:  # pragma: no cover
    cf_shift_values = cf_shift_values_numpy
    embed_windows = embed_windows_numpy
    compose_trig = compose_trig_numpy
    steer_scan = steer_scan_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
