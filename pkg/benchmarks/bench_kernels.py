"""Time the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once (JIT compilation excluded), then timed as the
best of ``--repeat`` runs.  Outputs are compared before timing.
"""

import argparse
import math
import time

import numpy as np

from skewspectra import _accel


def best_of(fn, args, repeat):
    fn(*args)
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng):
    words = rng.integers(1, 3, size=(4096, 12)).astype(np.int64)
    yield "cf_shift_values", (words, 40), 1e-12

    digits = rng.choice([0.0, 2.0], size=200_000)
    yield "embed_windows", (digits, 40, 100_000, 40, 1.0 / 3.0), 1e-12

    x = np.linspace(0.0, 1.0, 20_000)
    n = 50
    shift = rng.random(n)
    amp = 0.05 * rng.random((n, 3))
    freq = np.tile(np.arange(1.0, 4.0), (n, 1))
    phase = rng.random((n, 3))
    yield "compose_trig", (x, shift, amp, freq, phase), 1e-9

    alpha = (math.sqrt(5.0) - 1.0) / 2.0
    yield "steer_scan", (alpha, 3, 1, 0.1, 0.7, 1e-9, 0, 2_000_000), 0.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba unavailable (or disabled); nothing to compare")
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, call_args, tol in cases(rng):
        f_np = getattr(_accel, f"{name}_numpy")
        f_nb = getattr(_accel, f"{name}_numba")
        a, b = f_np(*call_args), f_nb(*call_args)
        for u, v in zip(np.atleast_1d(a) if not isinstance(a, tuple) else a,
                        np.atleast_1d(b) if not isinstance(b, tuple) else b):
            assert np.allclose(u, v, rtol=0, atol=tol), f"{name}: backends disagree"
        t_np = best_of(f_np, call_args, args.repeat)
        t_nb = best_of(f_nb, call_args, args.repeat)
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
