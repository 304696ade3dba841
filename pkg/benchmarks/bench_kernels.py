"""Time the two interchangeable per-pulse tally kernels on identical
pre-drawn random arrays and confirm they produce identical clicks.

Usage:
    python benchmarks/bench_kernels.py [--pulses N] [--emitters S]
                                       [--mu MU] [--seed SEED] [--repeat R]

The numba flavor is what the package uses by default; the numpy flavor
is the fallback selected by PHOTON_GATE_NUMBA=0.  Run this with numba
enabled (the default) so both flavors are available.
"""

import argparse
import time

import numpy as np

from photon_gate import _kernels


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - start)
    return min(times)


def bench_fixed(args, rng):
    routes = rng.random((args.pulses, args.emitters))
    detects = rng.random((args.pulses, args.emitters))
    bg_a = rng.poisson(0.01, args.pulses)
    bg_b = rng.poisson(0.01, args.pulses)
    eta1, eta2 = 0.13, 0.07
    out = {}
    clicks = {}
    for name, fn in (("numba", _kernels._fixed_clicks_numba),
                     ("numpy", _kernels._fixed_clicks_numpy)):
        click_a = np.empty(args.pulses, np.bool_)
        click_b = np.empty(args.pulses, np.bool_)
        fn(routes, detects, bg_a, bg_b, eta1, eta2, click_a, click_b)  # warm-up
        out[name] = best_of(args.repeat, fn, routes, detects, bg_a, bg_b,
                            eta1, eta2, click_a, click_b)
        clicks[name] = (click_a, click_b)
    for side in (0, 1):
        assert np.array_equal(clicks["numba"][side], clicks["numpy"][side]), \
            "kernel flavors disagree"
    return out


def bench_poisson(args, rng):
    counts = rng.poisson(args.mu, args.pulses)
    total = int(counts.sum())
    routes = rng.random(total)
    detects = rng.random(total)
    bg_a = rng.poisson(0.01, args.pulses)
    bg_b = rng.poisson(0.01, args.pulses)
    eta1, eta2 = 0.9, 0.8
    out = {}
    clicks = {}
    for name, fn in (("numba", _kernels._poisson_clicks_numba),
                     ("numpy", _kernels._poisson_clicks_numpy)):
        click_a = np.empty(args.pulses, np.bool_)
        click_b = np.empty(args.pulses, np.bool_)
        fn(counts, routes, detects, bg_a, bg_b, eta1, eta2, click_a, click_b)
        out[name] = best_of(args.repeat, fn, counts, routes, detects,
                            bg_a, bg_b, eta1, eta2, click_a, click_b)
        clicks[name] = (click_a, click_b)
    for side in (0, 1):
        assert np.array_equal(clicks["numba"][side], clicks["numpy"][side]), \
            "kernel flavors disagree"
    return out


def report(label, times, pulses):
    numba_t, numpy_t = times["numba"], times["numpy"]
    print(f"{label}:")
    for name, t in times.items():
        print(f"  {name:<6} {t * 1e3:8.2f} ms   {pulses / t / 1e6:8.1f} Mpulses/s")
    print(f"  speedup numba/numpy: {numpy_t / numba_t:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pulses", type=int, default=2_000_000)
    parser.add_argument("--emitters", type=int, default=3,
                        help="photons per pulse for the fixed-count kernel")
    parser.add_argument("--mu", type=float, default=0.4,
                        help="mean photons per pulse for the Poisson kernel")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _kernels.backend() != "numba":
        parser.error("numba flavor unavailable (PHOTON_GATE_NUMBA=0 or numba "
                     "missing); nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{args.pulses} pulses, best of {args.repeat}")
    report(f"fixed-count kernel ({args.emitters} photons/pulse)",
           bench_fixed(args, rng), args.pulses)
    report(f"poisson kernel (mu={args.mu})", bench_poisson(args, rng),
           args.pulses)


if __name__ == "__main__":
    main()
