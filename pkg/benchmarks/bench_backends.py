"""Compare the compiled and pure-Python group backends on the hot kernels.

    python3 benchmarks/bench_backends.py [--repeat N]

Both backends are imported side by side (the selector only picks the
default); rows show mean milliseconds per call and the speedup.
"""
from __future__ import annotations

import argparse
import random
import statistics
import time

from sealedbid import backend


def _time(fn, repeat: int) -> float:
    fn()  # warm caches
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - t0) * 1e3)
    return statistics.fmean(samples)


def kernels(mod, rng: random.Random):
    k1, k2 = rng.randrange(1, 2**255), rng.randrange(1, 2**255)
    g1, g2 = mod.G1.generator(), mod.G2.generator()
    p, q = g1 * k1, g2 * k2
    pts = [g1 * rng.randrange(1, 2**64) for _ in range(8)]
    ks = [rng.randrange(1, 2**255) for _ in pts]
    enc = p.to_bytes()
    return {
        "G1 scalar mul": lambda: p * k2,
        "G2 scalar mul": lambda: q * k1,
        "G1 msm (8 terms)": lambda: mod.G1.msm(pts, ks),
        "G1 decompress": lambda: mod.G1.from_bytes(enc),
        "pairing check (2 pairs)": lambda: mod.pairing_check([(p, q), (-p, q)]),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timed calls per kernel and backend")
    args = ap.parse_args()
    names = backend.available()
    rng = random.Random(1)
    results = {name: {k: _time(f, args.repeat) for k, f in kernels(backend.load(name), rng).items()} for name in names}
    ops = list(next(iter(results.values())))
    header = f"{'kernel':<26}" + "".join(f"{n + ' [ms]':>14}" for n in names)
    if {"native", "pure"} <= set(names):
        header += f"{'speedup':>10}"
    print(header)
    for op in ops:
        line = f"{op:<26}" + "".join(f"{results[n][op]:>14.3f}" for n in names)
        if {"native", "pure"} <= set(names):
            line += f"{results['pure'][op] / results['native'][op]:>9.0f}x"
        print(line)


if __name__ == "__main__":
    main()
