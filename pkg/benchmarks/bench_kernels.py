"""Compare the compiled and pure-Python kernels on the same inputs.

    python benchmarks/bench_kernels.py [--x 20000] [--repeat 3] [--json out.json]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from echeur import enumeration, kernels
from echeur.curve import admissible_table


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(X: int, n_traces: int, n_grams: int):
    adm = admissible_table()
    rng = np.random.Generator(np.random.PCG64(0))
    ainvs = rng.integers(-10**4, 10**4, size=(n_traces, 5)).tolist()
    P = rng.normal(size=(n_grams, 2))
    Q = rng.normal(size=(n_grams, 2))
    g11, g12, g22 = (P * P).sum(1), (P * Q).sum(1), (Q * Q).sum(1)
    pairs = [(int(a) * 1296, int(b) * 46656) for a, b in rng.integers(-10**5, 10**5, size=(20_000, 2))]

    def enum(impl):
        return lambda: enumeration.count_by_discriminant(X, backend=impl).total

    def traces(impl):
        return lambda: sum(impl.frobenius_trace(*a, 1009) for a in ainvs)

    def grams(impl):
        def run():
            x, y = np.empty(n_grams), np.empty(n_grams)
            impl.reduce_batch(g11, g12, g22, x, y, 10_000)
            return float(y.sum())
        return run

    def minimal(impl):
        return lambda: sum(impl.is_minimal_c(a, b, adm) for a, b in pairs)

    return [
        (f"enumerate X={X}", lambda name, impl: enum(name)),
        (f"frobenius_trace x{n_traces} at p=1009", lambda name, impl: traces(impl)),
        (f"reduce_batch x{n_grams}", lambda name, impl: grams(impl)),
        ("is_minimal_c x20000", lambda name, impl: minimal(impl)),
    ]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--x", type=int, default=20_000, help="discriminant bound for the enumeration case")
    ap.add_argument("--traces", type=int, default=200)
    ap.add_argument("--grams", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write the timings here")
    args = ap.parse_args()

    backends = kernels.available_backends()
    rows = []
    print(f"{'case':<40}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for label, make in cases(args.x, args.traces, args.grams):
        times, results = {}, {}
        for name, impl in backends.items():
            times[name], results[name] = _best(make(name, impl), args.repeat)
        if len(set(map(repr, results.values()))) != 1:
            raise SystemExit(f"backends disagree on {label}: {results}")
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        rows.append({"case": label, "seconds": times, "speedup": speed})
        print(f"{label:<40}" + "".join(f"{times[b]:>11.4f}s" for b in backends) + f"{speed:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"default_backend": kernels.BACKEND, "results": rows}, fh, indent=2)


if __name__ == "__main__":
    main()
