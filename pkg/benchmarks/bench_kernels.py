#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure numpy fallback.

Times the two hot paths on transformer-scale inputs: the per-neuron purity
cut scan (predicate mining) and the per-feature Gini split scan (CART).
Run after building the extension:

    python benchmarks/bench_kernels.py [--n 5000] [--h 768] [--classes 4]
"""

import argparse
import sys
import time

import numpy as np

from neurologic._kernels import pure

try:
    from neurologic._kernels import _core
except ImportError:
    _core = None


def time_purity(impl, values, labels, class_counts, repeats=3):
    n, h = values.shape
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for j in range(h):
            col = values[:, j]
            order = np.argsort(-col)
            a_sorted = np.ascontiguousarray(col[order])
            y_sorted = np.ascontiguousarray(labels[order])
            impl.best_cuts(a_sorted, y_sorted, class_counts)
        best = min(best, time.perf_counter() - start)
    return best


def time_gini(impl, values, labels, num_classes, repeats=3):
    n, h = values.shape
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for j in range(h):
            col = values[:, j]
            order = np.argsort(col, kind="stable")
            x_sorted = np.ascontiguousarray(col[order])
            y_sorted = np.ascontiguousarray(labels[order])
            impl.best_gini_split(x_sorted, y_sorted, num_classes, 5)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=5000)
    parser.add_argument("--h", type=int, default=768)
    parser.add_argument("--classes", type=int, default=4)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    values = rng.normal(size=(args.n, args.h))
    labels = np.concatenate(
        [np.arange(args.classes), rng.integers(0, args.classes, args.n - args.classes)]
    ).astype(np.int64)
    counts = np.bincount(labels, minlength=args.classes).astype(np.int64)

    backends = [("pure", pure)]
    if _core is not None:
        backends.append(("compiled", _core))
    else:
        print("note: compiled core not built; showing pure only", file=sys.stderr)

    print(f"n={args.n} h={args.h} classes={args.classes} (best of {args.repeats})")
    print(f"{'kernel':<14} {'backend':<10} {'seconds':>9}  {'speedup':>8}")
    for label, timer in (("purity scan", time_purity), ("gini scan", time_gini)):
        baseline = None
        for name, impl in backends:
            if timer is time_purity:
                seconds = timer(impl, values, labels, counts, args.repeats)
            else:
                seconds = timer(impl, values, labels, args.classes, args.repeats)
            if baseline is None:
                baseline = seconds
                speedup = ""
            else:
                speedup = f"{baseline / seconds:.2f}x"
            print(f"{label:<14} {name:<10} {seconds:>9.3f}  {speedup:>8}")


if __name__ == "__main__":
    main()
