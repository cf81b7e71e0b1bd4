#!/usr/bin/env python3
"""Benchmark: compiled diff kernel vs the pure-Python fallback.

Times the edit-script kernel on workloads shaped like real builder
activity: single rules, knowledge-base sections, and attached documents,
with localized edits (the common case) and heavy rewrites (the worst
case).

    python3 benchmarks/diff_bench.py
"""

from __future__ import annotations

import random
import time

from chatwright.diffing import _kernel_py

try:
    from chatwright.diffing import _kernel_c
except ImportError:
    _kernel_c = None


def make_pair(rng: random.Random, tokens: int, churn: float) -> tuple[list[int], list[int]]:
    vocab = 200
    old = [rng.randrange(vocab) for _ in range(tokens)]
    new = []
    for token in old:
        roll = rng.random()
        if roll < churn / 2:
            continue  # deletion
        if roll < churn:
            new.append(rng.randrange(vocab))  # replacement
            continue
        new.append(token)
        if rng.random() < churn / 4:
            new.append(rng.randrange(vocab))  # insertion
    return old, new


def bench(kernel, pairs, repeat: int) -> float:
    start = time.perf_counter()
    for _ in range(repeat):
        for old, new in pairs:
            kernel.diff_ops(old, new)
    return (time.perf_counter() - start) / repeat


WORKLOADS = [
    ("rule edit (15 tokens, light churn)", 15, 0.15, 2000, 20),
    ("section edit (120 tokens, light churn)", 120, 0.1, 200, 10),
    ("section rewrite (120 tokens, heavy churn)", 120, 0.6, 200, 10),
    ("document edit (1200 tokens, light churn)", 1200, 0.05, 10, 3),
    ("document rewrite (1200 tokens, heavy churn)", 1200, 0.6, 10, 3),
]


def main() -> None:
    rng = random.Random(7151)
    print(f"{'workload':44} {'python':>10} {'c':>10} {'speedup':>8}")
    for name, tokens, churn, count, repeat in WORKLOADS:
        pairs = [make_pair(rng, tokens, churn) for _ in range(count)]
        py = bench(_kernel_py, pairs, repeat)
        if _kernel_c is None:
            print(f"{name:44} {py * 1e3:9.2f}ms {'n/a':>10} {'':>8}")
            continue
        c = bench(_kernel_c, pairs, repeat)
        for old, new in pairs[:20]:
            assert _kernel_c.diff_ops(old, new) == _kernel_py.diff_ops(old, new)
        print(f"{name:44} {py * 1e3:9.2f}ms {c * 1e3:9.2f}ms {py / c:7.1f}x")
    if _kernel_c is None:
        print("\ncompiled kernel unavailable; install with the C extension "
              "to compare.")


if __name__ == "__main__":
    main()
