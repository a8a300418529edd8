#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from scmair import _kernels


def timeit(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kerr(repeat):
    rng = np.random.default_rng(0)
    u = rng.normal(size=(2, 1 << 20)) + 1j * rng.normal(size=(2, 1 << 20))
    rows = []
    for name, fn in (("numpy", _kernels._kerr_rotate_np),
                     ("numba", _kernels._kerr_rotate_nb)):
        if name == "numba" and not _kernels.NUMBA_ENABLED:
            continue
        buf = u.copy()
        fn(buf, 0.1)  # warm up / compile
        t = timeit(lambda: fn(buf, 0.1), repeat)
        rows.append((f"kerr_rotate 2x2^20 [{name}]", t))
    return rows


def bench_pn(repeat):
    rng = np.random.default_rng(1)
    k, p = 2048, 512
    x = rng.normal(size=k) + 1j * rng.normal(size=k)
    y = 0.95 * x + 0.1 * (rng.normal(size=k) + 1j * rng.normal(size=k))
    incr = rng.normal(0, 0.05, (k, p))
    u_res = rng.uniform(size=k)

    def run(fn):
        theta = np.linspace(0, 2 * np.pi, p, endpoint=False)
        logw = np.full(p, -math.log(p))
        evid = np.empty(k)
        tm = np.empty(k)
        ess = np.empty(k)
        fn(x, y, incr, u_res, 0.95, 0.02, p / 2.0, theta, logw, evid, tm, ess)

    rows = []
    for name, fn in (("numpy", _kernels._pn_chunk_np),
                     ("numba", _kernels._pn_chunk_nb)):
        if name == "numba" and not _kernels.NUMBA_ENABLED:
            continue
        run(fn)  # warm up / compile
        t = timeit(lambda: run(fn), repeat)
        rows.append((f"pn_chunk K=2048 P=512 [{name}]", t))
    return rows


def bench_ppn(repeat):
    rng = np.random.default_rng(2)
    k, p = 1024, 512
    x = rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2))
    y = 0.95 * x + 0.1 * (rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2)))
    incr = rng.normal(0, 0.05, (k, p))
    alpha = rng.normal(0, 0.01, (k, p, 3))
    u_res = rng.uniform(size=k)

    def run(fn):
        theta = np.linspace(0, 2 * np.pi, p, endpoint=False)
        jones = np.broadcast_to(np.eye(2, dtype=complex), (p, 2, 2)).copy()
        logw = np.full(p, -math.log(p))
        evid = np.empty(k)
        tm = np.empty(k)
        jm = np.empty((k, 2, 2), dtype=complex)
        ess = np.empty(k)
        fn(x, y, incr, alpha, u_res, 0.95, 0.02, p / 2.0, theta, jones, logw,
           evid, tm, jm, ess)

    rows = []
    for name, fn in (("numpy", _kernels._ppn_chunk_np),
                     ("numba", _kernels._ppn_chunk_nb)):
        if name == "numba" and not _kernels.NUMBA_ENABLED:
            continue
        run(fn)
        t = timeit(lambda: run(fn), repeat)
        rows.append((f"ppn_chunk K=1024 P=512 [{name}]", t))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"active backend: {_kernels.backend_name()}")
    if not _kernels.NUMBA_ENABLED:
        print("numba disabled (SCMAIR_DISABLE_NUMBA set or numba missing); "
              "showing numpy timings only")
    all_rows = bench_kerr(args.repeat) + bench_pn(args.repeat) + bench_ppn(args.repeat)
    width = max(len(n) for n, _ in all_rows)
    for name, t in all_rows:
        print(f"{name:<{width}}  {t * 1e3:9.2f} ms")
    # speedup summary per kernel when both backends ran
    by_kernel = {}
    for name, t in all_rows:
        key = name.split(" [")[0]
        by_kernel.setdefault(key, {})[name.split("[")[1].rstrip("]")] = t
    for key, d in by_kernel.items():
        if "numpy" in d and "numba" in d:
            print(f"{key}: numba speedup x{d['numpy'] / d['numba']:.1f}")


if __name__ == "__main__":
    main()
