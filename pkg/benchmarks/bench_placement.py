#!/usr/bin/env python3
"""Benchmark the placement kernel: pure Python vs the native extension.

Two workloads:
  fill   - what scenario runs and curve probes do end to end: query the
           cheapest placement, commit it in Python, repeat until full
  query  - the kernel call alone, on a fragmented three-quarters-full
           grid where the scan has to skip many taken cells

Usage: python benchmarks/bench_placement.py [--rounds N] [--wavelengths W]
"""

import argparse
import sys
import time
from array import array
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from wavebroker._kernel.placement_py import cheapest_placement as pure_kernel

try:
    from wavebroker._kernel._placement import cheapest_placement as native_kernel
except ImportError:
    native_kernel = None


def build_instance(n_wl: int):
    """Ten routes of 2-4 links each over a 24-link pool."""
    n_links = 24
    paths = []
    costs = []
    link = 0
    for r in range(10):
        length = 2 + (r % 3)
        paths.append([(link + i) % n_links for i in range(length)])
        costs.append(10 + 7 * r)
        link += length
    offs = [0]
    flat = []
    for p in paths:
        flat.extend(p)
        offs.append(len(flat))
    return (
        array("q", offs),
        array("q", flat),
        array("q", costs),
        array("q", [n_wl] * n_links),
        [tuple(p) for p in paths],
        n_links,
    )


def bench_fill(kernel, rounds: int, n_wl: int) -> tuple[float, int]:
    offs, flat, costs, caps, paths, n_links = build_instance(n_wl)
    placements = 0
    start = time.perf_counter()
    for _ in range(rounds):
        occ = bytearray(n_links * n_wl)
        used = array("q", [0] * n_links)
        banned = bytearray(n_wl)
        while True:
            p, w = kernel(offs, flat, costs, occ, used, caps, banned, n_wl)
            if p < 0:
                break
            for li in paths[p]:
                occ[li * n_wl + w] = 1
                used[li] += 1
            banned[w] = 1  # one connection per fill: distinct wavelength per unit
            placements += 1
    return time.perf_counter() - start, placements


def bench_query(kernel, queries: int, n_wl: int) -> tuple[float, int]:
    offs, flat, costs, caps, paths, n_links = build_instance(n_wl)
    occ = bytearray(n_links * n_wl)
    used = array("q", [0] * n_links)
    banned = bytearray(n_wl)
    # fragment the grid: occupy three of every four wavelengths per link
    for li in range(n_links):
        for w in range(n_wl):
            if (li + w) % 4 != 0:
                occ[li * n_wl + w] = 1
                used[li] += 1
    start = time.perf_counter()
    for _ in range(queries):
        kernel(offs, flat, costs, occ, used, caps, banned, n_wl)
    return time.perf_counter() - start, queries


def report(title, rows):
    print(title)
    print(f"  {'backend':<8} {'ops':>9} {'seconds':>9} {'us/op':>8}")
    for name, elapsed, n in rows:
        print(f"  {name:<8} {n:>9} {elapsed:>9.3f} {elapsed / n * 1e6:>8.2f}")
    if len(rows) == 2:
        print(f"  speedup: {rows[0][1] / rows[1][1]:.1f}x")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, default=300, help="fill/reset cycles per backend")
    parser.add_argument("--queries", type=int, default=50_000, help="standalone kernel calls")
    parser.add_argument("--wavelengths", type=int, default=40)
    args = parser.parse_args()

    kernels = [("pure", pure_kernel)]
    if native_kernel is not None:
        kernels.append(("native", native_kernel))
    else:
        print("native kernel not built; run `python setup.py build_ext --inplace` first")

    report(
        "fill: query + commit until the network is full",
        [(name, *bench_fill(k, args.rounds, args.wavelengths)) for name, k in kernels],
    )
    report(
        "query: cheapest-placement call on a fragmented grid",
        [(name, *bench_query(k, args.queries, args.wavelengths)) for name, k in kernels],
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
