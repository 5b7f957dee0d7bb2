#!/usr/bin/env python3
"""Throughput of the compiled chain kernels vs their pure-Python twins.

Usage: python benchmarks/bench_backends.py [n_steps]

Both backends draw from identical streams, so besides timing this doubles as
an end-to-end bit-identity check on realistic workloads.
"""

import sys
import time

import numpy as np

from polarslice import _chainpy
from polarslice.rng import RngStream

try:
    from polarslice import _chain
except ImportError:
    _chain = None


CASES = [
    ("powerlaw (k=1, m=1/8)", "powerlaw_chain", (1.0, 0.125, 1.0, np.inf)),
    ("powerlaw (k=64, m=2)", "powerlaw_chain", (64.0, 2.0, 1.0, np.inf)),
    ("pareto   (k=1, m=2)", "pareto_chain", (1.0, 2.0, 1.0)),
    ("heavy-t  (d=100, m=2)", "stdt_chain", (100, 2.0)),
]


def run(module, fn_name, n, args):
    gen = RngStream(7, 1).gen
    t0 = time.perf_counter()
    out = getattr(module, fn_name)(gen, 1.0, n, *args)
    return time.perf_counter() - t0, out


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    print(f"{n:,} steps per kernel\n")
    print(f"{'kernel':<24}{'compiled':>14}{'python':>14}{'speedup':>10}  identical")
    print("-" * 72)
    for label, fn_name, args in CASES:
        t_py, out_py = run(_chainpy, fn_name, n, args)
        if _chain is None:
            print(f"{label:<24}{'(not built)':>14}{n / t_py / 1e6:>11.2f} M/s")
            continue
        t_c, out_c = run(_chain, fn_name, n, args)
        same = np.array_equal(out_c, out_py)
        print(f"{label:<24}{n / t_c / 1e6:>11.2f} M/s{n / t_py / 1e6:>11.2f} M/s"
              f"{t_py / t_c:>9.1f}x  {same}")
    if _chain is None:
        print("\ncompiled backend missing; build with "
              "`pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
