"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import timeit

import networkx as nx
import numpy as np

from pocmed import _kernels_py as py
from pocmed import kernels
from pocmed.corpus import random_pocset
from pocmed.graphs import SimpleGraph
from pocmed.median import cube, path, product


def cases():
    rng = random.Random(7)
    p = random_pocset(rng, 18, density=0.1)
    yield "ultrafilters", (p.n_pairs, [p.down[e ^ 1] for e in range(p.size)])
    gens = [rng.getrandbits(32) for _ in range(5)]
    yield "median_closure", (gens, 100_000)
    m = product(cube(3), path(4))
    yield "check_median_table", (np.asarray(m.table(), dtype=np.int32),)
    g = SimpleGraph.from_networkx(nx.convert_node_labels_to_integers(nx.grid_2d_graph(6, 8)))
    yield "triple_medians", (np.asarray(g.distances(), dtype=np.int32),)


def _same(a, b) -> bool:
    if isinstance(a, tuple) and a and isinstance(a[0], np.ndarray):
        return np.array_equal(a[0], b[0]) and a[1] == b[1]
    return a == b


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels._c is None:
        print("compiled kernels unavailable; nothing to compare")
        return
    print(f"{'kernel':20s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, argv in cases():
        f_py, f_c = getattr(py, name), getattr(kernels._c, name)
        if not _same(f_py(*argv), f_c(*argv)):
            raise SystemExit(f"{name}: backends disagree")
        t_py = min(timeit.repeat(lambda: f_py(*argv), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: f_c(*argv), number=1, repeat=args.repeat))
        print(f"{name:20s} {t_py:10.4f} {t_c:10.4f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
