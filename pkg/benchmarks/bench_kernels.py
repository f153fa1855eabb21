"""Compare the compiled and pure-Python kernels on the hot paths.

    python3 benchmarks/bench_kernels.py [--nodes 100000] [--repeat 3]

Each workload runs through the public API with the kernel functions swapped
in, so the timings include the same Python glue the pipeline pays.
"""

import argparse
import contextlib
import time

import numpy as np

from newsflow import _kernels, ci, graph, timeseries
from newsflow.graph import DiffusionGraph

_FUNCS = ("ci_values", "ci_removal", "gc_trajectory", "largest_component", "wcc_labels", "loess")


@contextlib.contextmanager
def use_backend(name):
    mod = _kernels.available_backends()[name]
    saved = {f: getattr(_kernels, f) for f in _FUNCS}
    for f in _FUNCS:
        setattr(_kernels, f, getattr(mod, f))
    try:
        yield
    finally:
        for f, fn in saved.items():
            setattr(_kernels, f, fn)


def scale_free_digraph(n, seed):
    # heavy-tailed out-degree, uniform targets
    rng = np.random.default_rng(seed)
    k = np.minimum((rng.pareto(1.5, n) * 1.5).astype(np.int64), n - 1)
    src = np.repeat(np.arange(n), k)
    dst = rng.integers(0, n, src.size)
    return DiffusionGraph.from_edges(zip(src.tolist(), dst.tolist()), range(n))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return min(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=100_000)
    ap.add_argument("--days", type=int, default=60)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    g = scale_free_digraph(args.nodes, 0)
    x = np.random.default_rng(1).poisson(
        30 * (1 + 0.5 * np.sin(2 * np.pi * np.arange(96 * args.days) / 96))).astype(np.float64)
    workloads = {
        f"CI ranking, l=2 (N={g.n_nodes}, E={g.n_edges})":
            lambda: [e.user_id for e in ci.rank_influencers(g, ci.CiParams(ell=2)).entries],
        f"weak components (N={g.n_nodes})":
            lambda: graph.weakly_connected_components(g).sizes.tolist(),
        f"STL, robust 3 passes ({x.size} bins)":
            lambda: timeseries.stl_decompose(x, timeseries.StlParams(outer_iter=3)).remainder,
    }
    backends = sorted(_kernels.available_backends())
    print(f"backends: {', '.join(backends)} (default: {_kernels.BACKEND})")
    print(f"{'workload':<48} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for label, fn in workloads.items():
        times, results = {}, {}
        for b in backends:
            with use_backend(b):
                times[b], results[b] = best_of(fn, args.repeat)
        speed = f"{times['pure'] / times['cython']:8.1f}x" if "cython" in times else "       -"
        cells = " ".join(f"{times[b]:9.3f}s" for b in backends)
        agree = all(np.allclose(results[b], results[backends[0]], rtol=1e-10, atol=1e-10) for b in backends)
        print(f"{label:<48} {cells} {speed}{'' if agree else '  RESULTS DIFFER'}")


if __name__ == "__main__":
    main()
