"""Compare the numba kernels with their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--sizes 64 256 1024] [--repeat 5]

Inputs come from the infrastructure generator (pre-closure link matrices for
Floyd-Warshall, closed matrices for the pair-conflict blocks). Each kernel is
called once before timing so numba compilation is not counted.
"""

import argparse
import time

import numpy as np

from edgeplace import _kernels
from edgeplace.topology import GenSpec, generate


def _raw_matrices(n, seed):
    closed = generate(GenSpec(n_nodes=n, family="ER", seed=seed))
    # thin the closed graph out again so the shortest-path pass has real work to do
    lat, bw = closed.lat_us.copy(), closed.bw_kbps.copy()
    rng = np.random.default_rng(seed)
    drop = rng.random(lat.shape) < 0.9
    np.fill_diagonal(drop, False)
    lat[drop] = -1
    return closed, lat, bw


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t) * 1000.0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args(argv)

    if _kernels.numba is None:
        print("numba is not installed; only the numpy path is available")
        return 1
    print(f"{'kernel':<16}{'n':>6}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for n in args.sizes:
        closed, lat, bw = _raw_matrices(n, args.seed)
        a = _kernels.floyd_warshall_numpy(lat, bw)
        b = _kernels.floyd_warshall_numba(lat, bw)
        assert all((x == y).all() for x, y in zip(a, b)), "paths disagree"
        t_np = _best(lambda: _kernels.floyd_warshall_numpy(lat, bw), args.repeat)
        t_nb = _best(lambda: _kernels.floyd_warshall_numba(lat, bw), args.repeat)
        print(f"{'floyd_warshall':<16}{n:>6}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")

        rng = np.random.default_rng(args.seed)
        k = min(n, 64)
        rows = rng.choice(n, size=k, replace=False).astype(np.int64)
        cols = rng.choice(n, size=k, replace=False).astype(np.int64)
        sr, sc = rng.random(k) < 0.8, rng.random(k) < 0.8
        full = closed.lat_us
        args_pc = (full, rows, cols, 20_000, sr, sc)
        assert (_kernels.pair_conflicts_numpy(*args_pc) == _kernels.pair_conflicts_numba(*args_pc)).all()
        t_np = _best(lambda: _kernels.pair_conflicts_numpy(*args_pc), args.repeat)
        t_nb = _best(lambda: _kernels.pair_conflicts_numba(*args_pc), args.repeat)
        print(f"{'pair_conflicts':<16}{n:>6}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
