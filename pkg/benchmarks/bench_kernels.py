"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--paths 64] [--repeat 3]

Times path tracking on the projective total-degree homotopy of a fixed
instance, and lonesum enumeration, for both backends; checks that both
return the same answers.
"""
import argparse
import time

import numpy as np

from missml._kernels import _fallback
from missml.critical_system import build
from missml.homotopy import SolverOptions, _total_degree_homotopy
from missml.model import SuffStats

try:
    from missml._kernels import _core
except ImportError:  # extension not built
    _core = None

STATS = SuffStats(n=40, r=12, s=15, my1=0.3, my2=-0.2, my11=1.4, my12=0.5, my22=1.1,
                  mz1=0.1, mz2=1.2, mw1=-0.4, mw2=0.9)


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=64, help="number of start paths to track")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--lonesum", type=int, nargs=2, default=(3, 4), metavar=("M", "N"))
    args = ap.parse_args()

    exps, ptr, c0, c1, starts = _total_degree_homotopy(build(STATS), np.random.default_rng(0))
    starts = np.ascontiguousarray(starts[: args.paths])
    opts = SolverOptions().tracker()
    m, n = args.lonesum

    backends = [("python", _fallback)] + ([("cython", _core)] if _core is not None else [])
    results = {}
    print(f"{'kernel':<22}{'backend':<10}{'seconds':>10}")
    for name, mod in backends:
        t, out = best_of(lambda: mod.track_paths(exps, ptr, c0, c1, starts, opts), args.repeat)
        results[("track", name)] = (t, out)
        print(f"{'track_paths x' + str(len(starts)):<22}{name:<10}{t:>10.4f}")
        t, out = best_of(lambda: mod.count_lonesum_range(m, n, 0, 1 << (m * n), False), args.repeat)
        results[("lonesum", name)] = (t, out)
        print(f"{'lonesum ' + f'{m}x{n}':<22}{name:<10}{t:>10.4f}")

    if _core is None:
        print("compiled extension not available; fallback timings only")
        return
    ends_py, _, st_py, _ = results[("track", "python")][1]
    ends_cy, _, st_cy, _ = results[("track", "cython")][1]
    same = np.array_equal(st_py, st_cy)
    # endpoints at infinity (homogenising coordinate ~ 0) are singular and not reproducible
    finite = np.abs(ends_cy[:, 0]) > 1e-6 * np.linalg.norm(ends_cy, axis=1)
    ok = (st_cy == 0) & finite
    dev = float(np.max(np.abs(ends_py[ok] - ends_cy[ok]))) if ok.any() else 0.0
    print(f"tracking: statuses agree={same}, max difference on finite endpoints={dev:.2e}")
    print(f"lonesum: counts agree={results[('lonesum', 'python')][1] == results[('lonesum', 'cython')][1]}")
    for kernel in ("track", "lonesum"):
        print(f"speed-up {kernel}: {results[(kernel, 'python')][0] / results[(kernel, 'cython')][0]:.1f}x")


if __name__ == "__main__":
    main()
