"""Compare the compiled scan kernel against the numpy fallback.

Run from the repository root:

    python3 benchmarks/bench_scan.py --sizes 1000,10000,100000 --dim 128

Each backend scores the same query against the same index matrix; the
report shows per-scan latency, rows per second, and the max absolute
difference between the two score vectors (should be ~1e-16, never above
1e-12).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from xlsearch.kernels import py as py_kernel

try:
    from xlsearch.kernels import _scan as cy_kernel
except ImportError:
    cy_kernel = None


def _time_scan(fn, matrix, norms, q, absolute, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(matrix, norms, q, absolute)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="1000,10000,100000",
                        help="comma list of index row counts")
    parser.add_argument("--dim", type=int, default=128)
    parser.add_argument("--repeats", type=int, default=5,
                        help="take the best of this many timed scans")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",") if s]
    rng = np.random.default_rng(args.seed)

    backends = [("python", py_kernel.scan_scores)]
    if cy_kernel is not None:
        backends.append(("cython", cy_kernel.scan_scores))
    else:
        print("compiled kernel not built; benchmarking the fallback only")

    header = f"{'rows':>8}  {'dim':>4}  {'backend':<8}  {'ms/scan':>9}  {'rows/s':>12}  {'max |diff|':>10}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        matrix = np.ascontiguousarray(rng.normal(size=(n, args.dim)))
        norms = np.linalg.norm(matrix, axis=1)
        q = np.ascontiguousarray(rng.normal(size=args.dim))
        reference = np.asarray(py_kernel.scan_scores(matrix, norms, q, True))
        for name, fn in backends:
            elapsed = _time_scan(fn, matrix, norms, q, True, args.repeats)
            scores = np.asarray(fn(matrix, norms, q, True))
            diff = float(np.max(np.abs(scores - reference)))
            print(
                f"{n:>8}  {args.dim:>4}  {name:<8}  {elapsed * 1e3:>9.3f}  "
                f"{n / elapsed:>12.0f}  {diff:>10.2e}"
            )
            if diff > 1e-12:
                raise SystemExit(f"backend {name} disagrees with reference: {diff}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
