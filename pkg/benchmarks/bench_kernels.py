"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]

Covers the two hot paths of one Monte Carlo replication: the PDQ scale
(pairwise-difference order statistic per coordinate) and the Weiszfeld
spatial median, at the simulation sizes used by the acceptance suite.
"""

import argparse
import timeit

import numpy as np

from pdqsign import kernels
from pdqsign.elliptical import PopulationSpec, RadialSpec, ShapeSpec, sample_population
from pdqsign.pdq import pair_rank

SIZES = [(50, 100), (100, 200), (400, 50)]


def _cases():
    for n, p in SIZES:
        x = sample_population(PopulationSpec(p, ShapeSpec.ar1(0.9), RadialSpec.student_t(3)), n, n * p)
        cols = np.ascontiguousarray(x.T)
        k = pair_rank(n, 0.5)
        q = kernels.get_backend("python").pairwise_kth(cols, k)
        z = np.ascontiguousarray(x / q)
        m0 = np.median(z, axis=0)
        scale = float(np.mean(np.linalg.norm(z - m0, axis=1)))
        yield (n, p), cols, k, (z, m0, 1e-8, 500, 1e-12 * scale, scale)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        backends = {"python": kernels.get_backend("python"), "cython": kernels.get_backend("cython")}
    except ImportError:
        print("compiled kernels not built; only the fallback is available")
        return
    print(f"{'kernel':<14}{'n x p':>10}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for (n, p), cols, k, wargs in _cases():
        for name, call in (("pairwise_kth", lambda b: b.pairwise_kth(cols, k)),
                           ("weiszfeld", lambda b: b.weiszfeld(*wargs))):
            t = {}
            for label, mod in backends.items():
                number = 3
                t[label] = min(timeit.repeat(lambda: call(mod), number=number, repeat=args.repeat)) / number
            print(f"{name:<14}{f'{n}x{p}':>10}{1e3 * t['python']:>12.3f}{1e3 * t['cython']:>12.3f}"
                  f"{t['python'] / t['cython']:>9.1f}x")


if __name__ == "__main__":
    main()
