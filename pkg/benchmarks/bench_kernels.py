"""Compare the compiled kernels with their pure-Python fallbacks.

Times each kernel directly, then a full tradeoff build in a child process
with SUCCINCT_RMQ_PURE unset and set to 1.

    python benchmarks/bench_kernels.py --n 65536 --repeat 3
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from succinct_rmq import _kernels_py
from succinct_rmq.cartesian import dfuds_of_array

try:
    from succinct_rmq import _kernels as _kernels_c
except ImportError:
    _kernels_c = None

BUILD_SNIPPET = (
    "import random, time\n"
    "from succinct_rmq import kernels\n"
    "from succinct_rmq.tradeoff import TradeoffRMQ\n"
    "rng = random.Random(0)\n"
    "A = [rng.randint(0, 10**9) for _ in range({n})]\n"
    "t0 = time.perf_counter(); TradeoffRMQ.build(A, 2)\n"
    "print(kernels.BACKEND, time.perf_counter() - t0)\n"
)


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_cases(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 10 ** 9, n, dtype=np.int64)
    bits = np.asarray(dfuds_of_array(A).full_bits(), np.uint8)
    return [
        ("cartesian_links", (A,)),
        ("prev_smaller_eq", (A,)),
        ("sparse_levels", (A,)),
        ("cell_summaries", (bits, 64)),
        ("match_closes", (bits,)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1 << 16)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print("kernel,n,pure_s,compiled_s,speedup")
    for name, call_args in kernel_cases(args.n, args.seed):
        pure = best(lambda: getattr(_kernels_py, name)(*call_args), args.repeat)
        if _kernels_c is None:
            print("%s,%d,%.4f,," % (name, args.n, pure))
            continue
        comp = best(lambda: getattr(_kernels_c, name)(*call_args), args.repeat)
        print("%s,%d,%.4f,%.4f,%.1f" % (name, args.n, pure, comp, pure / comp))

    print()
    print("backend,build_s")
    for pure_flag in ("0", "1"):
        env = dict(os.environ, SUCCINCT_RMQ_PURE=pure_flag)
        out = subprocess.run([sys.executable, "-c", BUILD_SNIPPET.format(n=args.n)],
                             env=env, capture_output=True, text=True, check=True).stdout.split()
        print("%s,%.3f" % (out[0], float(out[1])))


if __name__ == "__main__":
    main()
