"""Compare the compiled kernels with the pure-Python fallback.

Run ``python3 benchmarks/bench_kernels.py``.  Prints one line per kernel with
the time of each backend and the speedup, then an end-to-end protocol timing
under each backend (separate processes, selected by ORACLELAB_PURE_PYTHON).
"""

import os
import random
import subprocess
import sys
import timeit

from oraclelab import _kernels_py

try:
    from oraclelab import _kernels as _ext
except ImportError:
    _ext = None

KEY = _kernels_py.seed_key(12345)
POINTS = list(range(0, 1 << 20, 7))[:20_000]
rng = random.Random(0)
SAMPLES = [[rng.randrange(1 << 12) for _ in range(32)] for _ in range(2000)]

CASES = {
    "answer x20000": lambda m: [m.answer(KEY, p, 16) for p in POINTS],
    "answers (vector, 20000)": lambda m: m.answers(KEY, POINTS, 16),
    "table d=14": lambda m: m.table(KEY, 14, 16),
    "inclusion_counts 2000x32": lambda m: m.inclusion_counts(SAMPLES, 1 << 12),
}

E2E = ("import time; from oraclelab import protocols, kernels; "
       "from oraclelab.core import estimate_agreement; "
       "s = protocols.merkle_puzzles(16, 256); t = time.perf_counter(); "
       "estimate_agreement(s, 2000, 0); "
       "print(kernels.BACKEND, round(time.perf_counter() - t, 3))")


def best(fn, number=3):
    return min(timeit.repeat(fn, number=1, repeat=number))


def main():
    if _ext is None:
        print("compiled kernels not built; only the fallback is available")
    for name, case in CASES.items():
        t_py = best(lambda: case(_kernels_py))
        if _ext is None:
            print(f"{name:<28} python {t_py * 1e3:8.2f} ms")
            continue
        t_c = best(lambda: case(_ext))
        print(f"{name:<28} python {t_py * 1e3:8.2f} ms  cython {t_c * 1e3:8.2f} ms  "
              f"x{t_py / t_c:6.1f}")
    for pure in ("0", "1"):
        env = dict(os.environ, ORACLELAB_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True)
        print("merkle(16,256) 2000 runs:", out.stdout.strip() or out.stderr.strip())


if __name__ == "__main__":
    main()
