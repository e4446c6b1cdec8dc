"""
Time the compiled and pure-Python kernel backends on the same inputs.

Run with ``python benchmarks/bench_kernels.py``. Each backend's result is
checked against the other before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from ztwemo.kernels import _pykernels

try:
    from ztwemo.kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng):
    spectra = np.abs(rng.standard_normal((2000, 1025)))
    obs = rng.normal(size=(600, 20))
    trans = np.log(rng.dirichlet(np.ones(20), size=20))
    init = np.log(rng.dirichlet(np.ones(20)))
    return {
        "peak_sum_rows (2000 x 1025, top 3)": ("peak_sum_rows", (spectra, 3)),
        "viterbi_log (600 frames x 20 states)": ("viterbi_log", (init, trans, obs)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled backend not available; timing the Python fallback only")
    print(f"{'kernel':40s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup")
    for label, (fn, fargs) in cases(rng).items():
        results = {b: getattr(m, fn)(*fargs) for b, m in backends.items()}
        if len(results) == 2:
            a, c = results["python"], results["cython"]
            same = all(np.array_equal(x, y) for x, y in zip(a, c)) if isinstance(a, tuple) else np.array_equal(a, c)
            if not same:
                raise SystemExit(f"{label}: backends disagree")
        times = {b: min(timeit.repeat(lambda m=m: getattr(m, fn)(*fargs), number=1, repeat=args.repeat))
                 for b, m in backends.items()}
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else ""
        print(f"{label:40s} " + " ".join(f"{1e3 * t:10.2f}ms" for t in times.values()) + "  " + speed)


if __name__ == "__main__":
    main()
