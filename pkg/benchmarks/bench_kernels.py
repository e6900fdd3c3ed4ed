"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so the comparison does not depend on
``TVGP_PURE_PYTHON``. A final row times one full training-posterior
evaluation with the backend that ``tvgp`` selected at import.
"""

import argparse
import importlib
import timeit

import numpy as np

from tvgp import _kernels, _pykernels
from tvgp.posterior import ParamVector, TrainingPosterior
from tvgp.synthetic import GpParams, generate_dataset, make_polar_grid


def _cases(rng):
    pts = make_polar_grid(12, 18)
    t3 = np.asfortranarray(rng.standard_normal((216, 50, 2)))
    mat = rng.standard_normal((50, 50))
    d = np.asfortranarray(rng.standard_normal((216, 50, 2)))
    xs = np.sort(rng.standard_normal(40_000))
    return {
        "sqe_gram 216 pts": ("sqe_gram", (pts, (30.0, 3.0))),
        "mode_product3 216x50x2, mode 2": ("mode_product3", (t3, mat)),
        "empirical_cov 216x50x2": ("empirical_cov", (d,)),
        "hpd_window N=40000": ("hpd_window", (xs, 38_000)),
    }


def _best(fn, repeat):
    number = 5
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    try:
        compiled = importlib.import_module("tvgp._ckernels")
    except ImportError:
        compiled = None
        print("compiled extension not built; timing the numpy fallback only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for label, (name, inputs) in _cases(rng).items():
        t_py = _best(lambda: getattr(_pykernels, name)(*inputs), args.repeat)
        if compiled is None:
            print(f"{label:34s} {t_py * 1e3:10.3f} {'-':>10s} {'-':>8s}")
            continue
        t_c = _best(lambda: getattr(compiled, name)(*inputs), args.repeat)
        print(f"{label:34s} {t_py * 1e3:10.3f} {t_c * 1e3:10.3f} {t_py / t_c:7.2f}x")

    ds = generate_dataset(make_polar_grid(12, 18), GpParams(30.0, 3.0, 1.0, 0.4, -0.05), m2=50, seed=0)
    target = TrainingPosterior(ds.training, ds.design)
    p = ParamVector.for_scheme("train-only", q11=30.0, q22=3.0, sigma11=1.0, sigma22=0.4, rho=-0.05)
    t = _best(lambda: target(p), args.repeat)
    print(f"\nscheme-A log-posterior, 216x50x2 ({_kernels.BACKEND} backend): {t * 1e3:.3f} ms")


if __name__ == "__main__":
    main()
