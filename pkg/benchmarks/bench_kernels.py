"""Compare the compiled and NumPy kernel backends.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5]

Prints wall-clock time per call and the speedup for each kernel, and
checks that both backends agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from confellip import kernels
from confellip.conformal import CalibrationSet, build_score_machinery, conformal_rank
from confellip.harness import ExperimentConfig, fit_experiment_predictor, sample_replicate

CASES = [
    # (label, n_calib, n_test)
    ("gaussian n=200", 200, 500),
    ("gaussian n=2000", 2000, 100),
    ("gaussian n=10000", 10000, 20),
]


def best_time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_ccle(repeat: int, backends: list[str]) -> None:
    print("ccle_batch (leverage quantile + ellipsoid terms per test draw)")
    for label, n_calib, n_test in CASES:
        cfg = ExperimentConfig(n_calib=n_calib, n_test=n_test, n_histo=1)
        V = sample_replicate(cfg, 0, fit_experiment_predictor(cfg))
        rank = conformal_rank(n_calib, cfg.alpha)
        timings, outputs = {}, {}
        for name in backends:
            impl = kernels.get_backend(name)
            outputs[name] = impl.ccle_batch(V, cfg.k, rank, cfg.lam)
            timings[name] = best_time(lambda: impl.ccle_batch(V, cfg.k, rank, cfg.lam), repeat)
        line = f"  {label:<18s}" + "".join(f" {b}={timings[b] * 1e3:9.2f} ms" for b in backends)
        if len(backends) == 2:
            diff = max(np.max(np.abs(a - b)) for a, b in zip(outputs["python"][:4], outputs["cython"][:4]))
            line += f"  speedup={timings['python'] / timings['cython']:5.1f}x  maxdiff={diff:.1e}"
        print(line)


def bench_membership(repeat: int, backends: list[str]) -> None:
    print("exact_membership (score threshold test on a probe grid)")
    rng = np.random.default_rng(0)
    for n, m in [(200, 15625), (1000, 15625)]:
        X = rng.standard_normal((n, 6))
        R = rng.standard_normal((n, 3)) + X[:, :3]
        mach = build_score_machinery(CalibrationSet(X, R), np.zeros(6), 0.0)
        Z = rng.uniform(-3, 3, size=(m, 3))
        r = mach.r_vectors(Z)
        rank = conformal_rank(n, 0.1)
        args = (mach.G, mach.H, mach.w[:n], mach.c_diag[:n], r, rank)
        timings, outputs = {}, {}
        for name in backends:
            impl = kernels.get_backend(name)
            outputs[name] = impl.exact_membership(*args)
            timings[name] = best_time(lambda: impl.exact_membership(*args), repeat)
        line = f"  n={n:<5d} m={m:<6d}    " + "".join(f" {b}={timings[b] * 1e3:9.2f} ms" for b in backends)
        if len(backends) == 2:
            agree = np.array_equal(outputs["python"][0], outputs["cython"][0])
            line += f"  speedup={timings['python'] / timings['cython']:5.1f}x  same={agree}"
        print(line)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    bench_ccle(args.repeat, backends)
    bench_membership(args.repeat, backends)


if __name__ == "__main__":
    main()
