"""Compare the compiled and pure-Python kernel backends.

Times the two hot loops in isolation and a full ``sim-known-field`` run
under each backend, and checks that both give identical numbers.

    python benchmarks/bench_kernels.py [--repeat 5] [--horizon 10]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from unicycle_esc import kernels
from unicycle_esc.config import parse_config


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(backend, cfg, repeat, n_windows=1000):
    p = cfg.params
    args = cfg.field.kernel_args(0.0)
    state = np.array([2.0, 2.0, 8.0, 1.0])

    def window_loop():
        s = state.copy()
        for k in range(n_windows):
            backend.integrate_window(s, k * p.dt_meas, cfg.n_inner, p.dt_meas / cfg.n_inner, p.omega, p.c,
                                     p.Omega, p.lam, p.h, 1.0, False, 0.0, *args)

    def predict_loop():
        x, P, q = np.zeros(5), 4.0 * np.eye(5), np.full(5, p.q_scale)
        for _ in range(n_windows):
            backend.gekf_predict(x, P, q, p.dt_meas, p.n_substeps)

    return time_call(window_loop, repeat), time_call(predict_loop, repeat)


def full_run(backend_name, horizon):
    """Time one closed-loop run in a subprocess so the backend is chosen at import."""
    code = (
        "import time, hashlib; from unicycle_esc.config import parse_config; from unicycle_esc.sim import run;"
        f"cfg = parse_config('sim-known-field').with_(horizon={horizon});"
        "t0 = time.perf_counter(); r = run(cfg); dt = time.perf_counter() - t0;"
        "print(dt, hashlib.sha256(r.trajectory.data.tobytes()).hexdigest())"
    )
    env = dict(os.environ, UNICYCLE_ESC_BACKEND=backend_name)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout.split()
    return float(out[0]), out[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--horizon", type=float, default=10.0)
    ns = ap.parse_args()

    cfg = parse_config("sim-known-field")
    avail = kernels.backends()
    if "cython" not in avail:
        print("compiled backend not built; only the Python fallback is available")
    print(f"{'backend':<8} {'1000 windows':>14} {'1000 predicts':>14} {f'run {ns.horizon:g} s':>12}")
    digests = {}
    for name, mod in avail.items():
        tw, tp = bench_kernels(mod, cfg, ns.repeat)
        tr, digest = full_run(name, ns.horizon)
        digests[name] = digest
        print(f"{name:<8} {tw:>13.4f}s {tp:>13.4f}s {tr:>11.3f}s")
    if len(digests) > 1:
        same = len(set(digests.values())) == 1
        print("trajectories identical across backends:", same)


if __name__ == "__main__":
    main()
