"""Time the numba loops against the vectorized numpy kernels.

    python benchmarks/bench_kernels.py [--repeat 20]

With IRSPILOT_NUMBA=0 the "numba" column runs the same loops as plain
Python, which is only useful to see how much the JIT buys.
"""

import argparse
import time

import numpy as np

from irspilot._accel import USE_NUMBA
from irspilot.channel_model import GeometryConfig, SystemDims, make_rng, sample_channels
from irspilot.kernels import rx_numba, rx_numpy, stacked_numba, stacked_numpy
from irspilot.scheduler import assemble_schedule

CASES = [(8, 64, 32), (8, 4, 32), (16, 8, 64), (4, 128, 128)]


def best_of(fn, args, repeat):
    fn(*args)  # compile / warm caches
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    geo = GeometryConfig()
    print(f"numba enabled: {USE_NUMBA}")
    print(f"{'kernel':<8} {'K,M,N':<12} {'numba ms':>10} {'numpy ms':>10} {'ratio':>7} {'max diff':>9}")
    for K, M, N in CASES:
        dims = SystemDims(K, M, N)
        s = assemble_schedule(dims)
        ch = sample_channels(dims, geo, make_rng(0))
        _, _, s3 = s.phase_slices()
        g1 = ch.g[0]
        jobs = {
            "rx": (rx_numba, rx_numpy, (ch.h, ch.g, s.A, s.Phi, np.sqrt(geo.power_linear))),
            "stacked": (stacked_numba, stacked_numpy, (g1, s.A[:, s3], s.Phi[:, s3])),
        }
        for name, (fast, ref, fargs) in jobs.items():
            t_jit, a = best_of(fast, fargs, args.repeat)
            t_np, b = best_of(ref, fargs, args.repeat)
            diff = np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)
            print(f"{name:<8} {f'{K},{M},{N}':<12} {t_jit * 1e3:>10.3f} {t_np * 1e3:>10.3f} "
                  f"{t_np / t_jit:>7.2f} {diff:>9.1e}")
            if diff > 1e-12:
                raise SystemExit(f"{name} kernels disagree at {(K, M, N)}: {diff:.2e}")


if __name__ == "__main__":
    main()
