"""``irspilot`` command line: pilot-length tables, recovery trials, schedule dumps."""

import argparse
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .airsim import synthesize_rx
from .channel_model import GeometryConfig, SystemDims, make_rng, sample_channels
from .config import ConfigError, ExperimentConfig, build_config, load_config
from .estimator import (
    cancel_direct,
    estimate_lambdas_large_m,
    estimate_lambdas_small_m,
    estimate_phases_1_2,
    oracle_phase3_ls,
    run_benchmark,
    run_three_phase,
)
from .numerics import relative_error
from .scheduler import (
    assemble_schedule,
    benchmark_length,
    benchmark_schedule,
    build_index_sets,
    dump_schedule,
    min_pilot_lengths,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

ORACLE_GRID = [(8, 64, 32), (3, 4, 3), (4, 8, 8), (3, 2, 3), (2, 2, 4), (8, 4, 32), (5, 5, 8)]


def sweep_rows(K, N, m_min, m_max):
    if not 1 <= m_min <= m_max:
        raise ConfigError("need 1 <= m_min <= m_max")
    bench = benchmark_length(SystemDims(K, 1, N))
    return [
        (M, min_pilot_lengths(SystemDims(K, M, N)).total, bench)
        for M in range(m_min, m_max + 1)
    ]


def _fmt_float(x):
    return f"{x:.16e}"


def _trial(job):
    cfg, trial, strategy, truncate = job
    if strategy == "proposed":
        res = run_three_phase(cfg.dims, cfg.geo, cfg.seed, trial=trial,
                              noise_variance=cfg.noise_variance,
                              truncate_phase3=truncate)
    else:
        res = run_benchmark(cfg.dims, cfg.geo, cfg.seed, trial=trial,
                            noise_variance=cfg.noise_variance)
    return trial, strategy, res.pilot_len, res.err_h, res.err_g, res.success, res.failure


def _map(func, jobs, n_jobs):
    if n_jobs <= 1:
        return [func(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(func, jobs, chunksize=max(1, len(jobs) // (4 * n_jobs))))


def simulate(cfg, strategies=("proposed", "benchmark"), truncate_phase3=0, jobs=1):
    """Run ``cfg.trials`` trials per strategy. Returns ``(csv_text, rows)``."""
    work = [(cfg, t, s, truncate_phase3) for t in range(cfg.trials) for s in strategies]
    rows = _map(_trial, work, jobs)
    out = io.StringIO()
    out.write("trial,strategy,pilot_len,max_rel_err_h,max_rel_err_g,success\n")
    for trial, strategy, plen, eh, eg, ok, _ in rows:
        out.write(f"{trial},{strategy},{plen},{_fmt_float(eh)},{_fmt_float(eg)},{int(ok)}\n")
    return out.getvalue(), rows


def oracle_check(dims, seed, trials, geo=None):
    """Largest relative gap between the structured and stacked Phase III solutions."""
    geo = geo or GeometryConfig()
    worst = 0.0
    schedule = assemble_schedule(dims)
    plan = build_index_sets(dims) if dims.M < dims.N else None
    _, _, s3 = schedule.phase_slices()
    for trial in range(trials):
        ch = sample_channels(dims, geo, make_rng(seed, trial, "channels"))
        rx = synthesize_rx(schedule, ch, geo.power_dbm)
        p = rx.power_linear
        h_hat, g1_hat = estimate_phases_1_2(rx.Y, schedule, p)
        ybar3 = cancel_direct(rx.Y[:, s3], h_hat, schedule.A[:, s3], p)
        if plan is None:
            lam = estimate_lambdas_large_m(ybar3[:, : dims.K - 1], g1_hat, p)
        else:
            lam = estimate_lambdas_small_m(ybar3, g1_hat, plan, schedule, p)
        ref = oracle_phase3_ls(ybar3, g1_hat, schedule, p)
        worst = max(worst, relative_error(lam, ref))
    return worst


def _write(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _resolve_config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    env_seed = os.environ.get("IRSPILOT_SEED")
    if env_seed is not None:
        try:
            overrides["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"IRSPILOT_SEED is not an integer: {env_seed!r}") from None
    if args.seed is not None:
        overrides["seed"] = args.seed
    for key in ("K", "M", "N", "trials"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "noise_variance", None) is not None:
        overrides["noise_variance"] = args.noise_variance
    return build_config(overrides, cfg)


def cmd_min_length(cfg, args):
    L = min_pilot_lengths(cfg.dims)
    print(f"{L.tau1} {L.tau2} {L.tau3} {L.total}")
    print(benchmark_length(cfg.dims))
    return EXIT_OK


def cmd_sweep(cfg, args):
    rows = sweep_rows(cfg.dims.K, cfg.dims.N, args.m_min, args.m_max)
    text = "M,tau_proposed,tau_benchmark\n" + "".join(f"{m},{p},{b}\n" for m, p, b in rows)
    _write(text, args.out or cfg.output_path)
    return EXIT_OK


def cmd_simulate(cfg, args):
    strategies = ("proposed", "benchmark") if args.strategy == "both" else (args.strategy,)
    text, rows = simulate(cfg, strategies, args.truncate_phase3, args.jobs)
    _write(text, args.out or cfg.output_path)
    n_ok = sum(1 for r in rows if r[5])
    print(f"success fraction {n_ok / len(rows):.6f} ({n_ok}/{len(rows)})", file=sys.stderr)
    reasons = sorted({r[6] for r in rows if r[6]})
    for reason in reasons[:5]:
        print(f"failure: {reason}", file=sys.stderr)
    if cfg.noise_variance > 0:
        return EXIT_OK
    return EXIT_OK if n_ok == len(rows) else EXIT_FAIL


def cmd_schedule(cfg, args):
    sched = benchmark_schedule(cfg.dims) if args.benchmark else assemble_schedule(cfg.dims)
    _write(dump_schedule(sched), args.out)
    return EXIT_OK


def cmd_oracle_check(cfg, args):
    grid = [SystemDims(*d) for d in ORACLE_GRID] if args.grid else [cfg.dims]
    lines = ["K,M,N,trials,max_rel_diff,pass\n"]
    ok = True
    for dims in grid:
        if dims.K < 2:
            continue
        worst = oracle_check(dims, cfg.seed, cfg.trials, cfg.geo)
        passed = worst <= args.tol
        ok &= passed
        lines.append(f"{dims.K},{dims.M},{dims.N},{cfg.trials},{_fmt_float(worst)},{int(passed)}\n")
    _write("".join(lines), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, metavar="U64", default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, metavar="N", default=argparse.SUPPRESS)
    common.add_argument("--out", metavar="PATH", default=argparse.SUPPRESS)
    common.add_argument("-K", type=int, default=argparse.SUPPRESS, help="number of users")
    common.add_argument("-M", type=int, default=argparse.SUPPRESS, help="BS antennas")
    common.add_argument("-N", type=int, default=argparse.SUPPRESS, help="IRS elements")

    parser = argparse.ArgumentParser(
        prog="irspilot",
        description="Pilot lengths and noiseless channel recovery for IRS-assisted uplink.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("min-length", parents=[common], help="minimum pilot lengths")

    p = sub.add_parser("sweep", parents=[common], help="pilot length versus M as CSV")
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=64)

    p = sub.add_parser("simulate", parents=[common], help="seeded recovery trials as CSV")
    p.add_argument("--trials", type=int)
    p.add_argument("--noise-variance", type=float)
    p.add_argument("--strategy", choices=("both", "proposed", "benchmark"), default="both")
    p.add_argument("--truncate-phase3", type=int, default=0, metavar="N",
                   help="debug: drop N trailing Phase III instants")

    p = sub.add_parser("schedule", parents=[common], help="dump the pilot/reflection schedule")
    p.add_argument("--benchmark", action="store_true")

    p = sub.add_parser("oracle-check", parents=[common],
                       help="structured vs stacked least-squares Phase III recovery")
    p.add_argument("--trials", type=int)
    p.add_argument("--grid", action="store_true", help="use the built-in dims grid")
    p.add_argument("--tol", type=float, default=1e-9)
    return parser


COMMANDS = {
    "min-length": cmd_min_length,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "schedule": cmd_schedule,
    "oracle-check": cmd_oracle_check,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    for name, default in (("config", None), ("seed", None), ("jobs", 1), ("out", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        cfg = _resolve_config(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
