"""Three-phase recovery of direct and IRS-reflected channels.

Phase I recovers the direct channels with the IRS off, Phase II the typical
user's (user 1) reflected channels, Phase III the ratios ``lambda[k, n]`` that
scale user 1's reflected channels into everybody else's.
"""

from dataclasses import dataclass, field

import numpy as np

from .airsim import synthesize_rx
from .channel_model import GeometryConfig, make_rng, sample_channels, true_lambdas
from .kernels import stacked_matrix
from .numerics import (
    RankDeficiencyError,
    numerical_rank,
    pinv_solve,
    relative_error,
)
from .scheduler import (
    active_sets,
    assemble_schedule,
    benchmark_schedule,
    build_index_sets,
    drop_phase3_instant,
    phase3_plan_small_m,
)

SUCCESS_TOL = 1e-8
COND_LIMIT = 1e10
GRAM_TOL = 1e-9


class ScheduleMismatchError(ValueError):
    """The schedule's Phase III columns do not follow the expected plan."""


@dataclass
class EstimationResult:
    strategy: str
    pilot_len: int
    h_hat: np.ndarray = None
    g1_hat: np.ndarray = None
    lambda_hat: np.ndarray = None
    g_hat: np.ndarray = None
    err_h: float = np.inf
    err_g: float = np.inf
    err_lambda: float = np.nan
    stacked_rank: int = None
    stacked_unknowns: int = 0
    solves: list = field(default_factory=list)
    ill_conditioned: bool = False
    success: bool = False
    failure: str = None

    @property
    def max_cond(self):
        return max((s["cond"] for s in self.solves), default=1.0)

    @property
    def max_residual(self):
        return max((s["residual"] for s in self.solves), default=0.0)


def _check_gram(P, tau, what):
    gram = P @ P.conj().T
    if not np.allclose(gram, tau * np.eye(P.shape[0]), rtol=0, atol=GRAM_TOL * max(tau, 1)):
        raise ValueError(f"{what} rows are not orthogonal with squared norm {tau}")


def estimate_direct(Y1, A1, p):
    """``Y1 @ A1^H / (tau1 sqrt(p))``; needs ``A1 @ A1^H = tau1 I``."""
    tau1 = A1.shape[1]
    _check_gram(A1, tau1, "Phase I pilot")
    return Y1 @ A1.conj().T / (tau1 * np.sqrt(p))


def cancel_direct(Y, h_hat, A_segment, p):
    return Y - np.sqrt(p) * (h_hat @ A_segment)


def estimate_typical(Ybar2, PhiII, p):
    tau2 = PhiII.shape[1]
    _check_gram(PhiII, tau2, "Phase II reflection")
    return Ybar2 @ PhiII.conj().T / (tau2 * np.sqrt(p))


def _solve(G, y, log, where):
    x, info = pinv_solve(G, y, return_info=True)
    info["where"] = where
    if log is not None:
        log.append(info)
    return x


def estimate_lambdas_large_m(ybar3, g1_hat, p, log=None):
    """One pseudo-inverse solve per user ``k >= 2`` (column ``k - 2`` of ``ybar3``).

    Columns beyond the first ``K - 1`` are ignored; the number of recovered
    users equals the number of columns supplied.
    """
    ybar3 = np.asarray(ybar3)
    M, N = g1_hat.shape
    if M < N:
        raise RankDeficiencyError(
            f"M={M} antennas cannot separate N={N} reflected channels",
            rank=M, needed=N,
        )
    lam = np.empty((ybar3.shape[1], N), dtype=np.complex128)
    for c in range(ybar3.shape[1]):
        lam[c] = _solve(g1_hat, ybar3[:, c] / np.sqrt(p), log, f"user {c + 2}")
    return lam


def estimate_lambdas_small_m(ybar3, g1_hat, plan, schedule, p, log=None):
    """Sequential recovery for M < N.

    Stage 1 instants invert ``M`` columns of ``g1_hat`` for a single user.
    Stage 2 instants first subtract the contributions already known from
    stage 1, then solve for the remaining ratios on the active columns.
    """
    d = schedule.dims
    K, N = d.K, d.N
    instants = phase3_plan_small_m(d, plan)
    start = schedule.lengths.tau1 + schedule.lengths.tau2
    if ybar3.shape[1] < len(instants):
        raise RankDeficiencyError(
            f"{ybar3.shape[1]} Phase III instants supplied, plan needs {len(instants)}",
            needed=len(instants),
        )
    for i, inst in enumerate(instants):
        users, elements = active_sets(schedule, start + i)
        if set(users) != set(inst.users) or set(elements) != set(inst.elements):
            raise ScheduleMismatchError(f"Phase III instant {i + 1} does not match the plan")

    sqp = np.sqrt(p)
    lam = np.full((K - 1, N), np.nan + 0j)
    for i in range(1, plan.n_stage1 + 1):
        user = instants[i - 1].users[0]
        cols = [n - 1 for n in plan.Omega[i]]
        lam[user - 2, cols] = _solve(
            g1_hat[:, cols], ybar3[:, i - 1] / sqp, log, f"stage 1 instant {i}"
        )
    for i in sorted(plan.Jset):
        y = ybar3[:, i - 1].copy()
        Nset = plan.Nset[i]
        for k in plan.Kset[i]:
            known = set(plan.Lambda1[k])
            for n in Nset:
                if n in known:
                    y -= sqp * lam[k - 2, n - 1] * g1_hat[:, n - 1]
        cols = [n - 1 for n in Nset]
        x = _solve(g1_hat[:, cols], y / sqp, log, f"stage 2 instant {i}")
        for (k, n), value in zip(instants[i - 1].targets, x):
            lam[k - 2, n - 1] = value
    return lam


def reconstruct_channels(g1_hat, lambda_hat):
    """Stack ``g1_hat`` with ``lambda_hat[k - 2, n] * g1_hat[:, n]`` for ``k >= 2``."""
    lambda_hat = np.asarray(lambda_hat).reshape(-1, g1_hat.shape[1])
    others = lambda_hat[:, None, :] * g1_hat[None, :, :]
    return np.concatenate([g1_hat[None], others], axis=0)


def stacked_system(g1, schedule):
    """The ``M tau3 x (K-1) N`` matrix mapping the ratios to the Phase III block."""
    _, _, s3 = schedule.phase_slices()
    return stacked_matrix(g1, schedule.A[:, s3], schedule.Phi[:, s3])


def oracle_phase3_ls(ybar3, g1, schedule, p, log=None):
    """Single least-squares solve on the explicitly stacked Phase III system."""
    V = stacked_system(g1, schedule)
    y = np.asarray(ybar3).T.reshape(-1)
    x = _solve(np.sqrt(p) * V, y, log, "stacked oracle")
    return x.reshape(schedule.dims.K - 1, schedule.dims.N)


def _fill_errors(res, ch):
    res.err_h = relative_error(res.h_hat, ch.h)
    res.err_g = max(relative_error(res.g_hat[k], ch.g[k]) for k in range(ch.g.shape[0]))
    res.ill_conditioned = res.max_cond > COND_LIMIT
    res.success = bool(res.err_h <= SUCCESS_TOL and res.err_g <= SUCCESS_TOL)
    if not res.success and res.failure is None:
        res.failure = f"error above {SUCCESS_TOL:g} (h {res.err_h:.3g}, g {res.err_g:.3g})"


def estimate_phases_1_2(Y, schedule, p):
    """Direct channels and user 1's reflected channels. Returns ``(h, g1)``."""
    s1, s2, _ = schedule.phase_slices()
    h_hat = estimate_direct(Y[:, s1], schedule.A[:, s1], p)
    if not np.allclose(schedule.A[0, s2], 1) or np.any(schedule.A[1:, s2] != 0):
        raise ScheduleMismatchError("Phase II must carry only user 1 sending ones")
    ybar2 = cancel_direct(Y[:, s2], h_hat, schedule.A[:, s2], p)
    return h_hat, estimate_typical(ybar2, schedule.Phi[:, s2], p)


def estimate_phase_3(Y, h_hat, g1_hat, schedule, p, log=None):
    d = schedule.dims
    if d.K == 1:
        return np.zeros((0, d.N), dtype=np.complex128)
    _, _, s3 = schedule.phase_slices()
    ybar3 = cancel_direct(Y[:, s3], h_hat, schedule.A[:, s3], p)
    if d.M < d.N:
        return estimate_lambdas_small_m(ybar3, g1_hat, build_index_sets(d), schedule, p, log)
    n_inst = int(np.count_nonzero(np.any(schedule.A[1:, s3] != 0, axis=0)))
    if n_inst < d.K - 1:
        raise RankDeficiencyError(
            f"{n_inst} Phase III instants cannot resolve {d.K - 1} users",
            needed=d.K - 1,
        )
    return estimate_lambdas_large_m(ybar3[:, : d.K - 1], g1_hat, p, log)


def three_phase_estimate(Y, schedule, p, log=None):
    """Run phases I to III on a received block. Returns ``(h, g1, lambda)``."""
    h_hat, g1_hat = estimate_phases_1_2(Y, schedule, p)
    return h_hat, g1_hat, estimate_phase_3(Y, h_hat, g1_hat, schedule, p, log)


def run_three_phase(dims, geo=None, seed=0, lengths=None, trial=0,
                    noise_variance=0.0, truncate_phase3=0, channels=None):
    """Sample one block, train with the three-phase schedule, score against truth.

    ``truncate_phase3`` drops that many trailing Phase III instants, which
    must make recovery fail with a rank error.
    """
    geo = geo or GeometryConfig()
    ch = channels if channels is not None else sample_channels(
        dims, geo, make_rng(seed, trial, "channels"))
    schedule = assemble_schedule(dims, lengths)
    for _ in range(truncate_phase3):
        schedule = drop_phase3_instant(schedule, -1)
    rx = synthesize_rx(schedule, ch, geo.power_dbm, noise_variance,
                       make_rng(seed, trial, "proposed/noise"))
    p = rx.power_linear
    res = EstimationResult("proposed", schedule.total)
    res.stacked_unknowns = (dims.K - 1) * dims.N
    stage = "phase I/II"
    try:
        res.h_hat, res.g1_hat = estimate_phases_1_2(rx.Y, schedule, p)
        stage = "phase III"
        if dims.K > 1:
            res.stacked_rank = numerical_rank(stacked_system(res.g1_hat, schedule))
        res.lambda_hat = estimate_phase_3(rx.Y, res.h_hat, res.g1_hat, schedule, p, res.solves)
    except (np.linalg.LinAlgError, ScheduleMismatchError) as exc:
        res.failure = f"{stage}: {exc}"
        return res
    res.g_hat = reconstruct_channels(res.g1_hat, res.lambda_hat)
    if dims.K > 1:
        res.err_lambda = relative_error(res.lambda_hat, true_lambdas(ch.t))
    _fill_errors(res, ch)
    return res


def run_benchmark(dims, geo=None, seed=0, trial=0, noise_variance=0.0, channels=None):
    """Each user in turn sends N pilots through the DFT reflection pattern."""
    geo = geo or GeometryConfig()
    ch = channels if channels is not None else sample_channels(
        dims, geo, make_rng(seed, trial, "channels"))
    schedule = benchmark_schedule(dims)
    rx = synthesize_rx(schedule, ch, geo.power_dbm, noise_variance,
                       make_rng(seed, trial, "benchmark/noise"))
    p = rx.power_linear
    K, N = dims.K, dims.N
    res = EstimationResult("benchmark", schedule.total)
    try:
        h_hat = estimate_direct(rx.Y[:, :K], schedule.A[:, :K], p)
        g_hat = np.empty((K, dims.M, N), dtype=np.complex128)
        for k in range(K):
            cols = slice(K + k * N, K + (k + 1) * N)
            ybar = cancel_direct(rx.Y[:, cols], h_hat, schedule.A[:, cols], p)
            g_hat[k] = estimate_typical(ybar, schedule.Phi[:, cols], p)
    except (np.linalg.LinAlgError, ValueError) as exc:
        res.failure = f"benchmark: {exc}"
        return res
    res.h_hat, res.g1_hat, res.g_hat = h_hat, g_hat[0], g_hat
    _fill_errors(res, ch)
    return res
