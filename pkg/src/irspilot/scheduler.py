"""Pilot and IRS reflection schedules for the three training phases.

Index lists in :class:`Phase3Plan` and :class:`Instant` are 1-based (users
``1..K``, elements ``1..N``) because they are transcriptions of set
definitions; the matrices in :class:`PilotSchedule` are ordinary 0-based
arrays.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel_model import SystemDims
from .numerics import dft_matrix


class RegimeError(ValueError):
    """Raised when a Phase III construction is requested for the wrong M/N regime."""


@dataclass(frozen=True)
class PilotLengths:
    tau1: int
    tau2: int
    tau3: int

    def __post_init__(self):
        if min(self.tau1, self.tau2, self.tau3) < 0:
            raise ValueError("phase lengths must be non-negative")

    @property
    def total(self):
        return self.tau1 + self.tau2 + self.tau3

    def as_tuple(self):
        return (self.tau1, self.tau2, self.tau3, self.total)


@dataclass(frozen=True)
class Instant:
    """One Phase III symbol: who transmits, which elements reflect, and
    which scaling factors ``(k, n)`` it is meant to resolve."""

    users: tuple
    elements: tuple
    targets: tuple = ()


@dataclass
class Phase3Plan:
    rho: int
    upsilon: int
    Lambda1: dict
    Lambda2: dict
    Omega: dict
    Jset: dict = field(default_factory=dict)
    Kset: dict = field(default_factory=dict)
    Nset: dict = field(default_factory=dict)

    @property
    def n_stage1(self):
        return len(self.Omega)

    @property
    def n_instants(self):
        return len(self.Omega) + len(self.Jset)


@dataclass
class PilotSchedule:
    """Training design: ``A`` is K x total (user pilots), ``Phi`` is N x total
    (reflection coefficients). ``instants`` describes the Phase III columns."""

    dims: SystemDims
    lengths: PilotLengths
    A: np.ndarray
    Phi: np.ndarray
    instants: list = field(default_factory=list)
    kind: str = "proposed"

    @property
    def total(self):
        return self.lengths.total

    def phase_slices(self):
        t1, t2, t3 = self.lengths.tau1, self.lengths.tau2, self.lengths.tau3
        return slice(0, t1), slice(t1, t1 + t2), slice(t1 + t2, t1 + t2 + t3)


def _ceil_div(a, b):
    return -(-a // b)


def min_pilot_lengths(dims):
    K, M, N = dims.K, dims.M, dims.N
    tau3 = max(K - 1, _ceil_div((K - 1) * N, M)) if K > 1 else 0
    return PilotLengths(tau1=K, tau2=N, tau3=tau3)


def benchmark_length(dims):
    return dims.K + dims.K * dims.N


def phase1_pilots(K, tau1):
    if tau1 < K:
        raise ValueError(f"Phase I needs at least K={K} symbols, got {tau1}")
    return dft_matrix(K, tau1)


def phase2_schedule(N, tau2):
    """Typical-user pilots (all ones) and the N x tau2 DFT reflection pattern."""
    if tau2 < N:
        raise ValueError(f"Phase II needs at least N={N} symbols, got {tau2}")
    return np.ones(tau2, dtype=np.complex128), dft_matrix(N, tau2)


def phase3_plan_large_m(dims):
    """K-1 instants; user ``i + 1`` transmits alone with every element on."""
    if dims.M < dims.N:
        raise RegimeError("the one-user-per-instant plan needs M >= N")
    elements = tuple(range(1, dims.N + 1))
    return [
        Instant(users=(k,), elements=elements, targets=tuple((k, n) for n in elements))
        for k in range(2, dims.K + 1)
    ]


def build_index_sets(dims):
    """Element partitions and per-instant activation sets for M < N."""
    K, M, N = dims.K, dims.M, dims.N
    if M >= N:
        raise RegimeError("index sets are defined only for M < N")
    rho = N // M
    upsilon = N - M * rho

    Lambda1, Lambda2 = {}, {}
    for k in range(2, K + 1):
        T_k = range((k - 2) * upsilon + 1, (k - 1) * upsilon + 1)
        Lambda2[k] = [m - (_ceil_div(m, N) - 1) * N for m in T_k]
        taken = set(Lambda2[k])
        Lambda1[k] = [n for n in range(1, N + 1) if n not in taken]

    Omega = {}
    for i in range(1, (K - 1) * rho + 1):
        user = _ceil_div(i, rho) + 1
        kappa = (i - (_ceil_div(i, rho) - 1) * rho - 1) * M
        Omega[i] = Lambda1[user][kappa:kappa + M]

    Jset, Kset, Nset = {}, {}, {}
    if upsilon > 0:
        n_total = (K - 1) * N - (K - 1) * M * rho
        tau3 = _ceil_div((K - 1) * N, M)
        for i in range((K - 1) * rho + 1, tau3 + 1):
            s = i - (K - 1) * rho
            J = list(range((s - 1) * M + 1, min(s * M, n_total) + 1))
            users = []
            for j in J:
                u = _ceil_div(j, upsilon) + 1
                if u not in users:
                    users.append(u)
            Jset[i] = J
            Kset[i] = users
            Nset[i] = [
                Lambda2[_ceil_div(j, upsilon) + 1][j - (_ceil_div(j, upsilon) - 1) * upsilon - 1]
                for j in J
            ]
    return Phase3Plan(rho, upsilon, Lambda1, Lambda2, Omega, Jset, Kset, Nset)


def phase3_plan_small_m(dims, plan=None):
    if dims.M >= dims.N:
        raise RegimeError("the index-set plan needs M < N")
    if plan is None:
        plan = build_index_sets(dims)
    instants = []
    for i in range(1, plan.n_stage1 + 1):
        user = _ceil_div(i, plan.rho) + 1
        els = tuple(plan.Omega[i])
        instants.append(Instant((user,), els, tuple((user, n) for n in els)))
    for i in sorted(plan.Jset):
        targets = tuple(
            (_ceil_div(j, plan.upsilon) + 1, n)
            for j, n in zip(plan.Jset[i], plan.Nset[i])
        )
        instants.append(Instant(tuple(plan.Kset[i]), tuple(plan.Nset[i]), targets))
    return instants


def phase3_instants(dims):
    if dims.K == 1:
        return []
    if dims.M >= dims.N:
        return phase3_plan_large_m(dims)
    return phase3_plan_small_m(dims)


def _fill_instant(A, Phi, col, inst):
    for k in inst.users:
        A[k - 1, col] = 1.0
    for n in inst.elements:
        Phi[n - 1, col] = 1.0


def assemble_schedule(dims, lengths=None):
    """Concatenate the three phases into global ``A`` and ``Phi``.

    ``lengths`` defaults to the minimum. Longer phases are allowed: Phase I
    and II use wider DFT blocks, extra Phase III columns are left idle.
    """
    minimum = min_pilot_lengths(dims)
    if lengths is None:
        lengths = minimum
    if (lengths.tau1 < minimum.tau1 or lengths.tau2 < minimum.tau2
            or lengths.tau3 < minimum.tau3):
        raise ValueError(f"lengths {lengths} are below the minimum {minimum}")
    K, N = dims.K, dims.N
    A = np.zeros((K, lengths.total), dtype=np.complex128)
    Phi = np.zeros((N, lengths.total), dtype=np.complex128)
    s1, s2, s3 = lengths.tau1, lengths.tau1 + lengths.tau2, lengths.total

    A[:, :s1] = phase1_pilots(K, lengths.tau1)
    a1, phi2 = phase2_schedule(N, lengths.tau2)
    A[0, s1:s2] = a1
    Phi[:, s1:s2] = phi2

    instants = phase3_instants(dims)
    for offset, inst in enumerate(instants):
        _fill_instant(A, Phi, s2 + offset, inst)
    assert s2 + len(instants) <= s3
    return PilotSchedule(dims, lengths, A, Phi, instants, kind="proposed")


def drop_phase3_instant(schedule, index=-1):
    """Copy of ``schedule`` with one Phase III column removed."""
    lengths = schedule.lengths
    if lengths.tau3 == 0:
        raise ValueError("schedule has no Phase III instants")
    start = lengths.tau1 + lengths.tau2
    index = range(lengths.tau3)[index]
    keep = np.ones(lengths.total, dtype=bool)
    keep[start + index] = False
    instants = list(schedule.instants)
    if index < len(instants):
        del instants[index]
    return PilotSchedule(
        schedule.dims,
        PilotLengths(lengths.tau1, lengths.tau2, lengths.tau3 - 1),
        schedule.A[:, keep].copy(),
        schedule.Phi[:, keep].copy(),
        instants,
        kind=schedule.kind,
    )


def benchmark_schedule(dims):
    """K orthogonal pilots with the IRS off, then one N-symbol DFT block per user."""
    K, N = dims.K, dims.N
    total = benchmark_length(dims)
    A = np.zeros((K, total), dtype=np.complex128)
    Phi = np.zeros((N, total), dtype=np.complex128)
    A[:, :K] = phase1_pilots(K, K)
    block = dft_matrix(N, N)
    for k in range(K):
        cols = slice(K + k * N, K + (k + 1) * N)
        A[k, cols] = 1.0
        Phi[:, cols] = block
    return PilotSchedule(dims, PilotLengths(K, K * N, 0), A, Phi, [], kind="benchmark")


def active_sets(schedule, column):
    """1-based (users, elements) with non-zero pilot / reflection at ``column``."""
    users = tuple(int(k) + 1 for k in np.flatnonzero(schedule.A[:, column]))
    elements = tuple(int(n) + 1 for n in np.flatnonzero(schedule.Phi[:, column]))
    return users, elements


# ---- text dump -------------------------------------------------------------

def _fmt(z):
    re, im = z.real, z.imag
    re = 0.0 if abs(re) < 1e-12 else re + 0.0
    im = 0.0 if abs(im) < 1e-12 else im + 0.0
    return f"{re:.6g}{im:+.6g}j"


def dump_schedule(schedule):
    d, L = schedule.dims, schedule.lengths
    lines = [
        f"# K={d.K} M={d.M} N={d.N} kind={schedule.kind}",
        f"PHASES {L.tau1} {L.tau2} {L.tau3}",
        "A",
    ]
    lines += [" ".join(_fmt(z) for z in row) for row in schedule.A]
    lines.append("PHI")
    lines += [" ".join(_fmt(z) for z in row) for row in schedule.Phi]
    return "\n".join(lines) + "\n"


def parse_schedule(text, M=None):
    """Inverse of :func:`dump_schedule`.

    ``M`` is read from the leading comment when present; pass it explicitly
    for dumps that lack one.
    """
    meta = {}
    phases = None
    section = None
    rows = {"A": [], "PHI": []}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    key, value = tok.split("=", 1)
                    meta[key] = value
            continue
        if line.startswith("PHASES"):
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: malformed PHASES header")
            phases = PilotLengths(*(int(p) for p in parts[1:]))
            continue
        if line in rows:
            section = line
            continue
        if section is None:
            raise ValueError(f"line {lineno}: matrix row outside a section")
        try:
            rows[section].append([complex(tok) for tok in line.split()])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if phases is None:
        raise ValueError("missing PHASES header")
    A = np.array(rows["A"], dtype=np.complex128)
    Phi = np.array(rows["PHI"], dtype=np.complex128)
    if A.ndim != 2 or Phi.ndim != 2 or A.shape[1] != phases.total or Phi.shape[1] != phases.total:
        raise ValueError("matrix widths do not match the PHASES header")
    if M is None:
        if "M" not in meta:
            raise ValueError("antenna count M not given and not in the dump")
        M = int(meta["M"])
    dims = SystemDims(K=A.shape[0], M=M, N=Phi.shape[0])
    sched = PilotSchedule(dims, phases, A, Phi, kind=meta.get("kind", "proposed"))
    start = phases.tau1 + phases.tau2
    for col in range(start, phases.total):
        users, elements = active_sets(sched, col)
        if users:
            sched.instants.append(Instant(users, elements))
    return sched
