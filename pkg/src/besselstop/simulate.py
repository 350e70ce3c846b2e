"""Path simulation of the squared bridge and Monte Carlo policy evaluation.

Two schemes: an exact one for integer dimension (the squared bridge is a sum
of independent squared scalar bridges, each sampled by the conditional
Gaussian recursion, so every grid marginal has the exact law), and
full-truncation Euler for arbitrary dimension.

Reproducibility contract: every path owns an RNG stream derived from
(master seed, path index) through a seed sequence, so results are bit
identical for any chunking or number of worker threads.  Reductions run over
the fully assembled per-path arrays with numpy's pairwise summation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .series import ModelParams

SCHEME_EXACT = "exact_integer_dim"
SCHEME_EULER = "euler_full_truncation"
_MAX_U64 = 2**64


def path_seed(master_seed: int, path_index: int) -> int:
    """64-bit stream key for one path, derived statelessly from the master seed."""
    ss = np.random.SeedSequence((master_seed, path_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _path_generator(master_seed: int, path_index: int) -> np.random.Generator:
    # Stateless per-path split: the (master, index) pair keys the stream, so
    # any chunking or thread count reproduces identical paths.
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((master_seed, path_index)))
    )


def worker_count(n_tasks: int) -> int:
    """Worker cap: BESSELSTOP_THREADS if set, else hardware parallelism."""
    env = os.environ.get("BESSELSTOP_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


@dataclass(frozen=True)
class SimConfig:
    """Inputs of a simulation run; immutable and fully determining with the seed."""

    params: ModelParams
    t0: float = 0.0
    q0: float = 0.0
    n_paths: int = 200_000
    n_steps: int = 2000
    seed: int = 20240601
    scheme: str = SCHEME_EXACT
    eps_end: float = 1e-6

    def __post_init__(self):
        if not (0.0 <= self.t0 < 1.0):
            raise ValueError("t0 must lie in [0, 1)")
        if self.q0 < 0.0:
            raise ValueError("q0 must be nonnegative")
        if self.n_paths < 1 or self.n_steps < 1:
            raise ValueError("n_paths and n_steps must be positive")
        if not (0 <= self.seed < _MAX_U64):
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.scheme not in (SCHEME_EXACT, SCHEME_EULER):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not (0.0 < self.eps_end < 1.0 - self.t0):
            raise ValueError("eps_end must lie in (0, 1 - t0)")
        if self.scheme == SCHEME_EXACT:
            a = self.params.alpha
            if abs(a - round(a)) > 1e-12 or a < 1.0:
                raise ValueError("exact scheme needs a positive integer dimension")
            if self.q0 != 0.0:
                raise ValueError("exact scheme starts from q0 = 0")


@dataclass(frozen=True, eq=False)
class BridgePath:
    """One discretized trajectory with the stream key that produced it."""

    times: np.ndarray
    q: np.ndarray
    seed_used: int


@dataclass(frozen=True)
class ThresholdPolicy:
    """Stop at the first grid time s with Q_s >= Z (1 - s)."""

    Z: float

    def __post_init__(self):
        if self.Z <= 0.0:
            raise ValueError("Z must be positive")


@dataclass(frozen=True)
class StoppingOutcome:
    tau: float
    payoff: float
    stopped: bool


@dataclass(frozen=True)
class MCResult:
    """Monte Carlo aggregate; ci95 = mean +/- 1.96 stderr."""

    mean: float
    stderr: float
    n_paths: int
    ci95: tuple[float, float]
    stop_fraction: float
    warning: str | None = None


@dataclass(frozen=True)
class SweepRow:
    multiplier: float
    Z_level: float
    result: MCResult
    paired_mean_vs_candidate: float | None = None
    paired_stderr_vs_candidate: float | None = None


@dataclass(frozen=True)
class SweepTable:
    base_Z: float
    rows: tuple[SweepRow, ...]

    def argmax_mean(self) -> float:
        best = max(self.rows, key=lambda r: r.result.mean)
        return best.multiplier


def _exact_times(config: SimConfig) -> np.ndarray:
    return np.linspace(0.0, 1.0, config.n_steps + 1)


def _euler_times(config: SimConfig) -> np.ndarray:
    return np.linspace(config.t0, 1.0 - config.eps_end, config.n_steps + 1)


def _exact_bridge_q(xi: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Squared-bridge values at every grid node from per-step normals.

    The scalar bridge recursion B_{t+h} = B_t (1 - h/(1-t)) + sqrt(h(1-t-h)/(1-t)) xi
    has multiplier (1-t_{j+1})/(1-t_j), so it telescopes to
    B_j = (1-t_j) * sum_{k<j} c_k xi_k / (1-t_{k+1}), which one cumulative sum
    evaluates for all nodes at once.  The pinned node gets the exact zero the
    recursion produces (its multiplier and innovation both vanish).

    xi has shape (..., m, d) for m steps and d component bridges; the result
    has shape (..., m+1) and starts at 0.
    """
    m = t.size - 1
    c = np.sqrt(np.diff(t) * (1.0 - t[1:]) / (1.0 - t[:-1]))
    w = np.zeros(m)
    w[:-1] = c[:-1] / (1.0 - t[1:m])
    scaled = xi * w[:, None]
    s = np.cumsum(scaled, axis=-2)
    b = s * (1.0 - t[1:, None])
    q = np.einsum("...jd,...jd->...j", b, b)
    lead = np.zeros(q.shape[:-1] + (1,))
    return np.concatenate([lead, q], axis=-1)


def simulate_exact(config: SimConfig) -> BridgePath:
    """One exact path: sum of alpha independent squared scalar bridges.

    Each bridge follows the conditional Gaussian recursion
    B_{t+h} = B_t (1 - h/(1-t)) + sqrt(h (1-t-h)/(1-t)) xi, so every grid
    marginal has the exact law and the path ends at zero by construction.
    Requires integer dimension and a start at (t, q) = (0, 0).
    """
    if config.scheme != SCHEME_EXACT:
        raise ValueError("config.scheme must be exact_integer_dim")
    if config.t0 != 0.0:
        raise ValueError("exact scheme starts at t0 = 0")
    d = int(round(config.params.alpha))
    t = _exact_times(config)
    gen = _path_generator(config.seed, 0)
    xi = gen.standard_normal((config.n_steps, d))
    q = _exact_bridge_q(xi, t)
    return BridgePath(times=t, q=q, seed_used=path_seed(config.seed, 0))


def simulate_euler(config: SimConfig) -> BridgePath:
    """One full-truncation Euler path on [t0, 1 - eps_end].

    The state is clipped at zero after every step, which keeps the square
    root well-defined without biasing the positive part of the dynamics.
    """
    if config.scheme != SCHEME_EULER:
        raise ValueError("config.scheme must be euler_full_truncation")
    a = config.params.alpha
    t = _euler_times(config)
    gen = _path_generator(config.seed, 0)
    xi = gen.standard_normal(config.n_steps)
    q = np.empty(config.n_steps + 1)
    q[0] = config.q0
    for j in range(config.n_steps):
        tau = 1.0 - t[j]
        h = t[j + 1] - t[j]
        drift = (a - 2.0 * q[j] / tau) * h
        q[j + 1] = max(0.0, q[j] + drift + 2.0 * math.sqrt(q[j] * h) * xi[j])
    return BridgePath(times=t, q=q, seed_used=path_seed(config.seed, 0))


def apply_policy(path: BridgePath, policy: ThresholdPolicy, n: float) -> StoppingOutcome:
    """First grid time with Q >= Z (1 - t); payoff Q^{n/2} there.

    The pinned node at t = 1 never triggers: a path that reaches it untouched
    keeps the zero payoff that pinning forces.
    """
    mask = (path.times < 1.0) & (path.q >= policy.Z * (1.0 - path.times))
    if mask.any():
        j = int(np.argmax(mask))
        return StoppingOutcome(
            tau=float(path.times[j]),
            payoff=float(path.q[j] ** (0.5 * n)),
            stopped=True,
        )
    return StoppingOutcome(tau=1.0, payoff=0.0, stopped=False)


def _chunk_size(workers: int) -> int:
    if workers <= 4:
        return 2048
    if workers <= 8:
        return 1024
    return 512


def _run_chunk_exact(config, levels, t, start, stop, payoffs, stopped):
    d = int(round(config.params.alpha))
    n = config.params.n
    m = stop - start
    xi = np.empty((m, config.n_steps, d))
    for i in range(m):
        gen = _path_generator(config.seed, start + i)
        xi[i] = gen.standard_normal((config.n_steps, d))
    q = _exact_bridge_q(xi, t)
    del xi
    rows = np.arange(m)
    tau_grid = 1.0 - t
    for l, z in enumerate(levels):
        thresh = z * tau_grid
        thresh[t >= 1.0] = np.inf  # pinned node never triggers
        mask = q >= thresh[None, :]
        hit = mask.any(axis=1)
        first = np.argmax(mask, axis=1)
        pay = np.where(hit, q[rows, first] ** (0.5 * n), 0.0)
        payoffs[start:stop, l] = pay
        stopped[start:stop, l] = hit


def _run_chunk_euler(config, levels, t, start, stop, payoffs, stopped):
    a = config.params.alpha
    n = config.params.n
    m = stop - start
    xi = np.empty((m, config.n_steps))
    for i in range(m):
        gen = _path_generator(config.seed, start + i)
        xi[i] = gen.standard_normal(config.n_steps)
    qv = np.full(m, config.q0)
    hit = np.zeros((m, levels.size), dtype=bool)
    pay = np.zeros((m, levels.size))

    def record(node_t, q_now):
        for l, z in enumerate(levels):
            new = ~hit[:, l] & (q_now >= z * (1.0 - node_t))
            if new.any():
                pay[new, l] = q_now[new] ** (0.5 * n)
                hit[new, l] = True

    record(t[0], qv)
    for j in range(config.n_steps):
        tau = 1.0 - t[j]
        h = t[j + 1] - t[j]
        qv = np.maximum(
            0.0, qv + (a - 2.0 * qv / tau) * h + 2.0 * np.sqrt(qv * h) * xi[:, j]
        )
        record(t[j + 1], qv)
    payoffs[start:stop] = pay
    stopped[start:stop] = hit


def _threshold_payoffs(
    config: SimConfig, levels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-path payoffs under each threshold level, common random numbers."""
    levels = np.asarray(levels, dtype=float)
    n_paths = config.n_paths
    payoffs = np.zeros((n_paths, levels.size))
    stopped = np.zeros((n_paths, levels.size), dtype=bool)
    if config.scheme == SCHEME_EXACT:
        t = _exact_times(config)
        runner = _run_chunk_exact
    else:
        t = _euler_times(config)
        runner = _run_chunk_euler

    workers = worker_count(max(1, n_paths // 256))
    size = _chunk_size(workers)
    bounds = [(s, min(s + size, n_paths)) for s in range(0, n_paths, size)]
    if workers == 1 or len(bounds) == 1:
        for s, e in bounds:
            runner(config, levels, t, s, e, payoffs, stopped)
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            futures = [
                ex.submit(runner, config, levels, t, s, e, payoffs, stopped)
                for s, e in bounds
            ]
            for f in futures:
                f.result()
    return payoffs, stopped


def _aggregate(payoff_col: np.ndarray, stopped_col: np.ndarray, n_paths: int) -> MCResult:
    mean = float(np.mean(payoff_col))
    if n_paths > 1:
        stderr = float(np.std(payoff_col, ddof=1) / math.sqrt(n_paths))
    else:
        stderr = float("nan")
    warning = "n_paths below 100; interval estimate unreliable" if n_paths < 100 else None
    return MCResult(
        mean=mean,
        stderr=stderr,
        n_paths=n_paths,
        ci95=(mean - 1.96 * stderr, mean + 1.96 * stderr),
        stop_fraction=float(np.mean(stopped_col)),
        warning=warning,
    )


def mc_estimate(config: SimConfig, policy: ThresholdPolicy) -> MCResult:
    """Mean payoff of the threshold policy over n_paths independent paths."""
    payoffs, stopped = _threshold_payoffs(config, np.array([policy.Z]))
    return _aggregate(payoffs[:, 0], stopped[:, 0], config.n_paths)


def policy_sweep(
    config: SimConfig,
    multipliers: list[float] | tuple[float, ...],
    Z: float | None = None,
) -> SweepTable:
    """Evaluate thresholds m * Z on one shared path ensemble.

    Common random numbers make the per-multiplier comparison paired; rows
    carry the paired difference statistics against the m = 1 row when it is
    present.  With the optimal Z the m = 1 row should have the maximal mean
    up to confidence-interval overlap.
    """
    mult = [float(m) for m in multipliers]
    if not mult or any(m <= 0.0 for m in mult):
        raise ValueError("multipliers must be positive")
    if Z is None:
        from .boundary import find_Z

        Z = find_Z(config.params).value
    levels = np.array([m * Z for m in mult])
    payoffs, stopped = _threshold_payoffs(config, levels)

    candidate_idx = None
    for i, m in enumerate(mult):
        if m == 1.0:
            candidate_idx = i
            break

    rows = []
    for i, m in enumerate(mult):
        res = _aggregate(payoffs[:, i], stopped[:, i], config.n_paths)
        pm = ps = None
        if candidate_idx is not None and i != candidate_idx:
            diff = payoffs[:, candidate_idx] - payoffs[:, i]
            pm = float(np.mean(diff))
            ps = float(np.std(diff, ddof=1) / math.sqrt(config.n_paths))
        rows.append(
            SweepRow(
                multiplier=m,
                Z_level=float(levels[i]),
                result=res,
                paired_mean_vs_candidate=pm,
                paired_stderr_vs_candidate=ps,
            )
        )
    return SweepTable(base_Z=float(Z), rows=tuple(rows))
