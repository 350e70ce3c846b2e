import math

import numpy as np
import pytest

from besselstop.series import ModelParams
from besselstop.simulate import (
    BridgePath,
    SCHEME_EULER,
    SCHEME_EXACT,
    SimConfig,
    ThresholdPolicy,
    _exact_bridge_q,
    _path_generator,
    _threshold_payoffs,
    apply_policy,
    mc_estimate,
    path_seed,
    policy_sweep,
    simulate_euler,
    simulate_exact,
)

Z31 = 2.260197657993724
B_REF = 0.9711974210930677


def _exact_config(**kw):
    base = dict(params=ModelParams(3, 1), n_paths=100, n_steps=200, seed=42)
    base.update(kw)
    return SimConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(params=ModelParams(2.5, 1), scheme=SCHEME_EXACT)
    with pytest.raises(ValueError):
        SimConfig(params=ModelParams(3, 1), q0=1.0, scheme=SCHEME_EXACT)
    with pytest.raises(ValueError):
        SimConfig(params=ModelParams(3, 1), t0=1.0)
    with pytest.raises(ValueError):
        SimConfig(params=ModelParams(3, 1), eps_end=2.0)
    with pytest.raises(ValueError):
        SimConfig(params=ModelParams(3, 1), scheme="magic")
    with pytest.raises(ValueError):
        ThresholdPolicy(0.0)


def test_exact_path_pins_and_stays_nonnegative():
    path = simulate_exact(_exact_config(n_steps=500))
    assert path.q[0] == 0.0
    assert path.q[-1] == 0.0
    assert path.times[0] == 0.0 and path.times[-1] == 1.0
    assert np.all(path.q >= 0.0)
    assert path.seed_used == path_seed(42, 0)


def test_exact_scheme_requires_origin_start():
    cfg = SimConfig(params=ModelParams(3, 1), t0=0.25, scheme=SCHEME_EXACT, n_paths=10, n_steps=50, seed=1)
    with pytest.raises(ValueError):
        simulate_exact(cfg)


def test_exact_pinning_moment():
    # E[Q_t] = alpha t (1 - t) for the exact scheme; check the midpoint
    t = np.linspace(0.0, 1.0, 301)
    vals = np.empty(8000)
    for s in range(0, 8000, 1000):
        xi = np.empty((1000, 300, 3))
        for i in range(1000):
            xi[i] = _path_generator(123, s + i).standard_normal((300, 3))
        q = _exact_bridge_q(xi, t)
        vals[s : s + 1000] = q[:, 150]
    stderr = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - 0.75) <= 3.0 * stderr


def test_euler_pinning_moment_with_bias_allowance():
    cfg = SimConfig(
        params=ModelParams(3, 1), n_paths=8000, n_steps=400, seed=9, scheme=SCHEME_EULER,
        eps_end=1e-6,
    )
    t = np.linspace(cfg.t0, 1.0 - cfg.eps_end, cfg.n_steps + 1)
    mid = int(np.searchsorted(t, 0.5))
    vals = np.empty(cfg.n_paths)
    for i in range(cfg.n_paths):
        gen = _path_generator(cfg.seed, i)
        xi = gen.standard_normal(cfg.n_steps)
        q = cfg.q0
        for j in range(mid):
            tau = 1.0 - t[j]
            h = t[j + 1] - t[j]
            q = max(0.0, q + (3.0 - 2.0 * q / tau) * h + 2.0 * math.sqrt(q * h) * xi[j])
        vals[i] = q
    stderr = vals.std(ddof=1) / math.sqrt(vals.size)
    target = 3.0 * t[mid] * (1.0 - t[mid])
    assert abs(vals.mean() - target) <= 3.0 * stderr + 5.0 / cfg.n_steps


def test_euler_path_properties():
    cfg = SimConfig(
        params=ModelParams(0.5, 1), n_paths=1, n_steps=300, seed=11,
        scheme=SCHEME_EULER, t0=0.0, q0=2.0,
    )
    path = simulate_euler(cfg)
    assert path.q[0] == 2.0
    assert np.all(path.q >= 0.0)
    assert path.times[-1] == 1.0 - cfg.eps_end


def test_low_dimension_paths_hit_zero_often():
    hits = 0
    n_paths = 200
    for i in range(n_paths):
        cfg = SimConfig(
            params=ModelParams(0.5, 1), n_paths=1, n_steps=256, seed=1000 + i,
            scheme=SCHEME_EULER, t0=0.9, q0=5.0, eps_end=1e-6,
        )
        path = simulate_euler(cfg)
        if np.any(path.q == 0.0):
            hits += 1
    assert hits / n_paths >= 0.5


def test_drift_sign_flips_at_half_boundary_level():
    a, tau = 3.0, 0.4
    q_hi = 0.5 * a * tau * 1.01
    q_lo = 0.5 * a * tau * 0.99
    assert a - 2.0 * q_hi / tau < 0.0
    assert a - 2.0 * q_lo / tau > 0.0


def test_policy_on_flat_path():
    times = np.linspace(0.0, 1.0, 11)
    path = BridgePath(times=times, q=np.zeros(11), seed_used=0)
    out = apply_policy(path, ThresholdPolicy(1.0), 1.0)
    assert (out.tau, out.payoff, out.stopped) == (1.0, 0.0, False)


def test_policy_immediate_stop():
    times = np.linspace(0.5, 1.0, 6)
    q = np.full(6, 5.0)
    path = BridgePath(times=times, q=q, seed_used=0)
    out = apply_policy(path, ThresholdPolicy(1.0), 2.0)
    assert out.tau == 0.5
    assert out.payoff == 5.0  # Q^{n/2} with n = 2
    assert out.stopped


def test_single_path_matches_engine_row():
    cfg = _exact_config(n_paths=4, n_steps=300, seed=77)
    path = simulate_exact(cfg)
    outcome = apply_policy(path, ThresholdPolicy(Z31), cfg.params.n)
    payoffs, stopped = _threshold_payoffs(cfg, np.array([Z31]))
    assert payoffs[0, 0] == outcome.payoff
    assert bool(stopped[0, 0]) == outcome.stopped

    cfg_e = SimConfig(
        params=ModelParams(3, 1), n_paths=4, n_steps=300, seed=77, scheme=SCHEME_EULER
    )
    path_e = simulate_euler(cfg_e)
    outcome_e = apply_policy(path_e, ThresholdPolicy(Z31), 1.0)
    payoffs_e, _ = _threshold_payoffs(cfg_e, np.array([Z31]))
    assert payoffs_e[0, 0] == outcome_e.payoff


def test_mc_estimate_matches_candidate_level():
    cfg = _exact_config(n_paths=20_000, n_steps=500, seed=99)
    res = mc_estimate(cfg, ThresholdPolicy(Z31))
    assert res.ci95 == (res.mean - 1.96 * res.stderr, res.mean + 1.96 * res.stderr)
    assert abs(res.mean - B_REF) <= max(3.0 * res.stderr, 0.01 * B_REF)
    assert 0.0 <= res.stop_fraction <= 1.0
    assert res.warning is None


def test_mc_estimate_deterministic_and_warns_on_tiny_samples():
    cfg = _exact_config(n_paths=2000, n_steps=200, seed=5)
    r1 = mc_estimate(cfg, ThresholdPolicy(Z31))
    r2 = mc_estimate(cfg, ThresholdPolicy(Z31))
    assert r1 == r2
    tiny = mc_estimate(_exact_config(n_paths=50, n_steps=100, seed=5), ThresholdPolicy(Z31))
    assert tiny.warning is not None


def test_results_independent_of_worker_count(monkeypatch):
    cfg = _exact_config(n_paths=3000, n_steps=150, seed=13)
    monkeypatch.setenv("BESSELSTOP_THREADS", "1")
    r1 = mc_estimate(cfg, ThresholdPolicy(Z31))
    monkeypatch.setenv("BESSELSTOP_THREADS", "4")
    r2 = mc_estimate(cfg, ThresholdPolicy(Z31))
    assert r1 == r2


def test_reflecting_bridge_level():
    cfg = SimConfig(params=ModelParams(1, 1), n_paths=20_000, n_steps=500, seed=2024)
    res = mc_estimate(cfg, ThresholdPolicy(1.0))
    target = math.exp(-0.5)
    assert abs(res.mean - target) <= max(3.0 * res.stderr, 0.01 * target)


def test_sweep_single_multiplier_equals_estimate():
    cfg = _exact_config(n_paths=3000, n_steps=200, seed=21)
    table = policy_sweep(cfg, [1.0], Z=Z31)
    direct = mc_estimate(cfg, ThresholdPolicy(Z31))
    assert table.rows[0].result == direct
    assert table.rows[0].paired_mean_vs_candidate is None


def test_sweep_candidate_dominates_with_common_random_numbers():
    cfg = _exact_config(n_paths=15_000, n_steps=400, seed=31)
    table = policy_sweep(cfg, [0.5, 0.75, 1.0, 1.5, 2.0], Z=Z31)
    assert table.argmax_mean() == 1.0
    for row in table.rows:
        if row.multiplier == 1.0:
            continue
        assert row.paired_mean_vs_candidate >= -row.paired_stderr_vs_candidate


def test_sweep_validation():
    cfg = _exact_config()
    with pytest.raises(ValueError):
        policy_sweep(cfg, [])
    with pytest.raises(ValueError):
        policy_sweep(cfg, [-1.0])


def test_path_seeds_are_distinct_and_stable():
    assert path_seed(1, 0) != path_seed(1, 1)
    assert path_seed(1, 0) == path_seed(1, 0)
    assert path_seed(2, 0) != path_seed(1, 0)
