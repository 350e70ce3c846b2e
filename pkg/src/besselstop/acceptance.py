"""Acceptance gate: the fixed battery of checks a release must pass.

Each criterion pins a tolerance and a wall-clock budget.  Reference values
are either recomputed on the spot from an independent construction
(quadrature, exact arithmetic) or taken from the one published reference
digit string for the excursion threshold.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .boundary import boundary_margin, find_C_excursion, find_Z
from .oracles import Z_from_ode, dp_value, ode_residual, ode_shoot
from .series import ModelParams, ode_residual_series, psi_eval
from .simulate import SCHEME_EXACT, SimConfig, ThresholdPolicy, mc_estimate, policy_sweep
from .value import U_star, build_candidate, build_excursion, smooth_fit_residual
from .verify import PARAMETER_GRID, run_iteration_checks, run_shape_checks

REFERENCE_C = 1.50339538  # eight-digit reference value of the excursion threshold

MC_PATHS = 200_000
MC_STEPS = 2000
MC_SEED = 20240601
SWEEP_MULTIPLIERS = (0.5, 0.75, 1.0, 1.5, 2.0)
DP_T_STEPS = 4000
DP_Q_STEPS = 800


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    within_budget: bool
    elapsed: float
    budget: float
    detail: str

    @property
    def ok(self) -> bool:
        return self.passed and self.within_budget

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"[{status}] {self.index:2d} {self.name}: {self.detail} "
            f"({self.elapsed:.2f}s / budget {self.budget:.0f}s)"
        )


def _timed(index, name, budget, fn) -> CriterionResult:
    start = time.perf_counter()
    passed, detail = fn()
    elapsed = time.perf_counter() - start
    return CriterionResult(
        index=index,
        name=name,
        passed=passed,
        within_budget=elapsed < budget,
        elapsed=elapsed,
        budget=budget,
        detail=detail,
    )


def criterion_1_excursion_constant() -> CriterionResult:
    def body():
        root = find_C_excursion(1e-8)
        err = abs(root.value - REFERENCE_C)
        return err <= 1e-6, f"C={root.value:.10f} |C-ref|={err:.2e} (tol 1e-6)"

    return _timed(1, "excursion constant", 1.0, body)


def criterion_2_series_excursion_consistency() -> CriterionResult:
    def body():
        C = find_C_excursion(1e-10).value
        Z = find_Z(ModelParams(3, 1), tol=1e-12).value
        err = abs(Z - C * C)
        return err <= 1e-8, f"Z(3,1)={Z:.12f} C^2={C * C:.12f} |diff|={err:.2e} (tol 1e-8)"

    return _timed(2, "series/excursion consistency", 1.0, body)


def criterion_3_closed_form_roots() -> CriterionResult:
    def body():
        err11 = abs(find_Z(ModelParams(1, 1), tol=1e-12).value - 1.0)
        ok = err11 <= 1e-10
        worst = err11
        for n in (0.5, 1.0, 2.0, 3.0, 5.0):
            err = abs(find_Z(ModelParams(n, n), tol=1e-12).value - n)
            worst = max(worst, err)
            ok = ok and err <= 1e-8
        return ok, f"|Z(1,1)-1|={err11:.2e} (tol 1e-10), worst diagonal {worst:.2e} (tol 1e-8)"

    return _timed(3, "closed-form roots", 1.0, body)


def criterion_4_margin_grid() -> CriterionResult:
    def body():
        worst = math.inf
        for a in PARAMETER_GRID:
            for n in PARAMETER_GRID:
                worst = min(worst, boundary_margin(ModelParams(a, n)))
        return worst >= 0.0, f"min margin over 81 pairs = {worst:.6f} (needs >= 0)"

    return _timed(4, "boundary margin grid", 5.0, body)


def criterion_5_ode_oracle() -> CriterionResult:
    def body():
        grid = (0.5, 1.0, 2.0, 3.0, 5.0)
        worst_gap = 0.0
        worst_res = 0.0
        for a in grid:
            for n in grid:
                params = ModelParams(a, n)
                z_series = find_Z(params).value
                z_ode = Z_from_ode(params)
                worst_gap = max(worst_gap, abs(z_ode - z_series))
                sol = ode_shoot(params, 4.0 * max(1.0, 0.5 * (a + n)), 1e-3)
                worst_res = max(worst_res, float(np.max(ode_residual(sol))))
        ok = worst_gap <= 1e-6 and worst_res <= 1e-8
        return ok, f"max |Z_ode-Z|={worst_gap:.2e} (tol 1e-6), max residual={worst_res:.2e} (tol 1e-8)"

    return _timed(5, "ODE oracle agreement", 30.0, body)


def criterion_6_lattice_oracle() -> CriterionResult:
    def body():
        exc = build_excursion()
        target31 = 2.0 * exc.C * math.exp(-0.5 * exc.C * exc.C)
        lines = []
        ok = True
        for a, n in ((3, 1), (2, 2), (1, 1)):
            params = ModelParams(a, n)
            sol = build_candidate(params)
            target = U_star(sol, 0.0, 0.0)
            if (a, n) == (3, 1) and abs(target - target31) > 1e-9:
                return False, "series value at the origin disagrees with quadrature"
            lat = dp_value(params, DP_T_STEPS, 6.0 * sol.Z, DP_Q_STEPS)
            rel = abs(lat.value_at_origin - target) / target
            ok = ok and rel <= 0.02
            lines.append(f"({a},{n}) rel={rel:.4%}")
        return ok, "; ".join(lines) + " (tol 2%)"

    return _timed(6, "lattice oracle", 120.0, body)


def criterion_7_monte_carlo_headline() -> CriterionResult:
    def body():
        exc = build_excursion()
        lines = []
        ok = True
        cases = (
            (ModelParams(3, 1), exc.C * exc.C, 2.0 * exc.C * math.exp(-0.5 * exc.C**2)),
            (ModelParams(1, 1), 1.0, math.exp(-0.5)),
        )
        for params, z, target in cases:
            config = SimConfig(
                params=params,
                n_paths=MC_PATHS,
                n_steps=MC_STEPS,
                seed=MC_SEED,
                scheme=SCHEME_EXACT,
            )
            res = mc_estimate(config, ThresholdPolicy(z))
            gap = abs(res.mean - target)
            tol = max(3.0 * res.stderr, 0.01 * target)
            ok = ok and gap <= tol
            lines.append(
                f"({params.alpha:g},{params.n:g}) mean={res.mean:.6f} "
                f"target={target:.6f} gap={gap:.2e} tol={tol:.2e}"
            )
        return ok, "; ".join(lines)

    return _timed(7, "Monte Carlo headline", 120.0, body)


def criterion_8_empirical_optimality() -> CriterionResult:
    def body():
        config = SimConfig(
            params=ModelParams(3, 1),
            n_paths=MC_PATHS,
            n_steps=MC_STEPS,
            seed=MC_SEED,
            scheme=SCHEME_EXACT,
        )
        table = policy_sweep(config, SWEEP_MULTIPLIERS)
        ok = True
        worst = math.inf
        for row in table.rows:
            if row.multiplier == 1.0:
                continue
            # paired mean of (candidate - alternative); negative beyond one
            # paired stderr would mean the alternative beat the candidate
            slack = row.paired_mean_vs_candidate + row.paired_stderr_vs_candidate
            worst = min(worst, slack)
            ok = ok and row.paired_mean_vs_candidate >= -row.paired_stderr_vs_candidate
        return ok, f"min paired slack={worst:.2e} (needs >= 0); argmax m={table.argmax_mean():g}"

    return _timed(8, "empirical optimality sweep", 300.0, body)


def criterion_9_shape_suite() -> CriterionResult:
    def body():
        rep = run_shape_checks()
        ok = rep.all_passed

        worst_major = math.inf
        worst_fit = 0.0
        worst_res = 0.0
        for a in PARAMETER_GRID:
            for n in PARAMETER_GRID:
                params = ModelParams(a, n)
                sol = build_candidate(params)
                z = np.linspace(0.0, sol.Z, 2000)
                gap = sol.E1 * psi_eval(sol.table, z) - z ** (0.5 * n)
                worst_major = min(worst_major, float(gap.min()))
                for t in (0.0, 0.3, 0.6, 0.9):
                    worst_fit = max(worst_fit, smooth_fit_residual(sol, t))
                y = np.linspace(0.0, 2.0 * sol.Z, 1000)
                res = np.abs(ode_residual_series(sol.table, y)) / (
                    1.0 + psi_eval(sol.table, y)
                )
                worst_res = max(worst_res, float(res.max()))
        ok = ok and worst_major >= -1e-12 and worst_fit <= 1e-9 and worst_res <= 1e-9
        return ok, (
            f"shape checks {rep.summary}; min payoff gap={worst_major:.2e}; "
            f"max smooth fit={worst_fit:.2e} (tol 1e-9); max series residual={worst_res:.2e}"
        )

    return _timed(9, "value shape suite", 30.0, body)


def criterion_10_iteration_suite() -> CriterionResult:
    def body():
        rep = run_iteration_checks(steps=12, r_max=60)
        fails = [c.name for c in rep.failures()]
        detail = f"iteration checks {rep.summary}"
        if fails:
            detail += "; failed: " + ", ".join(fails[:5])
        return rep.all_passed, detail

    return _timed(10, "series identity suite", 30.0, body)


ALL_CRITERIA = (
    criterion_1_excursion_constant,
    criterion_2_series_excursion_consistency,
    criterion_3_closed_form_roots,
    criterion_4_margin_grid,
    criterion_5_ode_oracle,
    criterion_6_lattice_oracle,
    criterion_7_monte_carlo_headline,
    criterion_8_empirical_optimality,
    criterion_9_shape_suite,
    criterion_10_iteration_suite,
)


def run_acceptance(indices: tuple[int, ...] | None = None) -> list[CriterionResult]:
    """Run the selected criteria (all by default), one progress line each.

    Progress goes to stderr so stdout stays parseable for the envelope.
    """
    import sys

    results = []
    for i, fn in enumerate(ALL_CRITERIA, start=1):
        if indices is not None and i not in indices:
            continue
        row = fn()
        print(row.line(), file=sys.stderr, flush=True)
        results.append(row)
    return results
