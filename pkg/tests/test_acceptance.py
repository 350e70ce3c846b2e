"""Acceptance gate: each criterion runs at its stated tolerance and budget.

One line per criterion is printed (run pytest with -s to see them live; the
full table also lands in the captured output).
"""

import pytest

from besselstop import acceptance


def _run(fn):
    row = fn()
    print(row.line())
    assert row.passed, row.detail
    assert row.within_budget, f"budget exceeded: {row.elapsed:.1f}s > {row.budget:.0f}s"


def test_criterion_01_excursion_constant():
    _run(acceptance.criterion_1_excursion_constant)


def test_criterion_02_series_excursion_consistency():
    _run(acceptance.criterion_2_series_excursion_consistency)


def test_criterion_03_closed_form_roots():
    _run(acceptance.criterion_3_closed_form_roots)


def test_criterion_04_margin_grid():
    _run(acceptance.criterion_4_margin_grid)


def test_criterion_05_ode_oracle():
    _run(acceptance.criterion_5_ode_oracle)


def test_criterion_06_lattice_oracle():
    _run(acceptance.criterion_6_lattice_oracle)


def test_criterion_07_monte_carlo_headline():
    _run(acceptance.criterion_7_monte_carlo_headline)


def test_criterion_08_empirical_optimality():
    _run(acceptance.criterion_8_empirical_optimality)


def test_criterion_09_shape_suite():
    _run(acceptance.criterion_9_shape_suite)


def test_criterion_10_iteration_suite():
    _run(acceptance.criterion_10_iteration_suite)
