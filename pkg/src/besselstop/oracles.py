"""Independent numerical oracles for the series construction.

Nothing here trusts the power series beyond a short bootstrap near the
coordinate singularity:

* ``ode_shoot`` integrates the self-similar ODE with classical RK4 and
  reports the solution on a uniform grid; ``Z_from_ode`` reads the boundary
  scale off that solution by a sign change plus local Hermite interpolation.
* ``dp_value`` solves the discrete-time optimal stopping problem directly by
  backward induction on a lattice, with a moment-matched trinomial transition
  built from the Euler step of the bridge dynamics.
* ``quadrature_H`` evaluates the integral-form solutions available at the
  special parameter families by adaptive quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .series import ModelParams, build_coefficients, default_ymax, psi_derivative, psi_eval


class AccuracyError(RuntimeError):
    """Integration step too large: the pointwise residual check failed."""


class RangeError(RuntimeError):
    """No sign change found inside the integration range."""


class LatticeError(ValueError):
    """Transition weights would go negative; carries a suggested refinement."""

    def __init__(self, message: str, suggested_q_steps: int):
        super().__init__(message)
        self.suggested_q_steps = suggested_q_steps


@dataclass(frozen=True, eq=False)
class OdeSolution:
    """RK4 solution of 4y g'' + 2(alpha - y) g' - n g = 0 with g(0) = 1."""

    params: ModelParams
    grid: np.ndarray
    g_values: np.ndarray
    g_prime_values: np.ndarray
    step: float


@dataclass(frozen=True, eq=False)
class LatticeResult:
    """Backward-induction lattice for the discrete optimal stopping value."""

    t_grid: np.ndarray
    q_grid: np.ndarray
    value: np.ndarray
    boundary_estimate: np.ndarray
    value_at_origin: float


def ode_shoot(
    params: ModelParams,
    ymax: float,
    step: float,
    residual_tol: float = 1e-8,
) -> OdeSolution:
    """Integrate the self-similar ODE from the origin by RK4.

    The equation degenerates at y = 0 (the leading coefficient vanishes), so
    the first two nodes are filled from the series expansion and RK4 starts
    at 2*step.  The initial slope n/(2 alpha) is forced by the equation
    itself at the origin.  Raises AccuracyError when the normalized residual
    4y g'' + 2(alpha - y) g' - n g, divided by 1 + |g|, exceeds
    ``residual_tol`` anywhere (g'' estimated by a fourth-order difference of
    the stored slopes).
    """
    if ymax <= 0.0 or step <= 0.0:
        raise ValueError("ymax and step must be positive")
    m = int(round(ymax / step))
    if m < 6:
        raise ValueError("grid too coarse: need at least 6 steps")
    a, n = params.alpha, params.n
    grid = np.linspace(0.0, m * step, m + 1)

    table = build_coefficients(params, ymax=max(default_ymax(params), 4.0 * step))
    g = np.empty(m + 1)
    p = np.empty(m + 1)
    g[0], p[0] = 1.0, n / (2.0 * a)
    for i in (1, 2):
        g[i] = psi_eval(table, grid[i])
        p[i] = psi_derivative(table, grid[i], 1)

    def slope(y: float, gv: float, pv: float) -> float:
        return (n * gv - 2.0 * (a - y) * pv) / (4.0 * y)

    h = step
    gv, pv = g[2], p[2]
    for i in range(2, m):
        y = grid[i]
        k1g = pv
        k1p = slope(y, gv, pv)
        k2g = pv + 0.5 * h * k1p
        k2p = slope(y + 0.5 * h, gv + 0.5 * h * k1g, pv + 0.5 * h * k1p)
        k3g = pv + 0.5 * h * k2p
        k3p = slope(y + 0.5 * h, gv + 0.5 * h * k2g, pv + 0.5 * h * k2p)
        k4g = pv + h * k3p
        k4p = slope(y + h, gv + h * k3g, pv + h * k3p)
        gv += h * (k1g + 2.0 * k2g + 2.0 * k3g + k4g) / 6.0
        pv += h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        g[i + 1], p[i + 1] = gv, pv

    sol = OdeSolution(params, grid, g, p, step)
    worst = float(np.max(ode_residual(sol)))
    if worst > residual_tol:
        raise AccuracyError(
            f"normalized ODE residual {worst:.3e} exceeds {residual_tol:.1e}; reduce step"
        )
    return sol


def ode_residual(sol: OdeSolution) -> np.ndarray:
    """Normalized residual |4y g'' + 2(a-y) g' - n g| / (1 + |g|) at interior nodes.

    g'' comes from a fourth-order central difference of the stored slopes, so
    the estimate is independent of the integrator's own right-hand side.
    """
    a, n = sol.params.alpha, sol.params.n
    y, g, p, h = sol.grid, sol.g_values, sol.g_prime_values, sol.step
    i = np.arange(2, y.size - 2)
    gpp = (-p[i + 2] + 8.0 * p[i + 1] - 8.0 * p[i - 1] + p[i - 2]) / (12.0 * h)
    res = 4.0 * y[i] * gpp + 2.0 * (a - y[i]) * p[i] - n * g[i]
    return np.abs(res) / (1.0 + np.abs(g[i]))


def Z_from_ode(
    params: ModelParams, ymax: float | None = None, step: float = 1e-3
) -> float:
    """Boundary scale read off the ODE solution, independent of the series root.

    Locates the sign change of w(y) = 2 y g'(y) - n g(y) along the RK4
    solution and refines it on the bracketing cell with cubic Hermite
    interpolation.  Enlarges the range once if no sign change shows up.
    """
    a, n = params.alpha, params.n
    if ymax is None:
        ymax = 4.0 * max(1.0, 0.5 * (a + n))
    for attempt in range(2):
        sol = ode_shoot(params, ymax, step)
        y, g, p = sol.grid, sol.g_values, sol.g_prime_values
        w = 2.0 * y * p - n * g
        pos = np.nonzero(w > 0.0)[0]
        if pos.size:
            j = int(pos[0])
            if j == 0:
                raise RangeError("sign change at the origin node; grid unusable")
            y0, y1 = y[j - 1], y[j]
            w0, w1 = w[j - 1], w[j]

            def wprime(i: int) -> float:
                yp = (n * g[i] - 2.0 * (a - y[i]) * p[i]) / (4.0 * y[i])
                return 2.0 * p[i] + 2.0 * y[i] * yp - n * p[i]

            d0, d1 = wprime(j - 1), wprime(j)
            h = y1 - y0

            def hermite(s: float) -> float:
                u = (s - y0) / h
                h00 = (1.0 + 2.0 * u) * (1.0 - u) ** 2
                h10 = u * (1.0 - u) ** 2
                h01 = u * u * (3.0 - 2.0 * u)
                h11 = u * u * (u - 1.0)
                return h00 * w0 + h10 * h * d0 + h01 * w1 + h11 * h * d1

            return float(brentq(hermite, y0, y1, xtol=1e-14))
        ymax *= 2.0
    raise RangeError(f"no sign change of 2y g' - n g below ymax={ymax}")


def _first_form_H(n: float, y: float) -> float:
    # H(y) = y^{-n/2} int_0^y e^{s/2} s^{n/2-1} ds / 2; the substitution
    # s = t^{2/n} removes the endpoint singularity for n < 2.
    if y == 0.0:
        return 1.0 / n
    upper = y ** (0.5 * n)
    val, _ = quad(
        lambda t: math.exp(0.5 * t ** (2.0 / n)),
        0.0,
        upper,
        epsabs=0.0,
        epsrel=1e-10,
        limit=300,
    )
    return y ** (-0.5 * n) * val / n


def _second_form_J(alpha: float, y: float) -> float:
    # J(y) = int_0^y e^{-v/2} v^{alpha/2-2} dv / 2 via v = t^{1/p}, p = (alpha-2)/2.
    if y == 0.0:
        return 0.0
    p = 0.5 * (alpha - 2.0)
    upper = y**p
    val, _ = quad(
        lambda t: math.exp(-0.5 * t ** (1.0 / p)),
        0.0,
        upper,
        epsabs=0.0,
        epsrel=1e-10,
        limit=300,
    )
    return val / (2.0 * p)


def _second_form_H(alpha: float, y: float) -> float:
    if y == 0.0:
        return 1.0 / (alpha - 2.0)
    return y ** (1.0 - 0.5 * alpha) * math.exp(0.5 * y) * _second_form_J(alpha, y)


def quadrature_H(params: ModelParams, y: float) -> float:
    """Integral-form solution H at the special parameter families.

    For n = alpha - 2 this is y^{-n/2} int_0^y e^{s/2} s^{n/2-1} ds / 2; for
    n = 2 with alpha > 2 it is the second form built from e^{-v/2} weights.
    Both are strictly positive with finite limits at zero, which is what makes
    them usable as value-function building blocks.  y = 0 returns the limit.
    """
    a, n = params.alpha, params.n
    y = float(y)
    if y < 0.0:
        raise ValueError("y must be nonnegative")
    if math.isclose(n, a - 2.0, rel_tol=1e-12, abs_tol=1e-12):
        return _first_form_H(n, y)
    if math.isclose(n, 2.0, rel_tol=1e-12, abs_tol=1e-12) and a > 2.0 + 1e-12:
        return _second_form_H(a, y)
    raise ValueError(
        f"no integral form for alpha={a}, n={n}; need n = alpha - 2 or n = 2 < alpha"
    )


def dp_value(
    params: ModelParams,
    t_steps: int,
    q_max: float | None,
    q_steps: int,
    t0: float = 0.0,
    eps_end: float = 1e-4,
) -> LatticeResult:
    """Optimal stopping value by backward induction on a (t, q) lattice.

    One step of the chain matches the mean and variance of the Euler
    transition of the bridge dynamics with a symmetric trinomial stencil on
    the grid (span widened as needed so no weight can go negative); cells
    whose move is nearly deterministic fall back to a mean-exact two-point
    split.  Probability falling below q = 0 is reflected; indices above the
    grid are valued with the payoff, which is exact that deep in the stopping
    region.  The time grid stops at 1 - eps_end where the terminal value is
    the payoff; the drift blows up at the pin time and the bridge ends at
    zero anyway.
    """
    from .boundary import find_Z

    a, n = params.alpha, params.n
    if t_steps < 100:
        raise ValueError("t_steps must be at least 100")
    if q_steps < 50:
        raise ValueError("q_steps must be at least 50")
    if not (0.0 <= t0 < 1.0):
        raise ValueError("t0 must lie in [0, 1)")
    if not (0.0 < eps_end < 1.0 - t0):
        raise ValueError("eps_end must lie in (0, 1 - t0)")
    Z = find_Z(params).value
    if q_max is None:
        q_max = 6.0 * Z * (1.0 - t0)
    q_max = float(q_max)
    if q_max < 3.0 * Z * (1.0 - t0):
        raise ValueError(f"q_max={q_max} below the 3*Z*(1-t0) scale needed")

    t_grid = np.linspace(t0, 1.0 - eps_end, t_steps + 1)
    q_grid = np.linspace(0.0, q_max, q_steps + 1)
    dq = q_grid[1] - q_grid[0]
    h = t_grid[1] - t_grid[0]
    payoff = q_grid ** (0.5 * n)
    M = q_steps

    value = np.empty((t_steps + 1, q_steps + 1))
    boundary = np.empty(t_steps + 1)
    value[-1] = payoff
    boundary[-1] = 0.0

    def fetch(vnext: np.ndarray, idx: np.ndarray) -> np.ndarray:
        folded = np.abs(idx)
        inside = folded <= M
        out = np.where(inside, vnext[np.minimum(folded, M)], 0.0)
        if not inside.all():
            q_out = folded[~inside] * dq
            out[~inside] = q_out ** (0.5 * n)
        return out

    for i in range(t_steps - 1, -1, -1):
        tau = 1.0 - t_grid[i]
        vnext = value[i + 1]
        mu = q_grid + (a - 2.0 * q_grid / tau) * h
        s2 = 4.0 * q_grid * h
        c = np.rint(mu / dq).astype(np.int64)
        delta = mu - c * dq
        sig2 = s2 + delta * delta

        L = np.maximum(1, np.ceil(np.sqrt(1.5 * sig2) / dq)).astype(np.int64)
        u = L * dq
        tri_ok = (sig2 > 0.0) & (np.abs(delta) * u <= sig2)

        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(tri_ok, sig2 / (u * u), 0.0)
            d = np.where(tri_ok, delta / u, 0.0)
        p_up = 0.5 * (v + d)
        p_dn = 0.5 * (v - d)
        p_mid = 1.0 - v
        if p_up.min() < -1e-12 or p_dn.min() < -1e-12 or p_mid.min() < -1e-12:
            raise LatticeError(
                "trinomial weights went negative", suggested_q_steps=2 * q_steps
            )
        tri = (
            p_dn * fetch(vnext, c - L)
            + p_mid * fetch(vnext, c)
            + p_up * fetch(vnext, c + L)
        )

        f = np.floor(mu / dq).astype(np.int64)
        w = mu / dq - f
        bino = (1.0 - w) * fetch(vnext, f) + w * fetch(vnext, f + 1)

        cont = np.where(tri_ok, tri, bino)
        value[i] = np.maximum(payoff, cont)

        stopped = cont <= payoff + 1e-12 * (1.0 + payoff)
        hit = np.nonzero(stopped)[0]
        boundary[i] = q_grid[hit[0]] if hit.size else q_max

    return LatticeResult(
        t_grid=t_grid,
        q_grid=q_grid,
        value=value,
        boundary_estimate=boundary,
        value_at_origin=float(value[0, 0]),
    )
