"""Action-angle chart and resonant averaging for the strobe-normalized system.

Conventions: y = x'/n, action I = n(x^2+y^2)/2, angle theta = atan2(y,x)/n
in [0, 2*pi/n). On the circle of action I the position is
x = sqrt(2I/n) cos(n theta). The time-dependent Hamiltonian splits as
H = I + (potential + forcing + oscillating)/n pieces; their circle averages
and first-order generating functions are the quantities of interest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import functions as fx
from .errors import (
    DegenerateStateError,
    FitDegenerateError,
    HTooSmallError,
    SolverFailureError,
)
from .fitting import DecayFit, geometric_grid, loglog_fit
from .quadrature import CumulativeIntegral, even_circle_mean

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    t: float


@dataclass(frozen=True)
class ActionAngleState:
    I: float
    theta: float
    t: float


class HamiltonianPieces(NamedTuple):
    potential_term: float   # G(x)/n
    forcing_term: float     # -x p(t)/n
    oscillating_term: float  # psi(x)/n


def to_action_angle(state: PhaseState, n: int) -> ActionAngleState:
    action = 0.5 * n * (state.x * state.x + state.y * state.y)
    if action == 0.0:
        raise DegenerateStateError("angle undefined at the origin")
    theta = math.atan2(state.y, state.x) % TWO_PI
    return ActionAngleState(I=action, theta=theta / n, t=state.t)


def from_action_angle(state: ActionAngleState, n: int) -> PhaseState:
    if state.I < 0.0:
        raise DegenerateStateError("action must be non-negative", I=state.I)
    r = math.sqrt(2.0 * state.I / n)
    return PhaseState(
        x=r * math.cos(n * state.theta),
        y=r * math.sin(n * state.theta),
        t=state.t,
    )


def hamiltonian_pieces(system, I, theta, t) -> HamiltonianPieces:
    if I < 0.0:
        raise DegenerateStateError("action must be non-negative", I=I)
    n = system.n
    x = math.sqrt(2.0 * I / n) * math.cos(n * theta)
    inv_n = 1.0 / n
    return HamiltonianPieces(
        potential_term=fx.evaluate(system.potential, x) * inv_n,
        forcing_term=-x * fx.evaluate(system.p, t) * inv_n,
        oscillating_term=fx.evaluate(system.psi, x) * inv_n,
    )


def hamiltonian_value(system, I, theta, t) -> float:
    return I + sum(hamiltonian_pieces(system, I, theta, t))


# ---------------------------------------------------------------------------
# circle average of the potential term
# ---------------------------------------------------------------------------

AVG_REL_TOL = 1e-11
AVG_NODE_CAP = 2 ** 20


def averaged_potential(system, I, abs_tol=None) -> float:
    """Circle average of G(x)/n at action I (trapezoid doubling ladder).

    cos(n theta) sweeps n full periods over the circle, so the average is
    n-independent and is computed on one period. Admissible restoring
    forces are odd apart from constants, so the potential is even plus an
    exact linear term; the linear term averages to zero exactly and the
    even part folds onto a quarter period.

    The ladder accepts when a doubling moves the estimate by less than
    1e-11 relative; ``abs_tol`` optionally adds an absolute acceptance gap
    for callers fitting decaying residuals, where the relative test is
    stricter than the node cap allows.
    """
    if I < 0.0:
        raise DegenerateStateError("action must be non-negative", I=I)
    value, _ = _averaged_potential_info(system, float(I), abs_tol)
    return value


def _averaged_potential_info(system, I, abs_tol=None):
    even_part, _linear = fx.split_even_linear(system.potential)
    if even_part is None or I == 0.0:
        # potential is linear (mean zero) or the circle is a point at x=0
        return (0.0, 0)
    amplitude = math.sqrt(2.0 * I / system.n)
    inv_n = 1.0 / system.n

    def f_even(u):
        return fx.evaluate(even_part, amplitude * np.cos(u)) * inv_n

    return even_circle_mean(
        f_even, rel_tol=AVG_REL_TOL, abs_tol=abs_tol,
        n_start=64, n_cap=AVG_NODE_CAP,
    )


def averaged_potential_asymptote(system) -> float:
    """Limit of I^(-1/2) * averaged potential: (sqrt2/pi) n^(-3/2) (g(+inf)-g(-inf))."""
    gap = fx.limit_gap(system.g)
    return (math.sqrt(2.0) / math.pi) * system.n ** -1.5 * gap


@dataclass(frozen=True)
class SlopeCheck:
    """Decay fit of a derivative curve plus its asymptotic level."""

    fit: DecayFit
    measured_level: float
    predicted_level: float


def averaged_potential_slope_check(system, I_grid=None) -> SlopeCheck:
    """Central-difference derivative of the averaged potential vs. I.

    The derivative should decay like I^(-1/2) with prefactor half the
    averaged-potential asymptote. Systems with equal limits at infinity
    have no I^(1/2) growth to differentiate: degenerate.
    """
    gap = fx.limit_gap(system.g)
    if gap == 0.0:
        raise FitDegenerateError(
            "restoring force has equal limits; derivative scaling undefined"
        )
    if I_grid is None:
        I_grid = geometric_grid(1e4, 1e8, 9)
    I_grid = np.asarray(I_grid, dtype=float)
    rel_step = 1e-4
    derivs = np.empty(I_grid.size)
    for i, I in enumerate(I_grid):
        hi = averaged_potential(system, I * (1.0 + rel_step))
        lo = averaged_potential(system, I * (1.0 - rel_step))
        derivs[i] = (hi - lo) / (2.0 * rel_step * I)
    fit = loglog_fit(I_grid, derivs)
    I_last = float(I_grid[-1])
    measured = derivs[-1] * math.sqrt(I_last)
    predicted = 0.5 * averaged_potential_asymptote(system)
    return SlopeCheck(fit=fit, measured_level=float(measured),
                      predicted_level=predicted)


# ---------------------------------------------------------------------------
# circle average of the forcing term (closed form)
# ---------------------------------------------------------------------------

def forcing_projections(system) -> tuple:
    """(C, S) = pi * (cos, sin) coefficients of the resonant harmonic of p."""
    a_n, b_n = fx.harmonic(system.p, system.n)
    return (math.pi * a_n, math.pi * b_n)


def averaged_forcing(system, h, t) -> float:
    """Circle average of the forcing term at energy h, start time t.

    Only the resonant harmonic of p survives the average:
    -(sqrt2 / 2 pi) n^(-3/2) h^(1/2) [C cos(nt) + S sin(nt)].
    """
    if h < 0.0:
        raise DegenerateStateError("energy must be non-negative", h=h)
    c_proj, s_proj = forcing_projections(system)
    n = system.n
    return (-(math.sqrt(2.0) / (2.0 * math.pi)) * n ** -1.5 * math.sqrt(h)
            * (c_proj * math.cos(n * t) + s_proj * math.sin(n * t)))


def averaged_forcing_peak(system, h) -> float:
    """max over t of |averaged forcing| = (sqrt2/2pi) n^(-3/2) h^(1/2) A."""
    c_proj, s_proj = forcing_projections(system)
    amp = math.hypot(c_proj, s_proj)
    return (math.sqrt(2.0) / (2.0 * math.pi)) * system.n ** -1.5 * math.sqrt(h) * amp


# ---------------------------------------------------------------------------
# energy-time exchange: R solving R = (pieces sum)(h - R)
# ---------------------------------------------------------------------------

def _perturbation_sup(system) -> float:
    return (fx.sup_abs(system.g) + fx.sup_abs(system.p)
            + fx.sup_abs(system.psi_prime))


def energy_exchange_floor(system) -> float:
    """Smallest energy with a guaranteed contraction for the implicit solve.

    The fixed-point map has derivative bounded by S / (n sqrt(2 n I)) with
    S the structural sup of the perturbation, and the solution keeps
    I = h - R >= h/2; bisection finds where the bound crosses 1/2, floored
    at 100.
    """
    s_bound = _perturbation_sup(system)
    if s_bound == 0.0:
        return 100.0

    def margin(h):
        return s_bound / (system.n * math.sqrt(system.n * h)) - 0.5

    lo, hi = 1e-6, 1e12
    if margin(lo) <= 0.0:
        return 100.0
    if margin(hi) > 0.0:
        raise SolverFailureError("no contraction below h = 1e12", sup=s_bound)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return max(100.0, hi)


def exchange_bound(system, h) -> float:
    """A priori bound: |R| <= 2 (sup|g|+sup|p|+sup|psi|) sqrt(2/n)/n * h^(1/2)."""
    s_val = (fx.sup_abs(system.g) + fx.sup_abs(system.p) + fx.sup_abs(system.psi))
    return 2.0 * s_val * math.sqrt(2.0 / system.n) / system.n * math.sqrt(h)


def solve_energy_exchange(system, h, t, theta) -> float:
    """Solve R = (potential + forcing + oscillating)(h - R, theta, t).

    Damped fixed-point iteration from R = 0, step tolerance
    1e-12 * max(1, h^(1/2)), residual verified below 1e-10 * max(1, h^(1/2)).
    """
    floor = energy_exchange_floor(system)
    if h < floor:
        raise HTooSmallError(
            "energy below the contraction floor", h=h, floor=floor
        )
    n = system.n
    g_pot = fx.compile_scalar(system.potential)
    psi_fn = fx.compile_scalar(system.psi)
    p_val = fx.evaluate(system.p, t)
    cos_nt = math.cos(n * theta)
    inv_n = 1.0 / n

    def pieces_sum(I):
        x = math.sqrt(2.0 * I / n) * cos_nt
        return (g_pot(x) - x * p_val + psi_fn(x)) * inv_n

    scale = max(1.0, math.sqrt(h))
    step_tol = 1e-12 * scale
    r_val = 0.0
    for _ in range(200):
        target = pieces_sum(h - r_val)
        new = 0.5 * (r_val + target)
        if abs(new - r_val) <= step_tol:
            r_val = new
            break
        r_val = new
        if h - r_val <= 0.0:
            raise SolverFailureError("iterate left the energy domain", h=h, R=r_val)
    else:
        raise SolverFailureError(
            "energy exchange iteration did not converge", h=h, theta=theta, t=t
        )
    residual = abs(r_val - pieces_sum(h - r_val))
    if residual > 1e-10 * scale:
        raise SolverFailureError(
            "energy exchange residual too large", h=h, residual=residual
        )
    return r_val


# ---------------------------------------------------------------------------
# first-order generating functions
# ---------------------------------------------------------------------------

def _pow2_at_least(v):
    return 1 << max(6, int(math.ceil(math.log2(max(2.0, v)))))


@lru_cache(maxsize=64)
def _potential_shift_integral(system, h):
    n = system.n
    amplitude = math.sqrt(2.0 * h / n)
    mean = averaged_potential(system, h)
    pot = system.potential
    inv_n = 1.0 / n

    def integrand(theta):
        x = amplitude * np.cos(n * theta)
        return fx.evaluate(pot, x) * inv_n - mean

    panels = _pow2_at_least(4.0 * n * amplitude)
    return CumulativeIntegral(integrand, panels)


def potential_shift_generator(system, h, theta) -> float:
    """Integral from 0 to theta of (potential term - its average) at action h.

    The generating function removing the angle dependence of the potential
    term at first order; closes to 0 over a full circle.
    """
    return _potential_shift_integral(system, float(h))(theta)


@lru_cache(maxsize=64)
def _forcing_shift_integral(system, h, t):
    n = system.n
    amplitude = math.sqrt(2.0 * h / n)
    mean = averaged_forcing(system, h, t)
    p_spec = system.p
    inv_n = 1.0 / n

    def integrand(theta):
        x = amplitude * np.cos(n * theta)
        return -x * fx.evaluate(p_spec, t + theta) * inv_n - mean

    m_max = max(len(p_spec.cos_coeffs), len(p_spec.sin_coeffs), 1)
    panels = _pow2_at_least(8.0 * (n + m_max))
    return CumulativeIntegral(integrand, panels)


def forcing_shift_generator(system, h, t, theta) -> float:
    """Integral from 0 to theta of the forcing term along the rotating angle,
    minus its average; closes to 0 over a full circle."""
    return _forcing_shift_integral(system, float(h), float(t))(theta)


def normal_form_residuals(system, h, t=0.0, n_samples=16, step=1e-6) -> dict:
    """Closure and derivative-cancellation residuals of both generators.

    Central differences at interior angles; the fixed panel grid makes the
    shared panels cancel exactly, so the finite-difference noise floor is
    far below the reported residuals.
    """
    s2 = _potential_shift_integral(system, float(h))
    s3 = _forcing_shift_integral(system, float(h), float(t))
    closure_potential = abs(s2(TWO_PI))
    closure_forcing = abs(s3(TWO_PI))
    worst_potential = 0.0
    worst_forcing = 0.0
    n = system.n
    amplitude = math.sqrt(2.0 * h / n)
    mean_pot = averaged_potential(system, h)
    mean_forc = averaged_forcing(system, h, t)
    inv_n = 1.0 / n
    for k in range(n_samples):
        theta = TWO_PI * (k + 0.5) / n_samples
        x = amplitude * math.cos(n * theta)
        target = fx.evaluate(system.potential, x) * inv_n - mean_pot
        fd = (s2(theta + step) - s2(theta - step)) / (2.0 * step)
        worst_potential = max(worst_potential, abs(fd - target))
        target = -x * fx.evaluate(system.p, t + theta) * inv_n - mean_forc
        fd = (s3(theta + step) - s3(theta - step)) / (2.0 * step)
        worst_forcing = max(worst_forcing, abs(fd - target))
    return {
        "h": float(h),
        "t": float(t),
        "closure_potential": closure_potential,
        "closure_forcing": closure_forcing,
        "cancellation_potential": worst_potential,
        "cancellation_forcing": worst_forcing,
    }
