"""Long-horizon integration, strobe maps, rotation numbers, classification.

The equation is integrated in the symmetric first-order form x' = n y,
y' = -n x - (g(x) + psi'(x) - p(t)) / n with a hand-rolled adaptive
Dormand-Prince 5(4) pair; the strobe map advances time by exactly one
forcing period 2*pi.  On top of the strobe iterates sit the unwrapped
rotation angle, the twist-scaling diagnostic, and the bounded/escaping
orbit classification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .actionangle import PhaseState
from .errors import (
    DegenerateStateError,
    DuffingLabError,
    FitDegenerateError,
    NotApplicableError,
    SolverFailureError,
    SpecValidationError,
    StiffnessFailureError,
)
from .fitting import DecayFit, loglog_fit
from .functions import compile_scalar, limit_gap, make_system

TWO_PI = 2.0 * math.pi

TOL_MIN = 1.0e-14
TOL_MAX = 1.0e-6
ESCAPE_CEILING = 1.0e12
MAX_STEPS = 1_000_000
MIN_STEP = 1.0e-14

# Dormand-Prince 5(4) tableau; row 7 doubles as the 5th-order weights so
# stage 7 is the derivative at the accepted point (FSAL)
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (
    19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0,
)
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
    49.0 / 176.0, -5103.0 / 18656.0,
)
_A71, _A73, _A74, _A75, _A76 = (
    35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0,
)
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
    -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0,
)

_SAFE = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA


@dataclass(frozen=True)
class IntegratorStats:
    steps: int
    rejected: int
    max_error_estimate: float


def _merge_stats(a: IntegratorStats, b: IntegratorStats) -> IntegratorStats:
    return IntegratorStats(
        steps=a.steps + b.steps,
        rejected=a.rejected + b.rejected,
        max_error_estimate=max(a.max_error_estimate, b.max_error_estimate),
    )


def _make_rhs(system) -> Callable:
    n = float(system.n)
    inv_n = 1.0 / n
    gf = compile_scalar(system.g)
    sf = compile_scalar(system.psi_prime)
    pf = compile_scalar(system.p)
    def rhs(t, x, y):
        return n * y, -n * x - (gf(x) + sf(x) - pf(t)) * inv_n
    return rhs


def _initial_step(rhs, t0, x0, y0, fx0, fy0, span, direction, tol):
    scx = tol + tol * abs(x0)
    scy = tol + tol * abs(y0)
    d0 = math.sqrt(0.5 * ((x0 / scx) ** 2 + (y0 / scy) ** 2))
    d1 = math.sqrt(0.5 * ((fx0 / scx) ** 2 + (fy0 / scy) ** 2))
    h0 = 1.0e-6 if (d0 < 1.0e-5 or d1 < 1.0e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    fx1, fy1 = rhs(t0 + direction * h0, x0 + direction * h0 * fx0,
                   y0 + direction * h0 * fy0)
    d2 = math.sqrt(
        0.5 * (((fx1 - fx0) / scx) ** 2 + ((fy1 - fy0) / scy) ** 2)
    ) / h0
    if max(d1, d2) <= 1.0e-15:
        h1 = max(1.0e-6, h0 * 1.0e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, span)


def _dopri5(rhs, t0, x0, y0, t1, tol):
    """Adaptive 5(4) integration of the pair (x, y) from t0 to t1.

    Error per step is measured in the mixed absolute/relative norm with
    both tolerances equal to tol; the step controller is the standard
    proportional-integral rule with growth held back right after a
    rejection.  Returns (x, y, IntegratorStats).
    """
    span = abs(t1 - t0)
    if span == 0.0:
        return x0, y0, IntegratorStats(0, 0, 0.0)
    direction = 1.0 if t1 > t0 else -1.0
    t, x, y = t0, x0, y0
    fx, fy = rhs(t, x, y)
    h = direction * _initial_step(rhs, t0, x0, y0, fx, fy, span, direction, tol)
    facold = 1.0e-4
    rejected_last = False
    n_accept = 0
    n_reject = 0
    worst = 0.0
    while (t1 - t) * direction > 0.0:
        if n_accept + n_reject > MAX_STEPS:
            raise SolverFailureError(
                "step budget exhausted", t=t, steps=n_accept + n_reject,
            )
        if abs(h) < MIN_STEP:
            raise StiffnessFailureError(
                "step size underflow", t=t, step=h,
            )
        if (t + h - t1) * direction > 0.0:
            h = t1 - t

        k2x, k2y = rhs(t + _C2 * h, x + h * _A21 * fx, y + h * _A21 * fy)
        k3x, k3y = rhs(t + _C3 * h,
                       x + h * (_A31 * fx + _A32 * k2x),
                       y + h * (_A31 * fy + _A32 * k2y))
        k4x, k4y = rhs(t + _C4 * h,
                       x + h * (_A41 * fx + _A42 * k2x + _A43 * k3x),
                       y + h * (_A41 * fy + _A42 * k2y + _A43 * k3y))
        k5x, k5y = rhs(t + _C5 * h,
                       x + h * (_A51 * fx + _A52 * k2x + _A53 * k3x + _A54 * k4x),
                       y + h * (_A51 * fy + _A52 * k2y + _A53 * k3y + _A54 * k4y))
        k6x, k6y = rhs(t + h,
                       x + h * (_A61 * fx + _A62 * k2x + _A63 * k3x
                                + _A64 * k4x + _A65 * k5x),
                       y + h * (_A61 * fy + _A62 * k2y + _A63 * k3y
                                + _A64 * k4y + _A65 * k5y))
        xn = x + h * (_A71 * fx + _A73 * k3x + _A74 * k4x
                      + _A75 * k5x + _A76 * k6x)
        yn = y + h * (_A71 * fy + _A73 * k3y + _A74 * k4y
                      + _A75 * k5y + _A76 * k6y)
        k7x, k7y = rhs(t + h, xn, yn)

        ex = h * (_E1 * fx + _E3 * k3x + _E4 * k4x
                  + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        ey = h * (_E1 * fy + _E3 * k3y + _E4 * k4y
                  + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        scx = tol + tol * max(abs(x), abs(xn))
        scy = tol + tol * max(abs(y), abs(yn))
        err = math.sqrt(0.5 * ((ex / scx) ** 2 + (ey / scy) ** 2))

        fac11 = err ** _EXPO
        if err <= 1.0:
            t = t + h
            x, y = xn, yn
            fx, fy = k7x, k7y
            n_accept += 1
            worst = max(worst, err)
            fac = fac11 / facold ** _BETA
            fac = max(0.1, min(5.0, fac / _SAFE))
            hnew = h / fac
            if rejected_last:
                hnew = direction * min(abs(hnew), abs(h))
            facold = max(err, 1.0e-4)
            h = hnew
            rejected_last = False
        else:
            h = h / min(5.0, fac11 / _SAFE)
            n_reject += 1
            rejected_last = True
    return x, y, IntegratorStats(n_accept, n_reject, worst * tol)


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise SpecValidationError(
            f"tol must lie in [{TOL_MIN:g}, {TOL_MAX:g}], got {tol:g}"
        )
    return tol


def integrate_with_stats(system, s0: PhaseState, t1: float, tol: float):
    tol = _check_tol(tol)
    t1 = float(t1)
    rhs = _make_rhs(system)
    x, y, stats = _dopri5(rhs, s0.t, s0.x, s0.y, t1, tol)
    return PhaseState(x=x, y=y, t=t1), stats


def integrate(system, s0: PhaseState, t1: float, tol: float) -> PhaseState:
    """Flow from s0 to time t1 (either direction) at tolerance tol."""
    state, _ = integrate_with_stats(system, s0, t1, tol)
    return state


def strobe_map(system, s: PhaseState, tol: float) -> PhaseState:
    """One period of the forcing: the time-2*pi Poincare return map."""
    return integrate(system, s, s.t + TWO_PI, tol)


# ---------------------------------------------------------------------------
# strobe orbits with angle lift
# ---------------------------------------------------------------------------

class OrbitIterate(NamedTuple):
    k: int
    I: float
    theta_lift: float
    x: float
    y: float


@dataclass(frozen=True)
class OrbitRecord:
    system_id: str
    initial: PhaseState
    iterates: tuple
    integrator_stats: IntegratorStats
    escaped: bool


def _polar(x: float, y: float) -> float:
    # the physical flow winds clockwise in (x, y); measuring the angle of
    # (x, -y) makes the linear rotation number come out +n
    return math.atan2(-y, x)


def _lift_advance(system, state, tol, expected):
    """One strobe plus the lift increment of the rotation angle.

    The increment is resolved to the branch nearest the free rotation
    2*pi*n.  A residual beyond 2.5 is ambiguous (the true increment may
    have wound past a half turn), so the strobe is re-run in quarter-turn
    sub-steps where the branch is unambiguous.
    """
    new, stats = integrate_with_stats(system, state, state.t + TWO_PI, tol)
    delta = math.remainder(_polar(new.x, new.y) - _polar(state.x, state.y)
                           - expected, TWO_PI)
    if abs(delta) <= 2.5:
        return new, expected + delta, stats
    n_sub = max(8, 4 * system.n)
    sub_expected = expected / n_sub
    advance = 0.0
    cur = state
    stats = None
    for j in range(1, n_sub + 1):
        nxt, st = integrate_with_stats(
            system, cur, state.t + TWO_PI * j / n_sub, tol)
        stats = st if stats is None else _merge_stats(stats, st)
        advance += sub_expected + math.remainder(
            _polar(nxt.x, nxt.y) - _polar(cur.x, cur.y) - sub_expected, TWO_PI)
        cur = nxt
    return cur, advance, stats


def _action(system, x: float, y: float) -> float:
    return 0.5 * system.n * (x * x + y * y)


def orbit(system, s0: PhaseState, N: int, tol: float) -> OrbitRecord:
    """N strobe iterates from s0 with action and lifted angle per iterate.

    Terminates early (escaped=True) when the action exceeds the hard
    ceiling 1e12; the record keeps whatever was computed.
    """
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise SpecValidationError(f"N must be a positive integer, got {N!r}")
    tol = _check_tol(tol)
    I0 = _action(system, s0.x, s0.y)
    if I0 == 0.0:
        raise DegenerateStateError("orbit started at the origin")
    expected = TWO_PI * system.n
    lift = _polar(s0.x, s0.y)
    iterates = [OrbitIterate(0, I0, lift, s0.x, s0.y)]
    stats = IntegratorStats(0, 0, 0.0)
    state = s0
    escaped = False
    sid = system.system_id()
    for k in range(1, N + 1):
        state, advance, st = _lift_advance(system, state, tol, expected)
        stats = _merge_stats(stats, st)
        lift += advance
        I = _action(system, state.x, state.y)
        if I == 0.0:
            raise DegenerateStateError("orbit passed through the origin", k=k)
        iterates.append(OrbitIterate(k, I, lift, state.x, state.y))
        if I > ESCAPE_CEILING:
            escaped = True
            break
    return OrbitRecord(
        system_id=sid,
        initial=s0,
        iterates=tuple(iterates),
        integrator_stats=stats,
        escaped=escaped,
    )


def rotation_number(rec: OrbitRecord) -> float:
    """Mean lifted rotation per strobe, in turns: (lift_N - lift_0)/(2 pi N)."""
    if rec.escaped:
        raise NotApplicableError("rotation number undefined on an escaped record")
    n_iter = len(rec.iterates) - 1
    if n_iter < 50:
        raise SpecValidationError(
            f"rotation number needs at least 50 iterates, got {n_iter}"
        )
    first = rec.iterates[0]
    last = rec.iterates[-1]
    return (last.theta_lift - first.theta_lift) / (TWO_PI * n_iter)


# ---------------------------------------------------------------------------
# twist scaling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwistCheck:
    """Rotation-number deviation from n across an action grid."""

    fit: DecayFit
    omegas: tuple
    deviations: tuple
    expected_sign: float
    sign_consistent: bool

    def to_json_dict(self) -> dict:
        return {
            "slope": self.fit.slope,
            "intercept": self.fit.intercept,
            "expected_sign": self.expected_sign,
            "sign_consistent": self.sign_consistent,
            "omegas": list(self.omegas),
            "deviations": list(self.deviations),
        }


def twist_scaling_check(system, I_grid=None, tol: float = 1.0e-10,
                        n_strobes: int = 256) -> TwistCheck:
    """How fast the autonomous rotation number approaches n as I grows.

    Strips forcing and the spatially-periodic term, measures
    omega(I) - n on a geometric action grid spanning at least three
    decades, and fits the decay (expected slope -1/2, expected sign the
    sign of the restoring gap g(+inf) - g(-inf)).
    """
    gap = limit_gap(system.g)
    if gap == 0.0:
        raise FitDegenerateError(
            "restoring gap vanishes, no twist to measure"
        )
    if I_grid is None:
        I_grid = np.geomspace(1.0e4, 1.0e8, 9)
    grid = np.asarray(I_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 4:
        raise SpecValidationError("I_grid needs at least 4 points")
    if np.any(np.diff(grid) <= 0.0) or grid[0] <= 0.0:
        raise SpecValidationError("I_grid must be positive and increasing")
    if grid[-1] < 1.0e3 * grid[0] * (1.0 - 1.0e-12):
        raise SpecValidationError(
            "I_grid must span at least three decades",
            span=float(grid[-1] / grid[0]),
        )
    autonomous = make_system(system.n, system.g)
    omegas = []
    deviations = []
    for I in grid:
        x0 = math.sqrt(2.0 * I / system.n)
        rec = orbit(autonomous, PhaseState(x=x0, y=0.0, t=0.0), n_strobes, tol)
        w = rotation_number(rec)
        omegas.append(w)
        deviations.append(w - system.n)
    expected = math.copysign(1.0, gap)
    consistent = all(
        d != 0.0 and math.copysign(1.0, d) == expected for d in deviations
    )
    fit = loglog_fit(grid, np.abs(deviations))
    return TwistCheck(
        fit=fit,
        omegas=tuple(omegas),
        deviations=tuple(deviations),
        expected_sign=expected,
        sign_consistent=consistent,
    )


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

VERDICT_BOUNDED = "BoundedEvidence"
VERDICT_ESCAPING = "Escaping"
VERDICT_UNDECIDED = "Undecided"


@dataclass(frozen=True)
class ClassificationVerdict:
    verdict: str
    max_I: float
    min_I: float
    growth_fit: Optional[DecayFit]
    horizon_strobes: int
    error: Optional[str] = None

    def to_json_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "max_I": self.max_I,
            "min_I": self.min_I,
            "horizon_strobes": self.horizon_strobes,
        }
        if self.growth_fit is not None:
            out["growth_slope"] = self.growth_fit.slope
        if self.error is not None:
            out["error"] = self.error
        return out


def classify_orbit(rec: OrbitRecord, escape_factor: float = 4.0,
                   confine_factor: float = 3.0) -> ClassificationVerdict:
    """Bounded/escaping verdict from a strobe record.

    Escaping needs the action to reach escape_factor times its initial
    value and a positive growth slope of log I against log t on the
    final half of the record; BoundedEvidence needs the whole record to
    stay within confine_factor times the initial action.  Everything
    else is Undecided.
    """
    its = rec.iterates
    I0 = its[0].I
    actions = np.array([it.I for it in its])
    max_I = float(actions.max())
    min_I = float(actions.min())
    horizon = len(its) - 1

    growth_fit = None
    if max_I >= escape_factor * I0:
        tail = its[len(its) // 2:]
        times = np.array([rec.initial.t + TWO_PI * it.k for it in tail])
        vals = np.array([it.I for it in tail])
        keep = times > 0.0
        try:
            growth_fit = loglog_fit(times[keep], vals[keep])
        except (FitDegenerateError, ValueError):
            growth_fit = None
        if growth_fit is not None and growth_fit.slope > 0.0:
            return ClassificationVerdict(
                VERDICT_ESCAPING, max_I, min_I, growth_fit, horizon)
        return ClassificationVerdict(
            VERDICT_UNDECIDED, max_I, min_I, growth_fit, horizon)
    if not rec.escaped and max_I <= confine_factor * I0:
        return ClassificationVerdict(
            VERDICT_BOUNDED, max_I, min_I, None, horizon)
    return ClassificationVerdict(
        VERDICT_UNDECIDED, max_I, min_I, None, horizon)


def sweep(system, initial_grid, N: int, tol: float):
    """Orbit and classify every initial state, in input order.

    A failure on one orbit is recorded in its slot (verdict Undecided
    with the error message) and never aborts the rest.
    """
    initials = list(initial_grid)
    if not initials:
        raise SpecValidationError("initial grid must be nonempty")
    out = []
    for s0 in initials:
        try:
            out.append(classify_orbit(orbit(system, s0, N, tol)))
        except DuffingLabError as exc:
            out.append(ClassificationVerdict(
                verdict=VERDICT_UNDECIDED,
                max_I=math.nan,
                min_I=math.nan,
                growth_fit=None,
                horizon_strobes=0,
                error=f"{type(exc).__name__}: {exc}",
            ))
    return out


@dataclass(frozen=True)
class EscapeScan:
    """Best escape channel over a grid of forcing phases."""

    best_phase_index: int
    best_t0: float
    best: ClassificationVerdict
    best_tail_slope: Optional[float]
    n_escaping: int
    n_positive_tail: int
    verdicts: tuple

    def to_json_dict(self) -> dict:
        return {
            "best_phase_index": self.best_phase_index,
            "best_t0": self.best_t0,
            "best": self.best.to_json_dict(),
            "best_tail_slope": self.best_tail_slope,
            "n_escaping": self.n_escaping,
            "n_positive_tail": self.n_positive_tail,
            "phases": len(self.verdicts),
        }


def _tail_slope(rec: OrbitRecord) -> Optional[float]:
    """Slope of log I against log t on the final half of a record."""
    tail = rec.iterates[len(rec.iterates) // 2:]
    times = np.array([rec.initial.t + TWO_PI * it.k for it in tail])
    vals = np.array([it.I for it in tail])
    keep = times > 0.0
    try:
        return loglog_fit(times[keep], vals[keep]).slope
    except (FitDegenerateError, ValueError):
        return None


def critical_escape_scan(system, I0: float, phases: int, N: int,
                         tol: float) -> EscapeScan:
    """Probe escape over forcing phases t0 = 2*pi*k/phases from action I0.

    Reports the phase whose orbit climbs highest together with counts of
    escaping orbits and of positive tail growth slopes.  The expectation
    that some phase escapes is soft: it is reported, never enforced.
    """
    if isinstance(phases, bool) or not isinstance(phases, int) or phases < 32:
        raise SpecValidationError(f"need at least 32 phases, got {phases!r}")
    I0 = float(I0)
    if I0 <= 0.0:
        raise SpecValidationError(f"I0 must be positive, got {I0}")
    x0 = math.sqrt(2.0 * I0 / system.n)
    verdicts = []
    best_idx = 0
    best_rec = None
    for k in range(phases):
        t0 = TWO_PI * k / phases
        try:
            rec = orbit(system, PhaseState(x=x0, y=0.0, t=t0), N, tol)
            v = classify_orbit(rec)
        except DuffingLabError as exc:
            rec = None
            v = ClassificationVerdict(
                verdict=VERDICT_UNDECIDED, max_I=math.nan, min_I=math.nan,
                growth_fit=None, horizon_strobes=0,
                error=f"{type(exc).__name__}: {exc}",
            )
        verdicts.append(v)
        best_max = verdicts[best_idx].max_I
        if rec is not None and not math.isnan(v.max_I) and (
                best_rec is None or math.isnan(best_max)
                or v.max_I > best_max):
            best_idx = k
            best_rec = rec
    n_escaping = sum(1 for v in verdicts if v.verdict == VERDICT_ESCAPING)
    n_positive = sum(
        1 for v in verdicts
        if v.growth_fit is not None and v.growth_fit.slope > 0.0
    )
    return EscapeScan(
        best_phase_index=best_idx,
        best_t0=TWO_PI * best_idx / phases,
        best=verdicts[best_idx],
        best_tail_slope=None if best_rec is None else _tail_slope(best_rec),
        n_escaping=n_escaping,
        n_positive_tail=n_positive,
        verdicts=tuple(verdicts),
    )
