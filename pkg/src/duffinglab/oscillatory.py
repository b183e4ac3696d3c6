"""Oscillatory circle means and their stationary-endpoint decay laws.

The averaged spatially-periodic term turns into means of cos/sin of a large
phase ``a * cos(n theta)`` over the circle.  This module evaluates those
means by brute periodic quadrature, provides an independent Bessel J0
evaluator as the cross-check oracle, and verifies the two decay laws that
make the term harmless at high energy: the h^(-1/4) envelope of the
averaged term and the a^(-1/2) endpoint law of the model half-period
integral.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmplitudeTooLargeError,
    HTooSmallError,
    InadmissibleFunctionError,
    SpecValidationError,
)
from .fitting import DecayFit, envelope_fit, envelope_points, geometric_grid
from .functions import Constant, Scaled, Sum, TrigPoly
from .quadrature import even_circle_mean, periodic_mean, simpson_integral

TWO_PI = 2.0 * math.pi

AMPLITUDE_CAP = 1.0e7
CIRCLE_ABS_TOL = 1.0e-12
# full-circle nodes per unit amplitude; 16 samples per oscillation of
# cos(a cos u) keeps the trapezoid's aliasing error far below 1e-12
NODES_PER_AMPLITUDE = 16.0


def _pow2_at_least(m: float) -> int:
    n = 64
    while n < m:
        n *= 2
    return n


# ---------------------------------------------------------------------------
# Bessel J0, series / downward recurrence / asymptotic
# ---------------------------------------------------------------------------

def bessel_j0(a: float) -> float:
    """Order-zero Bessel function of the first kind.

    Three regimes: a Taylor polynomial for tiny arguments, Miller's
    downward recurrence normalized by J0 + 2*J2 + 2*J4 + ... = 1 up to
    a = 60, and the Hankel large-argument expansion beyond.  The
    switchover point keeps both branches comfortably inside their
    accurate ranges; agreement with brute quadrature is checked by
    bessel_j0_self_check.
    """
    a = abs(float(a))
    if a < 1.0e-4:
        a2 = a * a
        return 1.0 + a2 * (-0.25 + a2 * (1.0 / 64.0 - a2 / 2304.0))
    if a <= 60.0:
        return _j0_miller(a)
    return _j0_hankel(a)


def _j0_miller(a: float) -> float:
    # start order comfortably past the turning point so the seeded tail
    # has decayed below double precision by the time it reaches J0
    start = int(a + 16.0 + 10.0 * a ** (1.0 / 3.0))
    if start % 2:
        start += 1
    jp = 0.0
    j = 1.0e-30
    norm = 0.0
    for k in range(start, 0, -1):
        jm = (2.0 * k / a) * j - jp
        jp = j
        j = jm
        if abs(j) > 1.0e250:
            j *= 1.0e-250
            jp *= 1.0e-250
            norm *= 1.0e-250
        if (k - 1) > 0 and (k - 1) % 2 == 0:
            norm += 2.0 * j
    norm += j
    return j / norm


def _j0_hankel(z: float) -> float:
    p = 1.0
    q = 0.0
    t = 1.0
    sign_p = -1.0
    sign_q = -1.0
    for k in range(1, 13):
        t *= (2.0 * k - 1.0) ** 2 / (8.0 * k * z)
        if k % 2:
            q += sign_q * t
            sign_q = -sign_q
        else:
            p += sign_p * t
            sign_p = -sign_p
        if t < 1.0e-17:
            break
    w = z - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * z)) * (p * math.cos(w) - q * math.sin(w))


def bessel_j0_self_check(a_values=None) -> float:
    """Max |bessel_j0(a) - quadrature circle mean| over the given amplitudes."""
    if a_values is None:
        a_values = (0.0, 0.3, 1.0, 2.0, 5.0, 10.0, 17.0, 25.0, 35.0, 50.0)
    worst = 0.0
    for a in a_values:
        worst = max(worst, abs(bessel_j0(a) - circle_mean(a, "cos", 1)))
    return worst


# ---------------------------------------------------------------------------
# circle means
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OscillatorySample:
    """One harmonic's circle means at phase amplitude a."""

    amplitude_a: float
    value_cos: float
    value_sin: float


def circle_mean(a: float, parity: str, n: int = 1) -> float:
    """Mean of cos/sin(a cos(n theta)) over theta in [0, 2*pi).

    Computed by periodic trapezoid with at least 16*(1+a) nodes, doubled
    until successive levels agree to 1e-12 absolute.  The substitution
    u = n*theta makes the mean independent of n, so the quadrature runs
    on the n = 1 profile.  For parity "cos" the exact value is J0(a);
    for "sin" it is exactly zero by odd symmetry over the period.
    Work and memory grow linearly with a.
    """
    a = float(a)
    if a < 0.0:
        raise SpecValidationError(f"amplitude must be nonnegative, got {a}")
    if parity not in ("cos", "sin"):
        raise SpecValidationError(f"parity must be 'cos' or 'sin', got {parity!r}")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SpecValidationError(f"n must be a positive integer, got {n!r}")
    if a > AMPLITUDE_CAP:
        raise AmplitudeTooLargeError(
            "phase amplitude exceeds the node budget",
            amplitude=a, cap=AMPLITUDE_CAP,
        )
    floor = _pow2_at_least(NODES_PER_AMPLITUDE * (1.0 + a))
    cap = max(4 * floor, 2 ** 22)
    if parity == "cos":
        value, _ = even_circle_mean(
            lambda u: np.cos(a * np.cos(u)),
            abs_tol=CIRCLE_ABS_TOL, n_start=floor, n_cap=cap,
        )
    else:
        value, _ = periodic_mean(
            lambda u: np.sin(a * np.cos(u)),
            abs_tol=CIRCLE_ABS_TOL, n_start=floor, n_cap=cap,
        )
    return float(value)


def oscillatory_sample(a: float, n: int = 1) -> OscillatorySample:
    return OscillatorySample(
        amplitude_a=float(a),
        value_cos=circle_mean(a, "cos", n),
        value_sin=circle_mean(a, "sin", n),
    )


# ---------------------------------------------------------------------------
# averaged spatially-periodic term
# ---------------------------------------------------------------------------

def _collect_harmonics(spec, scale, constant, harmonics):
    if isinstance(spec, TrigPoly):
        constant += scale * spec.constant
        width = max(len(spec.cos_coeffs), len(spec.sin_coeffs))
        for m in range(1, width + 1):
            c = spec.cos_coeffs[m - 1] if m <= len(spec.cos_coeffs) else 0.0
            s = spec.sin_coeffs[m - 1] if m <= len(spec.sin_coeffs) else 0.0
            if c == 0.0 and s == 0.0:
                continue
            oc, os = harmonics.get(m, (0.0, 0.0))
            harmonics[m] = (oc + scale * c, os + scale * s)
        return constant
    if isinstance(spec, Constant):
        return constant + scale * spec.c
    if isinstance(spec, Sum):
        for ch in spec.children:
            constant = _collect_harmonics(ch, scale, constant, harmonics)
        return constant
    if isinstance(spec, Scaled):
        return _collect_harmonics(spec.child, scale * spec.k, constant, harmonics)
    raise InadmissibleFunctionError(
        f"{type(spec).__name__} is not admissible inside a periodic term"
    )


def psi_average(system, h: float) -> float:
    """Mean of psi(sqrt(2h/n) cos(n theta)) / n over the circle.

    Assembled harmonic by harmonic: the cos harmonic of circular
    frequency m*w contributes its coefficient times the quadrature
    circle mean at amplitude a_m = m*w*sqrt(2h/n); sin harmonics
    contribute exactly zero and are skipped.
    """
    h = float(h)
    if h < 1.0:
        raise HTooSmallError("averaged periodic term needs h >= 1", h=h)
    n = system.n
    amp = math.sqrt(2.0 * h / n)
    w = TWO_PI / system.psi_period
    harmonics: dict = {}
    constant = _collect_harmonics(system.psi, 1.0, 0.0, harmonics)
    value = constant
    for m in sorted(harmonics):
        c, _ = harmonics[m]
        if c != 0.0:
            value += c * circle_mean(m * w * amp, "cos", n)
    return value / n


def psi_harmonic_samples(system, h: float) -> dict:
    """Per-harmonic circle means at energy h, keyed by harmonic index.

    Unlike psi_average this evaluates the sin parity too, exposing the
    cancellation instead of assuming it.
    """
    h = float(h)
    if h < 1.0:
        raise HTooSmallError("averaged periodic term needs h >= 1", h=h)
    amp = math.sqrt(2.0 * h / system.n)
    w = TWO_PI / system.psi_period
    harmonics: dict = {}
    _collect_harmonics(system.psi, 1.0, 0.0, harmonics)
    return {
        m: oscillatory_sample(m * w * amp, system.n)
        for m in sorted(harmonics)
    }


# ---------------------------------------------------------------------------
# decay fits
# ---------------------------------------------------------------------------

def decay_fit_envelope(samples, window_factor: float) -> DecayFit:
    """Envelope decay fit of (x, v) samples, sidestepping sign changes.

    Needs at least 8 samples spanning at least three decades and a
    window factor of at least 2; windows take max|v| so the zeros of an
    oscillating profile do not drag the fit down.
    """
    pairs = [(float(x), float(v)) for x, v in samples]
    if len(pairs) < 8:
        raise SpecValidationError(
            f"need at least 8 samples, got {len(pairs)}"
        )
    if window_factor < 2.0:
        raise SpecValidationError(
            f"window_factor must be >= 2, got {window_factor}"
        )
    pairs.sort()
    xs = np.array([p[0] for p in pairs])
    vs = np.array([p[1] for p in pairs])
    if xs[0] <= 0.0:
        raise SpecValidationError("sample abscissae must be positive")
    if xs[-1] < 1.0e3 * xs[0] * (1.0 - 1.0e-12):
        raise SpecValidationError(
            "samples must span at least three decades",
            span=float(xs[-1] / xs[0]),
        )
    return envelope_fit(xs, np.abs(vs), window_factor)


# ---------------------------------------------------------------------------
# endpoint model integral
# ---------------------------------------------------------------------------

def model_endpoint_integral(a: float, n_panels: int = None) -> complex:
    """Direct Simpson evaluation of the half-period model integral.

    Integrates exp(i a cos theta) over [0, pi], where the phase is
    stationary exactly at the two endpoints.  Composite Simpson needs
    many panels per oscillation for high accuracy, so this direct route
    is for modest a (cross-checks); the geometric scan in
    endpoint_expansion_check uses the reflected full-period trapezoid
    instead.
    """
    a = float(a)
    if a < 0.0:
        raise SpecValidationError(f"amplitude must be nonnegative, got {a}")
    if n_panels is None:
        n_panels = _pow2_at_least(2048.0 * (1.0 + a))
    re = simpson_integral(lambda t: np.cos(a * np.cos(t)), 0.0, math.pi, n_panels)
    im = simpson_integral(lambda t: np.sin(a * np.cos(t)), 0.0, math.pi, n_panels)
    return complex(re, im)


_CHUNK = 1 << 20


def _half_integral_reflected(a: float) -> complex:
    """Half-period model integral via the full-period trapezoid.

    The phase cos(theta) is even about theta = 0 and pi, so the integral
    over [0, pi] is half the full-period one; the periodic trapezoid on
    the full circle converges spectrally (4 nodes per oscillation leave
    aliasing far below double precision).
    """
    n = _pow2_at_least(4.0 * (1.0 + a))
    step = TWO_PI / n
    sum_cos = 0.0
    sum_sin = 0.0
    for lo in range(0, n, _CHUNK):
        theta = np.arange(lo, min(lo + _CHUNK, n)) * step
        phase = a * np.cos(theta)
        sum_cos += float(np.sum(np.cos(phase)))
        sum_sin += float(np.sum(np.sin(phase)))
    return complex(math.pi * sum_cos / n, math.pi * sum_sin / n)


@dataclass(frozen=True)
class EndpointReport:
    """Fitted endpoint decay of the model integral against a^(-1/2)."""

    fit: DecayFit
    prefactors: tuple
    prefactor_mean: float
    prefactor_cv: float
    predicted_prefactor: float
    n_points: int
    window_factor: float

    def to_json_dict(self) -> dict:
        return {
            "slope": self.fit.slope,
            "slope_rms_residual": self.fit.rms_residual,
            "prefactor_mean": self.prefactor_mean,
            "prefactor_cv": self.prefactor_cv,
            "predicted_prefactor": self.predicted_prefactor,
            "n_points": self.n_points,
            "window_factor": self.window_factor,
        }


def endpoint_expansion_check(a_grid=None, window_factor: float = 4.0) -> EndpointReport:
    """Scan |integral of exp(i a cos theta) over [0, pi]| on a geometric grid.

    Both endpoints are stationary points of the phase, so the magnitude
    decays like a^(-1/2) with an oscillating Bessel-type profile.  Fits
    the windowed envelope (expected slope -1/2) and reports the
    stability of the scaled prefactor max |V| * sqrt(a) per window
    against the two-endpoint prediction sqrt(2*pi).
    """
    if a_grid is None:
        a_grid = geometric_grid(1.0e2, 1.0e6, 257)
    grid = np.asarray(a_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 8:
        raise SpecValidationError("a_grid needs at least 8 points")
    if np.any(np.diff(grid) <= 0.0):
        raise SpecValidationError("a_grid must be strictly increasing")
    if grid[0] < 1.0e2 * (1.0 - 1.0e-9) or grid[-1] > 1.0e6 * (1.0 + 1.0e-9):
        raise SpecValidationError(
            "a_grid must lie inside [1e2, 1e6]",
            lo=float(grid[0]), hi=float(grid[-1]),
        )
    ratios = grid[1:] / grid[:-1]
    if np.max(ratios) > np.min(ratios) * (1.0 + 1.0e-6):
        raise SpecValidationError("a_grid must be geometric (constant ratio)")

    magnitude = np.array([abs(_half_integral_reflected(a)) for a in grid])
    fit = envelope_fit(grid, magnitude, window_factor)
    _, prefactors = envelope_points(grid, magnitude * np.sqrt(grid), window_factor)
    mean = float(np.mean(prefactors))
    cv = float(np.std(prefactors) / mean)
    return EndpointReport(
        fit=fit,
        prefactors=tuple(float(p) for p in prefactors),
        prefactor_mean=mean,
        prefactor_cv=cv,
        predicted_prefactor=math.sqrt(TWO_PI),
        n_points=int(grid.size),
        window_factor=float(window_factor),
    )
