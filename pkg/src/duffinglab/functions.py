"""Closed function grammar for restoring, oscillating, and forcing terms.

Everything the laboratory integrates is assembled from a small fixed set of
shapes, so limits at infinity, antiderivatives, Fourier data, and sup bounds
are computed structurally from the expression tree rather than numerically.
Four extra shapes (XArctan, LogSquarePlusOne, PowerSquarePlusOne, Linear)
exist only so antiderivatives stay inside the grammar; they never appear in
configs.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import (
    InadmissibleFunctionError,
    SpecValidationError,
    UnsupportedExponentError,
)

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# grammar
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    c: float


@dataclass(frozen=True)
class Arctan:
    """scale * arctan(x)."""

    scale: float = 1.0


@dataclass(frozen=True)
class AlgebraicTail:
    """c * x * (1 + x^2)^(-e), decaying like |x|^(1-2e); requires e > 1/2."""

    c: float
    e: float

    def __post_init__(self):
        if not (self.e > 0.5):
            raise SpecValidationError(
                "algebraic tail needs exponent e > 1/2", e=self.e
            )


@dataclass(frozen=True)
class TrigPoly:
    """Finite trigonometric polynomial, harmonics indexed from 1.

    value(x) = constant + sum_m cos_coeffs[m-1]*cos(2 pi m x / period)
                        + sum_m sin_coeffs[m-1]*sin(2 pi m x / period)
    """

    period: float
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()
    constant: float = 0.0

    def __post_init__(self):
        if not (self.period > 0.0):
            raise SpecValidationError("trig poly needs period > 0", period=self.period)
        object.__setattr__(self, "cos_coeffs", tuple(float(v) for v in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(v) for v in self.sin_coeffs))


@dataclass(frozen=True)
class Rational1:
    """c * x / (1 + x^2)."""

    c: float


@dataclass(frozen=True)
class Sum:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise SpecValidationError("empty sum")


@dataclass(frozen=True)
class Scaled:
    k: float
    child: "FunctionSpec"


# antiderivative-only shapes

@dataclass(frozen=True)
class XArctan:
    """k * x * arctan(x)."""

    k: float


@dataclass(frozen=True)
class LogSquarePlusOne:
    """k * ln(1 + x^2)."""

    k: float


@dataclass(frozen=True)
class PowerSquarePlusOne:
    """k * (1 + x^2)^q."""

    k: float
    q: float


@dataclass(frozen=True)
class Linear:
    """k * x."""

    k: float


FunctionSpec = Union[
    Constant, Arctan, AlgebraicTail, TrigPoly, Rational1, Sum, Scaled,
    XArctan, LogSquarePlusOne, PowerSquarePlusOne, Linear,
]

_CONFIG_KINDS = ("constant", "arctan", "algebraic_tail", "trig_poly",
                 "rational1", "sum", "scaled")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _eval(spec, x):
    if isinstance(spec, Constant):
        return spec.c if not isinstance(x, np.ndarray) else np.full_like(x, spec.c, dtype=float)
    if isinstance(spec, Arctan):
        return spec.scale * np.arctan(x)
    if isinstance(spec, AlgebraicTail):
        return spec.c * x * (1.0 + x * x) ** (-spec.e)
    if isinstance(spec, Rational1):
        return spec.c * x / (1.0 + x * x)
    if isinstance(spec, TrigPoly):
        w = TWO_PI / spec.period
        acc = spec.constant if not isinstance(x, np.ndarray) else np.full_like(x, spec.constant, dtype=float)
        for m, a in enumerate(spec.cos_coeffs, start=1):
            if a != 0.0:
                acc = acc + a * np.cos((m * w) * x)
        for m, b in enumerate(spec.sin_coeffs, start=1):
            if b != 0.0:
                acc = acc + b * np.sin((m * w) * x)
        return acc
    if isinstance(spec, Sum):
        acc = _eval(spec.children[0], x)
        for ch in spec.children[1:]:
            acc = acc + _eval(ch, x)
        return acc
    if isinstance(spec, Scaled):
        return spec.k * _eval(spec.child, x)
    if isinstance(spec, XArctan):
        return spec.k * x * np.arctan(x)
    if isinstance(spec, LogSquarePlusOne):
        return spec.k * np.log1p(x * x)
    if isinstance(spec, PowerSquarePlusOne):
        return spec.k * (1.0 + x * x) ** spec.q
    if isinstance(spec, Linear):
        return spec.k * x
    raise SpecValidationError(f"unknown spec node {type(spec).__name__}")


def evaluate(spec: FunctionSpec, x):
    """Evaluate at a float or ndarray argument."""
    if isinstance(x, np.ndarray):
        return _eval(spec, x.astype(float, copy=False))
    return float(_eval(spec, float(x)))


def compile_scalar(spec: FunctionSpec) -> Callable[[float], float]:
    """Build a plain-Python scalar callable (fast path for ODE loops)."""
    if isinstance(spec, Constant):
        c = spec.c
        return lambda x: c
    if isinstance(spec, Arctan):
        s, atan = spec.scale, math.atan
        return lambda x: s * atan(x)
    if isinstance(spec, AlgebraicTail):
        c, me = spec.c, -spec.e
        return lambda x: c * x * (1.0 + x * x) ** me
    if isinstance(spec, Rational1):
        c = spec.c
        return lambda x: c * x / (1.0 + x * x)
    if isinstance(spec, TrigPoly):
        w = TWO_PI / spec.period
        const = spec.constant
        terms = []
        for m, a in enumerate(spec.cos_coeffs, start=1):
            if a != 0.0:
                terms.append((m * w, a, math.cos))
        for m, b in enumerate(spec.sin_coeffs, start=1):
            if b != 0.0:
                terms.append((m * w, b, math.sin))
        if not terms:
            return lambda x: const
        if len(terms) == 1 and const == 0.0:
            w1, c1, f1 = terms[0]
            return lambda x: c1 * f1(w1 * x)
        terms = tuple(terms)

        def tp(x):
            acc = const
            for wm, cm, fm in terms:
                acc += cm * fm(wm * x)
            return acc

        return tp
    if isinstance(spec, Sum):
        kids = tuple(compile_scalar(ch) for ch in spec.children)
        if len(kids) == 1:
            return kids[0]
        if len(kids) == 2:
            f0, f1 = kids
            return lambda x: f0(x) + f1(x)
        if len(kids) == 3:
            f0, f1, f2 = kids
            return lambda x: f0(x) + f1(x) + f2(x)

        def sm(x):
            acc = 0.0
            for f in kids:
                acc += f(x)
            return acc

        return sm
    if isinstance(spec, Scaled):
        k, f = spec.k, compile_scalar(spec.child)
        return lambda x: k * f(x)
    if isinstance(spec, XArctan):
        k, atan = spec.k, math.atan
        return lambda x: k * x * atan(x)
    if isinstance(spec, LogSquarePlusOne):
        k, log1p = spec.k, math.log1p
        return lambda x: k * log1p(x * x)
    if isinstance(spec, PowerSquarePlusOne):
        k, q = spec.k, spec.q
        return lambda x: k * (1.0 + x * x) ** q
    if isinstance(spec, Linear):
        k = spec.k
        return lambda x: k * x
    raise SpecValidationError(f"unknown spec node {type(spec).__name__}")


# ---------------------------------------------------------------------------
# structural calculus
# ---------------------------------------------------------------------------

def antiderivative(spec: FunctionSpec) -> FunctionSpec:
    """Antiderivative F with F(0) = 0, closed over the grammar.

    AlgebraicTail with e = 1 has a logarithmic antiderivative not expressible
    with a finite limit structure here; it is rejected (use Rational1, which
    is that shape with the log handled explicitly).
    """
    if isinstance(spec, Constant):
        return Linear(spec.c)
    if isinstance(spec, Arctan):
        # d/dx [x*atan(x) - ln(1+x^2)/2] = atan(x); value 0 at x=0.
        return Sum((XArctan(spec.scale), LogSquarePlusOne(-0.5 * spec.scale)))
    if isinstance(spec, AlgebraicTail):
        if spec.e == 1.0:
            raise UnsupportedExponentError(
                "algebraic tail with e = 1 integrates to a logarithm; "
                "use rational1 instead", e=spec.e,
            )
        k = spec.c / (2.0 * (1.0 - spec.e))
        return Sum((PowerSquarePlusOne(k, 1.0 - spec.e), Constant(-k)))
    if isinstance(spec, Rational1):
        return LogSquarePlusOne(0.5 * spec.c)
    if isinstance(spec, TrigPoly):
        w = TWO_PI / spec.period
        n_cos = len(spec.sin_coeffs)
        n_sin = len(spec.cos_coeffs)
        new_cos = [0.0] * n_cos
        new_sin = [0.0] * n_sin
        for m, a in enumerate(spec.cos_coeffs, start=1):
            new_sin[m - 1] = a / (m * w)
        shift = 0.0
        for m, b in enumerate(spec.sin_coeffs, start=1):
            new_cos[m - 1] = -b / (m * w)
            shift += b / (m * w)
        parts = [TrigPoly(spec.period, tuple(new_cos), tuple(new_sin), 0.0)]
        if spec.constant != 0.0:
            parts.append(Linear(spec.constant))
        if shift != 0.0:
            parts.append(Constant(shift))
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))
    if isinstance(spec, Sum):
        return Sum(tuple(antiderivative(ch) for ch in spec.children))
    if isinstance(spec, Scaled):
        return Scaled(spec.k, antiderivative(spec.child))
    raise InadmissibleFunctionError(
        f"no antiderivative rule for {type(spec).__name__}"
    )


def derivative_periodic(spec: FunctionSpec) -> FunctionSpec:
    """Derivative of a periodic (trig poly based) spec."""
    if isinstance(spec, TrigPoly):
        w = TWO_PI / spec.period
        n = max(len(spec.cos_coeffs), len(spec.sin_coeffs))
        new_cos = [0.0] * n
        new_sin = [0.0] * n
        for m, a in enumerate(spec.cos_coeffs, start=1):
            new_sin[m - 1] -= a * m * w
        for m, b in enumerate(spec.sin_coeffs, start=1):
            new_cos[m - 1] += b * m * w
        return TrigPoly(spec.period, tuple(new_cos), tuple(new_sin), 0.0)
    if isinstance(spec, Constant):
        return Constant(0.0)
    if isinstance(spec, Sum):
        return Sum(tuple(derivative_periodic(ch) for ch in spec.children))
    if isinstance(spec, Scaled):
        return Scaled(spec.k, derivative_periodic(spec.child))
    raise InadmissibleFunctionError(
        f"derivative only defined for periodic specs, got {type(spec).__name__}"
    )


def limits_at_infinity(spec: FunctionSpec) -> tuple:
    """(limit at -inf, limit at +inf); raises if either does not exist."""
    if isinstance(spec, Constant):
        return (spec.c, spec.c)
    if isinstance(spec, Arctan):
        half_pi = 0.5 * math.pi
        return (-spec.scale * half_pi, spec.scale * half_pi)
    if isinstance(spec, (AlgebraicTail, Rational1)):
        return (0.0, 0.0)
    if isinstance(spec, Sum):
        lo = hi = 0.0
        for ch in spec.children:
            a, b = limits_at_infinity(ch)
            lo += a
            hi += b
        return (lo, hi)
    if isinstance(spec, Scaled):
        a, b = limits_at_infinity(spec.child)
        return (spec.k * a, spec.k * b)
    raise InadmissibleFunctionError(
        f"{type(spec).__name__} has no finite limits at infinity"
    )


def limit_gap(spec: FunctionSpec) -> float:
    """g(+inf) - g(-inf)."""
    lo, hi = limits_at_infinity(spec)
    return hi - lo


def sup_abs(spec: FunctionSpec) -> float:
    """Structural upper bound for sup |f| (exact on leaves, subadditive)."""
    if isinstance(spec, Constant):
        return abs(spec.c)
    if isinstance(spec, Arctan):
        return abs(spec.scale) * 0.5 * math.pi
    if isinstance(spec, AlgebraicTail):
        # peak of |x|(1+x^2)^(-e) at x^2 = 1/(2e-1)
        u = 1.0 / (2.0 * spec.e - 1.0)
        return abs(spec.c) * math.sqrt(u) * (1.0 + u) ** (-spec.e)
    if isinstance(spec, Rational1):
        return 0.5 * abs(spec.c)
    if isinstance(spec, TrigPoly):
        return (abs(spec.constant) + sum(abs(a) for a in spec.cos_coeffs)
                + sum(abs(b) for b in spec.sin_coeffs))
    if isinstance(spec, Sum):
        return sum(sup_abs(ch) for ch in spec.children)
    if isinstance(spec, Scaled):
        return abs(spec.k) * sup_abs(spec.child)
    raise InadmissibleFunctionError(
        f"no sup bound for unbounded shape {type(spec).__name__}"
    )


def zero_mean_normalize(spec: FunctionSpec, period: float) -> FunctionSpec:
    """Remove the mean over one period from a periodic spec.

    The grammar's periodic shapes carry their mean entirely in constant
    terms (harmonics integrate to zero), so normalization strips constants
    structurally. Idempotent bit-for-bit.
    """
    stripped = _strip_constants(spec, period)
    if stripped is None:
        return TrigPoly(period)
    return stripped


def _strip_constants(spec, period):
    if isinstance(spec, Constant):
        return None
    if isinstance(spec, TrigPoly):
        if not math.isclose(spec.period, period, rel_tol=1e-12, abs_tol=0.0):
            raise InadmissibleFunctionError(
                "trig poly period does not match the declared period",
                found=spec.period, declared=period,
            )
        if all(a == 0.0 for a in spec.cos_coeffs) and all(b == 0.0 for b in spec.sin_coeffs):
            return None
        if spec.constant == 0.0:
            return spec
        return TrigPoly(spec.period, spec.cos_coeffs, spec.sin_coeffs, 0.0)
    if isinstance(spec, Sum):
        kept = [s for s in (_strip_constants(ch, period) for ch in spec.children)
                if s is not None]
        if not kept:
            return None
        if len(kept) == 1:
            return kept[0]
        return Sum(tuple(kept))
    if isinstance(spec, Scaled):
        child = _strip_constants(spec.child, period)
        if child is None or spec.k == 0.0:
            return None
        return Scaled(spec.k, child)
    raise InadmissibleFunctionError(
        f"{type(spec).__name__} is not periodic; cannot normalize"
    )


# ---------------------------------------------------------------------------
# trig poly helpers
# ---------------------------------------------------------------------------

def harmonic(tp: TrigPoly, m: int) -> tuple:
    """(cos, sin) coefficient pair of harmonic m >= 1 (0.0 when absent)."""
    a = tp.cos_coeffs[m - 1] if 1 <= m <= len(tp.cos_coeffs) else 0.0
    b = tp.sin_coeffs[m - 1] if 1 <= m <= len(tp.sin_coeffs) else 0.0
    return (a, b)


def trig_shift(tp: TrigPoly, tau: float) -> TrigPoly:
    """The trig poly representing x -> tp(x + tau)."""
    w = TWO_PI / tp.period
    n = max(len(tp.cos_coeffs), len(tp.sin_coeffs))
    new_cos = [0.0] * n
    new_sin = [0.0] * n
    for m in range(1, n + 1):
        a, b = harmonic(tp, m)
        cw = math.cos(m * w * tau)
        sw = math.sin(m * w * tau)
        new_cos[m - 1] = a * cw + b * sw
        new_sin[m - 1] = b * cw - a * sw
    return TrigPoly(tp.period, tuple(new_cos), tuple(new_sin), tp.constant)


def trig_scale(tp: TrigPoly, k: float) -> TrigPoly:
    return TrigPoly(
        tp.period,
        tuple(k * a for a in tp.cos_coeffs),
        tuple(k * b for b in tp.sin_coeffs),
        k * tp.constant,
    )


def split_even_linear(spec: FunctionSpec) -> tuple:
    """Split an antiderivative tree into (even part, linear coefficient).

    Valid for antiderivatives of admissible restoring forces: every node is
    even in x except Linear terms. Returns (spec_without_linear, k_total).
    """
    if isinstance(spec, Linear):
        return (None, spec.k)
    if isinstance(spec, (Constant, XArctan, LogSquarePlusOne, PowerSquarePlusOne)):
        return (spec, 0.0)
    if isinstance(spec, Sum):
        evens = []
        k = 0.0
        for ch in spec.children:
            ev, kc = split_even_linear(ch)
            k += kc
            if ev is not None:
                evens.append(ev)
        if not evens:
            return (None, k)
        return (evens[0] if len(evens) == 1 else Sum(tuple(evens)), k)
    if isinstance(spec, Scaled):
        ev, kc = split_even_linear(spec.child)
        return (None if ev is None else Scaled(spec.k, ev), spec.k * kc)
    raise InadmissibleFunctionError(
        f"{type(spec).__name__} not expected inside a potential"
    )


# ---------------------------------------------------------------------------
# JSON config schema
# ---------------------------------------------------------------------------

def spec_to_config(spec: FunctionSpec) -> dict:
    if isinstance(spec, Constant):
        return {"kind": "constant", "c": spec.c}
    if isinstance(spec, Arctan):
        return {"kind": "arctan", "scale": spec.scale}
    if isinstance(spec, AlgebraicTail):
        return {"kind": "algebraic_tail", "c": spec.c, "e": spec.e}
    if isinstance(spec, TrigPoly):
        out = {"kind": "trig_poly", "period": spec.period,
               "cos": list(spec.cos_coeffs), "sin": list(spec.sin_coeffs)}
        if spec.constant != 0.0:
            out["constant"] = spec.constant
        return out
    if isinstance(spec, Rational1):
        return {"kind": "rational1", "c": spec.c}
    if isinstance(spec, Sum):
        return {"kind": "sum", "terms": [spec_to_config(ch) for ch in spec.children]}
    if isinstance(spec, Scaled):
        return {"kind": "scaled", "k": spec.k, "child": spec_to_config(spec.child)}
    raise SpecValidationError(
        f"{type(spec).__name__} is internal and has no config form"
    )


def _require_number(obj, key, path):
    if key not in obj:
        raise SpecValidationError(f"{path}: missing key {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SpecValidationError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def spec_from_config(obj, path: str = "spec") -> FunctionSpec:
    if not isinstance(obj, dict):
        raise SpecValidationError(f"{path}: expected an object, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind not in _CONFIG_KINDS:
        raise SpecValidationError(f"{path}: unknown kind {kind!r}")
    if kind == "constant":
        return Constant(_require_number(obj, "c", path))
    if kind == "arctan":
        return Arctan(_require_number(obj, "scale", path))
    if kind == "algebraic_tail":
        return AlgebraicTail(_require_number(obj, "c", path),
                             _require_number(obj, "e", path))
    if kind == "trig_poly":
        period = _require_number(obj, "period", path)
        cos = obj.get("cos", [])
        sin = obj.get("sin", [])
        for name, seq in (("cos", cos), ("sin", sin)):
            if not isinstance(seq, list) or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) for v in seq
            ):
                raise SpecValidationError(f"{path}.{name}: expected a list of numbers")
        constant = float(obj.get("constant", 0.0))
        return TrigPoly(period, tuple(float(v) for v in cos),
                        tuple(float(v) for v in sin), constant)
    if kind == "rational1":
        return Rational1(_require_number(obj, "c", path))
    if kind == "sum":
        terms = obj.get("terms")
        if not isinstance(terms, list) or not terms:
            raise SpecValidationError(f"{path}.terms: expected a non-empty list")
        return Sum(tuple(spec_from_config(t, f"{path}.terms[{i}]")
                         for i, t in enumerate(terms)))
    if kind == "scaled":
        return Scaled(_require_number(obj, "k", path),
                      spec_from_config(obj.get("child"), f"{path}.child"))
    raise SpecValidationError(f"{path}: unhandled kind {kind!r}")


# ---------------------------------------------------------------------------
# admissibility and the assembled system
# ---------------------------------------------------------------------------

def validate_restoring(spec: FunctionSpec, path: str = "g") -> None:
    """g must be bounded with finite limits at infinity (grammar shapes only)."""
    if isinstance(spec, (Constant, Arctan, AlgebraicTail, Rational1)):
        return
    if isinstance(spec, Sum):
        for i, ch in enumerate(spec.children):
            validate_restoring(ch, f"{path}[{i}]")
        return
    if isinstance(spec, Scaled):
        validate_restoring(spec.child, f"{path}.child")
        return
    raise InadmissibleFunctionError(
        f"{path}: {type(spec).__name__} is not admissible as a restoring force"
    )


def _collect_periods(spec, out):
    if isinstance(spec, TrigPoly):
        out.append(spec.period)
    elif isinstance(spec, Sum):
        for ch in spec.children:
            _collect_periods(ch, out)
    elif isinstance(spec, Scaled):
        _collect_periods(spec.child, out)
    elif isinstance(spec, Constant):
        pass
    else:
        raise InadmissibleFunctionError(
            f"{type(spec).__name__} is not admissible as a periodic term"
        )


def periodic_period(spec: FunctionSpec, default: float = None) -> float:
    """Common period of a periodic spec's trig polys (required to agree).

    A spec with no trig poly (pure constant) has any period; ``default``
    is used when given, otherwise that is an error.
    """
    periods: list = []
    _collect_periods(spec, periods)
    if not periods:
        if default is not None:
            return default
        raise InadmissibleFunctionError("no trig poly inside periodic spec")
    first = periods[0]
    for p in periods[1:]:
        if not math.isclose(p, first, rel_tol=1e-12, abs_tol=0.0):
            raise InadmissibleFunctionError(
                "mixed periods inside one periodic term", periods=periods
            )
    return first


@dataclass(frozen=True)
class DuffingSystem:
    """x'' + n^2 x + g(x) + psi'(x) = p(t), with derived pieces cached.

    potential is the antiderivative of g with value 0 at x = 0;
    psi is stored zero-mean; psi_prime is its exact derivative.
    """

    n: int
    g: FunctionSpec
    psi: FunctionSpec
    p: TrigPoly
    potential: FunctionSpec
    psi_prime: FunctionSpec
    psi_period: float

    def system_id(self) -> str:
        blob = json.dumps(system_to_config(self), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def make_system(n: int, g: FunctionSpec, psi=None, p: TrigPoly = None) -> DuffingSystem:
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise SpecValidationError(f"n must be a positive integer, got {n!r}")
    validate_restoring(g)
    if p is None:
        p = TrigPoly(TWO_PI)
    if not isinstance(p, TrigPoly):
        raise InadmissibleFunctionError("forcing must be a single trig poly")
    if not math.isclose(p.period, TWO_PI, rel_tol=1e-12, abs_tol=0.0):
        raise InadmissibleFunctionError(
            "forcing period must be 2*pi", period=p.period
        )
    if p.constant != 0.0:
        raise InadmissibleFunctionError("forcing must have zero mean")
    if psi is None:
        psi = TrigPoly(TWO_PI)
    psi_period = periodic_period(psi, default=TWO_PI)
    psi = zero_mean_normalize(psi, psi_period)
    return DuffingSystem(
        n=int(n), g=g, psi=psi, p=p,
        potential=antiderivative(g),
        psi_prime=derivative_periodic(psi),
        psi_period=psi_period,
    )


def system_to_config(system: DuffingSystem) -> dict:
    return {
        "n": system.n,
        "g": spec_to_config(system.g),
        "psi": spec_to_config(system.psi),
        "p": spec_to_config(system.p),
    }


def system_from_config(obj, path: str = "system") -> DuffingSystem:
    if not isinstance(obj, dict):
        raise SpecValidationError(f"{path}: expected an object")
    unknown = set(obj) - {"n", "g", "psi", "p"}
    if unknown:
        raise SpecValidationError(f"{path}: unknown keys {sorted(unknown)}")
    n = obj.get("n")
    if isinstance(n, bool) or not isinstance(n, int):
        raise SpecValidationError(f"{path}.n: expected an integer")
    if "g" not in obj:
        raise SpecValidationError(f"{path}: missing key 'g'")
    g = spec_from_config(obj["g"], f"{path}.g")
    psi = None
    if obj.get("psi") is not None:
        psi = spec_from_config(obj["psi"], f"{path}.psi")
    p = None
    if obj.get("p") is not None:
        p = spec_from_config(obj["p"], f"{path}.p")
        if not isinstance(p, TrigPoly):
            raise InadmissibleFunctionError(f"{path}.p: forcing must be a trig poly")
    return make_system(n, g, psi, p)
