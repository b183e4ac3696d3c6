"""Quadrature kernels shared by the averaging and oscillatory modules."""
from __future__ import annotations

import math

import numpy as np

from .errors import PrecisionFailureError

TWO_PI = 2.0 * math.pi


def periodic_mean(f, rel_tol=None, abs_tol=None, n_start=64, n_cap=2 ** 20):
    """Mean of a 2*pi-periodic function by trapezoid with node doubling.

    ``f`` maps an angle array to a value array. Each doubling reuses all
    previous nodes (only midpoints are new). Converged when one doubling
    moves the estimate by less than the tolerance; hitting the node cap
    without converging is a precision failure.

    Returns (mean, nodes_used).
    """
    if rel_tol is None and abs_tol is None:
        raise ValueError("need rel_tol or abs_tol")
    n = int(n_start)
    total = float(np.sum(f(np.arange(n) * (TWO_PI / n))))
    mean = total / n
    gap = math.inf
    while n < n_cap:
        mids = (np.arange(n) + 0.5) * (TWO_PI / n)
        total += float(np.sum(f(mids)))
        n *= 2
        new = total / n
        gap = abs(new - mean)
        tol = 0.0
        if rel_tol is not None:
            tol = rel_tol * abs(new)
        if abs_tol is not None:
            tol = max(tol, abs_tol)
        mean = new
        if gap <= tol:
            return mean, n
    raise PrecisionFailureError(
        "periodic mean did not converge before the node cap",
        nodes=n, cap=n_cap, last_gap=gap,
    )


def even_circle_mean(f_even, rel_tol=None, abs_tol=None, n_start=64, n_cap=2 ** 20):
    """Mean over the circle of u -> F(cos u) for even F, folded to [0, pi/2].

    ``f_even`` maps an array of angles u in [0, pi/2] to F(cos u). By the
    symmetries cos(pi - u) = -cos u and evenness of F, the full-circle
    N-node trapezoid equals the quarter-period (N/4)-panel trapezoid with
    half weights at both ends; this computes the latter. Node counts
    (n_start, n_cap, the returned count) are in full-circle equivalents.

    Returns (mean, effective_full_circle_nodes).
    """
    if rel_tol is None and abs_tol is None:
        raise ValueError("need rel_tol or abs_tol")
    n = int(n_start)
    if n % 4:
        n = 4 * (n // 4 + 1)
    m = n // 4
    h = (0.5 * math.pi) / m
    vals = f_even(np.arange(m + 1) * h)
    total = float(np.sum(vals[1:-1])) + 0.5 * (float(vals[0]) + float(vals[-1]))
    mean = total / m
    gap = math.inf
    while n < n_cap:
        mids = (np.arange(m) + 0.5) * h
        total += float(np.sum(f_even(mids)))
        m *= 2
        n *= 2
        h *= 0.5
        new = total / m
        gap = abs(new - mean)
        tol = 0.0
        if rel_tol is not None:
            tol = rel_tol * abs(new)
        if abs_tol is not None:
            tol = max(tol, abs_tol)
        mean = new
        if gap <= tol:
            return mean, n
    raise PrecisionFailureError(
        "circle mean did not converge before the node cap",
        nodes=n, cap=n_cap, last_gap=gap,
    )


def periodic_sum_mean(f, n_nodes):
    """Plain N-node trapezoid mean over [0, 2*pi) at a fixed node count."""
    n = int(n_nodes)
    return float(np.sum(f(np.arange(n) * (TWO_PI / n)))) / n


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def gl_panel(f, a, b):
    """16-point Gauss-Legendre integral of f over [a, b]."""
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GL_NODES
    return half * float(np.dot(_GL_WEIGHTS, f(x)))


class CumulativeIntegral:
    """Integral from 0 to theta on a fixed panelization of [0, 2*pi].

    The panel grid depends only on the panel count, never on theta, so two
    evaluations at nearby theta share every complete panel bit-for-bit and
    central differences of the result are noise-free.
    """

    def __init__(self, f, n_panels):
        self.f = f
        self.n_panels = int(n_panels)
        self.width = TWO_PI / self.n_panels
        edges = np.arange(self.n_panels + 1) * self.width
        half = 0.5 * self.width
        centers = edges[:-1] + half
        x = centers[:, None] + half * _GL_NODES[None, :]
        vals = f(x.ravel()).reshape(self.n_panels, 16)
        panel_ints = half * vals @ _GL_WEIGHTS
        self.prefix = np.concatenate(([0.0], np.cumsum(panel_ints)))

    def __call__(self, theta):
        if theta <= 0.0:
            return 0.0 if theta == 0.0 else -self._backward(-theta)
        k = min(int(theta / self.width), self.n_panels)
        base = float(self.prefix[k])
        lo = k * self.width
        if theta > lo:
            base += gl_panel(self.f, lo, min(theta, TWO_PI))
            if theta > TWO_PI:
                base += gl_panel(self.f, TWO_PI, theta)
        return base

    def _backward(self, t):
        return gl_panel(self.f, -t, 0.0)


def simpson_integral(f, a, b, n_panels):
    """Composite Simpson integral of f over [a, b] with n_panels panels."""
    n = int(n_panels)
    x = np.linspace(a, b, 2 * n + 1)
    vals = f(x)
    weights = np.ones(2 * n + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    h = (b - a) / (2 * n)
    return float(np.dot(weights, vals)) * (h / 3.0)
