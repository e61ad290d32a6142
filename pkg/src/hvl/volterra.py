"""The Volterra-type operator ``T_g f(z) = int_0^z f(w) g'(w) dw``.

Two independent backends:

* coefficients: termwise integration of the Cauchy product ``f * g'``;
* quadrature: ``z int_0^1 f(sz) g'(sz) ds`` on a radial rule graded toward
  ``s = 1``.

Boundary values of ``T_g f`` on a circle mesh come from the trace: the
antiderivative of ``f g'`` along the circle, pinned once per mesh piece by
a radial quadrature.  This costs one radial integral per piece instead of
one per node.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .disc import (
    AnalyticFn,
    CandidateSequence,
    ClosedForm,
    DiscPoint,
    PolynomialForm,
    derivative,
    disc_point,
    make_test_function,
)
from .norms import NormEstimate, hardy_norm, oscillation
from .quadrature import (
    QuadratureError,
    combine_gaps,
    cumulative_integral,
    one_minus,
    radial_integral,
)

RADIAL_TOL = 1e-13
DENOMINATOR_FLOOR = 1e-14


class SeriesForm(ClosedForm):
    """Adapter presenting a truncated series as a form, inside its validity radius."""

    tag = "series"

    def __init__(self, fn: AnalyticFn):
        self.fn = fn

    def evaluate(self, gap, angle, offset=0.0):
        gap = np.asarray(gap, dtype=float)
        if np.any(1.0 - gap > self.fn.r_eval) and self.fn.tail_bound(float(np.max(1.0 - gap))) > 1e-12:
            raise ValueError("series evaluated beyond its validity radius")
        z = (1.0 - gap) * np.exp(1j * (np.asarray(angle, dtype=float) + offset))
        return self.fn.series(z)


def _form(fn: AnalyticFn) -> ClosedForm:
    return fn.boundary_form() if fn.boundary_capable() else SeriesForm(fn)


def _derivative_form(g: AnalyticFn) -> ClosedForm:
    if g.boundary_capable():
        d = g.boundary_form().derivative()
        if d is not None:
            return d
    return _form(derivative(g))


class VolterraForm(ClosedForm):
    """``T_g f`` evaluated from closed forms of ``g'`` and ``f``."""

    tag = "volterra"

    def __init__(self, gprime: ClosedForm, f: ClosedForm, tol: float = RADIAL_TOL):
        self.gprime = gprime
        self.f = f
        self.tol = tol

    def foci(self):
        return tuple(self.gprime.foci()) + tuple(self.f.foci())

    def integrand(self, gap, angle, offset=0.0):
        return self.f.evaluate(gap, angle, offset) * self.gprime.evaluate(gap, angle, offset)

    def eta(self, gap, angle, offset=0.0):
        """Distance-like scale ``min |1 - conj(u) z|`` to the nearest focus."""
        gap, angle, offset = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (gap, angle, offset)))
        out = np.ones(gap.shape)
        for fc in self.foci():
            w = one_minus(combine_gaps(fc.scale, gap), (angle - fc.angle) + offset)
            out = np.minimum(out, np.abs(w))
        return out

    def evaluate_with_error(self, gap, angle, offset=0.0):
        gap, angle, offset = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (gap, angle, offset)))
        eta = self.eta(gap, angle, offset)
        if np.any(eta == 0):
            raise QuadratureError("radial integral along a singular direction of the integrand")
        vals, err = radial_integral(self.integrand, gap.ravel(), angle.ravel(), eta.ravel(),
                                    offset.ravel(), tol=self.tol)
        z = (1.0 - gap.ravel()) * np.exp(1j * angle.ravel()) * np.exp(1j * offset.ravel())
        return (z * vals).reshape(gap.shape), (np.abs(z) * err).reshape(gap.shape)

    def evaluate(self, gap, angle, offset=0.0):
        return self.evaluate_with_error(gap, angle, offset)[0]

    def boundary_values(self, mesh, mode: str = "trace"):
        anchors, offsets = mesh.anchors, mesh.offsets
        if mode == "radial":
            return self.evaluate(0.0, anchors, offsets)
        if mode != "trace":
            raise ValueError(f"unknown boundary mode {mode!r}")
        # d/dt h(e^{it}) = F(e^{it}) i e^{it}
        rot = np.exp(1j * anchors) * np.exp(1j * offsets)
        dh = self.integrand(0.0, anchors, offsets) * 1j * rot
        C = cumulative_integral(mesh, dh)
        n = mesh.order
        pins = np.array([start * n if side == "L" else stop * n - 1 for start, stop, side in mesh.pieces], dtype=int)
        if pins.size == 0:
            return np.zeros(0, dtype=complex)
        h_pin = self.evaluate(0.0, anchors[pins], offsets[pins])
        out = np.empty(mesh.size, dtype=complex)
        for (start, stop, _), pin, hp in zip(mesh.pieces, pins, h_pin):
            sl = slice(start * n, stop * n)
            out[sl] = hp + (C[sl] - C[pin])
        return out


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.size + b.size - 1
    if min(a.size, b.size) < 64:
        return np.convolve(a, b)
    m = 1 << (n - 1).bit_length()
    return np.fft.ifft(np.fft.fft(a, m) * np.fft.fft(b, m))[:n]


def apply_volterra_coeff(g: AnalyticFn, f: AnalyticFn) -> AnalyticFn:
    """``T_g f`` by termwise integration: ``h_k = (1/k) sum_{n+m=k-1} f_n g'_m``.

    Polynomial pairs give the exact product.  Otherwise the result keeps the
    smallest degree among the truncated inputs, since higher coefficients
    would be missing contributions.  When both inputs have closed forms the
    result carries a :class:`VolterraForm` for boundary work.
    """
    gp = g.coeffs[1:] * np.arange(1, g.coeffs.size) if g.coeffs.size > 1 else np.zeros(1, complex)
    prod = _convolve(f.coeffs, gp) if gp.size else np.zeros(1, complex)
    exact = f.exact and g.exact
    N = prod.size if exact else min(x.degree for x in (f, g) if not x.exact)
    h = np.zeros(N + 1, dtype=complex)
    m = min(N, prod.size)
    h[1:m + 1] = prod[:m] / np.arange(1, m + 1)
    if exact:
        form = PolynomialForm(h)
    elif f.boundary_capable() and g.boundary_capable() and g.boundary_form().derivative() is not None:
        form = VolterraForm(g.boundary_form().derivative(), f.boundary_form())
    else:
        form = None
    label = f"T[{g.label or 'g'}]({f.label or 'f'})"
    return AnalyticFn(h, form, exact, label, {"g": g, "f": f})


def volterra_form(g: AnalyticFn, f: AnalyticFn) -> VolterraForm:
    """Boundary-capable form of ``T_g f`` without building coefficients."""
    return VolterraForm(_derivative_form(g), _form(f))


def volterra_fn(g: AnalyticFn, f: AnalyticFn) -> AnalyticFn:
    """``T_g f`` as a function carrying only its closed form (no coefficients).

    Used along candidate paths where the coefficients would be discarded.
    """
    return AnalyticFn(np.zeros(1, complex), volterra_form(g, f), False,
                      f"T[{g.label or 'g'}]({f.label or 'f'})", {"g": g, "f": f, "form_only": True})


def apply_volterra_quad(g: AnalyticFn, f: AnalyticFn, z, tol: float = 1e-12) -> complex:
    """``T_g f(z)`` by radial quadrature ``z int_0^1 f(sz) g'(sz) ds``."""
    a = z if isinstance(z, DiscPoint) else None
    if a is None:
        z = complex(z)
        if abs(z) > 1.0:
            raise ValueError("point outside the closed disc")
        a = DiscPoint(max(0.0, 1.0 - abs(z)), math.atan2(z.imag, z.real) if z != 0 else 0.0)
    if a.gap == 1.0:
        return 0j
    form = volterra_form(g, f)
    try:
        val, err = form.evaluate_with_error(a.gap, a.angle)
    except QuadratureError as exc:
        raise ValueError(f"z lies on a singular ray of the integrand: {exc}") from None
    val, err = complex(val), float(err)
    if not math.isfinite(abs(val)):
        raise ValueError("z lies on a singular ray of the integrand")
    if err > max(tol, tol * abs(val)) * 1e3:
        raise QuadratureError(f"radial quadrature error {err:.3g} exceeds tolerance {tol:.3g}")
    return val


@dataclass
class VolterraBackendReport:
    max_abs_discrepancy: float
    sample_points: list
    discrepancies: list = field(default_factory=list)


def volterra_consistency(g: AnalyticFn, f: AnalyticFn, points) -> VolterraBackendReport:
    """Largest ``|coefficient backend - quadrature backend|`` over ``points``."""
    points = [complex(z) for z in points]
    if not points:
        return VolterraBackendReport(0.0, [], [])
    h = apply_volterra_coeff(g, f)
    rmax = max(abs(z) for z in points)
    if not h.exact and rmax > h.r_eval:
        raise ValueError(f"points reach |z| = {rmax:.6g} beyond the series validity radius {h.r_eval:.6g}")
    coeff_vals = h.series(np.array(points))
    quad_vals = np.array([apply_volterra_quad(g, f, z) for z in points])
    d = np.abs(coeff_vals - quad_vals)
    return VolterraBackendReport(float(d.max()), points, d.tolist())


# ---------------------------------------------------------------------------
# Aleman-Cima ratio


@dataclass
class AlemanCimaRatio:
    """``||g o sigma_a - g(a)||_t^t / ||T_g f_a||_p^t``; ``ratio`` is None when undefined."""

    a: DiscPoint
    p: float
    t: float
    numerator: float
    denominator: float
    ratio: float | None
    reason: str = ""


def _default_t(p, t):
    t = p / 4.0 if t is None else float(t)
    if not (0.0 < t < p / 2.0):
        raise ValueError(f"exponent t must satisfy 0 < t < p/2, got t={t}, p={p}")
    return t


def aleman_cima_ratio(g: AnalyticFn, a, p: float, t: float | None = None,
                      N: int | None = None) -> AlemanCimaRatio:
    a = disc_point(a)
    t = _default_t(p, t)
    f = make_test_function(a, p, N or max(64, g.degree))
    Tf = apply_volterra_coeff(g, f)
    den = hardy_norm(Tf, p).value ** t
    num = oscillation(g, a, q=t).value ** t
    if den < DENOMINATOR_FLOOR:
        return AlemanCimaRatio(a, p, t, num, den, None, "denominator below 1e-14: T_g f_a vanishes")
    return AlemanCimaRatio(a, p, t, num, den, num / den)


@dataclass
class RatioSweep:
    p: float
    t: float
    points: list
    ratios: list

    @property
    def max_ratio(self) -> float:
        vals = [r for r in self.ratios if r is not None]
        return max(vals) if vals else math.nan


def sweep_grid(rays: int, half_steps: bool, r_max: float = 0.999) -> list[DiscPoint]:
    """Rays times radii ``1 - 2**-j`` (``j`` in steps of 1 or 1/2) with ``|a| <= r_max``."""
    step = 0.5 if half_steps else 1.0
    pts = []
    j = step
    while 1.0 - 2.0 ** -j <= r_max:
        for k in range(rays):
            pts.append(DiscPoint(2.0 ** -j, math.remainder(2 * math.pi * k / rays, 2 * math.pi)))
        j += step
    pts.insert(0, DiscPoint(1.0, 0.0))
    return pts


def aleman_cima_sweep(g: AnalyticFn, p: float, t: float | None = None, grid=None) -> RatioSweep:
    t = _default_t(p, t)
    grid = sweep_grid(8, False) if grid is None else grid
    ratios = [aleman_cima_ratio(g, a, p, t).ratio for a in grid]
    return RatioSweep(p, t, list(grid), ratios)


# ---------------------------------------------------------------------------
# norm-limit profile


@dataclass
class NormLimitProfile:
    """``||T_g f_{a_k}||_p`` along a path with the limit estimate ``c_hat``.

    ``c_hat`` is the maximum over the last quarter of the profile and
    ``c_hat_prev`` the same window shifted back one point; the profile is
    ``stable`` when the two differ by less than 1 % (relative) and ``c_hat``
    is positive.
    """

    path: CandidateSequence
    p: float
    values: list
    errors: list
    c_hat: float
    c_hat_prev: float
    stable: bool

    @property
    def points(self):
        return list(self.path.points)

    def rows(self):
        return [(f"{a.gap:.17g}", v, e) for a, v, e in zip(self.path.points, self.values, self.errors)]


STABILITY_RTOL = 0.01
C_HAT_FLOOR = 1e-12


def last_quartile_max(values) -> float:
    v = list(values)
    if not v:
        return 0.0
    w = max(1, len(v) // 4)
    return max(v[-w:])


def c_hat_estimate(values):
    """``(c_hat, c_hat_prev, stable)`` for a norm profile.

    ``c_hat_prev`` slides the same-width window back by one point, so a
    profile still decaying never looks stable.
    """
    values = list(values)
    w = max(1, len(values) // 4)
    c = max(values[-w:]) if values else 0.0
    prev = max(values[-w - 1:-1]) if len(values) > w else math.nan
    stable = (c > C_HAT_FLOOR and math.isfinite(prev) and abs(c - prev) < STABILITY_RTOL * c)
    return c, prev, bool(stable)


def transformed_norm(g: AnalyticFn, a: DiscPoint, p: float) -> NormEstimate:
    """``||T_g f_a||_p`` from the boundary trace of the closed forms."""
    f = make_test_function(a, p, 1)
    if g.degree == 0 or not np.any(g.coeffs[1:]):
        return NormEstimate(0.0, 0, 0.0)
    if not g.boundary_capable():
        return hardy_norm(apply_volterra_coeff(g, make_test_function(a, p, g.degree)), p)
    return hardy_norm(volterra_fn(g, f), p)


def normlimit_profile(g: AnalyticFn, p: float, path: CandidateSequence) -> NormLimitProfile:
    if len(path) == 0:
        raise ValueError("empty path")
    if not g.boundary_capable():
        r = 1.0 - path.points[-1].gap
        if g.tail_bound(r) > 1e-12 and r > g.r_eval:
            raise ValueError(f"truncation degree {g.degree} insufficient for |a| = {r:.6g}")
    ests = [transformed_norm(g, a, p) for a in path.points]
    vals = [e.value for e in ests]
    c, prev, stable = c_hat_estimate(vals)
    return NormLimitProfile(path, p, vals, [e.error_bound for e in ests], c, prev, stable)
