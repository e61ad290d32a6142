"""Drivers that check the decay statements about test functions numerically.

Each driver measures a sequence of boundary masses and wraps it in a
:class:`DecaySequenceReport`, which asks for more than a small final value:
the tail of the sequence must also be monotone.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .disc import (
    AnalyticFn,
    CandidateSequence,
    DiscPoint,
    SymbolSpec,
    geometric_path,
    linear_combination,
    make_symbol,
    make_test_function,
)
from .norms import Arc, NormEstimate, Region, arc_integral, bmoa_seminorm, boundary_integral, standard_grid
from .quadrature import QuadratureError
from .volterra import volterra_form

MASS_THRESHOLD = 1e-3
LOCALIZATION_THRESHOLD = 5e-2
LOCALIZATION2_THRESHOLD = 1e-2
MAX_FAILURE_FRACTION = 0.01
# relative slack when testing monotonicity of measured values
MONOTONE_RTOL = 1e-9
MONOTONE_ATOL = 1e-15


@dataclass
class DecaySequenceReport:
    """A measured sequence that should tend to 0.

    ``monotone_from`` is the first index from which the values never
    increase (up to round-off); the sequence counts as eventually decreasing
    when that index lies in the first half.
    """

    labels: list
    values: list
    eventually_decreasing: bool
    final_value: float
    threshold: float
    passed: bool
    monotone_from: int = 0
    errors: list = field(default_factory=list)
    name: str = ""

    @classmethod
    def build(cls, labels, values, threshold, errors=None, name=""):
        labels, values = list(labels), [float(v) for v in values]
        if len(labels) != len(values):
            raise ValueError("labels and values differ in length")
        if not values:
            raise ValueError("empty sequence")
        start = monotone_start(values)
        eventually = start <= len(values) // 2
        final = values[-1]
        return cls(labels, values, eventually, final, threshold,
                   bool(eventually and final < threshold), start,
                   list(errors) if errors is not None else [0.0] * len(values), name)

    def rows(self):
        return list(zip(self.labels, self.values, self.errors))


def monotone_start(values) -> int:
    """Smallest ``i`` such that ``values[i:]`` is non-increasing (with round-off slack)."""
    i = len(values) - 1
    while i > 0 and values[i] <= values[i - 1] * (1 + MONOTONE_RTOL) + MONOTONE_ATOL:
        i -= 1
    return i


def _check_path(path: CandidateSequence, minimum: int = 4):
    if len(path) < minimum:
        raise ValueError(f"path too short: {len(path)} points, need at least {minimum}")


def default_mass_path(omega_arg: float = 0.0) -> CandidateSequence:
    return geometric_path(20, 2.0, omega_arg)


def verify_masslemma_i(p: float, path: CandidateSequence | None = None, eps: float = math.pi / 2,
                       threshold: float = MASS_THRESHOLD) -> DecaySequenceReport:
    """Mass of ``f_{a_k}`` outside ``A_eps`` along the path."""
    path = default_mass_path() if path is None else path
    _check_path(path)
    arc = Arc(path.omega_arg, eps)
    ests = [arc_integral(make_test_function(a, p, 1), p, arc.complement()) for a in path.points]
    return DecaySequenceReport.build([a.gap for a in path.points], [e.value for e in ests], threshold,
                                     [e.error_bound for e in ests], "masslemma-i")


def default_eps_schedule(j_max: int = 20) -> list[float]:
    return [math.pi * 2.0 ** -j for j in range(1, j_max + 1)]


def verify_masslemma_ii(p: float, a=0.9, eps_schedule=None, threshold: float = MASS_THRESHOLD,
                        center: float | None = None) -> DecaySequenceReport:
    """Mass of the fixed ``f_a`` inside shrinking arcs ``A_eps`` around ``center``."""
    a = a if isinstance(a, DiscPoint) else DiscPoint.from_complex(a)
    eps_schedule = default_eps_schedule() if eps_schedule is None else list(eps_schedule)
    if any(np.diff(eps_schedule) >= 0):
        raise ValueError("epsilon schedule must decrease")
    center = a.angle if center is None else center
    f = make_test_function(a, p, 1)
    ests = [arc_integral(f, p, Arc(center, e)) for e in eps_schedule]
    return DecaySequenceReport.build(eps_schedule, [e.value for e in ests], threshold,
                                     [e.error_bound for e in ests], "masslemma-ii")


# ---------------------------------------------------------------------------
# localization of T_g f_a


def localization_half_width(a: DiscPoint, p: float) -> float:
    """Half-width ``(1 - |a|)^{1/(2(2+p))}`` of ``I(a)``, capped at pi."""
    return min(math.pi, a.gap ** (1.0 / (2.0 * (2.0 + p))))


def localization_arc(a: DiscPoint, p: float) -> Arc:
    return Arc(a.angle, localization_half_width(a, p))


@dataclass
class _FailureCounter:
    nodes: int = 0
    failed: int = 0


def _volterra_mass(g: AnalyticFn, a: DiscPoint, p: float, region, mode: str, counter: _FailureCounter,
                   rel_tol: float = 1e-9) -> NormEstimate:
    """``int_region |T_g f_a|^p dm`` with per-node radial quadrature or the trace."""
    form = volterra_form(g, make_test_function(a, p, 1))

    def density(mesh):
        if mode == "radial":
            vals, err = form.evaluate_with_error(0.0, mesh.anchors, mesh.offsets)
            bad = err > 1e-8 * np.maximum(1.0, np.abs(vals))
            counter.nodes += vals.size
            counter.failed += int(bad.sum())
        else:
            vals = form.boundary_values(mesh)
        return np.abs(vals) ** p

    return boundary_integral(density, region.intervals(), form.foci(), rel_tol=rel_tol)


def _is_constant(g: AnalyticFn) -> bool:
    return g.coeffs.size <= 1 or not np.any(g.coeffs[1:])


def _run_masses(g, p, path, regions, mode):
    counter = _FailureCounter()
    vals, errs = [], []
    for a, region in zip(path.points, regions):
        if _is_constant(g):
            vals.append(0.0)
            errs.append(0.0)
            continue
        est = _volterra_mass(g, a, p, region, mode, counter)
        vals.append(est.value)
        errs.append(est.error_bound)
    if counter.nodes and counter.failed > MAX_FAILURE_FRACTION * counter.nodes:
        raise QuadratureError(f"radial quadrature missed its tolerance at {counter.failed} "
                              f"of {counter.nodes} boundary points")
    return vals, errs


def default_localization_path(omega_arg: float = 0.0) -> CandidateSequence:
    return geometric_path(8, 4.0, omega_arg)


def verify_localization(g: AnalyticFn, p: float, path: CandidateSequence | None = None,
                        threshold: float = LOCALIZATION_THRESHOLD, mode: str = "radial") -> DecaySequenceReport:
    """Mass of ``T_g f_{a_k}`` outside the shrinking arcs ``I(a_k)``."""
    path = default_localization_path() if path is None else path
    _check_path(path)
    regions = [localization_arc(a, p).complement() for a in path.points]
    vals, errs = _run_masses(g, p, path, regions, mode)
    return DecaySequenceReport.build([a.gap for a in path.points], vals, threshold, errs, "localization")


def verify_localization2(g: AnalyticFn, p: float, path: CandidateSequence | None = None,
                         eps: float = math.pi / 2, k_index: int = 0, eps_schedule=None,
                         threshold: float = LOCALIZATION2_THRESHOLD, mode: str = "radial",
                         mode_ii: str = "trace"):
    """Part (i): mass of ``T_g f_k`` off ``A_eps`` along the path.
    Part (ii): mass of ``T_g f_{k_index}`` on shrinking ``A_eps``.

    Part (ii) integrates right up to the singular direction, where per-node
    radial quadrature is slow; it defaults to the boundary trace.
    """
    path = default_localization_path() if path is None else path
    _check_path(path)
    arc = Arc(path.omega_arg, eps)
    vals, errs = _run_masses(g, p, path, [arc.complement()] * len(path), mode)
    part_i = DecaySequenceReport.build([a.gap for a in path.points], vals, threshold, errs, "localization2-i")

    schedule = default_eps_schedule() if eps_schedule is None else list(eps_schedule)
    if any(np.diff(schedule) >= 0):
        raise ValueError("epsilon schedule must decrease")
    a = path.points[k_index]
    fixed = CandidateSequence(path.omega_arg, (a,))
    vals2, errs2 = [], []
    for e in schedule:
        v, er = _run_masses(g, p, fixed, [Region(Arc(path.omega_arg, e).intervals(), path.omega_arg)], mode_ii)
        vals2.append(v[0])
        errs2.append(er[0])
    part_ii = DecaySequenceReport.build(schedule, vals2, threshold, errs2, "localization2-ii")
    return part_i, part_ii


def _circular_distance(x: float, y: float) -> float:
    return abs(math.remainder(x - y, 2 * math.pi))


def localization_containment_index(path: CandidateSequence, p: float, eps: float) -> int | None:
    """First index after which ``I(a_k)`` lies inside ``A_eps`` for good.

    Uses the sufficient condition of the containment argument: half-width of
    ``I(a_k)`` below ``eps/2`` and ``|arg a_k - arg omega| < eps/2``.
    Returns None when the condition fails at the last point.
    """
    ok = [localization_half_width(a, p) < eps / 2 and _circular_distance(a.angle, path.omega_arg) < eps / 2
          for a in path.points]
    if not ok or not ok[-1]:
        return None
    k = len(ok) - 1
    while k > 0 and ok[k - 1]:
        k -= 1
    return k


def arc_contained(inner: Arc, outer: Arc) -> bool:
    return _circular_distance(inner.center, outer.center) + inner.half_width <= outer.half_width


# ---------------------------------------------------------------------------
# Carleson windows and the h_n sequence


def carleson_base_point(length: float, center: float = 0.0) -> DiscPoint:
    """Base point ``(1 - |I|) e^{i center}`` of the window over an arc of normalized length ``|I|``."""
    if not (0.0 < length < 1.0):
        raise ValueError("normalized arc length must lie in (0, 1)")
    return DiscPoint(length, center)


def carleson_arc(length: float, center: float = 0.0) -> Arc:
    """Arc of normalized length ``|I|`` (half-width ``pi |I|``)."""
    return Arc(center, math.pi * length)


def in_carleson_window(z, length: float, center: float = 0.0) -> bool:
    """``z`` in ``S(I) = {r e^{it}: 1 - |I| <= r < 1, t in I}``."""
    z = complex(z)
    r = abs(z)
    return (1.0 - length <= r < 1.0) and bool(carleson_arc(length, center).contains(math.atan2(z.imag, z.real)))


def squared_schedule(n_arcs: int = 7, first: float = 0.25) -> list[float]:
    out = [first]
    for _ in range(n_arcs - 1):
        out.append(out[-1] ** 2)
    return out


def h_function(u_next: DiscPoint, u: DiscPoint, N: int = 64) -> AnalyticFn:
    """``log(1 - conj(u_next) z) - log(1 - conj(u) z)``."""
    fs = [make_symbol(SymbolSpec.carleson(u_next), N), make_symbol(SymbolSpec.carleson(u), N)]
    return linear_combination([1.0, -1.0], fs)


def h_l2_norm(u_next: DiscPoint, u: DiscPoint) -> float:
    """``||h||_2`` from the Parseval sum ``sum_k |x^k - y^k|^2 / k^2`` in closed form.

    With ``x = conj(u_next)``, ``y = conj(u)`` the sum is
    ``Li2(|x|^2) - 2 Re Li2(x conj(y)) + Li2(|y|^2)``, evaluated in extended
    precision because the three terms nearly cancel.
    """
    digits = int(max(30, 2.5 * max(-math.log10(u_next.gap), -math.log10(u.gap)) + 30))
    with mpmath.workdps(digits):
        rx, ry = 1 - mpmath.mpf(u_next.gap), 1 - mpmath.mpf(u.gap)
        phase = mpmath.expj(mpmath.mpf(u.angle) - mpmath.mpf(u_next.angle))
        s = (mpmath.polylog(2, rx * rx) + mpmath.polylog(2, ry * ry)
             - 2 * mpmath.re(mpmath.polylog(2, rx * ry * phase)))
        return float(mpmath.sqrt(max(s, 0)))


def h_l2_truncated(u_next: DiscPoint, u: DiscPoint, N: int) -> float:
    """The same Parseval sum cut at degree ``N`` (for cross-checks)."""
    k = np.arange(1, N + 1)
    x, y = u_next.conj, u.conj
    return float(np.sqrt(np.sum(np.abs(x ** k - y ** k) ** 2 / k.astype(float) ** 2)))


@dataclass
class LeibovStats:
    arcs: list
    stars: list
    l2s: list
    star_ratio: float
    stars_q: dict = field(default_factory=dict)
    grid_levels: int = 0


def leibov_grid(smallest_gap: float, rays: int = 8) -> list[DiscPoint]:
    """Standard grid deep enough to reach the smallest base point."""
    levels = int(math.ceil(-math.log2(smallest_gap))) + 2
    return standard_grid(rays, levels)


def leibov_sequence_stats(arc_lengths=None, p_grid=(2.0,), theta: float = 0.0, rays: int = 8) -> LeibovStats:
    """``||h_n||_2`` (exact) and ``||h_n||_*`` (grid BMOA seminorm) for ``h_n = f_{n+1} - f_n``.

    ``arc_lengths`` are normalized lengths ``|I_n|``, strictly decreasing;
    ``p_grid`` lists the exponents of the oscillation norm (2 is the BMOA
    seminorm; other values give the comparable variants).
    """
    arcs = squared_schedule() if arc_lengths is None else [float(x) for x in arc_lengths]
    if len(arcs) < 2:
        raise ValueError("need at least two arcs")
    if any(b >= a for a, b in zip(arcs, arcs[1:])) or arcs[-1] <= 0:
        raise ValueError("arc lengths must be strictly decreasing and positive")
    qs = sorted(set(float(q) for q in p_grid) | {2.0})
    us = [carleson_base_point(s, theta) for s in arcs]
    l2s, stars_q = [], {q: [] for q in qs}
    for u, u_next in zip(us, us[1:]):
        l2s.append(h_l2_norm(u_next, u))
        h = h_function(u_next, u)
        # h has no structure below its deeper base point
        grid = leibov_grid(u_next.gap, rays)
        for q in qs:
            stars_q[q].append(bmoa_seminorm(h, grid, q).value)
    stars = stars_q[2.0]
    ratio = max(stars) / min(stars) if min(stars) > 0 else math.inf
    return LeibovStats(arcs, stars, l2s, ratio, {q: v for q, v in stars_q.items() if q != 2.0},
                       len(leibov_grid(arcs[-1], rays)) // rays)


def h_zero_norms(length: float, theta: float = 0.0) -> tuple[float, float]:
    """Degenerate case ``I_{n+1} = I_n``: both statistics of ``h = 0``."""
    u = carleson_base_point(length, theta)
    h = h_function(u, u)
    return h_l2_norm(u, u), bmoa_seminorm(h, standard_grid(8, 4)).value
