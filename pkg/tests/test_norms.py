import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvl.disc import DiscPoint, SymbolSpec, constant, make_symbol, make_test_function
from hvl.norms import (
    Arc,
    Region,
    arc_integral,
    bloch_seminorm,
    bmoa_seminorm,
    hardy_norm,
    harmonic_measure,
    lmoa_seminorm,
    lp_norm,
    oscillation,
    radius_profile,
    standard_grid,
    vmoa_defect,
)

P_SET = (1.0, 4 / 3, 2.0, 4.0)
LOG1 = make_symbol(SymbolSpec.log1())
MONO1 = make_symbol(SymbolSpec.monomial(1))


def poisson_oracle(a: complex, lo: float, hi: float) -> float:
    """Harmonic measure of (lo, hi) at a by adaptive mpmath quadrature."""
    with mpmath.workdps(30):
        a = mpmath.mpc(a)
        r2 = abs(a) ** 2

        def P(t):
            return (1 - r2) / abs(1 - mpmath.conj(a) * mpmath.expj(t)) ** 2

        # split at the peak so the quadrature sees it
        peak = float(mpmath.arg(a))
        pts = [lo] + [peak + 2 * math.pi * k for k in (-1, 0, 1) if lo < peak + 2 * math.pi * k < hi] + [hi]
        return float(mpmath.quad(P, pts) / (2 * mpmath.pi))


# --- lp ---------------------------------------------------------------------


def test_lp_norm_examples():
    assert lp_norm([1, 0, 0], 3.7) == 1
    assert lp_norm([1, 1], 1) == 2
    assert lp_norm([3, 4], 2) == pytest.approx(5, rel=1e-15)
    assert lp_norm([1e200, 1e200], 2) == pytest.approx(math.sqrt(2) * 1e200)
    with pytest.raises(ValueError):
        lp_norm([1], 0.5)


# --- arcs -------------------------------------------------------------------


def test_arc_membership_and_validation():
    arc = Arc(0.5, 0.25)
    assert arc.contains(0.5 + 0.2)
    assert not arc.contains(0.5 + 0.25)
    assert Arc(3.0, 0.5).contains(-3.0)  # wraps through pi
    assert arc.measure == pytest.approx(0.25 / math.pi)
    with pytest.raises(ValueError):
        Arc(0.0, 0.0)
    with pytest.raises(ValueError):
        Arc(0.0, 4.0)
    assert Arc(1.0, math.pi).complement().intervals() == []


# --- hardy_norm -------------------------------------------------------------


@pytest.mark.parametrize("k", [0, 1, 7, 50])
@pytest.mark.parametrize("p", P_SET)
def test_monomial_norm_is_one(k, p):
    assert hardy_norm(make_symbol(SymbolSpec.monomial(k)), p).value == pytest.approx(1.0, abs=1e-12)


def test_parseval_one_plus_z():
    f = make_symbol(SymbolSpec.polynomial([1, 1]))
    assert hardy_norm(f, 2).value == pytest.approx(math.sqrt(2), rel=1e-12)
    assert hardy_norm(f, 2, method="trapezoid").value == pytest.approx(math.sqrt(2), rel=1e-12)


def test_parseval_cross_check():
    rng = np.random.default_rng(3)
    c = rng.normal(size=30) + 1j * rng.normal(size=30)
    f = make_symbol(SymbolSpec.polynomial(c))
    assert hardy_norm(f, 2).value == pytest.approx(np.linalg.norm(c), rel=1e-9)
    # Log1 has sum 1/n^2 = pi^2/6 and a boundary singularity
    assert hardy_norm(LOG1, 2).value == pytest.approx(math.pi / math.sqrt(6), rel=1e-9)
    # CarlesonLog(u): sum |u|^{2n}/n^2 = Li_2(|u|^2)
    u = 0.95
    assert hardy_norm(make_symbol(SymbolSpec.carleson(u)), 2).value == pytest.approx(
        math.sqrt(float(mpmath.polylog(2, u * u))), rel=1e-9)


def test_series_only_function_uses_interior_radius():
    n = np.arange(4097)
    c = 1.0 / (n + 1.0) ** 2
    f = make_symbol(SymbolSpec.custom(c))
    # largest schedule radius 1 - 2^-j inside 1 - 10/4096
    r = 1 - 2.0 ** -8
    expected = math.sqrt(np.sum(c ** 2 * r ** (2 * n)))
    assert hardy_norm(f, 2).value == pytest.approx(expected, rel=1e-9)
    with pytest.raises(ValueError):
        hardy_norm(make_symbol(SymbolSpec.custom([1, 1])), 2)


@pytest.mark.parametrize("p", P_SET)
@pytest.mark.parametrize("a", [0.0, 0.5, -0.9j, DiscPoint(2.0 ** -10, 2.0), DiscPoint(2.0 ** -200, -1.0)])
def test_test_function_norm(p, a):
    est = hardy_norm(make_test_function(a, p), p)
    assert est.value == pytest.approx(1.0, abs=1e-9)
    assert est.converged


def test_hardy_norm_errors():
    with pytest.raises(ValueError):
        hardy_norm(LOG1, 0.9)
    with pytest.raises(ValueError):
        hardy_norm(make_symbol(SymbolSpec.custom([1, 2])), 2, r=1.0)
    with pytest.raises(ValueError):
        hardy_norm(LOG1, 2, method="simpson")


@pytest.mark.parametrize("fn", [LOG1, MONO1, make_symbol(SymbolSpec.carleson(0.7 + 0.3j)),
                                make_test_function(0.8j, 3.0), make_symbol(SymbolSpec.polynomial([1, -2, 0.5j]))],
                         ids=["log1", "mono1", "carleson", "testfn", "poly"])
@pytest.mark.parametrize("p", [1.0, 2.0, 4.0])
def test_radius_monotonicity(fn, p):
    radii = [1 - 2.0 ** -j for j in range(1, 9)]
    prof = radius_profile(fn, p, radii)
    assert all(b >= a * (1 - 1e-12) for a, b in zip(prof, prof[1:]))


# --- arc masses -------------------------------------------------------------


@pytest.mark.parametrize("eps", [1e-6, 0.1, 1.0, math.pi])
def test_constant_arc_mass(eps):
    assert arc_integral(constant(1.0), 3.0, Arc(0.3, eps)).value == pytest.approx(eps / math.pi, rel=1e-12)


@pytest.mark.parametrize("p", P_SET)
def test_full_circle_mass_is_one(p):
    assert arc_integral(make_test_function(0.99j, p), p, Arc(0.0, math.pi)).value == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("a,center,eps", [(0.5, 0.0, 0.5), (0.9j, 0.0, 1.0), (-0.99, 3.0, 0.3),
                                           (0.3 + 0.4j, -2.5, 2.0), (0.999, 0.01, 1e-3)])
def test_harmonic_measure_closed_form(a, center, eps):
    assert harmonic_measure(a, Arc(center, eps)) == pytest.approx(
        poisson_oracle(a, center - eps, center + eps), abs=1e-13)


def random_cases(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        gap = 10.0 ** rng.uniform(-8, 0)
        a = DiscPoint(gap, rng.uniform(-math.pi, math.pi))
        # arcs range from tiny to nearly the whole circle, some near the peak
        center = a.angle + rng.normal(scale=3 * gap) if rng.random() < 0.5 else rng.uniform(-math.pi, math.pi)
        eps = 10.0 ** rng.uniform(-6, math.log10(math.pi))
        yield a, Arc(math.remainder(center, 2 * math.pi), eps), float(rng.choice(P_SET))


def test_harmonic_measure_oracle_match():
    worst = 0.0
    for a, arc, p in random_cases(100, 11):
        mass = arc_integral(make_test_function(a, p), p, arc).value
        worst = max(worst, abs(mass - harmonic_measure(a, arc)))
    assert worst < 1e-8


def test_arc_mass_p_independent():
    for a, arc, _ in random_cases(25, 12):
        masses = [arc_integral(make_test_function(a, p), p, arc).value for p in P_SET]
        assert max(masses) - min(masses) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.floats(-math.pi, math.pi), st.lists(st.floats(0.05, 1.0), min_size=2, max_size=6),
       st.sampled_from(["log1", "testfn", "carleson"]), st.sampled_from(P_SET))
def test_arc_partition_additivity(start, weights, kind, p):
    f = {"log1": LOG1, "testfn": make_test_function(0.97 * np.exp(0.3j), p),
         "carleson": make_symbol(SymbolSpec.carleson(0.99j))}[kind]
    widths = np.array(weights) / sum(weights) * math.pi  # half-widths summing to pi
    edges = start + np.concatenate([[0.0], np.cumsum(2 * widths)])
    parts = [Arc(math.remainder(lo + w, 2 * math.pi), w) for lo, w in zip(edges, widths)]
    total = sum(arc_integral(f, p, arc).value for arc in parts)
    assert total == pytest.approx(hardy_norm(f, p).value ** p, rel=1e-9)


@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_complement_consistency(p):
    f = make_test_function(DiscPoint(1e-5, 0.2), p)
    for eps in (1e-4, 0.1, 2.0):
        arc = Arc(0.2, eps)
        inside = arc_integral(f, p, arc).value
        outside = arc_integral(f, p, arc.complement()).value
        assert inside + outside == pytest.approx(1.0, abs=1e-6)


def test_arc_integral_rejects_series_only():
    with pytest.raises(ValueError):
        arc_integral(make_symbol(SymbolSpec.custom([1, 2])), 2, Arc(0, 1))


# --- Möbius seminorms -------------------------------------------------------


def test_oscillation_matches_mpmath():
    a = 0.5
    with mpmath.workdps(30):
        def integrand(t):
            z = mpmath.expj(t)
            w = (a - z) / (1 - a * z)
            return abs(-mpmath.log(1 - w) + mpmath.log(1 - a)) ** 2

        ref = math.sqrt(float(mpmath.quad(integrand, [-mpmath.pi, 0, mpmath.pi]) / (2 * mpmath.pi)))
    assert oscillation(LOG1, a).value == pytest.approx(ref, rel=1e-10)


def test_oscillation_at_origin_is_centered_norm():
    assert oscillation(LOG1, 0.0).value == pytest.approx(math.pi / math.sqrt(6), rel=1e-10)


def test_bmoa_constant_is_zero():
    assert bmoa_seminorm(constant(3.0), standard_grid(4, 4)).value == 0


def test_bmoa_monomial_closed_form():
    grid = standard_grid(8, 10)
    est = bmoa_seminorm(MONO1, grid)
    expected = [math.sqrt(a.gap * (2 - a.gap)) for a in grid]
    assert np.allclose(est.values, expected, rtol=1e-9)
    assert est.value == pytest.approx(math.sqrt(0.75), rel=1e-9)


def test_bmoa_log1_refinement_stable():
    coarse = bmoa_seminorm(LOG1, standard_grid(8, 12)).value
    fine = bmoa_seminorm(LOG1, standard_grid(8, 16)).value
    assert 2.0 < coarse <= fine
    assert (fine - coarse) / fine < 1e-3


def test_bmoa_q_comparability():
    """Ratios across q stay inside fixed intervals; Hölder orders them."""
    grid = standard_grid(4, 6)
    for g in (LOG1, MONO1, make_symbol(SymbolSpec.carleson(0.9))):
        base = np.array(bmoa_seminorm(g, grid, 2).values)
        r1 = np.array(bmoa_seminorm(g, grid, 1).values) / base
        r4 = np.array(bmoa_seminorm(g, grid, 4).values) / base
        assert np.all((0.2 <= r1) & (r1 <= 1 + 1e-12))
        assert np.all((1 - 1e-12 <= r4) & (r4 <= 5))


def test_vmoa_monomial_decays():
    radii = [1 - 2.0 ** -j for j in range(1, 13)]
    d = vmoa_defect(MONO1, radii)
    assert np.allclose(d, [math.sqrt(1 - r * r) for r in radii], rtol=1e-9)


def test_vmoa_constant_is_zero():
    assert vmoa_defect(constant(1.0), [0.5, 0.9]) == [0.0, 0.0]


def test_vmoa_log1_tail_bounded_below():
    radii = [DiscPoint(2.0 ** -j, 0.0) for j in range(1, 13)]
    d = vmoa_defect(LOG1, radii, rays=4)
    tail = d[-3:]
    assert min(tail) > 2.0
    # refining the radial schedule does not lower the tail
    finer = vmoa_defect(LOG1, [DiscPoint(2.0 ** -(j / 2), 0.0) for j in range(2, 25)], rays=4)
    assert min(finer[-6:]) == pytest.approx(min(tail), rel=2e-2)


def test_vmoa_rejects_bad_schedule():
    with pytest.raises(ValueError):
        vmoa_defect(LOG1, [0.9, 0.5])


def test_bloch_examples():
    assert bloch_seminorm(MONO1, [DiscPoint(1.0, 0.0)] + standard_grid(4, 4)).value == pytest.approx(1.0)
    assert bloch_seminorm(constant(2.0)).value == 0
    prev = 0.0
    for levels in (4, 8, 12, 16):
        v = bloch_seminorm(LOG1, standard_grid(8, levels)).value
        assert v == pytest.approx(2 - 2.0 ** -levels, rel=1e-12)
        assert v > prev
        prev = v


def test_lmoa_examples():
    assert lmoa_seminorm(constant(1.0), standard_grid(2, 3)).value == 0
    grid = standard_grid(8, 10)
    est = lmoa_seminorm(MONO1, grid)
    expected = max(math.log(2 / a.gap) * math.sqrt(a.gap * (2 - a.gap)) for a in grid)
    assert est.value == pytest.approx(expected, rel=1e-9)
    prof = lmoa_seminorm(LOG1, standard_grid(1, 10)).values
    assert all(b > a for a, b in zip(prof, prof[1:]))
