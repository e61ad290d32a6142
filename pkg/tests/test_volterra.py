import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvl.disc import DiscPoint, SymbolSpec, constant, evaluate, geometric_path, make_symbol, make_test_function
from hvl.norms import hardy_norm
from hvl.volterra import (
    aleman_cima_ratio,
    apply_volterra_coeff,
    apply_volterra_quad,
    c_hat_estimate,
    normlimit_profile,
    sweep_grid,
    volterra_consistency,
)

LOG1 = make_symbol(SymbolSpec.log1())


def mono(k, N=None):
    return make_symbol(SymbolSpec.monomial(k)) if N is None else make_symbol(SymbolSpec.monomial(k), N)


def interior_points(n, r_max, seed):
    rng = np.random.default_rng(seed)
    return list(r_max * np.sqrt(rng.random(n)) * np.exp(2j * math.pi * rng.random(n)))


# --- coefficient backend ----------------------------------------------------


def test_coefficient_examples():
    h = apply_volterra_coeff(mono(1, 4), constant(1.0))
    assert h.exact and np.allclose(h.coeffs[:3], [0, 1, 0]) and not np.any(h.coeffs[3:])
    h = apply_volterra_coeff(mono(2, 4), constant(1.0))
    assert np.allclose(h.coeffs[:4], [0, 0, 1, 0])
    h = apply_volterra_coeff(mono(1, 4), mono(1, 4))
    assert np.allclose(h.coeffs[:4], [0, 0, 0.5, 0])


def test_coefficient_backend_formula():
    rng = np.random.default_rng(0)
    fc = rng.normal(size=6) + 1j * rng.normal(size=6)
    gc = rng.normal(size=5) + 1j * rng.normal(size=5)
    h = apply_volterra_coeff(make_symbol(SymbolSpec.polynomial(gc)), make_symbol(SymbolSpec.polynomial(fc)))
    gp = np.polynomial.polynomial.polyder(gc)
    ref = np.polynomial.polynomial.polyint(np.polynomial.polynomial.polymul(fc, gp))
    assert np.allclose(h.coeffs[: ref.size], ref, rtol=0, atol=1e-14)


def test_truncated_result_keeps_smallest_degree():
    h = apply_volterra_coeff(make_symbol(SymbolSpec.log1(), 300), make_test_function(0.5, 2.0, 500))
    assert h.degree == 300


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=5), min_size=1, max_size=8),
       st.lists(st.complex_numbers(max_magnitude=5), min_size=1, max_size=8),
       st.lists(st.complex_numbers(max_magnitude=5), min_size=1, max_size=8),
       st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_linearity(gc, f1c, f2c, alpha, beta):
    g = make_symbol(SymbolSpec.polynomial(gc))
    f1, f2 = (make_symbol(SymbolSpec.polynomial(c)) for c in (f1c, f2c))
    combo = make_symbol(SymbolSpec.polynomial(
        alpha * np.pad(f1c, (0, 8 - len(f1c))) + beta * np.pad(f2c, (0, 8 - len(f2c)))))
    lhs = apply_volterra_coeff(g, combo).coeffs
    rhs1, rhs2 = apply_volterra_coeff(g, f1).coeffs, apply_volterra_coeff(g, f2).coeffs
    n = max(lhs.size, rhs1.size, rhs2.size)
    pad = lambda c: np.pad(c, (0, n - c.size))
    scale = 1 + np.max(np.abs(pad(rhs1))) * abs(alpha) + np.max(np.abs(pad(rhs2))) * abs(beta)
    assert np.max(np.abs(pad(lhs) - alpha * pad(rhs1) - beta * pad(rhs2))) <= 1e-13 * scale


@pytest.mark.parametrize("spec", [SymbolSpec.log1(), SymbolSpec.carleson(0.6 - 0.3j), SymbolSpec.monomial(3),
                                  SymbolSpec.polynomial([2, 1j, -0.5])])
def test_t_g_of_one_is_g_minus_g0(spec):
    g = make_symbol(spec, 512)
    h = apply_volterra_coeff(g, constant(1.0))
    expected = g.coeffs.copy()
    expected[0] = 0
    n = min(h.coeffs.size, expected.size)
    # (1/k) * (k c_k) can round in the last bits only
    assert np.allclose(h.coeffs[:n], expected[:n], rtol=5e-16, atol=0)


@pytest.mark.parametrize("spec", [SymbolSpec.log1(), SymbolSpec.carleson(0.9j), SymbolSpec.monomial(2)])
@pytest.mark.parametrize("a", [0.0, 0.5, 0.9 * cmath.exp(2j)])
def test_vanishes_at_origin(spec, a):
    g = make_symbol(spec)
    f = make_test_function(a, 2.0)
    assert apply_volterra_coeff(g, f).coeffs[0] == 0
    assert apply_volterra_quad(g, f, 0.0) == 0


# --- quadrature backend -----------------------------------------------------


def test_quad_examples():
    assert apply_volterra_quad(mono(1), constant(1.0), 0.5 + 0.5j) == pytest.approx(0.5 + 0.5j, abs=1e-14)
    assert apply_volterra_quad(LOG1, constant(1.0), -1.0) == pytest.approx(math.log(0.5), abs=1e-12)


def test_quad_boundary_point_matches_series_limit():
    f = make_test_function(0.9, 2.0)
    h = apply_volterra_coeff(LOG1, f)
    r = h.r_eval
    inner = apply_volterra_quad(LOG1, f, r * 1j)
    # at the validity radius the series is only good to its declared tail bound
    assert abs(inner - evaluate(h, r * 1j)) < h.tail_bound(r)
    assert abs(apply_volterra_quad(LOG1, f, 0.95j) - evaluate(h, 0.95j)) < 1e-12
    boundary = apply_volterra_quad(LOG1, f, 1j)
    assert math.isfinite(abs(boundary))
    # the trace is continuous; the gap 1 - r = 10/N moves it only slightly
    assert abs(boundary - inner) < 0.05


def test_quad_rejects_singular_ray():
    with pytest.raises(ValueError):
        apply_volterra_quad(LOG1, constant(1.0), 1.0)
    with pytest.raises(ValueError):
        apply_volterra_quad(LOG1, constant(1.0), 1.5)


# --- consistency ------------------------------------------------------------


def test_consistency_polynomials_exact():
    g = make_symbol(SymbolSpec.polynomial([1, 2, -1j, 0.25]))
    f = make_symbol(SymbolSpec.polynomial([0.5, 0, 3]))
    rep = volterra_consistency(g, f, interior_points(20, 1.0, 1))
    assert rep.max_abs_discrepancy < 1e-12


def test_consistency_log1():
    rep = volterra_consistency(LOG1, make_test_function(0.5, 2.0), interior_points(50, 0.95, 2))
    assert rep.max_abs_discrepancy < 1e-8
    assert len(rep.sample_points) == 50


def test_consistency_empty():
    assert volterra_consistency(LOG1, constant(1.0), []).max_abs_discrepancy == 0


def test_consistency_rejects_points_outside_validity():
    with pytest.raises(ValueError):
        volterra_consistency(make_symbol(SymbolSpec.log1(), 100), constant(1.0), [0.95])


# --- Aleman–Cima ratio ------------------------------------------------------


def test_aleman_cima_monomial_at_origin():
    r = aleman_cima_ratio(mono(1), 0.0, 2.0, 0.5)
    assert r.ratio == pytest.approx(1.0, rel=1e-9)


def test_aleman_cima_constant_undefined():
    r = aleman_cima_ratio(constant(2.0), 0.5, 2.0)
    assert r.ratio is None and "denominator" in r.reason


@pytest.mark.parametrize("t", [0.0, 1.0, 2.0])
def test_aleman_cima_rejects_t(t):
    with pytest.raises(ValueError):
        aleman_cima_ratio(LOG1, 0.5, 2.0, t)


def test_aleman_cima_ratio_matches_components():
    a = DiscPoint.from_complex(0.7j)
    r = aleman_cima_ratio(LOG1, a, 2.0)
    assert r.t == 0.5
    assert r.ratio == pytest.approx(r.numerator / r.denominator)
    assert 0 < r.ratio < 10


def test_sweep_grid_shapes():
    coarse, fine = sweep_grid(8, False), sweep_grid(16, True)
    assert coarse[0].gap == 1.0
    assert max(1 - a.gap for a in fine) <= 0.999
    assert len(fine) > 2 * len(coarse)


# --- norm-limit profile -----------------------------------------------------


def test_c_hat_estimate():
    c, prev, stable = c_hat_estimate([1, 2, 3, 3, 3, 3, 3, 3])
    assert (c, prev, stable) == (3, 3, True)
    c, prev, stable = c_hat_estimate([1.0 / k for k in range(1, 17)])
    assert not stable
    assert c_hat_estimate([0.0] * 8)[2] is False


def test_profile_monomial_decays():
    prof = normlimit_profile(mono(1), 2.0, geometric_path(16))
    assert all(b < a for a, b in zip(prof.values, prof.values[1:]))
    assert prof.values[-1] < 1e-2
    # ||z f_a||_2 decays like the H^2 mass of f_a near the point; compare with coefficients
    k = 5
    a = prof.points[k - 1]
    ref = hardy_norm(apply_volterra_coeff(mono(1), make_test_function(a, 2.0)), 2.0).value
    assert prof.values[k - 1] == pytest.approx(ref, rel=1e-9)


def test_profile_constant_is_zero():
    prof = normlimit_profile(constant(1.0), 2.0, geometric_path(8))
    assert prof.values == [0.0] * 8
    assert not prof.stable


def test_profile_log1_stabilizes():
    prof = normlimit_profile(LOG1, 2.0, geometric_path(16))
    assert prof.stable
    assert prof.c_hat > 0.5
    assert len(prof.rows()) == 16


def test_profile_log1_matches_coefficient_backend():
    a = DiscPoint(2.0 ** -4, 0.0)
    prof = normlimit_profile(LOG1, 2.0, geometric_path(4, k_min=4))
    ref = hardy_norm(apply_volterra_coeff(LOG1, make_test_function(a, 2.0, 1 << 14)), 2.0).value
    assert prof.values[0] == pytest.approx(ref, rel=1e-6)


def test_profile_truncation_check():
    g = make_symbol(SymbolSpec.custom(1.0 / np.arange(1, 200)))
    with pytest.raises(ValueError, match="truncation"):
        normlimit_profile(g, 2.0, geometric_path(10))
