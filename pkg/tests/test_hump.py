import json
import math

import numpy as np
import pytest

from hvl.disc import CandidateSequence, DiscPoint, SymbolSpec, geometric_path
from hvl.hump import (
    SelectionCertificate,
    default_candidates,
    delta_for,
    embed_flat,
    embed_volterra,
    flat_bound,
    isomorphism_report,
    remeasure_flat,
    replay,
    restriction_bound,
    select_flat,
    select_volterra,
    threshold_identity_residual,
    volterra_lower,
)
from hvl.norms import Arc, harmonic_measure


@pytest.fixture(scope="module")
def flat2():
    return select_flat(2.0, levels=6)


@pytest.fixture(scope="module")
def vol2():
    return select_volterra(SymbolSpec.log1(), 2.0, levels=4)


@pytest.fixture(scope="module")
def flat_on_vol2(vol2):
    return remeasure_flat(vol2)


# --- flat selection ---------------------------------------------------------


def test_flat_selection_succeeds(flat2):
    assert flat2.passed and flat2.failure is None
    assert len(flat2.levels) == 6
    assert flat2.violations() == []
    eps = [lv.eps for lv in flat2.levels]
    assert eps[0] <= math.pi / 2
    assert all(b <= a / 2 for a, b in zip(eps, eps[1:]))
    assert all(m > 0 for lv in flat2.levels for m in lv.all_margins())


def test_flat_values_match_harmonic_measure(flat2):
    for i, lv in enumerate(flat2.levels):
        arc = Arc(0.0, lv.eps)
        w = harmonic_measure(lv.b, arc)
        assert lv.cond_iii_value == pytest.approx(math.sqrt(w), abs=1e-6)
        assert lv.cond_ii_value == pytest.approx(math.sqrt(1 - w), abs=1e-6)
        for j, v in enumerate(lv.cond_i_values):
            assert v == pytest.approx(math.sqrt(harmonic_measure(flat2.levels[j].b, arc)), abs=1e-6)


def test_flat_geometry_is_nested(flat2):
    gaps = [lv.b.gap for lv in flat2.levels]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    arcs = flat2.arcs()
    for outer, inner in zip(arcs, arcs[1:]):
        assert inner.half_width < outer.half_width and inner.center == outer.center


def test_flat_selection_fails_on_capped_path():
    pts = tuple(DiscPoint(0.1 + 0.9 * 2.0 ** -k, 0.0) for k in range(1, 45))
    cert = select_flat(2.0, CandidateSequence(0.0, pts), levels=6)
    assert not cert.passed
    assert cert.failure["level"] == 2 and cert.failure["condition"] == "ii"
    assert "threshold" in cert.failure["message"]
    assert len(cert.levels) == 1


def test_selection_rejects_short_path():
    with pytest.raises(ValueError, match="too short"):
        select_flat(2.0, geometric_path(10), levels=6)
    with pytest.raises(ValueError):
        select_flat(2.0, geometric_path(10), levels=0)


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_single_level(p):
    assert select_flat(p, geometric_path(8), levels=1).passed
    cert = select_volterra(SymbolSpec.log1(), p, levels=1)
    assert cert.passed and len(cert.levels) == 1


def test_replay_flat(flat2):
    rep = replay(flat2)
    assert rep.passed and rep.worst_fraction < 0.1


# --- volterra selection -----------------------------------------------------


def test_delta_and_threshold_identity():
    assert delta_for(2.0) == 0.125
    for p in (1.0, 4 / 3, 2.0, 4.0):
        assert threshold_identity_residual(delta_for(p), p) < 1e-15


def test_volterra_selection_log1(vol2):
    assert vol2.passed and vol2.violations() == []
    assert vol2.delta == 0.125
    assert vol2.profile["stable"]
    for lv in vol2.levels:
        assert vol2.c_hat / 2 <= lv.cond_iii_value <= 2 * vol2.c_hat
        assert lv.thresholds["i"] == pytest.approx(4.0 ** -lv.n * vol2.delta * vol2.c_hat)
    assert any("limsup" in n for n in vol2.notes)


def test_volterra_replay(vol2):
    rep = replay(vol2)
    assert rep.passed and rep.worst_fraction < 0.1


def test_volterra_monomial_fails_at_gate():
    cert = select_volterra(SymbolSpec.monomial(1), 2.0, levels=3)
    assert not cert.passed
    assert (cert.failure["level"], cert.failure["condition"]) in {(0, "c_hat_stability"), (1, "iii")}


def test_volterra_rejects_constant_symbol():
    with pytest.raises(ValueError):
        select_volterra(SymbolSpec.monomial(0), 2.0, levels=1)


# --- certificates -----------------------------------------------------------


def test_certificate_roundtrip(vol2):
    d = json.loads(json.dumps(vol2.to_dict()))
    back = SelectionCertificate.from_dict(d)
    assert back.id == vol2.id == d["id"]
    assert back.points == vol2.points
    assert back.violations() == []


def test_certificate_id_is_stable(flat2):
    again = select_flat(2.0, default_candidates(), levels=6)
    assert again.id == flat2.id


def test_tampered_certificate_is_flagged(flat2):
    d = flat2.to_dict()
    d["levels"][2]["eps"] = d["levels"][1]["eps"]
    assert "eps not strictly decreasing" in SelectionCertificate.from_dict(d).violations()


# --- embeddings -------------------------------------------------------------


def test_embed_flat(flat2):
    e1 = embed_flat(flat2, [1.0])
    assert e1.norm == pytest.approx(1.0, abs=1e-9)
    zero = embed_flat(flat2, np.zeros(6))
    assert zero.norm == 0 and zero.within_bound
    uniform = embed_flat(flat2, np.ones(6) / math.sqrt(6))
    assert uniform.within_bound and uniform.norm <= flat_bound(2.0)
    with pytest.raises(ValueError, match="support"):
        embed_flat(flat2, np.ones(7))


def test_embed_volterra(vol2):
    e1 = embed_volterra(vol2, None, [1.0])
    c = vol2.c_hat
    assert c / 2 <= e1.norm <= 2 * c
    assert e1.within_bound
    assert embed_volterra(vol2, None, [0.0]).norm == 0
    with pytest.raises(ValueError, match="symbol"):
        embed_volterra(vol2, SymbolSpec.monomial(1), [1.0])


def test_bound_constants():
    assert flat_bound(2.0) == pytest.approx(2 ** 1.5)
    assert volterra_lower(2.0, 1.0) == pytest.approx(2 ** -2.5)
    assert restriction_bound(1.0, 4.0) == pytest.approx(4 * 2.0 ** -3 / 4)


def test_isomorphism_report(flat_on_vol2, vol2):
    rep = isomorphism_report(flat_on_vol2, vol2, trials=12, seed=3)
    assert rep.trials == 12 and rep.passed and rep.all_within_bounds
    assert rep.min_ratio >= rep.bound_lower
    assert rep.restriction_lower >= rep.restriction_bound
    assert all(s.volterra_norm >= vol2.c_hat / 2 for s in rep.spikes)
    again = isomorphism_report(flat_on_vol2, vol2, trials=12, seed=3)
    assert again.min_ratio == rep.min_ratio
    json.dumps(rep.to_dict())


def test_isomorphism_report_vacuous(flat_on_vol2, vol2):
    rep = isomorphism_report(flat_on_vol2, vol2, trials=0)
    assert rep.records == [] and not rep.passed
    assert rep.min_ratio is None


def test_isomorphism_report_mismatch(flat2, vol2, flat_on_vol2):
    with pytest.raises(ValueError, match="different points"):
        isomorphism_report(flat2, vol2, trials=1)
    with pytest.raises(ValueError, match="flat"):
        isomorphism_report(vol2, vol2, trials=1)
    with pytest.raises(ValueError, match="symbol"):
        isomorphism_report(flat_on_vol2, vol2, SymbolSpec.monomial(1), trials=1)
