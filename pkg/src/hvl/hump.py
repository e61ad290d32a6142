"""Gliding-hump selection of almost disjointly supported test functions.

At level ``n`` an arc ``A_n = A_{eps_n}`` around the path direction and a
path point ``b_n`` are chosen so that

* (i)   every earlier function has small mass on ``A_n``,
* (ii)  the new function has small mass off ``A_n``,
* (iii) the new function keeps a definite mass on ``A_n``.

The flat version works with ``f_b`` itself and thresholds ``4**-n``; the
Volterra version works with ``T_g f_b``, thresholds ``4**-n * delta * c``
and the window ``[c/2, 2c]`` for (iii), where ``c`` is the limit of
``||T_g f_a||_p`` along the path.  The result of either loop is a
:class:`SelectionCertificate`; failures are certificates too.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

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
from .norms import Arc, NormEstimate, boundary_integral, lp_norm
from .quadrature import TWO_PI, graded_mesh
from .volterra import NormLimitProfile, normlimit_profile, volterra_fn, volterra_form

HALVING_CAP = 60
PROFILE_POINTS = 16
DEFAULT_PATH_LENGTH = 400
REPLAY_FRACTION = 0.1


def delta_for(p: float) -> float:
    """``2**(-2 - 2/p)``, the root of ``2**-2p - 2 delta**p = 2**(-2p-1)``."""
    return 2.0 ** (-2.0 - 2.0 / p)


def default_candidates(omega_arg: float = 0.0, length: int = DEFAULT_PATH_LENGTH) -> CandidateSequence:
    return geometric_path(length, 2.0, omega_arg)


def workers() -> int:
    try:
        return max(1, int(os.environ.get("HVL_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# certificates


@dataclass
class LevelRecord:
    n: int
    b: DiscPoint
    b_index: int
    eps: float
    cond_i_values: list
    cond_ii_value: float
    cond_iii_value: float
    thresholds: dict
    margins: dict
    halvings: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["b"] = self.b.to_dict()
        return d

    @classmethod
    def from_dict(cls, d) -> "LevelRecord":
        d = dict(d)
        d["b"] = DiscPoint.from_dict(d["b"])
        return cls(**d)

    def all_margins(self) -> list[float]:
        return [*self.margins["i"], self.margins["ii"], self.margins["iii"]]


@dataclass
class SelectionCertificate:
    kind: str
    p: float
    levels: list
    path_provenance: dict
    passed: bool
    symbol: SymbolSpec | None = None
    c_hat: float | None = None
    delta: float | None = None
    failure: dict | None = None
    profile: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def id(self) -> str:
        body = json.dumps({"kind": self.kind, "p": self.p,
                           "symbol": self.symbol.to_dict() if self.symbol else None,
                           "b": [lv.b.to_dict() for lv in self.levels],
                           "eps": [lv.eps for lv in self.levels]}, sort_keys=True)
        return hashlib.sha256(body.encode()).hexdigest()[:16]

    @property
    def points(self) -> list[DiscPoint]:
        return [lv.b for lv in self.levels]

    @property
    def omega_arg(self) -> float:
        return float(self.path_provenance["omega_arg"])

    def arcs(self) -> list[Arc]:
        return [Arc(self.omega_arg, lv.eps) for lv in self.levels]

    def violations(self) -> list[str]:
        """Invariant breaches (empty for a sound certificate)."""
        out = []
        eps = [lv.eps for lv in self.levels]
        gaps = [lv.b.gap for lv in self.levels]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            out.append("eps not strictly decreasing")
        if any(b >= a for a, b in zip(gaps, gaps[1:])):
            out.append("|b_n| not strictly increasing")
        for lv in self.levels:
            th = lv.thresholds
            if any(v >= th["i"] for v in lv.cond_i_values):
                out.append(f"level {lv.n}: condition (i) above threshold")
            if lv.cond_ii_value >= th["ii"]:
                out.append(f"level {lv.n}: condition (ii) above threshold")
            if not (th["iii_lo"] <= lv.cond_iii_value <= th["iii_hi"]):
                out.append(f"level {lv.n}: condition (iii) outside its window")
            if any(m <= 0 for m in lv.all_margins()):
                out.append(f"level {lv.n}: non-positive margin")
        return out

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "p": self.p,
            "symbol": self.symbol.to_dict() if self.symbol else None,
            "c_hat": self.c_hat,
            "delta": self.delta,
            "passed": self.passed,
            "failure": self.failure,
            "levels": [lv.to_dict() for lv in self.levels],
            "path_provenance": self.path_provenance,
            "profile": self.profile,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d) -> "SelectionCertificate":
        return cls(
            kind=d["kind"], p=float(d["p"]),
            levels=[LevelRecord.from_dict(x) for x in d["levels"]],
            path_provenance=d["path_provenance"], passed=bool(d["passed"]),
            symbol=SymbolSpec.from_dict(d["symbol"]) if d.get("symbol") else None,
            c_hat=d.get("c_hat"), delta=d.get("delta"), failure=d.get("failure"),
            profile=d.get("profile"), notes=list(d.get("notes", [])),
        )


def _provenance(path: CandidateSequence) -> dict:
    return {"name": path.name, "omega_arg": path.omega_arg, "length": len(path),
            "first_gap": path.points[0].gap if len(path) else None,
            "last_gap": path.points[-1].gap if len(path) else None}


# ---------------------------------------------------------------------------
# measurements


def arc_root(form, p: float, region, order: int = 16) -> NormEstimate:
    """``(int_region |form|^p dm)^{1/p}`` on the boundary."""
    def density(mesh):
        return np.abs(form.boundary_values(mesh)) ** p

    mass = boundary_integral(density, region.intervals(), form.foci(), order=order)
    v = mass.value ** (1.0 / p)
    return NormEstimate(v, mass.resolution, mass.error_bound ** (1.0 / p) if mass.value == 0 else
                        mass.error_bound / (p * max(mass.value, 1e-300)) * v, mass.converged)


@dataclass
class _Rules:
    """What distinguishes the two selections."""

    kind: str
    p: float
    g: AnalyticFn | None = None
    c_hat: float | None = None
    delta: float | None = None

    def form(self, b: DiscPoint):
        f = make_test_function(b, self.p, 1)
        return f.closed_form if self.kind == "flat" else volterra_form(self.g, f)

    def threshold(self, n: int) -> float:
        t = 4.0 ** -n
        return t if self.kind == "flat" else t * self.delta * self.c_hat

    def window(self) -> tuple[float, float]:
        return (0.0, 1.0) if self.kind == "flat" else (self.c_hat / 2, 2 * self.c_hat)


def _margins(vi, vii, viii, tau, lo, hi, kind) -> dict:
    iii = (hi - viii) if kind == "flat" else min(viii - lo, hi - viii)
    return {"i": [tau - v for v in vi], "ii": tau - vii, "iii": iii}


def _select(rules: _Rules, candidates: CandidateSequence, n_max: int, order: int = 16):
    """Shared inductive loop; returns (levels, failure)."""
    if n_max < 1:
        raise ValueError("need at least one level")
    if len(candidates) < 4 * n_max:
        raise ValueError(f"candidate path too short: {len(candidates)} points for {n_max} levels "
                         f"(need at least {4 * n_max})")
    omega = candidates.omega_arg
    levels: list[LevelRecord] = []
    forms: list = []
    eps_prev = math.pi
    idx = -1
    lo, hi = rules.window()
    for n in range(1, n_max + 1):
        tau = rules.threshold(n)
        # (i): shrink the arc until every earlier function is small on it.  An
        # arc wider than the previous bump's own scale 1 - |b_{n-1}| carries at
        # least half of that bump's mass, so the halving starts there.
        eps = eps_prev / 2
        if levels:
            eps = min(eps, levels[-1].b.gap)
        halvings = 0
        while True:
            arc = Arc(omega, eps)
            vi = [arc_root(F, rules.p, arc, order).value for F in forms]
            if all(v < tau for v in vi):
                break
            halvings += 1
            if halvings > HALVING_CAP:
                worst = max(vi)
                return levels, {"level": n, "condition": "i",
                                "message": f"no arc after {HALVING_CAP} halvings: earlier mass "
                                           f"{worst:.3g} >= threshold {tau:.3g} at eps={eps:.3g}"}
            eps /= 2
        arc = Arc(omega, eps)
        comp = arc.complement()
        # (ii) and (iii): advance along the path
        seen_ii = False
        last = None
        for k in range(idx + 1, len(candidates)):
            b = candidates.points[k]
            F = rules.form(b)
            vii = arc_root(F, rules.p, comp, order).value
            if vii >= tau:
                last = ("ii", vii)
                continue
            seen_ii = True
            viii = arc_root(F, rules.p, arc, order).value
            if not (lo <= viii <= hi) or (rules.kind == "flat" and viii > hi):
                last = ("iii", viii)
                continue
            margins = _margins(vi, vii, viii, tau, lo, hi, rules.kind)
            levels.append(LevelRecord(n, b, k, eps, vi, vii, viii,
                                      {"i": tau, "ii": tau, "iii_lo": lo, "iii_hi": hi}, margins, halvings))
            forms.append(F)
            idx = k
            eps_prev = eps
            break
        else:
            cond = "iii" if seen_ii else "ii"
            detail = f"last measured {last[0]} value {last[1]:.3g}" if last else "no candidates left"
            window = f"window [{lo:.3g}, {hi:.3g}]" if cond == "iii" else f"threshold {tau:.3g}"
            return levels, {"level": n, "condition": cond,
                            "message": f"candidates exhausted at eps={eps:.3g}; {detail}; {window}"}
    return levels, None


def select_flat(p: float, candidates: CandidateSequence | None = None, levels: int = 6) -> SelectionCertificate:
    candidates = default_candidates() if candidates is None else candidates
    recs, failure = _select(_Rules("flat", p), candidates, levels)
    cert = SelectionCertificate("flat", p, recs, _provenance(candidates), failure is None, failure=failure)
    if cert.passed and cert.violations():
        cert.passed = False
        cert.failure = {"level": None, "condition": "invariant", "message": "; ".join(cert.violations())}
    return cert


def _as_symbol(g) -> tuple[SymbolSpec, AnalyticFn]:
    if isinstance(g, SymbolSpec):
        return g, make_symbol(g)
    raise TypeError("symbol must be given as a SymbolSpec")


PATH_NOTE = ("c_hat is estimated along the selection path only; "
             "the limsup over all approach directions is not certified")


def select_volterra(g, p: float, candidates: CandidateSequence | None = None, levels: int = 6,
                    profile: NormLimitProfile | None = None) -> SelectionCertificate:
    """Volterra selection; ``c_hat`` comes from a norm profile along the same path."""
    spec, gfn = _as_symbol(g)
    if spec.is_constant:
        raise ValueError("the symbol must not be constant")
    candidates = default_candidates() if candidates is None else candidates
    if profile is None:
        profile = normlimit_profile(gfn, p, candidates.head(PROFILE_POINTS))
    delta = delta_for(p)
    prof = {"c_hat": profile.c_hat, "c_hat_prev": profile.c_hat_prev, "stable": profile.stable,
            "points": len(profile.values), "values": list(profile.values)}
    if not profile.stable:
        return SelectionCertificate(
            "volterra", p, [], _provenance(candidates), False, spec, profile.c_hat, delta,
            {"level": 0, "condition": "c_hat_stability",
             "message": f"norm profile not stable: c_hat={profile.c_hat:.6g}, "
                        f"shifted window gives {profile.c_hat_prev:.6g}"},
            prof, [PATH_NOTE])
    rules = _Rules("volterra", p, gfn, profile.c_hat, delta)
    recs, failure = _select(rules, candidates, levels)
    cert = SelectionCertificate("volterra", p, recs, _provenance(candidates), failure is None,
                                spec, profile.c_hat, delta, failure, prof, [PATH_NOTE])
    if cert.passed and cert.violations():
        cert.passed = False
        cert.failure = {"level": None, "condition": "invariant", "message": "; ".join(cert.violations())}
    return cert


def threshold_identity_residual(delta: float, p: float) -> float:
    """``|2**-2p - 2 delta**p - 2**(-2p-1)|``."""
    return abs(2.0 ** (-2 * p) - 2 * delta ** p - 2.0 ** (-2 * p - 1))


# ---------------------------------------------------------------------------
# re-measuring


def _cert_rules(cert: SelectionCertificate, kind: str | None = None) -> _Rules:
    kind = kind or cert.kind
    if kind == "flat":
        return _Rules("flat", cert.p)
    return _Rules("volterra", cert.p, make_symbol(cert.symbol), cert.c_hat, cert.delta)


def _measure_levels(cert: SelectionCertificate, rules: _Rules, order: int) -> list[LevelRecord]:
    forms = [rules.form(lv.b) for lv in cert.levels]
    lo, hi = rules.window()
    out = []
    for i, lv in enumerate(cert.levels):
        tau = rules.threshold(lv.n)
        arc = Arc(cert.omega_arg, lv.eps)
        vi = [arc_root(F, rules.p, arc, order).value for F in forms[:i]]
        vii = arc_root(forms[i], rules.p, arc.complement(), order).value
        viii = arc_root(forms[i], rules.p, arc, order).value
        out.append(LevelRecord(lv.n, lv.b, lv.b_index, lv.eps, vi, vii, viii,
                               {"i": tau, "ii": tau, "iii_lo": lo, "iii_hi": hi},
                               _margins(vi, vii, viii, tau, lo, hi, rules.kind), lv.halvings))
    return out


def remeasure_flat(cert: SelectionCertificate) -> SelectionCertificate:
    """Flat conditions measured on the points and arcs of another certificate."""
    recs = _measure_levels(cert, _Rules("flat", cert.p), 16)
    flat = SelectionCertificate("flat", cert.p, recs, dict(cert.path_provenance), True,
                                notes=[f"re-measured on the points of certificate {cert.id}"])
    bad = flat.violations()
    if bad:
        flat.passed = False
        flat.failure = {"level": None, "condition": "invariant", "message": "; ".join(bad)}
    return flat


@dataclass
class ReplayEntry:
    level: int
    condition: str
    stored: float
    replayed: float
    margin: float

    @property
    def change(self) -> float:
        return abs(self.replayed - self.stored)

    @property
    def ok(self) -> bool:
        return self.change < REPLAY_FRACTION * self.margin


@dataclass
class ReplayReport:
    entries: list

    @property
    def passed(self) -> bool:
        return all(e.ok for e in self.entries)

    @property
    def worst_fraction(self) -> float:
        return max((e.change / e.margin for e in self.entries), default=0.0)


def replay(cert: SelectionCertificate, order: int = 32) -> ReplayReport:
    """Re-measure every stored value at twice the Gauss order."""
    new = _measure_levels(cert, _cert_rules(cert), order)
    entries = []
    for old, lv in zip(cert.levels, new):
        for j, (a, b) in enumerate(zip(old.cond_i_values, lv.cond_i_values)):
            entries.append(ReplayEntry(old.n, f"i[{j + 1}]", a, b, old.margins["i"][j]))
        entries.append(ReplayEntry(old.n, "ii", old.cond_ii_value, lv.cond_ii_value, old.margins["ii"]))
        entries.append(ReplayEntry(old.n, "iii", old.cond_iii_value, lv.cond_iii_value, old.margins["iii"]))
    return ReplayReport(entries)


# ---------------------------------------------------------------------------
# embeddings


def flat_bound(p: float) -> float:
    """``2**((p+1)/p)``: upper constant for ``||S alpha||_p / ||alpha||``."""
    return 2.0 ** ((p + 1) / p)


def volterra_lower(p: float, c_hat: float) -> float:
    """``2**(-(2p+1)/p) * c_hat``: lower constant for ``||U alpha||_p / ||alpha||``."""
    return 2.0 ** (-(2 * p + 1) / p) * c_hat


def restriction_bound(p: float, c_hat: float) -> float:
    return volterra_lower(p, c_hat) / flat_bound(p)


def _alpha(cert: SelectionCertificate, alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=complex).ravel()
    if a.size > len(cert.levels):
        if np.any(a[len(cert.levels):] != 0):
            raise ValueError(f"support of alpha exceeds the {len(cert.levels)} certified levels")
        a = a[: len(cert.levels)]
    return a


def _combination(cert: SelectionCertificate, a: np.ndarray) -> AnalyticFn:
    fns = [make_test_function(lv.b, cert.p, 64) for lv in cert.levels[: a.size]]
    return linear_combination(list(a), fns)


@dataclass
class EmbedResult:
    fn: AnalyticFn
    norm: float
    error_bound: float
    alpha_norm: float
    bound: float
    within_bound: bool

    def __iter__(self):
        return iter((self.fn, self.norm))


def _boundary_norm(form, p) -> NormEstimate:
    def density(mesh):
        return np.abs(form.boundary_values(mesh)) ** p

    mass = boundary_integral(density, [(0.0, -math.pi, math.pi)], form.foci())
    return NormEstimate(mass.value ** (1 / p), mass.resolution, mass.error_bound, mass.converged)


def embed_flat(cert: SelectionCertificate, alpha) -> EmbedResult:
    """``S alpha = sum alpha_n f_{b_n}``; checks ``||S alpha||^p <= 2**(p+1) ||alpha||^p``."""
    if cert.kind != "flat" and not cert.levels:
        raise ValueError("certificate has no levels")
    a = _alpha(cert, alpha)
    p = cert.p
    la = lp_norm(a, p)
    if la == 0:
        return EmbedResult(_combination(cert, np.zeros(1)), 0.0, 0.0, 0.0, 0.0, True)
    fn = _combination(cert, a)
    est = _boundary_norm(fn.closed_form, p)
    bound = 2.0 ** (p + 1) * la ** p
    return EmbedResult(fn, est.value, est.error_bound, la, bound, est.value ** p <= bound)


def _check_volterra(cert: SelectionCertificate, g) -> AnalyticFn:
    if cert.kind != "volterra":
        raise ValueError("a volterra certificate is required")
    if g is None:
        return make_symbol(cert.symbol)
    spec = g if isinstance(g, SymbolSpec) else None
    if spec is None or spec != cert.symbol:
        raise ValueError("symbol does not match the certificate")
    return make_symbol(spec)


def embed_volterra(cert: SelectionCertificate, g, alpha) -> EmbedResult:
    """``U alpha = T_g S alpha``; checks ``||U alpha||^p >= 2**(-2p-1) c^p ||alpha||^p``."""
    gfn = _check_volterra(cert, g)
    a = _alpha(cert, alpha)
    p = cert.p
    la = lp_norm(a, p)
    if la == 0:
        return EmbedResult(volterra_fn(gfn, _combination(cert, np.zeros(1))), 0.0, 0.0, 0.0, 0.0, True)
    fn = volterra_fn(gfn, _combination(cert, a))
    est = _boundary_norm(fn.closed_form, p)
    bound = 2.0 ** (-2 * p - 1) * cert.c_hat ** p * la ** p
    return EmbedResult(fn, est.value, est.error_bound, la, bound, est.value ** p >= bound)


def unit_disc_sample(rng: np.random.Generator, size: int) -> np.ndarray:
    """Independent points uniform on the complex unit disc."""
    r = np.sqrt(rng.uniform(size=size))
    t = rng.uniform(-math.pi, math.pi, size=size)
    return r * np.exp(1j * t)


class BasisNorms:
    """Boundary values of ``f_{b_n}`` and ``T_g f_{b_n}`` on one shared mesh.

    Every trial is a linear combination of the same basis, so the values
    are sampled once per Gauss order and combined per trial; the order
    doubles per trial until the masses settle as in :func:`boundary_integral`.
    """

    def __init__(self, cert: SelectionCertificate, gfn: AnalyticFn, rel_tol: float = 1e-9, max_order: int = 128):
        self.p = cert.p
        self.flat_forms = [make_test_function(lv.b, cert.p, 1).closed_form for lv in cert.levels]
        self.vol_forms = [volterra_form(gfn, make_test_function(lv.b, cert.p, 1)) for lv in cert.levels]
        foci = tuple(f for F in self.vol_forms for f in F.foci())
        self.base = graded_mesh([(cert.omega_arg, -math.pi, math.pi)], foci)
        self.rel_tol = rel_tol
        self.max_order = max_order
        self._cache = {}

    def _level(self, order):
        if order not in self._cache:
            mesh = self.base
            while mesh.order < order:
                mesh = mesh.refined()
            B = np.array([F.boundary_values(mesh) for F in self.flat_forms])
            U = np.array([F.boundary_values(mesh) for F in self.vol_forms])
            self._cache[order] = (mesh.weights / TWO_PI, B, U)
        return self._cache[order]

    def norms(self, alpha) -> tuple[float, float]:
        """``(||S alpha||_p, ||U alpha||_p)``."""
        a = np.asarray(alpha, dtype=complex)
        order = self.base.order
        prev = None
        while True:
            w, B, U = self._level(order)
            cur = np.array([w @ np.abs(a @ B) ** self.p, w @ np.abs(a @ U) ** self.p])
            if prev is not None:
                if np.all(np.abs(cur - prev) <= self.rel_tol * np.abs(cur)) or order >= self.max_order:
                    break
            prev = cur
            order *= 2
        return float(cur[0] ** (1 / self.p)), float(cur[1] ** (1 / self.p))


@dataclass
class TrialRecord:
    alpha: list
    alpha_norm: float
    flat_norm: float
    volterra_norm: float
    flat_ratio: float
    volterra_ratio: float
    restriction_ratio: float
    flat_ok: bool
    volterra_ok: bool


@dataclass
class EmbeddingReport:
    certificate_id: str
    p: float
    c_hat: float
    trials: int
    records: list
    spikes: list
    min_ratio: float | None
    max_ratio: float | None
    bound_upper: float
    bound_lower: float
    restriction_lower: float | None
    restriction_bound: float
    all_within_bounds: bool
    passed: bool
    seed: int | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        for rec in d["records"] + d["spikes"]:
            rec["alpha"] = [[z.real, z.imag] for z in rec["alpha"]]
        return d


def _trial(basis: BasisNorms, a: np.ndarray, p: float, c_hat: float) -> TrialRecord:
    la = lp_norm(a, p)
    sn, un = basis.norms(a)
    return TrialRecord(
        [complex(z) for z in a], la, sn, un, sn / la, un / la, un / sn if sn > 0 else math.inf,
        sn ** p <= 2.0 ** (p + 1) * la ** p,
        un ** p >= 2.0 ** (-2 * p - 1) * c_hat ** p * la ** p,
    )


def isomorphism_report(cert_flat: SelectionCertificate, cert_volterra: SelectionCertificate, g=None,
                       trials: int = 100, seed: int = 0, spikes: bool = True) -> EmbeddingReport:
    """Random finite sections: ``||V alpha||``, ``||U alpha||`` and their ratios."""
    gfn = _check_volterra(cert_volterra, g)
    if cert_flat.kind != "flat":
        raise ValueError("first certificate must be flat")
    if cert_flat.p != cert_volterra.p:
        raise ValueError("certificates use different exponents")
    if [lv.b for lv in cert_flat.levels] != [lv.b for lv in cert_volterra.levels]:
        raise ValueError("certificates select different points")
    if not cert_volterra.levels:
        raise ValueError("certificate has no levels")
    p, c = cert_volterra.p, cert_volterra.c_hat
    L = len(cert_volterra.levels)
    basis = BasisNorms(cert_volterra, gfn)
    rng = np.random.default_rng(seed)
    alphas = [unit_disc_sample(rng, L) for _ in range(max(0, trials))]
    with ThreadPoolExecutor(workers()) as pool:
        records = list(pool.map(lambda a: _trial(basis, a, p, c), alphas))
    spike_recs = [_trial(basis, np.eye(L, dtype=complex)[n], p, c) for n in range(L)] if spikes else []
    rb = restriction_bound(p, c)
    if not records:
        return EmbeddingReport(cert_volterra.id, p, c, 0, [], spike_recs, None, None, flat_bound(p),
                               volterra_lower(p, c), None, rb, False, False, seed,
                               ["no trials: the report is vacuous"])
    ratios = [r.volterra_ratio for r in records]
    within = all(r.flat_ok and r.volterra_ok for r in records + spike_recs)
    restriction = min(r.restriction_ratio for r in records)
    return EmbeddingReport(cert_volterra.id, p, c, len(records), records, spike_recs, min(ratios), max(ratios),
                           flat_bound(p), volterra_lower(p, c), restriction, rb, within,
                           bool(within and restriction >= rb and cert_flat.passed and cert_volterra.passed),
                           seed, [PATH_NOTE])
