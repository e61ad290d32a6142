"""Command-line front end.

Every command writes one machine-readable artifact: JSON with a
``{schema_version, config, result, timestamp}`` envelope, or CSV with the
columns ``label,value,error_bound``.  Exit status is 0 when the run passes,
1 when a checked property fails and 2 on usage or precondition errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .disc import CandidateSequence, DiscPoint, SymbolSpec, geometric_path, make_symbol, make_test_function
from .hump import (
    SelectionCertificate,
    embed_flat,
    embed_volterra,
    isomorphism_report,
    remeasure_flat,
    replay,
    select_flat,
    select_volterra,
    threshold_identity_residual,
)
from .lemmas import (
    LOCALIZATION2_THRESHOLD,
    LOCALIZATION_THRESHOLD,
    MASS_THRESHOLD,
    default_eps_schedule,
    leibov_sequence_stats,
    squared_schedule,
    verify_localization,
    verify_localization2,
    verify_masslemma_i,
    verify_masslemma_ii,
)
from .norms import bloch_seminorm, bmoa_seminorm, hardy_norm, lmoa_seminorm, standard_grid, vmoa_defect
from .volterra import normlimit_profile

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# serialization


def to_plain(obj):
    """Convert results to JSON-ready builtins (complex -> [re, im])."""
    if isinstance(obj, (DiscPoint, SymbolSpec, CandidateSequence, SelectionCertificate)):
        return to_plain(obj.to_dict())
    if hasattr(obj, "to_dict") and callable(obj.to_dict):
        return to_plain(obj.to_dict())
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    """JSON with every float written to 17 significant digits; non-finite floats become null."""
    out = io.StringIO()

    def emit(x, level):
        pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
        end = "" if indent is None else "\n" + " " * (indent * level)
        if x is None:
            out.write("null")
        elif isinstance(x, bool):
            out.write("true" if x else "false")
        elif isinstance(x, int):
            out.write(str(x))
        elif isinstance(x, float):
            out.write(format(x, ".17g") if math.isfinite(x) else "null")
        elif isinstance(x, str):
            out.write(json.dumps(x, ensure_ascii=False))
        elif isinstance(x, dict):
            if not x:
                out.write("{}")
                return
            out.write("{")
            for i, (k, v) in enumerate(x.items()):
                out.write(("," if i else "") + pad + json.dumps(str(k), ensure_ascii=False) + ": ")
                emit(v, level + 1)
            out.write(end + "}")
        elif isinstance(x, list):
            if not x:
                out.write("[]")
                return
            out.write("[")
            for i, v in enumerate(x):
                out.write(("," if i else "") + pad)
                emit(v, level + 1)
            out.write(end + "]")
        else:
            raise TypeError(f"cannot serialize {type(x).__name__}")

    emit(to_plain(obj), 0)
    return out.getvalue() + "\n"


def envelope(config: dict, result, timestamp: str | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "result": result,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def csv_text(rows, config: dict | None = None) -> str:
    """CSV table; the run config rides along as ``#`` comment lines above the header."""
    buf = io.StringIO()
    if config is not None:
        for line in dumps({"schema_version": SCHEMA_VERSION, "config": config}, indent=None).splitlines():
            buf.write("# " + line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "value", "error_bound"])
    for label, value, err in rows:
        w.writerow([_cell(label), _cell(value), _cell(err)])
    return buf.getvalue()


def _cell(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return x


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"not a complex number: {text!r}") from None


def parse_list(text: str) -> list[complex]:
    return [parse_complex(t) for t in text.split(",") if t.strip()]


def point_from(args, name: str = "a") -> DiscPoint:
    gap = getattr(args, f"{name}_gap", None)
    if gap is not None:
        if not (0 < gap <= 1):
            raise UsageError(f"--{name}-gap must lie in (0, 1]")
        return DiscPoint(gap, getattr(args, f"{name}_angle", 0.0) or 0.0)
    text = getattr(args, name, None)
    if text is None:
        raise UsageError(f"--{name} (or --{name}-gap) is required")
    z = parse_complex(text)
    if abs(z) >= 1:
        raise UsageError(f"--{name} must lie inside the unit disc, got |{name}| = {abs(z):.6g}")
    return DiscPoint.from_complex(z)


SYMBOLS = ("log1", "monomial", "polynomial", "carleson", "custom")


def symbol_spec(args) -> SymbolSpec:
    kind = args.symbol
    try:
        if kind == "log1":
            return SymbolSpec.log1()
        if kind == "monomial":
            return SymbolSpec.monomial(args.k)
        if kind in ("polynomial", "custom"):
            if not args.coeffs:
                raise UsageError(f"--coeffs is required for {kind}")
            return getattr(SymbolSpec, kind)(parse_list(args.coeffs))
        if kind == "carleson":
            if args.u is None:
                raise UsageError("--u is required for carleson")
            return SymbolSpec.carleson(parse_complex(args.u))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown symbol {kind!r}")


def check_p(p: float) -> float:
    if not (p >= 1 and math.isfinite(p)):
        raise UsageError(f"--p must be a finite number >= 1, got {p}")
    return p


def path_from(args) -> CandidateSequence:
    if args.path_length < 1:
        raise UsageError("--path-length must be positive")
    if args.path_base <= 1:
        raise UsageError("--path-base must exceed 1")
    return geometric_path(args.path_length, args.path_base, args.omega)


def _add_symbol(p, choices=SYMBOLS, default="log1"):
    p.add_argument("--symbol", choices=choices, default=default)
    p.add_argument("--k", type=int, default=1, help="degree for monomial")
    p.add_argument("--coeffs", help="comma-separated coefficients for polynomial/custom")
    p.add_argument("--u", help="point u for carleson")
    p.add_argument("--degree", type=int, default=4096, help="Taylor truncation degree")


def _add_path(p, length, base=2.0):
    p.add_argument("--path-length", type=int, default=length)
    p.add_argument("--path-base", type=float, default=base)
    p.add_argument("--omega", type=float, default=0.0, help="angle of the limit point")


def _add_out(p):
    p.add_argument("--out", help="output file (.json or .csv)")
    p.add_argument("--format", choices=("text", "json", "csv"), default=None)


# ---------------------------------------------------------------------------
# commands; each returns (result, csv_rows or None, passed, summary)


def cmd_norm(args):
    p = check_p(args.p)
    if args.symbol == "testfn":
        a = point_from(args)
        f = make_test_function(a, p, args.degree)
        label = "f_a"
    else:
        f = make_symbol(symbol_spec(args), args.degree)
        label = args.symbol
    r = args.r
    if r is not None and not (0 < r <= 1):
        raise UsageError("--r must lie in (0, 1]")
    est = hardy_norm(f, p, M=args.samples, r=r)
    result = {"value": est.value, "error_bound": est.error_bound, "resolution": est.resolution,
              "converged": est.converged}
    return result, [(label, est.value, est.error_bound)], est.converged, f"{est.value:.10f} ± {est.error_bound:.2g}"


def cmd_seminorm(args):
    g = make_symbol(symbol_spec(args), args.degree)
    grid = standard_grid(args.rays, args.levels)
    kind = args.kind
    if kind == "vmoa":
        radii = [DiscPoint(2.0 ** -j, 0.0) for j in range(1, args.levels + 1)]
        vals = vmoa_defect(g, radii, args.q, args.rays)
        rows = [(r.gap, v, 0.0) for r, v in zip(radii, vals)]
        tail = vals[-max(1, len(vals) // 4):]
        result = {"gaps": [r.gap for r in radii], "defects": vals, "tail_max": max(tail), "tail_min": min(tail)}
        return result, rows, True, f"vmoa tail max {max(tail):.6g}"
    fn = {"bmoa": lambda: bmoa_seminorm(g, grid, args.q), "bloch": lambda: bloch_seminorm(g, grid),
          "lmoa": lambda: lmoa_seminorm(g, grid)}[kind]
    est = fn()
    rows = [(f"{a.gap:.17g}@{a.angle:.17g}", v, 0.0) for a, v in zip(est.points, est.values)]
    result = {"value": est.value, "error_bound": est.error_bound, "argmax": est.argmax,
              "points": est.points, "values": est.values}
    return result, rows, True, f"{kind} {est.value:.10g} ± {est.error_bound:.2g}"


def cmd_profile(args):
    p = check_p(args.p)
    g = make_symbol(symbol_spec(args), args.degree)
    prof = normlimit_profile(g, p, path_from(args))
    result = {"gaps": [a.gap for a in prof.points], "values": prof.values, "errors": prof.errors,
              "c_hat": prof.c_hat, "c_hat_prev": prof.c_hat_prev, "stable": prof.stable}
    rows = prof.rows()
    return result, rows, True, f"c_hat {prof.c_hat:.10g} (stable: {prof.stable})"


def cmd_lemma(args):
    p = check_p(args.p)
    which = args.which
    if which == "mass-i":
        th = MASS_THRESHOLD if args.threshold is None else args.threshold
        rep = verify_masslemma_i(p, path_from(args), args.eps, th)
        reports = [rep]
    elif which == "mass-ii":
        th = MASS_THRESHOLD if args.threshold is None else args.threshold
        a = point_from(args) if (args.a is not None or args.a_gap is not None) else DiscPoint.from_complex(0.9)
        reports = [verify_masslemma_ii(p, a, default_eps_schedule(args.eps_steps), th)]
    elif which in ("localization", "localization2"):
        g = make_symbol(symbol_spec(args), args.degree)
        path = path_from(args)
        if which == "localization":
            th = LOCALIZATION_THRESHOLD if args.threshold is None else args.threshold
            reports = [verify_localization(g, p, path, th)]
        else:
            th = LOCALIZATION2_THRESHOLD if args.threshold is None else args.threshold
            reports = list(verify_localization2(g, p, path, args.eps, 0, default_eps_schedule(args.eps_steps), th))
    elif which == "leibov":
        stats = leibov_sequence_stats(squared_schedule(args.terms + 1))
        l2 = stats.l2s
        ok = all(b < a for a, b in zip(l2, l2[1:])) and l2[-1] < 0.2 * l2[0] and stats.star_ratio <= 10
        rows = [(f"h{n + 1}:l2", v, 0.0) for n, v in enumerate(l2)]
        rows += [(f"h{n + 1}:star", v, 0.0) for n, v in enumerate(stats.stars)]
        return stats, rows, ok, f"star ratio {stats.star_ratio:.4g}; l2 final/initial {l2[-1] / l2[0]:.3g}"
    else:
        raise UsageError(f"unknown lemma {which!r}")
    rows = [(f"{r.name}:{lab:.17g}", v, e) for r in reports for lab, v, e in r.rows()]
    ok = all(r.passed for r in reports)
    summary = "; ".join(f"{r.name}: final {r.final_value:.3g} (threshold {r.threshold:g}) "
                        f"{'pass' if r.passed else 'FAIL'}" for r in reports)
    return {"reports": reports}, rows, ok, summary


def cmd_select(args):
    p = check_p(args.p)
    if args.levels < 1:
        raise UsageError("--levels must be positive")
    path = path_from(args)
    if len(path) < 4 * args.levels:
        raise UsageError(f"--path-length must be at least {4 * args.levels}")
    if args.kind == "flat":
        cert = select_flat(p, path, args.levels)
    else:
        spec = symbol_spec(args)
        if spec.is_constant:
            raise UsageError("the symbol must not be constant")
        cert = select_volterra(spec, p, path, args.levels)
    result = cert.to_dict()
    if cert.kind == "volterra" and cert.delta is not None:
        result["threshold_identity_residual"] = threshold_identity_residual(cert.delta, p)
    if cert.passed and not args.no_replay:
        rep = replay(cert)
        result["replay"] = {"passed": rep.passed, "worst_fraction": rep.worst_fraction}
        ok = rep.passed
    else:
        ok = cert.passed
    rows = [(f"level{lv.n}", lv.b.gap, lv.eps) for lv in cert.levels]
    fail = cert.failure
    summary = (f"certificate {cert.id}: passed" if ok else
               f"certificate {cert.id}: FAILED at level {fail['level']} condition {fail['condition']}"
               if fail else f"certificate {cert.id}: replay FAILED")
    return result, rows, ok, summary


def load_certificate(path: str) -> SelectionCertificate:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read certificate: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"certificate is not valid JSON: {exc}") from None
    body = data.get("result", data)
    try:
        return SelectionCertificate.from_dict(body)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed certificate: {exc}") from None


def cmd_embed(args):
    cert = load_certificate(args.cert)
    alpha = np.array(parse_list(args.alpha), dtype=complex)
    if alpha.size > len(cert.levels):
        raise UsageError(f"alpha has {alpha.size} entries but the certificate has {len(cert.levels)} levels")
    res = embed_flat(cert, alpha) if cert.kind == "flat" else embed_volterra(cert, cert.symbol, alpha)
    result = {"kind": cert.kind, "certificate_id": cert.id, "alpha": alpha, "norm": res.norm,
              "error_bound": res.error_bound, "alpha_norm": res.alpha_norm,
              "bound_p": res.bound, "within_bound": res.within_bound}
    return result, [("norm", res.norm, res.error_bound)], res.within_bound, \
        f"norm {res.norm:.10g}; bound holds: {res.within_bound}"


def cmd_report(args):
    cert = load_certificate(args.cert)
    if cert.kind != "volterra":
        raise UsageError("report needs a volterra certificate")
    if not cert.passed:
        raise UsageError("certificate did not pass; nothing to report")
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    flat = remeasure_flat(cert)
    rep = isomorphism_report(flat, cert, cert.symbol, args.trials, args.seed)
    result = {"flat_certificate": flat, "report": rep}
    rows = [(f"trial{i}", r.volterra_ratio, r.restriction_ratio) for i, r in enumerate(rep.records)]
    mr = "n/a" if rep.min_ratio is None else f"{rep.min_ratio:.6g}"
    rl = "n/a" if rep.restriction_lower is None else f"{rep.restriction_lower:.6g}"
    return result, rows, rep.passed, (f"min ratio {mr}; restriction lower {rl} vs {rep.restriction_bound:.6g}; "
                                      f"{'pass' if rep.passed else 'FAIL'}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hvl", description="Volterra operators on Hardy spaces: numerical certificates")
    ap.add_argument("--version", action="version", version=f"hvl {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="H^p norm of a test function or symbol")
    _add_symbol(p, ("testfn",) + SYMBOLS, "testfn")
    p.add_argument("--a", help="point a (complex) for the test function")
    p.add_argument("--a-gap", type=float, help="1 - |a|, for points very close to the circle")
    p.add_argument("--a-angle", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--r", type=float, help="radius of the circle mean (default: boundary)")
    p.add_argument("--samples", type=int, default=64)
    _add_out(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("seminorm", help="BMOA / VMOA / Bloch / LMOA seminorms on a grid")
    _add_symbol(p)
    p.add_argument("--kind", choices=("bmoa", "vmoa", "bloch", "lmoa"), default="bmoa")
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--rays", type=int, default=8)
    p.add_argument("--levels", type=int, default=12)
    _add_out(p)
    p.set_defaults(func=cmd_seminorm)

    p = sub.add_parser("profile", help="norm profile of T_g f_a along a path")
    _add_symbol(p)
    p.add_argument("--p", type=float, default=2.0)
    _add_path(p, 16)
    _add_out(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("lemma", help="run a lemma driver")
    p.add_argument("--which", choices=("mass-i", "mass-ii", "localization", "localization2", "leibov"),
                   required=True)
    _add_symbol(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--a", help="fixed point for mass-ii (default 0.9)")
    p.add_argument("--a-gap", type=float)
    p.add_argument("--a-angle", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=math.pi / 2)
    p.add_argument("--eps-steps", type=int, default=20)
    p.add_argument("--threshold", type=float)
    p.add_argument("--terms", type=int, default=6, help="number of h_n for leibov")
    _add_path(p, 20)
    _add_out(p)
    p.set_defaults(func=cmd_lemma)

    p = sub.add_parser("select", help="gliding-hump selection certificate")
    p.add_argument("--kind", choices=("flat", "volterra"), default="volterra")
    _add_symbol(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--seed", type=int, default=0, help="recorded for provenance; selection is deterministic")
    p.add_argument("--no-replay", action="store_true")
    _add_path(p, 400)
    _add_out(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("embed", help="evaluate S alpha or U alpha for a certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--alpha", required=True, help="comma-separated coefficients")
    _add_out(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("report", help="embedding report over seeded random trials")
    p.add_argument("--cert", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _add_out(p)
    p.set_defaults(func=cmd_report)
    return ap


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out", "format")}
    return to_plain(cfg)


def write_output(args, result, rows, summary, stdout) -> None:
    fmt = args.format
    if fmt is None:
        fmt = "csv" if (args.out or "").lower().endswith(".csv") else ("json" if args.out else "text")
    if fmt == "csv":
        text = csv_text(rows or [], _config(args))
    elif fmt == "json":
        text = dumps(envelope(_config(args), result))
    else:
        text = summary + "\n"
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from None
        stdout.write(summary + "\n")
    else:
        stdout.write(text)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result, rows, ok, summary = args.func(args)
        write_output(args, result, rows, summary, stdout)
    except UsageError as exc:
        stderr.write(f"hvl {args.command}: {exc}\n")
        return 2
    except ValueError as exc:
        stderr.write(f"hvl {args.command}: precondition violated: {exc}\n")
        return 2
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
