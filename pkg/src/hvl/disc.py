"""Analytic functions on the unit disc and the named functions built from them.

An :class:`AnalyticFn` carries a truncated Taylor series and, for the
built-in functions, a closed form that can be evaluated up to and on the
boundary.  Closed forms take points in polar-gap form ``(gap, angle)``
(see :mod:`hvl.quadrature`), which keeps points like ``1 - 2**-250``
distinct from 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .quadrature import Focus, combine_gaps, cyclic_distance, one_minus

DEFAULT_DEGREE = 4096
# Below this tail bound a truncated series counts as summable on the circle.
SUMMABLE_TAIL = 1e-12


def r_eval(N: int) -> float:
    """Largest radius where a degree-N truncated series is trusted."""
    return max(0.0, 1.0 - 10.0 / max(N, 1))


@dataclass(frozen=True)
class DiscPoint:
    """A point ``(1 - gap) * exp(i*angle)`` of the closed disc.

    ``gap == 0`` is only used internally for boundary singularities.
    """

    gap: float
    angle: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.gap <= 1.0) or not math.isfinite(self.angle):
            raise ValueError(f"invalid disc point gap={self.gap!r} angle={self.angle!r}")

    @classmethod
    def from_complex(cls, z) -> "DiscPoint":
        z = complex(z)
        r = abs(z)
        if r >= 1.0:
            raise ValueError(f"point {z} is not inside the unit disc")
        return cls(1.0 - r, math.atan2(z.imag, z.real) if r > 0 else 0.0)

    @property
    def modulus(self) -> float:
        return 1.0 - self.gap

    @property
    def z(self) -> complex:
        return self.modulus * complex(math.cos(self.angle), math.sin(self.angle))

    @property
    def conj(self) -> complex:
        return self.z.conjugate()

    def to_dict(self) -> dict:
        return {"gap": self.gap, "angle": self.angle}

    @classmethod
    def from_dict(cls, d) -> "DiscPoint":
        return cls(float(d["gap"]), float(d["angle"]))


def disc_point(a) -> DiscPoint:
    """Coerce a complex number or :class:`DiscPoint` to an interior point."""
    if isinstance(a, DiscPoint):
        if a.gap <= 0.0:
            raise ValueError("point lies on the unit circle")
        return a
    return DiscPoint.from_complex(a)


def polar(z):
    """Split complex points into ``(gap, angle)`` arrays."""
    z = np.asarray(z, dtype=complex)
    return 1.0 - np.abs(z), np.angle(z)


# ---------------------------------------------------------------------------
# closed forms


class ClosedForm:
    """Exact evaluator for a built-in function, valid on the closed disc."""

    tag = "closed"

    def evaluate(self, gap, angle, offset=0.0):
        """Value at ``(1 - gap) exp(i (angle + offset))``.

        The angle is split so that an offset far below the resolution of
        ``angle`` survives when ``angle`` coincides with a singular direction.
        """
        raise NotImplementedError

    def derivative(self) -> "ClosedForm | None":
        return None

    def foci(self) -> tuple:
        return ()

    def tail_bound(self, N: int, r: float) -> float | None:
        return None

    def boundary_values(self, mesh, **kw):
        return self.evaluate(0.0, mesh.anchors, mesh.offsets)


@dataclass(frozen=True)
class KernelPower(ClosedForm):
    """``scale * (1 - conj(u) z) ** (-beta)`` on the principal branch."""

    u: DiscPoint
    beta: float
    scale: complex = 1.0
    tag = "kernel"

    def evaluate(self, gap, angle, offset=0.0):
        w = one_minus(combine_gaps(self.u.gap, gap), (np.asarray(angle) - self.u.angle) + offset)
        if self.beta == 0:
            return np.full(w.shape, complex(self.scale))
        # Re(1 - conj(u) z) >= 0 on the closed disc, so the branch is the principal one
        if np.any(w.real < -1e-12 * np.abs(w)):
            raise ArithmeticError("kernel base left the right half plane")
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.scale * w ** (-self.beta)

    def derivative(self):
        if self.beta == 0:
            return KernelPower(self.u, 0.0, 0.0)
        return KernelPower(self.u, self.beta + 1, self.scale * self.beta * self.u.conj)

    def foci(self):
        if self.beta == 0 or self.scale == 0:
            return ()
        return (Focus(self.u.angle, self.u.gap),)

    def tail_bound(self, N, r):
        x = self.u.modulus * r
        c = kernel_coeffs(self.u, self.beta, self.scale, N)
        t_next = abs(c[-1]) * r ** N * (self.beta + N) / (N + 1) * x
        q = x * max(1.0, (self.beta + N + 1) / (N + 2))
        return t_next / (1 - q) if q < 1 else math.inf


@dataclass(frozen=True)
class LogKernel(ClosedForm):
    """``scale * log(1 - conj(u) z)``."""

    u: DiscPoint
    scale: complex = 1.0
    tag = "log"

    def evaluate(self, gap, angle, offset=0.0):
        w = one_minus(combine_gaps(self.u.gap, gap), (np.asarray(angle) - self.u.angle) + offset)
        with np.errstate(divide="ignore"):
            return self.scale * np.log(w)

    def derivative(self):
        return KernelPower(self.u, 1.0, -self.scale * self.u.conj)

    def foci(self):
        return (Focus(self.u.angle, self.u.gap),) if self.scale != 0 else ()

    def tail_bound(self, N, r):
        x = self.u.modulus * r
        if x >= 1:
            return math.inf
        return abs(self.scale) * x ** (N + 1) / ((N + 1) * (1 - x))


@dataclass(frozen=True, eq=False)
class PolynomialForm(ClosedForm):
    coeffs: np.ndarray
    tag = "polynomial"

    def evaluate(self, gap, angle, offset=0.0):
        z = (1.0 - np.asarray(gap, dtype=float)) * np.exp(1j * (np.asarray(angle, dtype=float) + offset))
        return npoly.polyval(z, self.coeffs)

    def derivative(self):
        return PolynomialForm(npoly.polyder(self.coeffs) if self.coeffs.size > 1 else np.zeros(1, complex))

    def tail_bound(self, N, r):
        return 0.0 if _true_degree(self.coeffs) <= N else None


@dataclass(frozen=True)
class LinearCombination(ClosedForm):
    terms: tuple  # of (weight, ClosedForm)
    tag = "sum"

    def evaluate(self, gap, angle, offset=0.0):
        out = 0.0
        for w, form in self.terms:
            if w != 0:
                out = out + w * form.evaluate(gap, angle, offset)
        shape = np.broadcast(np.asarray(gap), np.asarray(angle), np.asarray(offset)).shape
        return out * np.ones(shape)

    def derivative(self):
        parts = [(w, form.derivative()) for w, form in self.terms]
        if any(d is None for _, d in parts):
            return None
        return LinearCombination(tuple(parts))

    def foci(self):
        return tuple(f for w, form in self.terms if w != 0 for f in form.foci())

    def tail_bound(self, N, r):
        total = 0.0
        for w, form in self.terms:
            b = form.tail_bound(N, r)
            if b is None:
                return None
            total += abs(w) * b
        return total

    def boundary_values(self, mesh, **kw):
        out = np.zeros(mesh.size, dtype=complex)
        for w, form in self.terms:
            if w != 0:
                out += w * form.boundary_values(mesh, **kw)
        return out


def _true_degree(c) -> int:
    nz = np.flatnonzero(np.asarray(c) != 0)
    return int(nz[-1]) if nz.size else 0


def kernel_coeffs(u: DiscPoint, beta: float, scale, N: int) -> np.ndarray:
    """Taylor coefficients of ``scale * (1 - conj(u) z)**(-beta)`` up to degree N.

    Uses ``c_{n+1} = c_n (beta + n) / (n + 1) conj(u)``, which never forms a
    Gamma function.
    """
    n = np.arange(N)
    ratios = (beta + n) / (n + 1) * u.conj
    c = np.empty(N + 1, dtype=complex)
    c[0] = scale
    c[1:] = scale * np.cumprod(ratios)
    return c


def log_coeffs(u: DiscPoint, scale, N: int) -> np.ndarray:
    n = np.arange(1, N + 1)
    c = np.zeros(N + 1, dtype=complex)
    c[1:] = -scale * np.cumprod(np.full(N, u.conj)) / n
    return c


# ---------------------------------------------------------------------------
# analytic functions


@dataclass(frozen=True, eq=False)
class AnalyticFn:
    """Truncated Taylor series ``c_0 + c_1 z + ... + c_N z^N`` with an
    optional closed form.

    ``exact`` marks a coefficient list that is the whole series (a
    polynomial), in which case series evaluation is valid everywhere.
    """

    coeffs: np.ndarray
    closed_form: ClosedForm | None = None
    exact: bool = False
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite Taylor coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def tag(self) -> str | None:
        return None if self.closed_form is None else self.closed_form.tag

    @property
    def r_eval(self) -> float:
        return 1.0 if self.exact else r_eval(self.degree)

    def tail_bound(self, r: float) -> float:
        """Bound on the dropped part of the series at radius ``r``."""
        if self.exact:
            return 0.0
        if self.closed_form is not None:
            b = self.closed_form.tail_bound(self.degree, r)
            if b is not None:
                return b
        # crude: continue the last coefficient geometrically
        c = abs(self.coeffs[-1])
        return math.inf if r >= 1 else c * r ** (self.degree + 1) / (1 - r)

    def boundary_capable(self) -> bool:
        return self.closed_form is not None or self.exact

    def boundary_form(self) -> ClosedForm:
        """Closed form used for evaluations on or near the circle."""
        if self.closed_form is not None:
            return self.closed_form
        if self.exact:
            return PolynomialForm(self.coeffs)
        raise ValueError(f"{self.label or 'function'} has no closed form and a non-summable tail")

    def series(self, z):
        """Horner evaluation of the stored coefficients (no validity check)."""
        if self.meta.get("form_only"):
            raise ValueError(f"{self.label or 'function'} carries no Taylor coefficients")
        return npoly.polyval(np.asarray(z, dtype=complex), self.coeffs)


def evaluate(f: AnalyticFn, z, backend: str = "series"):
    """Evaluate ``f`` at ``z`` by the truncated series or the closed form."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1.0):
        raise ValueError("evaluation point outside the closed disc")
    if backend == "closed":
        if f.closed_form is None:
            raise ValueError("no closed form attached")
        gap, angle = polar(z)
        return f.closed_form.evaluate(gap, angle)[()]
    if backend != "series":
        raise ValueError(f"unknown backend {backend!r}")
    rmax = float(np.max(np.abs(z), initial=0.0))
    if rmax > f.r_eval and f.tail_bound(rmax) > SUMMABLE_TAIL:
        raise ValueError(f"|z| = {rmax} beyond the series validity radius {f.r_eval:.6g}")
    return f.series(z)[()]


def evaluate_polar(f: AnalyticFn, gap, angle):
    """Evaluate at polar-gap points, preferring the closed form."""
    if f.closed_form is not None:
        return f.closed_form.evaluate(gap, angle)
    gap = np.asarray(gap, dtype=float)
    rmax = float(np.max(1.0 - gap, initial=0.0))
    if rmax > f.r_eval and f.tail_bound(rmax) > SUMMABLE_TAIL:
        raise ValueError(f"|z| = {rmax} beyond the series validity radius {f.r_eval:.6g}")
    return f.series((1.0 - gap) * np.exp(1j * np.asarray(angle, dtype=float)))


def derivative(f: AnalyticFn) -> AnalyticFn:
    c = f.coeffs
    dc = c[1:] * np.arange(1, c.size) if c.size > 1 else np.zeros(1, dtype=complex)
    cf = f.closed_form.derivative() if f.closed_form is not None else None
    return AnalyticFn(dc, cf, f.exact, f"{f.label}'" if f.label else "")


def linear_combination(weights, fns) -> AnalyticFn:
    """``sum w_j f_j`` with coefficient lists padded to the longest."""
    weights = [complex(w) for w in weights]
    fns = list(fns)
    if not fns:
        return constant(0.0)
    N = max(f.degree for f in fns)
    c = np.zeros(N + 1, dtype=complex)
    for w, f in zip(weights, fns):
        c[: f.coeffs.size] += w * f.coeffs
    exact = all(f.exact for f in fns)
    if all(f.boundary_capable() for f in fns):
        cf = LinearCombination(tuple((w, f.boundary_form()) for w, f in zip(weights, fns)))
    else:
        cf = None
    if exact and all(f.closed_form is None or isinstance(f.closed_form, PolynomialForm) for f in fns):
        cf = PolynomialForm(c)
    return AnalyticFn(c, cf, exact, "sum")


def constant(value) -> AnalyticFn:
    c = np.array([value], dtype=complex)
    return AnalyticFn(c, PolynomialForm(c), True, "const")


# ---------------------------------------------------------------------------
# Möbius maps


@dataclass(frozen=True)
class MobiusMap:
    """The involution ``sigma_a(z) = (a - z) / (1 - conj(a) z)``."""

    a: DiscPoint

    def __call__(self, z):
        a = self.a.z
        z = np.asarray(z, dtype=complex)
        return ((a - z) / (1 - a.conjugate() * z))[()]


def make_mobius(a) -> MobiusMap:
    return MobiusMap(disc_point(a))


# ---------------------------------------------------------------------------
# symbols, test functions, candidate paths


SYMBOL_KINDS = ("log1", "monomial", "polynomial", "carleson", "custom")


@dataclass(frozen=True)
class SymbolSpec:
    kind: str
    k: int | None = None
    coeffs: tuple | None = None
    u: DiscPoint | None = None

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if self.kind == "monomial" and (self.k is None or self.k < 0):
            raise ValueError("Monomial(k) needs k >= 0")
        if self.kind == "carleson":
            if self.u is None or not (self.u.gap > 0):
                raise ValueError("CarlesonLog(u) needs |u| < 1")
        if self.kind in ("polynomial", "custom") and not self.coeffs:
            raise ValueError(f"{self.kind} symbol needs coefficients")

    @classmethod
    def log1(cls):
        return cls("log1")

    @classmethod
    def monomial(cls, k: int):
        return cls("monomial", k=int(k))

    @classmethod
    def polynomial(cls, coeffs):
        return cls("polynomial", coeffs=tuple(complex(c) for c in coeffs))

    @classmethod
    def carleson(cls, u):
        return cls("carleson", u=u if isinstance(u, DiscPoint) else DiscPoint.from_complex(u))

    @classmethod
    def custom(cls, coeffs):
        return cls("custom", coeffs=tuple(complex(c) for c in coeffs))

    @property
    def is_constant(self) -> bool:
        if self.kind == "monomial":
            return self.k == 0
        if self.kind in ("polynomial", "custom"):
            return all(c == 0 for c in self.coeffs[1:])
        return False

    def describe(self) -> str:
        if self.kind == "monomial":
            return f"Monomial({self.k})"
        if self.kind == "carleson":
            return f"CarlesonLog(gap={self.u.gap:.6g}, angle={self.u.angle:.6g})"
        if self.kind in ("polynomial", "custom"):
            return f"{self.kind.capitalize()}(degree {len(self.coeffs) - 1})"
        return "Log1"

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.k is not None:
            d["k"] = self.k
        if self.coeffs is not None:
            d["coeffs"] = [[c.real, c.imag] for c in self.coeffs]
        if self.u is not None:
            d["u"] = self.u.to_dict()
        return d

    @classmethod
    def from_dict(cls, d) -> "SymbolSpec":
        coeffs = d.get("coeffs")
        return cls(
            d["kind"],
            k=d.get("k"),
            coeffs=tuple(complex(re, im) for re, im in coeffs) if coeffs is not None else None,
            u=DiscPoint.from_dict(d["u"]) if d.get("u") is not None else None,
        )


_ONE = DiscPoint(0.0, 0.0)


def make_symbol(spec: SymbolSpec, N: int = DEFAULT_DEGREE) -> AnalyticFn:
    if spec.kind == "log1":
        return AnalyticFn(log_coeffs(_ONE, -1.0, N), LogKernel(_ONE, -1.0), False, "Log1")
    if spec.kind == "carleson":
        return AnalyticFn(log_coeffs(spec.u, 1.0, N), LogKernel(spec.u, 1.0), False, spec.describe())
    if spec.kind == "monomial":
        c = np.zeros(max(N, spec.k) + 1, dtype=complex)
        c[spec.k] = 1.0
        return AnalyticFn(c, PolynomialForm(c[: spec.k + 1].copy()), True, spec.describe())
    c = np.array(spec.coeffs, dtype=complex)
    if spec.kind == "polynomial":
        return AnalyticFn(c, PolynomialForm(c), True, spec.describe())
    return AnalyticFn(c, None, False, spec.describe())


def make_test_function(a, p: float, N: int = DEFAULT_DEGREE, tol: float | None = None) -> AnalyticFn:
    """The unit-norm test function ``(1-|a|^2)^{1/p} / (1 - conj(a) z)^{2/p}``.

    With ``tol`` given, the truncation degree must make the series tail at
    ``r_eval(N)`` smaller than ``tol``.
    """
    a = disc_point(a)
    if p < 1:
        raise ValueError("exponent p must be >= 1")
    if N < 1:
        raise ValueError("truncation degree must be >= 1")
    beta = 2.0 / p
    scale = (a.gap * (2.0 - a.gap)) ** (1.0 / p)
    form = KernelPower(a, beta, scale)
    c = kernel_coeffs(a, beta, scale, N)
    f = AnalyticFn(c, form, a.gap == 1.0, "f_a", {"a": a, "p": p})
    if tol is not None and not f.exact:
        bound = f.tail_bound(r_eval(N))
        if bound > tol:
            raise ValueError(f"degree {N} too small: tail bound {bound:.3g} exceeds {tol:.3g}")
    return f


def compose_with_mobius(g: AnalyticFn, a, theta: float) -> complex:
    """``g(sigma_a(e^{i theta})) - g(a)``.

    Raises when ``sigma_a(e^{i theta})`` lands on a singular point of ``g``
    to within the rounding of ``theta`` magnified by ``|sigma_a'|``.
    """
    a = disc_point(a)
    form = g.boundary_form()
    # sigma_a(e^{it}) = -e^{it} w / conj(w) with w = 1 - a e^{-it}
    w = complex(one_minus(a.gap, a.angle - theta))
    image = theta + math.pi + 2.0 * math.atan2(w.imag, w.real)
    spread = 64 * np.finfo(float).eps * (1.0 + abs(theta)) * a.gap * (2.0 - a.gap) / abs(w) ** 2
    for fc in form.foci():
        if fc.singular and float(cyclic_distance(image, fc.angle)) <= spread:
            raise ValueError("sigma_a(e^{i theta}) hits a boundary singularity of g")
    val = complex(form.evaluate(0.0, image) - form.evaluate(a.gap, a.angle))
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise ValueError("sigma_a(e^{i theta}) hits a boundary singularity of g")
    return val


@dataclass(frozen=True)
class CandidateSequence:
    """Points ``a_k`` of increasing modulus tending to ``exp(i*omega_arg)``."""

    omega_arg: float
    points: tuple
    name: str = ""

    def __post_init__(self):
        pts = tuple(p if isinstance(p, DiscPoint) else DiscPoint.from_complex(p) for p in self.points)
        object.__setattr__(self, "points", pts)
        gaps = np.array([p.gap for p in pts])
        if np.any(gaps <= 0):
            raise ValueError("candidate points must lie inside the disc")
        if np.any(np.diff(gaps) >= 0):
            raise ValueError("candidate moduli must be strictly increasing")

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def head(self, n: int) -> "CandidateSequence":
        return CandidateSequence(self.omega_arg, self.points[:n], f"{self.name}[:{n}]")

    def to_dict(self) -> dict:
        return {"name": self.name, "omega_arg": self.omega_arg,
                "points": [p.to_dict() for p in self.points]}

    @classmethod
    def from_dict(cls, d) -> "CandidateSequence":
        return cls(float(d["omega_arg"]), tuple(DiscPoint.from_dict(p) for p in d["points"]), d.get("name", ""))


def geometric_path(k_max: int, base: float = 2.0, omega_arg: float = 0.0, k_min: int = 1) -> CandidateSequence:
    """``a_k = (1 - base**-k) exp(i omega_arg)`` for ``k_min <= k <= k_max``.

    Gaps are stored exactly, so ``k`` may run far past 53.
    """
    pts = tuple(DiscPoint(float(base) ** -k, omega_arg) for k in range(k_min, k_max + 1))
    return CandidateSequence(omega_arg, pts, f"geometric(base={base:g},k={k_min}..{k_max},omega={omega_arg:g})")
