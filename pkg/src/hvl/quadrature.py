"""Quadrature rules on the unit circle and along radii of the disc.

Everything that integrates over the boundary goes through two rules:

* a uniform (half-open, offset) trapezoid rule, spectrally accurate for
  smooth periodic integrands; and
* a composite Gauss-Legendre rule on panels graded geometrically toward a
  set of focus angles.  A focus is the boundary direction of a near
  singularity together with its distance to the circle (its *scale*); a
  focus of scale 0 is a genuine boundary singularity and the panels next to
  it are truncated at a floor width.

Angles are plain floats measured from the positive real axis.  Points of the
closed disc are handled in *polar-gap* form ``(gap, angle)`` with
``gap = 1 - |z|`` so that points at distance 1e-80 from the circle keep
full relative precision.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

TWO_PI = 2.0 * np.pi

# Foci further than this from the circle do not concentrate anything.
_DIFFUSE_SCALE = 0.5
# Ladder refinement below a non-singular focus scale.
_LADDER_DEPTH = 2.0 ** -8
# Baseline panel width away from all foci.
_BASE_WIDTH = np.pi / 8


class QuadratureError(RuntimeError):
    """Raised when a rule cannot reach its tolerance within its caps."""


@dataclass(frozen=True)
class Focus:
    angle: float
    scale: float

    @property
    def singular(self) -> bool:
        return self.scale == 0.0


@functools.lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes, weights and cumulative-integration matrix on [-1, 1].

    ``S[i, j]`` integrates the j-th Lagrange basis polynomial from -1 to
    the i-th node, so ``S @ values`` is the antiderivative at the nodes.
    """
    x, w = legendre.leggauss(n)
    vander = legendre.legvander(x, n - 1)
    basis = np.linalg.inv(vander)
    antider = legendre.legint(basis, lbnd=-1, axis=0)
    S = legendre.legvander(x, n) @ antider
    return x, w, S


def one_minus(gap, angle):
    """Return ``1 - (1 - gap) * exp(i*angle)`` without cancellation."""
    gap = np.asarray(gap, dtype=float)
    angle = np.asarray(angle, dtype=float)
    half = 0.5 * angle
    rot = np.exp(1j * angle)
    return -2j * np.sin(half) * np.exp(1j * half) + gap * rot


def combine_gaps(g1, g2):
    """Gap of the product of two disc points with gaps ``g1`` and ``g2``."""
    return g1 + g2 - g1 * g2


def cyclic_distance(a, b):
    d = np.abs(np.asarray(a, dtype=float) - b)
    return np.where(d > np.pi, np.abs(np.remainder(d + np.pi, TWO_PI) - np.pi), d)


def focus_distance(angles, foci) -> np.ndarray:
    """Distance of boundary angles to the nearest focus (angle offset plus scale)."""
    angles = np.asarray(angles, dtype=float)
    out = np.full(angles.shape, np.inf)
    for f in foci:
        out = np.minimum(out, cyclic_distance(angles, f.angle) + f.scale)
    return out


def trapezoid_nodes(M: int, center: float = 0.0) -> np.ndarray:
    """Offset uniform nodes; never hits ``center`` exactly."""
    return center + TWO_PI * (np.arange(M) + 0.5) / M - np.pi


# ---------------------------------------------------------------------------
# graded boundary meshes


@dataclass
class CircleMesh:
    """Composite Gauss-Legendre mesh over a union of angular intervals.

    Panel ``i`` spans ``anchor[i] + [lo[i], hi[i]]``.  Panels near a focus
    are anchored at the focus angle itself, so offsets far below the
    resolution of the absolute angle (1e-60, say) stay exact.  ``weights``
    integrate d-theta, not normalized measure.  ``pieces`` lists
    ``(start, stop, side)`` panel ranges that are contiguous, free of
    singular points and have foci at most at one end; ``side`` names the
    end away from the foci ("L" or "R"), where an along-the-circle
    antiderivative should start.
    """

    order: int
    anchor: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    pieces: list
    foci: tuple
    floor: float

    @property
    def half(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.hi + self.lo)

    @property
    def offsets(self) -> np.ndarray:
        x, _, _ = gauss_legendre(self.order)
        return (self.mid[:, None] + self.half[:, None] * x[None, :]).ravel()

    @property
    def anchors(self) -> np.ndarray:
        return np.repeat(self.anchor, self.order)

    @property
    def nodes(self) -> np.ndarray:
        """Absolute node angles (rounded; use anchors/offsets for precision)."""
        return self.anchors + self.offsets

    @property
    def weights(self) -> np.ndarray:
        _, w, _ = gauss_legendre(self.order)
        return (self.half[:, None] * w[None, :]).ravel()

    @property
    def size(self) -> int:
        return self.lo.size * self.order

    def refined(self) -> "CircleMesh":
        """Same panels, twice the Gauss order."""
        return CircleMesh(2 * self.order, self.anchor, self.lo, self.hi, self.pieces, self.foci, self.floor)

    def split(self) -> "CircleMesh":
        """Bisect every panel (same order)."""
        anchor = np.repeat(self.anchor, 2)
        lo = np.column_stack([self.lo, self.mid]).ravel()
        hi = np.column_stack([self.mid, self.hi]).ravel()
        pieces = [(2 * a, 2 * b, side) for a, b, side in self.pieces]
        return CircleMesh(self.order, anchor, lo, hi, pieces, self.foci, self.floor)

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))


def as_interval(iv):
    """Normalize ``(lo, hi)`` or ``(anchor, lo, hi)`` to the anchored triple."""
    if len(iv) == 3:
        return float(iv[0]), float(iv[1]), float(iv[2])
    return 0.0, float(iv[0]), float(iv[1])


def _zone_radius(d: float, others, lo: float, hi: float) -> float:
    gap = min([abs(d - o) for o in others] + [np.pi])
    R = np.pi / 4
    while 2 * R > gap and R > 1e-300:
        R *= 0.5
    return R


def graded_mesh(intervals, foci, order: int = 16, floor: float | None = None) -> CircleMesh:
    """Build a mesh over ``intervals`` graded toward ``foci``.

    ``intervals`` holds ``(lo, hi)`` angle pairs or anchored triples
    ``(anchor, lo, hi)``.  Panel widths shrink geometrically (ratio 1/2)
    toward every focus angle, down to ``scale * 2**-8`` for a near
    singularity and to ``floor`` for a genuine boundary singularity.  The
    panels touching a singular point are dropped; the caller chooses
    ``floor`` so that their mass is negligible.
    """
    foci = tuple(f for f in foci if f.scale < _DIFFUSE_SCALE)
    intervals = [as_interval(iv) for iv in intervals]
    intervals = [iv for iv in intervals if iv[2] > iv[1]]
    if floor is None:
        scales = [f.scale for f in foci if f.scale > 0]
        widths = [hi - lo for _, lo, hi in intervals]
        floor = 1e-20 * min(scales + widths + [np.pi])

    anchors, los, his, pieces = [], [], [], []
    for A, lo, hi in intervals:
        # focus images in offsets relative to A, grouped by exact position
        groups: dict[float, list] = {}
        for f in foci:
            base_d = f.angle - A if f.angle == A else float(np.remainder(f.angle - A + np.pi, TWO_PI) - np.pi)
            for k in (-1, 0, 1):
                d = base_d + k * TWO_PI
                if d + np.pi / 4 < lo or d - np.pi / 4 > hi:
                    continue
                groups.setdefault(d, []).append((f, k))
        zones = []
        for d, members in sorted(groups.items()):
            R = _zone_radius(d, [o for o in groups if o != d], lo, hi)
            depth = min(floor if f.singular else max(f.scale * _LADDER_DEPTH, floor) for f, _ in members)
            singular = any(f.singular for f, _ in members)
            f0 = members[0][0]
            zones.append((d, R, depth, singular, f0.angle))

        # outer breakpoints in offsets relative to A
        pts = [lo, hi, *np.arange(lo, hi, _BASE_WIDTH)[1:]]
        pts = np.asarray(pts)
        for d, R, *_ in zones:
            pts = pts[np.abs(pts - d) >= R + _BASE_WIDTH / 4]
        edges = [e for d, R, *_ in zones for e in (d - R, d + R) if lo < e < hi]
        pts = np.unique(np.concatenate([pts, edges, [lo, hi]]))
        pts = pts[(pts >= lo) & (pts <= hi)]

        # (sort key, anchor, lo, hi, drop, starts_piece, side)
        panels = []
        prev_zone = True
        for a, b in zip(pts[:-1], pts[1:]):
            m = 0.5 * (a + b)
            if b > a and not any(abs(m - d) < R for d, R, *_ in zones):
                panels.append((m, A, a, b, False, prev_zone, "L"))
                prev_zone = False
            else:
                prev_zone = True
        for d, R, depth, singular, angle in zones:
            s_lo, s_hi = max(lo - d, -R), min(hi - d, R)
            if s_hi <= s_lo:
                continue
            h, ladder = R, [0.0]
            while h >= depth:
                ladder += [-h, h]
                h *= 0.5
            s = np.unique(np.concatenate([ladder, [s_lo, s_hi]]))
            s = s[(s >= s_lo) & (s <= s_hi)]
            # anchored at the focus angle itself: periodicity makes the image irrelevant
            first_right = True
            for i, (a, b) in enumerate(zip(s[:-1], s[1:])):
                if b <= a:
                    continue
                right = a >= 0.0
                start = i == 0 or (right and first_right)
                if right:
                    first_right = False
                drop = singular and (a == 0.0 or b == 0.0)
                # each half-zone is integrated from its far end toward the focus
                panels.append((d + 0.5 * (a + b), angle, a, b, drop, start, "R" if right else "L"))
        panels.sort(key=lambda t: t[0])
        start, side = len(los), "L"
        for _, anc, a, b, drop, new_piece, pside in panels:
            if drop or new_piece:
                if len(los) > start:
                    pieces.append((start, len(los), side))
                start, side = len(los), pside
                if drop:
                    continue
            anchors.append(anc)
            los.append(a)
            his.append(b)
        if len(los) > start:
            pieces.append((start, len(los), side))

    arr = lambda v: np.asarray(v, dtype=float)
    return CircleMesh(order, arr(anchors), arr(los), arr(his), pieces, foci, float(floor))


def cumulative_integral(mesh: CircleMesh, values: np.ndarray) -> np.ndarray:
    """Antiderivative of ``values`` (sampled at ``mesh.nodes``) within each piece.

    The result vanishes at the piece's start side: for side "L" it is
    ``int_{left}^t``, for side "R" it is ``-int_t^{right}``.  Either way the
    difference of two entries of one piece is the integral between them,
    and partial sums grow toward the foci rather than away from them.
    """
    _, w, S = gauss_legendre(mesh.order)
    P = mesh.lo.size
    V = values.reshape(P, mesh.order)
    local = (V @ S.T) * mesh.half[:, None]
    totals = (V @ w) * mesh.half
    out = np.empty_like(local)
    for start, stop, side in mesh.pieces:
        t = totals[start:stop]
        if side == "L":
            offsets = np.concatenate([[0.0], np.cumsum(t[:-1])])
            out[start:stop] = local[start:stop] + offsets[:, None]
        else:
            after = np.concatenate([np.cumsum(t[::-1])[::-1][1:], [0.0]])
            out[start:stop] = -((t[:, None] - local[start:stop]) + after[:, None])
    return out.ravel()


# ---------------------------------------------------------------------------
# radial quadrature


def radial_panels(eta: float) -> int:
    """Number of geometric panels toward s = 1 needed for scale ``eta``."""
    if not eta > 0:
        raise QuadratureError("radial integral along a singular direction")
    return int(np.clip(np.ceil(np.log2(1.0 / eta)) + 4, 2, 1100))


def _radial_rule(K: int, n: int):
    """Nodes/weights in sigma = 1 - s on [0, 1], graded toward sigma = 0."""
    x, w, _ = gauss_legendre(n)
    edges = np.concatenate([[0.0], 2.0 ** -np.arange(K, -1, -1.0)])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def radial_integral(integrand, gap, angle, eta, offset=0.0, tol: float = 1e-13,
                    order: int = 16, max_order: int = 128, batch: int = 256):
    """Integrate ``F`` along the radius to each point.

    For a point ``z = (1 - gap) e^{i (angle + offset)}`` this returns
    ``int_0^1 F(s z) ds`` where ``integrand(g, angle, offset)`` evaluates
    ``F`` at the points of gap ``g`` on that ray.  ``eta`` is the distance from each
    point to the nearest singularity of ``F`` and sets the grading depth.
    The Gauss order doubles until two successive orders agree to ``tol``
    (relative) or ``max_order`` is reached.

    Returns ``(values, error_estimates)``.
    """
    gap = np.atleast_1d(np.asarray(gap, dtype=float))
    angle = np.atleast_1d(np.asarray(angle, dtype=float))
    gap, angle, offset = np.broadcast_arrays(gap, angle, np.asarray(offset, dtype=float))
    eta = np.broadcast_to(np.asarray(eta, dtype=float), gap.shape)
    K = np.array([radial_panels(e) for e in eta.ravel()]).reshape(gap.shape)
    out = np.zeros(gap.shape, dtype=complex)
    err = np.zeros(gap.shape)

    def run(idx, n, k):
        sig, wts = _radial_rule(k, n)
        g = combine_gaps(sig[None, :], gap[idx][:, None])
        vals = integrand(g, np.broadcast_to(angle[idx][:, None], g.shape),
                         np.broadcast_to(offset[idx][:, None], g.shape))
        return vals @ wts

    for k in np.unique(K):
        sel = np.flatnonzero(K == k)
        for s in range(0, sel.size, batch):
            idx = sel[s:s + batch]
            n = order
            prev = run(idx, n, k)
            while True:
                n *= 2
                cur = run(idx, n, k)
                diff = np.abs(cur - prev)
                if np.all(diff <= tol * np.abs(cur) + 1e-300) or n >= max_order:
                    break
                prev = cur
            out[idx] = cur
            err[idx] = diff
    return out, err
