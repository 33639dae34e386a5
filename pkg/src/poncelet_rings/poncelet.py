"""Numerical construction of Poncelet polygons.

A polygon inscribed in an outer ellipse and circumscribed about a nested
caustic is built by tangent-chord iteration (the elliptic billiard map).
The caustic that makes an m-gon with winding number q close up is found
by bisection inside a confocal family; by the porism, once it closes for
one start point it closes for every start point, which is what makes the
configurations downstream movable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import acos, atan2, cos, gcd, pi, sin, sqrt, tau

import numpy as np

from .errors import (
    ClosureFailure,
    GeometryError,
    NoConvergence,
    PointInsideConic,
    PointNotOnConic,
    PointOnConic,
    RotationNumberOutOfRange,
)
from .projective import (
    Conic,
    Line,
    Point,
    adjugate,
    cross,
    join,
    line_conic_intersection,
    matvec,
    point_distance,
)
from .tolerances import DEFAULT, Tolerances


class ConfocalFamily:
    """Ellipses x^2/(A-lam) + y^2/(B-lam) = 1 for lam in [0, B).

    All members share foci; their adjugates are pairwise linearly
    dependent, which is the co-dependence the grid theorems need.
    A == B is allowed and treated as the circle special case.
    """

    def __init__(self, A: float, B: float):
        if not (A >= B > 0):
            raise ValueError(f"need A >= B > 0, got A={A}, B={B}")
        self.A = float(A)
        self.B = float(B)

    @property
    def is_circle(self) -> bool:
        return self.A == self.B

    def member(self, lam: float) -> Conic:
        if not 0 <= lam < self.B:
            raise ValueError(f"lam={lam} outside [0, {self.B})")
        return Conic(np.diag([1 / (self.A - lam), 1 / (self.B - lam), -1.0]))

    @property
    def outer(self) -> Conic:
        return self.member(0.0)

    def __repr__(self):
        return f"ConfocalFamily(A={self.A}, B={self.B})"


class Ring:
    """Cyclic sequence of m points or m lines; indices wrap mod m."""

    __slots__ = ("elements", "kind", "label", "meta")

    def __init__(self, elements, kind: str, label: str = "", meta=None):
        if kind not in ("points", "lines"):
            raise ValueError(f"bad ring kind {kind!r}")
        self.elements = tuple(elements)
        self.kind = kind
        self.label = label
        self.meta = dict(meta or {})

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i % len(self.elements)]

    def __iter__(self):
        return iter(self.elements)

    def shifted(self, k: int) -> "Ring":
        m = len(self.elements)
        return Ring([self[i + k] for i in range(m)], self.kind, self.label,
                    self.meta)

    def __repr__(self):
        return f"Ring({self.label or self.kind}, m={len(self.elements)})"


def _ellipse_axes(C: Conic):
    """Semi-axes of a diagonal ellipse conic; sign-normalize so c3 < 0."""
    m = np.asarray(C.m)
    if np.abs(m - np.diag(np.diag(m))).max() > 1e-9:
        raise GeometryError("expected a diagonal (axis-aligned) conic")
    d = np.diag(m).copy()
    if d[2] > 0:
        d = -d
    if not (d[0] > 0 and d[1] > 0 and d[2] < 0):
        raise GeometryError("expected a real ellipse centered at the origin")
    return sqrt(-d[2] / d[0]), sqrt(-d[2] / d[1])


def point_at_angle(C: Conic, t: float) -> Point:
    """Point on a diagonal ellipse at eccentric angle t."""
    a, b = _ellipse_axes(C)
    return Point([a * cos(t), b * sin(t), 1.0])


def _angle_of(p: Point, C: Conic) -> float:
    a, b = _ellipse_axes(C)
    x, y = p.affine()
    return atan2(y / b, x / a)


def tangent_lines_from_point(p: Point, C: Conic,
                             tols: Tolerances = DEFAULT):
    """Both tangents from an exterior point, counterclockwise branch first.

    The forward branch is the one whose touch point lies ahead of p in
    counterclockwise order around the (origin-centered) conic.
    """
    pv = np.asarray([float(x) for x in p.v])
    grad = np.asarray(C.m) @ pv
    # first-order distance estimate; robust for badly scaled conics
    if abs(float(pv @ grad)) < tols.incidence * max(np.linalg.norm(grad), 1e-300):
        raise PointOnConic(f"{p} lies on the conic; use tangent_at")
    # two independent lines through p span the pencil
    e = np.eye(3)
    idx = np.argsort([np.linalg.norm(np.cross(pv, ei)) for ei in e])
    l1 = np.cross(pv, e[idx[-1]])
    l2 = np.cross(pv, e[idx[-2]])
    adj = np.asarray(adjugate(C.m))
    a = float(l2 @ adj @ l2)
    b = 2.0 * float(l1 @ adj @ l2)
    c = float(l1 @ adj @ l1)
    disc = b * b - 4 * a * c
    scale = max(abs(a), abs(b), abs(c), 1e-300)
    if disc < 1e-12 * scale * scale:
        raise PointInsideConic(f"{p} has no real tangents to the conic")
    r = sqrt(disc)
    qq = -(b + np.copysign(r, b if b != 0 else 1.0)) / 2.0
    if abs(a) < 1e-14 * scale:
        mus = [-c / b]
        lines = [Line(l1 + mus[0] * l2), Line(l2)]
    else:
        lines = [Line(l1 + (qq / a) * l2), Line(l1 + (c / qq) * l2)]

    def touch(l):
        return Point(adj @ np.asarray([float(x) for x in l.v]))

    q0, q1 = touch(lines[0]), touch(lines[1])
    x, y = p.affine()

    def ccw(q):
        qx, qy = q.affine()
        return x * qy - y * qx

    if ccw(q0) < ccw(q1):
        lines = [lines[1], lines[0]]
    return lines[0], lines[1]


def poncelet_step(p: Point, incoming, outer: Conic, caustic: Conic,
                  tols: Tolerances = DEFAULT):
    """One tangent-chord step: (next point, forward tangent line).

    With incoming=None the counterclockwise branch starts the chain;
    otherwise the forward tangent is the one that is not the incoming
    edge, and the next vertex is the intersection with the outer conic
    that is not p itself.
    """
    if outer.residual_at(p) > 1e-6:
        raise PointNotOnConic(f"residual {outer.residual_at(p):.2e} on outer")
    fwd, back = tangent_lines_from_point(p, caustic, tols)
    if incoming is not None:
        if fwd.same_as(incoming, tol=1e-7):
            fwd = back
    a, b = line_conic_intersection(outer, fwd)
    nxt = b if a.same_as(p, tol=1e-7) else a
    if nxt.same_as(p, tol=1e-9):
        raise GeometryError("tangent line meets the outer conic only at p")
    return nxt, fwd


def _winding(family: ConfocalFamily, lam: float, m: int, t0: float = 0.0):
    """Total winding angle of m billiard steps and the closure residual."""
    outer = family.outer
    caustic = family.member(lam)
    p0 = point_at_angle(outer, t0)
    p, incoming = p0, None
    theta = _angle_of(p0, outer)
    total = 0.0
    for _ in range(m):
        p, incoming = poncelet_step(p, incoming, outer, caustic)
        th = _angle_of(p, outer)
        d = (th - theta) % tau
        total += d
        theta = th
    return total, point_distance(p, p0)


def rotation_number(family: ConfocalFamily, lam: float, N: int = 1000) -> float:
    """Winding fraction of the billiard map on the member caustic.

    Circles admit the closed form arccos(r)/pi with r the caustic/outer
    radius ratio; ellipses are iterated N steps (estimator error O(1/N)).
    """
    if not 0 < lam < family.B:
        raise ValueError(f"lam={lam} outside (0, {family.B})")
    if family.is_circle:
        return acos(sqrt((family.A - lam) / family.A)) / pi
    total, _ = _winding(family, lam, N)
    return total / (tau * N)


def solve_caustic(family: ConfocalFamily, m: int, q: int,
                  tols: Tolerances = DEFAULT) -> float:
    """Caustic parameter closing an (m, q) polygon, by bisection.

    The oracle is the sign of the m-step winding defect (winding minus
    2 pi q), which is monotone in lam and vanishes exactly at closure,
    so the fine phase is driven by the actual polygon rather than a
    rotation-number estimate.
    """
    if m < 7:
        raise ValueError(f"need m >= 7, got {m}")
    if not (1 <= q < m / 2) or gcd(q, m) != 1:
        raise ValueError(f"need 1 <= q < m/2 with gcd(q, m)=1, got q={q}")
    target = tau * q
    lo = family.B * 1e-6
    hi = family.B * (1 - 1e-9)

    def defect(lam):
        total, _ = _winding(family, lam, m)
        return total - target

    dlo, dhi = defect(lo), defect(hi)
    if not (dlo < 0 < dhi):
        raise RotationNumberOutOfRange(
            f"q/m={q}/{m} outside the attainable winding range"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if defect(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    lam = 0.5 * (lo + hi)
    _, residual = _winding(family, lam, m)
    if residual > 1e-9:
        raise NoConvergence(
            f"closure residual {residual:.3e} after bisection on lam"
        )
    return lam


@dataclass(frozen=True)
class PonceletPair:
    """A closing (outer, caustic) pair with its combinatorial data."""

    outer: Conic
    caustic: Conic
    m: int
    winding: int = 1
    t0: float = 0.0

    def __post_init__(self):
        if self.m < 7:
            raise ValueError(f"need m >= 7, got {self.m}")
        if gcd(self.winding, self.m) != 1 or not 1 <= self.winding < self.m / 2:
            raise ValueError(f"bad winding {self.winding} for m={self.m}")

    @classmethod
    def solve(cls, family: ConfocalFamily, m: int, q: int = 1,
              t0: float = 0.0) -> "PonceletPair":
        lam = solve_caustic(family, m, q)
        return cls(family.outer, family.member(lam), m, q, t0)


def build_polygon(pair: PonceletPair, tols: Tolerances = DEFAULT) -> Ring:
    """The m vertices on the outer conic, counterclockwise from t0.

    Raises ClosureFailure when the chain does not return to the start
    within the closure tolerance (wrong caustic, or inexact pair).
    """
    p0 = point_at_angle(pair.outer, pair.t0)
    pts = [p0]
    p, incoming = p0, None
    for _ in range(pair.m):
        p, incoming = poncelet_step(p, incoming, pair.outer, pair.caustic,
                                    tols)
        pts.append(p)
    residual = point_distance(pts[-1], p0)
    if residual > tols.closure:
        raise ClosureFailure(
            f"m={pair.m} chain misses its start by {residual:.3e}"
        )
    return Ring(pts[:-1], "points", label="P0",
                meta={"closure_residual": residual, "m": pair.m,
                      "winding": pair.winding, "t0": pair.t0})
