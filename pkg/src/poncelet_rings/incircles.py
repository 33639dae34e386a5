"""Incircles of square cells in a confocal line grid.

Everything here works in the confocal chart: axis-aligned ellipses
centered at the origin.  Lines are oriented so the origin is on their
positive side, which makes cells of the arrangement addressable by a
sign vector.  A combinatorial square cell of type (k, l) is bounded by
the grid lines a, a+l, a+k, a+k+l and always circumscribes a circle;
the circle centers, swept over the ring index, are the points of a
pre-(n4) configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import hypot

import numpy as np

from .celestial import CelestialSymbol, ConfigurationScene, audit_incidences
from .errors import GeometryError, LineThroughCenter, NoIncircle
from .poncelet import Ring
from .projective import Conic, Line, Point, incidence_residual, join, meet, \
    tangent_at
from .tolerances import DEFAULT, Tolerances


class OrientedLine:
    """A line scaled to unit direction norm with the origin positive.

    The stored vector (a, b, c) has a^2 + b^2 = 1 and c > 0, so
    a*x + b*y + c is the signed distance of the affine point (x, y),
    positive on the side of the origin.
    """

    __slots__ = ("v",)

    def __init__(self, coords, tols: Tolerances = DEFAULT):
        v = np.asarray([float(x) for x in coords], dtype=float)
        n = hypot(v[0], v[1])
        if n < 1e-300:
            raise GeometryError("the line at infinity cannot be oriented")
        v = v / n
        if abs(v[2]) < tols.incidence:
            raise LineThroughCenter(
                f"line {coords} passes through the origin"
            )
        if v[2] < 0:
            v = -v
        self.v = v

    def signed_distance(self, p: Point) -> float:
        x, y = p.affine()
        return float(self.v[0] * x + self.v[1] * y + self.v[2])

    def line(self) -> Line:
        return Line(self.v)

    def __repr__(self):
        return f"OrientedLine({self.v[0]:.4f}, {self.v[1]:.4f}, {self.v[2]:.4f})"


def orient_ring(L: Ring, tols: Tolerances = DEFAULT) -> Ring:
    """Orient every line of a ring positively toward the origin."""
    if L.kind != "lines":
        raise ValueError("orient_ring expects a ring of lines")
    oriented = [OrientedLine([float(x) for x in l.v], tols) for l in L]
    return Ring(oriented, "lines", label=f"oriented({L.label})", meta=L.meta)


@dataclass
class SquareCell:
    """Cell H_a+ n H_{a+l}- n H_{a+k}- n H_{a+k+l}+ of a line grid.

    lines are ordered (a, a+l, a+k, a+k+l) and signs give the halfspace
    each one contributes; the two rewritings of the cell as a pair of
    double wedges correspond to reading the same four lines with k and
    l exchanged.
    """

    lines: tuple
    signs: tuple = (1, -1, -1, 1)
    a: int = 0
    k: int = 0
    l: int = 0

    @classmethod
    def from_ring(cls, oriented: Ring, a: int, k: int, l: int) -> "SquareCell":
        if k == l:
            raise ValueError("cell type needs k != l")
        return cls((oriented[a], oriented[a + l],
                    oriented[a + k], oriented[a + k + l]),
                   (1, -1, -1, 1), a, k, l)

    def corners_on_ring(self, which: str = "k"):
        """The two opposite corners on the grid ring k (or l).

        For "k" these are the meets of line pairs with index difference
        k; they lie on the grid conic C_k.
        """
        la, lb, lc, ld = (l.line() for l in self.lines)
        if which == "k":
            return meet(la, lc), meet(lb, ld)
        if which == "l":
            return meet(la, lb), meet(lc, ld)
        raise ValueError("which must be 'k' or 'l'")


@dataclass
class Incircle:
    center: Point
    radius: float
    residual: float           # least-squares gap of the distance system
    through_infinity: bool    # center realized on the antipodal branch


def incircle(cell: SquareCell, tols: Tolerances = DEFAULT) -> Incircle:
    """Circle tangent to the four cell lines with the cell's signs.

    The center and radius solve a_i x + b_i y + c_i = s_i r for the
    four oriented lines; three equations are independent so the fourth
    must be consistent, which happens exactly when the lines bound a
    Poncelet-grid square cell.
    """
    A = np.asarray([[l.v[0], l.v[1], -float(s)]
                    for l, s in zip(cell.lines, cell.signs)])
    rhs = np.asarray([-l.v[2] for l in cell.lines])
    sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < 3:
        raise NoIncircle("cell lines do not determine a circle")
    residual = float(np.linalg.norm(A @ sol - rhs))
    if residual > 1e-8:
        raise NoIncircle(
            f"equal-distance system inconsistent by {residual:.3e}"
        )
    x, y, r = (float(t) for t in sol)
    if r == 0.0:
        raise NoIncircle("degenerate zero-radius incircle")
    # a negative r means the cell wraps through infinity and the center
    # sits on the negative (antipodal) part; same circle, flipped sign
    return Incircle(Point([x, y, 1.0]), abs(r), residual, r < 0)


def incircle_center_via_tangents(cell: SquareCell, conic_k: Conic,
                                 tols: Tolerances = DEFAULT) -> Point:
    """Center of the cell's incircle from tangents, not distances.

    The two opposite corners with index difference k lie on the grid
    conic C_k, and the tangents there are the angle bisectors of the
    cell's sides, so they intersect in the incircle center.  Agreement
    with incircle().center validates the tangency argument; it holds
    only for the grid conic actually carrying the corners, not for any
    confocal conic through them.
    """
    p, q = cell.corners_on_ring("k")
    tp = tangent_at(conic_k, p, tol=1e-6)
    tq = tangent_at(conic_k, q, tol=1e-6)
    return meet(tp, tq)


def confocal_through(A: float, B: float, p: Point):
    """Members of the confocal family x^2/(A-t) + y^2/(B-t) = 1 through p.

    A generic point lies on two members: an ellipse (t < B) and a
    hyperbola (B < t < A).  Returns the list of the real ones.
    """
    x, y = p.affine()
    # (A-t)(B-t) = x^2 (B-t) + y^2 (A-t), a quadratic in t
    roots = np.roots([1.0, -(A + B) + x * x + y * y,
                      A * B - x * x * B - y * y * A])
    out = []
    for t in sorted(float(r) for r in roots if abs(r.imag) < 1e-12):
        if abs(A - t) < 1e-12 or abs(B - t) < 1e-12:
            continue
        out.append(Conic(np.diag([1 / (A - t), 1 / (B - t), -1.0])))
    return out


def _center_ring(oriented: Ring, k: int, l: int,
                 tols: Tolerances = DEFAULT) -> Ring:
    m = len(oriented)
    pts = []
    for i in range(m):
        pts.append(incircle(SquareCell.from_ring(oriented, i, k, l),
                            tols).center)
    return Ring(pts, "points", label=f"centers({k},{l})",
                meta={"k": k, "l": l})


def centers_scene(L: Ring, a: int, b: int, c: int,
                  tols: Tolerances = DEFAULT) -> ConfigurationScene:
    """Incircle centers of cell types (a,b), (b,c), (c,a) and their lines.

    Circles tangent to the same two grid lines {i, i+x} have collinear
    centers; each such line carries four of the 3m centers, giving a
    pre-(n4) configuration.  The closure_residual field records the
    worst four-center collinearity gap instead of a chain closure.
    """
    m = len(L)
    if len({a, b, c}) != 3:
        raise ValueError("shifts must be distinct")
    for x in (a, b, c):
        if not 1 <= x < m / 2:
            raise ValueError(f"shift {x} outside [1, {m}/2)")
    oriented = orient_ring(L, tols)
    rings = {}
    for k, l in ((a, b), (b, c), (c, a)):
        rings[(k, l)] = _center_ring(oriented, k, l, tols)
    # the centers tangent to grid lines {i, i+x}: letter x plays the
    # k role in (x, y) and the l role in (z, x), cyclically
    cyc = {a: ((a, b), b, (c, a), c),
           b: ((b, c), c, (a, b), a),
           c: ((c, a), a, (b, c), b)}
    line_rings = []
    worst = 0.0
    for x in (a, b, c):
        (kp, off1, lp, off2) = cyc[x]
        lines = []
        for i in range(m):
            quad = [rings[kp][i], rings[kp][i - off1],
                    rings[lp][i], rings[lp][i - off2]]
            lam = join(quad[0], quad[1])
            for pt in quad:
                worst = max(worst, incidence_residual(lam, pt))
            lines.append(lam)
        line_rings.append(Ring(lines, "lines", label=f"axis({x})",
                               meta={"letter": x}))
    audit = audit_incidences(list(rings.values()), line_rings, 4, tols)
    sym = CelestialSymbol(m, ((a, b), (c, a), (b, c)))
    return ConfigurationScene(sym, list(rings.values()), line_rings, [],
                              worst, 0, worst, audit)
