"""Homogeneous-coordinate primitives over two scalar backends.

Floating point (numpy float64) is the construction backend; exact
arithmetic (``fractions.Fraction``) backs the certification oracle.  Both
run through the same operations wherever the algebra is rational
(join/meet/tangents/adjugates); square roots exist only on the float side.

Canonical form is applied after every operation: unit Euclidean norm with
the largest-magnitude entry positive (float), or coprime integers with the
first nonzero entry positive (exact).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

from .errors import (
    CoincidentLines,
    CoincidentPoints,
    ComplexIntersection,
    DegenerateConic,
    DegeneratePointSet,
    NotGenericPosition,
    PointNotOnConic,
)
from .tolerances import DEFAULT, Tolerances

EQ_TOL = 1e-9  # projective equality of normalized float vectors


# ---------------------------------------------------------------------------
# scalar-generic vector helpers (3-vectors as tuples or numpy arrays)
# ---------------------------------------------------------------------------

def _is_exact_scalar(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def is_exact(v) -> bool:
    return all(_is_exact_scalar(x) for x in v)


def cross(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _canonical_exact(v):
    """Coprime integer entries, first nonzero entry positive."""
    fr = [Fraction(x) for x in v]
    if all(x == 0 for x in fr):
        raise ValueError("zero vector has no projective meaning")
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    for x in ints:
        if x != 0:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(Fraction(x) for x in ints)


def _canonical_float(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    n = np.linalg.norm(arr)
    if n == 0.0 or not np.isfinite(n):
        raise ValueError(f"cannot normalize vector {v!r}")
    arr = arr / n
    i = int(np.argmax(np.abs(arr)))
    if arr[i] < 0:
        arr = -arr
    return arr


def canonical(v):
    if is_exact(v):
        return _canonical_exact(v)
    return _canonical_float(v)


class _ProjVec:
    """Shared behaviour of points and lines (3-vectors up to scale)."""

    __slots__ = ("v",)

    def __init__(self, coords):
        self.v = canonical(coords)

    @property
    def exact(self) -> bool:
        return not isinstance(self.v, np.ndarray)

    def to_float(self):
        if self.exact:
            return type(self)([float(x) for x in self.v])
        return self

    def __iter__(self):
        return iter(self.v)

    def __getitem__(self, i):
        return self.v[i]

    def same_as(self, other, tol: float = EQ_TOL) -> bool:
        c = cross(self.v, other.v)
        if self.exact and other.exact:
            return all(x == 0 for x in c)
        a = np.asarray([float(x) for x in c])
        return float(np.linalg.norm(a)) < tol

    def affine(self):
        """Dehomogenized (x/z, y/z); float backend only."""
        x, y, z = (float(c) for c in self.v)
        return np.array([x / z, y / z])

    def __repr__(self):
        vals = ", ".join(str(x) for x in self.v)
        return f"{type(self).__name__}({vals})"


class Point(_ProjVec):
    pass


class Line(_ProjVec):
    pass


def point_distance(p: Point, q: Point) -> float:
    """Projective gap: norm of the cross product of unit representatives."""
    c = cross(p.v, q.v)
    return float(np.linalg.norm(np.asarray([float(x) for x in c])))


def incidence_residual(l: Line, p: Point) -> float:
    """|l.p| for unit-normalized vectors (0 means incident)."""
    if l.exact and p.exact:
        d = dot(l.v, p.v)
        return 0.0 if d == 0 else float(abs(d))
    lv = np.asarray([float(x) for x in l.v])
    pv = np.asarray([float(x) for x in p.v])
    return abs(float(lv @ pv)) / (np.linalg.norm(lv) * np.linalg.norm(pv))


# ---------------------------------------------------------------------------
# joins and meets
# ---------------------------------------------------------------------------

def join(p: Point, q: Point) -> Line:
    if p.same_as(q):
        raise CoincidentPoints(f"join of coincident points {p} and {q}")
    return Line(cross(p.v, q.v))


def meet(l: Line, m: Line) -> Point:
    if l.same_as(m):
        raise CoincidentLines(f"meet of coincident lines {l} and {m}")
    return Point(cross(l.v, m.v))


# ---------------------------------------------------------------------------
# conics
# ---------------------------------------------------------------------------

def _sym_matrix(rows):
    """Validate symmetry; return numpy array or tuple-of-tuples."""
    flat = [rows[i][j] for i in range(3) for j in range(3)]
    if is_exact(flat):
        m = tuple(tuple(Fraction(rows[i][j]) for j in range(3)) for i in range(3))
        for i in range(3):
            for j in range(i):
                if m[i][j] != m[j][i]:
                    raise ValueError("conic matrix must be symmetric")
        return m
    arr = np.asarray(rows, dtype=float)
    if not np.allclose(arr, arr.T, rtol=0, atol=1e-12 * max(1.0, np.abs(arr).max())):
        raise ValueError("conic matrix must be symmetric")
    return (arr + arr.T) / 2.0


def det3(m):
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def adjugate(m):
    """Classical adjugate; replaces the inverse in co-dependence tests."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    return (
        (e * i - f * h, c * h - b * i, b * f - c * e),
        (f * g - d * i, a * i - c * g, c * d - a * f),
        (d * h - e * g, b * g - a * h, a * e - b * d),
    )


def matvec(m, v):
    return tuple(m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2] for i in range(3))


class Conic:
    """Symmetric 3x3 quadratic form, up to scale.

    kind is "point" (p' C p = 0) or "dual" (l' C l = 0 for tangent lines).
    """

    __slots__ = ("m", "kind")

    def __init__(self, matrix, kind: str = "point"):
        if kind not in ("point", "dual"):
            raise ValueError(f"bad conic kind {kind!r}")
        m = _sym_matrix(matrix)
        if isinstance(m, np.ndarray):
            n = np.linalg.norm(m)
            if n == 0:
                raise ValueError("zero conic matrix")
            m = m / n
            i, j = np.unravel_index(np.argmax(np.abs(m)), m.shape)
            if m[i, j] < 0:
                m = -m
        else:
            flat = _canonical_exact([m[i][j] for i in range(3) for j in range(3)])
            m = tuple(tuple(flat[3 * i + j] for j in range(3)) for i in range(3))
        self.m = m
        self.kind = kind

    @property
    def exact(self) -> bool:
        return not isinstance(self.m, np.ndarray)

    @property
    def degenerate(self) -> bool:
        d = det3(self.m)
        if self.exact:
            return d == 0
        return abs(float(d)) < 1e-10  # matrix is Frobenius-normalized

    def to_float(self) -> "Conic":
        if not self.exact:
            return self
        return Conic([[float(x) for x in row] for row in self.m], self.kind)

    def residual_at(self, p: Point) -> float:
        """|p' C p| for unit-normalized matrix and point."""
        q = dot(matvec(self.m, p.v), p.v)
        if self.exact and p.exact:
            return 0.0 if q == 0 else float(abs(q))
        return abs(float(q))

    def contains(self, p: Point, tol: float = 1e-9) -> bool:
        if self.exact and p.exact:
            return dot(matvec(self.m, p.v), p.v) == 0
        return self.residual_at(p.to_float() if p.exact else p) < tol

    def dual(self) -> "Conic":
        """Adjugate form with the opposite kind."""
        return Conic(adjugate(self.m), "dual" if self.kind == "point" else "point")

    def same_as(self, other: "Conic", tol: float = 1e-9) -> bool:
        if self.exact and other.exact:
            a = [self.m[i][j] for i in range(3) for j in range(3)]
            b = [other.m[i][j] for i in range(3) for j in range(3)]
            for i in range(9):
                for j in range(i):
                    if a[i] * b[j] != a[j] * b[i]:
                        return False
            return True
        a = np.asarray([[float(x) for x in r] for r in self.m])
        b = np.asarray([[float(x) for x in r] for r in other.m])
        return min(np.linalg.norm(a - b), np.linalg.norm(a + b)) < tol

    def __repr__(self):
        return f"Conic({self.m!r}, kind={self.kind!r})"


def circle(radius: float = 1.0) -> Conic:
    return Conic([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -(radius ** 2)]])


def ellipse(a2: float, b2: float) -> Conic:
    """x^2/a2 + y^2/b2 = 1."""
    return Conic([[1.0 / a2, 0.0, 0.0], [0.0, 1.0 / b2, 0.0], [0.0, 0.0, -1.0]])


def tangent_at(C: Conic, p: Point, tol: float = 1e-9) -> Line:
    if C.degenerate:
        raise DegenerateConic("tangent_at needs a non-degenerate conic")
    if not C.contains(p, tol):
        raise PointNotOnConic(f"residual {C.residual_at(p):.3e} at {p}")
    return Line(matvec(C.m, p.v))


def touch_point(C: Conic, l: Line, tol: float = 1e-9) -> Point:
    """Pole of a tangent line: the point where l touches C."""
    if C.degenerate:
        raise DegenerateConic("touch_point needs a non-degenerate conic")
    p = Point(matvec(adjugate(C.m), l.v))
    if incidence_residual(l, p) > tol:
        raise PointNotOnConic(f"line {l} is not tangent to the conic")
    return p


def conic_through_five_points(points, tol: float = 1e-8) -> Conic:
    """Null space of the 5x6 design matrix of quadratic monomials."""
    if len(points) != 5:
        raise ValueError("need exactly five points")
    rows = []
    for p in points:
        x, y, z = (float(c) for c in p.v)
        rows.append([x * x, y * y, z * z, x * y, x * z, y * z])
    a = np.asarray(rows)
    _, s, vt = np.linalg.svd(a)
    # full rank 5 leaves exactly one null direction in the 6-dim monomial space
    if s[4] / s[0] < tol:
        raise DegeneratePointSet("null space dimension > 1 (degenerate point set)")
    A, B, C_, D, E, F = vt[-1]
    return Conic([[A, D / 2, E / 2], [D / 2, B, F / 2], [E / 2, F / 2, C_]])


def line_points(l: Line):
    """Two distinct points spanning a line (float backend)."""
    lv = np.asarray([float(x) for x in l.v])
    basis = np.eye(3)
    cands = sorted(
        (np.cross(lv, e) for e in basis),
        key=lambda c: -np.linalg.norm(c),
    )
    p0 = cands[0]
    for c in cands[1:]:
        if np.linalg.norm(np.cross(p0, c)) > 1e-12:
            return Point(p0), Point(c)
    raise ValueError("degenerate line")


def line_conic_intersection(C: Conic, l: Line, tol: float = 1e-10):
    """Both real intersections, tangency returned twice; complex refused."""
    if C.degenerate:
        raise DegenerateConic("intersection with a degenerate conic")
    C = C.to_float()
    l = l.to_float()
    p0, p1 = line_points(l)
    u, w = np.asarray(p0.v), np.asarray(p1.v)
    M = np.asarray(C.m)
    a = float(w @ M @ w)
    b = 2.0 * float(u @ M @ w)
    c = float(u @ M @ u)
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0:
        raise DegenerateConic("line lies on the conic")
    disc = b * b - 4 * a * c
    if disc < -tol * scale * scale:
        raise ComplexIntersection(f"discriminant {disc:.3e} < 0")
    disc = max(disc, 0.0)
    if abs(a) < 1e-14 * scale:
        # one intersection at the direction point w
        t = -c / b
        return Point(u + t * w), Point(w)
    r = np.sqrt(disc)
    # numerically stable pair of roots
    qq = -(b + np.copysign(r, b if b != 0 else 1.0)) / 2.0
    t1 = qq / a
    t2 = c / qq if qq != 0 else t1
    return Point(u + t1 * w), Point(u + t2 * w)


# ---------------------------------------------------------------------------
# rank of conic families
# ---------------------------------------------------------------------------

def _flatten_sym(m):
    return [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]


def _exact_rank(rows):
    rows = [list(r) for r in rows]
    rank, ncols = 0, len(rows[0])
    col = 0
    while col < ncols and rank < len(rows):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank][col]
        for r in range(rank + 1, len(rows)):
            if rows[r][col] != 0:
                f = rows[r][col] / pv
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def dependence_rank(conics, mode: str = "direct",
                    tols: Tolerances = DEFAULT) -> int:
    """Rank of the conic matrices (or their adjugates) as 6-vectors.

    mode="inverse" tests co-dependence; the adjugate stands in for the
    inverse since they agree up to scale.
    """
    if mode not in ("direct", "inverse"):
        raise ValueError(f"bad mode {mode!r}")
    mats = []
    for c in conics:
        if mode == "inverse":
            if c.degenerate:
                raise DegenerateConic("inverse mode needs non-degenerate conics")
            mats.append(adjugate(c.m))
        else:
            mats.append(c.m)
    if all(not isinstance(m, np.ndarray) and is_exact(_flatten_sym(m)) for m in mats):
        return _exact_rank([_flatten_sym(m) for m in mats])
    rows = []
    for m in mats:
        v = np.asarray([float(x) for x in _flatten_sym(m)])
        rows.append(v / np.linalg.norm(v))
    s = np.linalg.svd(np.asarray(rows), compute_uv=False)
    return int(np.sum(s > tols.rank_cutoff * s[0]))


# ---------------------------------------------------------------------------
# projective transforms
# ---------------------------------------------------------------------------

class ProjectiveTransform:
    """Invertible 3x3 map; acts on points by M.p, on lines by inv(M)'.l."""

    __slots__ = ("m",)

    def __init__(self, matrix):
        arr = np.asarray(matrix, dtype=float)
        if abs(np.linalg.det(arr)) < 1e-14:
            raise ValueError("transform matrix must be invertible")
        n = np.linalg.norm(arr)
        arr = arr / n
        i, j = np.unravel_index(np.argmax(np.abs(arr)), arr.shape)
        if arr[i, j] < 0:
            arr = -arr
        self.m = arr

    @classmethod
    def identity(cls) -> "ProjectiveTransform":
        return cls(np.eye(3))

    def inverse(self) -> "ProjectiveTransform":
        return ProjectiveTransform(np.linalg.inv(self.m))

    def compose(self, other: "ProjectiveTransform") -> "ProjectiveTransform":
        """self after other."""
        return ProjectiveTransform(self.m @ other.m)

    def apply_point(self, p: Point) -> Point:
        return Point(self.m @ np.asarray([float(x) for x in p.v]))

    def apply_line(self, l: Line) -> Line:
        return Line(np.linalg.inv(self.m).T @ np.asarray([float(x) for x in l.v]))

    def apply_conic(self, C: Conic) -> Conic:
        inv = np.linalg.inv(self.m)
        M = np.asarray([[float(x) for x in row] for row in C.m])
        if C.kind == "point":
            return Conic(inv.T @ M @ inv, "point")
        return Conic(self.m @ M @ self.m.T, "dual")

    def __repr__(self):
        return f"ProjectiveTransform({self.m!r})"


def transform_from_four_points(src, dst) -> ProjectiveTransform:
    """The unique projective map sending four source points to four targets."""

    def frame(points):
        cols = np.column_stack([np.asarray([float(x) for x in p.v]) for p in points[:3]])
        lam = np.linalg.solve(cols, np.asarray([float(x) for x in points[3].v]))
        if np.min(np.abs(lam)) < 1e-12:
            raise NotGenericPosition("three of the four points are collinear")
        return cols * lam

    return ProjectiveTransform(frame(dst) @ np.linalg.inv(frame(src)))


def _split_degenerate_conic(M, tol: float = 1e-9):
    """Two lines of a rank-2 symmetric matrix; None if the pair is complex."""
    B = -np.asarray(adjugate(M))
    i = int(np.argmax(np.abs(np.diag(B))))
    bii = B[i, i]
    if bii < -tol * max(np.abs(B).max(), 1e-300):
        return None  # complex pair of lines
    if abs(bii) <= tol * max(np.abs(B).max(), 1e-30):
        # rank 1: double line, read off a nonzero row
        row = M[int(np.argmax(np.abs(M).sum(axis=1)))]
        return Line(row), Line(row)
    p = B[:, i] / np.sqrt(bii)
    Px = np.array([[0, p[2], -p[1]], [-p[2], 0, p[0]], [p[1], -p[0], 0]])
    C = np.asarray(M) + Px
    r, c = np.unravel_index(np.argmax(np.abs(C)), C.shape)
    if abs(C[r, c]) < tol * max(np.abs(M).max(), 1e-30):
        return None
    return Line(C[r, :]), Line(C[:, c])


def conic_intersections(A: Conic, B: Conic, tol: float = 1e-9):
    """Real intersection points of two conics (deduplicated)."""
    A, B = A.to_float(), B.to_float()
    Ma, Mb = np.asarray(A.m), np.asarray(B.m)
    # real roots of the cubic det(Ma + x Mb) pick degenerate pencil members;
    # coefficients come from interpolation at five nodes
    xs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    ys = np.array([np.linalg.det(Ma + x * Mb) for x in xs])
    poly = np.polyfit(xs, ys, 3)
    roots = np.roots(poly) if np.abs(poly).max() > 0 else []
    candidates = []
    for r in roots:
        if abs(r.imag) < 1e-7 * (1 + abs(r.real)):
            candidates.append(Ma + r.real * Mb)
    # also the pure-B end of the pencil
    if abs(np.linalg.det(Mb)) < 1e-12:
        candidates.append(Mb)
    points = []
    for M in candidates:
        split = _split_degenerate_conic(M, tol)
        if split is None:
            continue
        for l in split:
            try:
                p1, p2 = line_conic_intersection(A, l, tol=1e-7)
            except (ComplexIntersection, DegenerateConic):
                continue
            for p in (p1, p2):
                if B.residual_at(p) < 1e-6 and not any(
                    p.same_as(q, tol=1e-6) for q in points
                ):
                    points.append(p)
    return points


_SQUARE = None


def _square_points():
    global _SQUARE
    if _SQUARE is None:
        _SQUARE = [Point([1.0, 1.0, 1.0]), Point([-1.0, 1.0, 1.0]),
                   Point([-1.0, -1.0, 1.0]), Point([1.0, -1.0, 1.0])]
    return _SQUARE


def _offdiag(M) -> float:
    a = np.asarray([[float(x) for x in r] for r in M])
    return float(np.abs(a - np.diag(np.diag(a))).max() / np.abs(a).max())


def simultaneous_diagonalization(A: Conic, B: Conic,
                                 tol: float = 1e-9) -> ProjectiveTransform:
    """Map the four common points to (+-1, +-1, 1), diagonalizing both forms.

    Already-diagonal pairs with real contact are returned unchanged; pairs
    without four real intersections (e.g. nested ellipses) are refused.
    """
    A, B = A.to_float(), B.to_float()
    if A.same_as(B):
        raise NotGenericPosition("the two conics coincide")
    pts = conic_intersections(A, B)
    if len(pts) >= 4:
        T = transform_from_four_points(pts[:4], _square_points())
        if _offdiag(T.apply_conic(A).m) < 1e-6 and _offdiag(T.apply_conic(B).m) < 1e-6:
            return T
    if _offdiag(A.m) < tol and _offdiag(B.m) < tol and len(pts) > 0:
        return ProjectiveTransform.identity()
    raise NotGenericPosition(
        f"only {len(pts)} distinct real intersections; need 4"
    )
