from math import cos, pi, sin, tau

import numpy as np
import pytest

from poncelet_rings.errors import LineThroughCenter, NoIncircle
from poncelet_rings.celestial import grid_tangent_scene
from poncelet_rings.incircles import (
    Incircle,
    OrientedLine,
    SquareCell,
    centers_scene,
    confocal_through,
    incircle,
    incircle_center_via_tangents,
    orient_ring,
)
from poncelet_rings.poncelet import (
    ConfocalFamily,
    PonceletPair,
    Ring,
    build_polygon,
    tangent_lines_from_point,
)
from poncelet_rings.projective import Line, Point, point_distance
from poncelet_rings.ring_ops import build_grid, v_op

FAMILY = ConfocalFamily(4.0, 1.0)
_PAIRS = {}


def edge_ring(m, q=1, t0=0.3):
    if (m, q) not in _PAIRS:
        _PAIRS[(m, q)] = PonceletPair.solve(FAMILY, m, q)
    pair = _PAIRS[(m, q)]
    P = build_polygon(PonceletPair(pair.outer, pair.caustic, m, q, t0))
    return v_op(P, 1), pair


def circle_tangents(m, r):
    lines = [Line([cos(tau * j / m), sin(tau * j / m), -r])
             for j in range(m)]
    return Ring(lines, "lines", label="circle tangents")


class TestOrient:
    def test_circle_tangents_inward(self):
        oriented = orient_ring(circle_tangents(8, 0.5))
        origin = Point([0.0, 0.0, 1.0])
        for ol in oriented:
            assert ol.signed_distance(origin) > 0

    def test_line_through_center(self):
        with pytest.raises(LineThroughCenter):
            OrientedLine([0.0, 1.0, 0.0])
        ring = Ring([Line([0.0, 1.0, 0.0])], "lines")
        with pytest.raises(LineThroughCenter):
            orient_ring(ring)

    def test_poncelet_edges_orientable(self):
        L, _ = edge_ring(9)
        oriented = orient_ring(L)
        assert all(ol.v[2] > 0 for ol in oriented)

    def test_unit_direction(self):
        ol = OrientedLine([3.0, 4.0, 10.0])
        assert np.hypot(ol.v[0], ol.v[1]) == pytest.approx(1.0)


class TestIncircle:
    def test_central_cell_of_circle_tangents(self):
        # the all-positive cell of tangents to a circle is that circle
        oriented = orient_ring(circle_tangents(8, 0.5))
        cell = SquareCell((oriented[0], oriented[2], oriented[4],
                           oriented[5]), (1, 1, 1, 1))
        ic = incircle(cell)
        assert point_distance(ic.center, Point([0.0, 0.0, 1.0])) < 1e-12
        assert ic.radius == pytest.approx(0.5)

    def test_cell_1_2_5_6(self):
        # the type (4,1) cell bounded by lines 1,2,5,6
        L, _ = edge_ring(13)
        oriented = orient_ring(L)
        ic = incircle(SquareCell.from_ring(oriented, 1, 4, 1))
        assert ic.residual < 1e-8
        assert ic.radius > 0

    def test_sign_pattern(self):
        L, _ = edge_ring(13)
        oriented = orient_ring(L)
        cell = SquareCell.from_ring(oriented, 0, 2, 1)
        ic = incircle(cell)
        sign = -1.0 if ic.through_infinity else 1.0
        for ol, s in zip(cell.lines, cell.signs):
            d = ol.signed_distance(ic.center)
            assert d == pytest.approx(sign * s * ic.radius, abs=1e-8)

    def test_label_algebra(self):
        # exchanging the k and l roles readdresses the same cell
        L, _ = edge_ring(13)
        oriented = orient_ring(L)
        ic1 = incircle(SquareCell.from_ring(oriented, 3, 2, 5))
        ic2 = incircle(SquareCell.from_ring(oriented, 3, 5, 2))
        assert point_distance(ic1.center, ic2.center) < 1e-12
        assert ic1.radius == pytest.approx(ic2.radius)

    def test_random_lines_no_incircle(self):
        rng = np.random.default_rng(5)
        lines = [OrientedLine(v) for v in rng.uniform(0.2, 1.0, (4, 3))]
        with pytest.raises(NoIncircle):
            incircle(SquareCell(tuple(lines)))

    def test_square_type_rejects_k_equals_l(self):
        L, _ = edge_ring(13)
        oriented = orient_ring(L)
        with pytest.raises(ValueError):
            SquareCell.from_ring(oriented, 0, 2, 2)


class TestTangentCenter:
    def test_cross_checks_m10(self):
        L, pair = edge_ring(10)
        oriented = orient_ring(L)
        grid = build_grid(L, pair.caustic)
        for k, l in ((2, 3), (3, 4), (2, 4)):
            for a in (0, 3, 7):
                cell = SquareCell.from_ring(oriented, a, k, l)
                ic = incircle(cell)
                via = incircle_center_via_tangents(cell, grid.conics[k])
                assert point_distance(via, ic.center) < 1e-6

    def test_corners_lie_on_grid_conic(self):
        L, pair = edge_ring(10)
        oriented = orient_ring(L)
        grid = build_grid(L, pair.caustic)
        cell = SquareCell.from_ring(oriented, 2, 3, 2)
        for corner in cell.corners_on_ring("k"):
            assert grid.conics[3].residual_at(corner) < 1e-9

    def test_flawed_cgt_disambiguation(self):
        # P and Q symmetric about the minor axis lie on both a confocal
        # ellipse and a confocal hyperbola; the four tangents to an
        # inner ellipse bound two circles, and each conic's tangent
        # meet hits exactly one of the two centers
        A, B = 4.0, 1.0
        inner = ConfocalFamily(A, B).member(0.75)
        outer = ConfocalFamily(A, B).member(0.2)
        x0 = 1.1
        y0 = float(np.sqrt((B - 0.2) * (1 - x0 * x0 / (A - 0.2))))
        P, Q = Point([x0, y0, 1.0]), Point([-x0, y0, 1.0])
        conics = confocal_through(A, B, P)
        assert len(conics) == 2
        for C in conics:
            assert C.residual_at(P) < 1e-9 and C.residual_at(Q) < 1e-9
        lines = [OrientedLine([float(v) for v in l.v])
                 for p in (P, Q) for l in tangent_lines_from_point(p, inner)]
        circles = []
        for bits in range(8):
            signs = (1, *(1 if bits >> i & 1 else -1 for i in range(3)))
            try:
                ic = incircle(SquareCell(tuple(lines), signs))
            except NoIncircle:
                continue
            if all(point_distance(ic.center, c.center) > 1e-6
                   for c in circles):
                circles.append(ic)
        assert len(circles) == 2
        from poncelet_rings.projective import meet, tangent_at
        matched = []
        for C in conics:
            ctr = meet(tangent_at(C, P, tol=1e-6), tangent_at(C, Q, tol=1e-6))
            hits = [i for i, c in enumerate(circles)
                    if point_distance(ctr, c.center) < 1e-6]
            assert len(hits) == 1
            matched.append(hits[0])
        assert sorted(matched) == [0, 1]


class TestCentersScene:
    def test_m13_2_4_5(self):
        L, _ = edge_ring(13)
        scene = centers_scene(L, 2, 4, 5)
        assert len(scene.points) == 39
        assert scene.audit.verdict in ("proper-(n4)", "pre-(n4)")
        assert all(d >= 4 for d in scene.audit.point_degrees)
        assert scene.closure_residual < 1e-7   # four-center collinearity

    def test_collinearity_all_quadruples(self):
        L, _ = edge_ring(13)
        scene = centers_scene(L, 2, 4, 5)
        assert scene.closure_residual < 1e-7

    def test_matches_grid_tangent_points(self):
        L, _ = edge_ring(13)
        scene = centers_scene(L, 2, 4, 5)
        _, pts, _ = grid_tangent_scene(L, 2, 4, 5)
        centers = scene.points
        worst = max(min(point_distance(p, q) for q in centers) for p in pts)
        assert worst < 1e-6

    def test_bad_shifts(self):
        L, _ = edge_ring(13)
        with pytest.raises(ValueError):
            centers_scene(L, 2, 2, 4)
        with pytest.raises(ValueError):
            centers_scene(L, 2, 4, 7)


class TestConfocalThrough:
    def test_two_members_generic(self):
        conics = confocal_through(4.0, 1.0, Point([1.3, 0.4, 1.0]))
        assert len(conics) == 2
        # one ellipse (axis coefficients agree in sign), one hyperbola
        kinds = sorted(
            bool(np.asarray(C.m)[0, 0] * np.asarray(C.m)[1, 1] > 0)
            for C in conics)
        assert kinds == [False, True]
