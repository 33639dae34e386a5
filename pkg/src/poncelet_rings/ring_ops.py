"""Operator calculus on cyclic rings of points and lines.

v_op joins each point to its i-th successor; w_op meets each line with
its i-th predecessor, so the two shifts run in opposite directions and
w_op(v_op(P, i), i) returns P with matching indices.  Shift 0 is the
tangent / touch-point limit and needs an explicit support conic.

On Poncelet polygons the rings w_op(L, i) land on conics that form a
pencil with the caustic (all adjugates rank 2); fitting those conics and
auditing the rank is what build_grid does.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CoDependenceViolation,
    CoincidentPoints,
    ConicFitFailure,
    NoEquivalenceFound,
    NotGenericPosition,
)
from .poncelet import Ring
from .projective import (
    Conic,
    Line,
    Point,
    ProjectiveTransform,
    adjugate,
    conic_through_five_points,
    dependence_rank,
    join,
    meet,
    point_distance,
    tangent_at,
    touch_point,
    transform_from_four_points,
)
from .tolerances import DEFAULT, Tolerances


def v_op(P: Ring, i: int, support: Conic = None) -> Ring:
    """Ring of lines joining each point to its i-th successor.

    i = 0 is the tangent limit and requires the conic the points sit on.
    """
    m = len(P)
    if P.kind != "points":
        raise ValueError("v_op expects a ring of points")
    if not 0 <= i < m:
        raise ValueError(f"shift {i} out of range for m={m}")
    if i == 0:
        if support is None:
            raise CoincidentPoints(
                "shift 0 joins a point with itself; pass the support conic"
            )
        lines = [tangent_at(support, p, tol=1e-6) for p in P]
    else:
        lines = [join(P[j], P[j + i]) for j in range(m)]
    return Ring(lines, "lines", label=f"v{i}({P.label})",
                meta={"shift": i, "op": "v", "parent": P.label})


def w_op(L: Ring, i: int, support: Conic = None) -> Ring:
    """Ring of points meeting each line with its i-th predecessor (dual)."""
    m = len(L)
    if L.kind != "lines":
        raise ValueError("w_op expects a ring of lines")
    if not 0 <= i < m:
        raise ValueError(f"shift {i} out of range for m={m}")
    if i == 0:
        if support is None:
            raise CoincidentPoints(
                "shift 0 meets a line with itself; pass the support conic"
            )
        pts = [touch_point(support, l, tol=1e-6) for l in L]
    else:
        pts = [meet(L[j], L[j - i]) for j in range(m)]
    return Ring(pts, "points", label=f"w{i}({L.label})",
                meta={"shift": i, "op": "w", "parent": L.label})


def _spread_indices(m: int, n: int = 5):
    return sorted({round(j * m / n) % m for j in range(n)})


def fit_ring_conic(ring: Ring, tols: Tolerances = DEFAULT) -> Conic:
    """Conic through all m ring elements, fitted on 5 spread samples.

    Point rings get a point conic; line rings get the dual conic their
    lines are tangent to.  All m residuals are audited.
    """
    m = len(ring)
    idx = _spread_indices(m)
    if len(idx) < 5:
        raise ConicFitFailure(f"ring of {m} elements is too small to fit")
    if ring.kind == "points":
        samples = [ring[j] for j in idx]
    else:
        samples = [Point([float(x) for x in ring[j].v]) for j in idx]
    try:
        C = conic_through_five_points(samples)
    except Exception as e:
        raise ConicFitFailure(str(e)) from e
    if ring.kind == "lines":
        C = Conic(C.m, "dual")
    worst = 0.0
    for j in range(m):
        vec = np.asarray([float(x) for x in ring[j].v])
        worst = max(worst, abs(float(vec @ np.asarray(C.m) @ vec)))
    if worst > 1e-7:
        raise ConicFitFailure(
            f"worst residual {worst:.3e} over {m} elements of {ring.label}"
        )
    return C


def grid_size(m: int) -> int:
    """Greatest ring index strictly below m/2."""
    return (m - 1) // 2


@dataclass
class Grid:
    rings: dict
    conics: dict
    caustic: Conic = None
    rank: int = 0


def build_grid(L: Ring, caustic: Conic = None,
               tols: Tolerances = DEFAULT) -> Grid:
    """Point rings w_op(L, i) with their fitted conics, i = 1 .. <m/2.

    The even midpoint index m/2 is excluded (those meets collapse onto a
    line, not a conic).  The fitted conics plus the caustic must be
    co-dependent of rank exactly 2.
    """
    m = len(L)
    s = grid_size(m)
    rings, conics = {}, {}
    for i in range(1, s + 1):
        rings[i] = w_op(L, i)
        conics[i] = fit_ring_conic(rings[i], tols)
    members = list(conics.values())
    if caustic is not None:
        members.append(caustic)
    rank = dependence_rank(members, mode="inverse", tols=tols)
    if rank != 2:
        raise CoDependenceViolation(
            f"grid conics have adjugate rank {rank}, expected 2"
        )
    return Grid(rings, conics, caustic, rank)


@dataclass
class DualGrid:
    rings: dict
    conics: dict  # dual conics (the rings' lines are tangent to them)
    outer: Conic = None
    rank: int = 0


def build_dual_grid(P: Ring, outer: Conic = None,
                    tols: Tolerances = DEFAULT) -> DualGrid:
    """Line rings v_op(P, i) with the dual conics they envelope."""
    m = len(P)
    s = grid_size(m)
    rings, conics = {}, {}
    for i in range(1, s + 1):
        rings[i] = v_op(P, i)
        conics[i] = fit_ring_conic(rings[i], tols)
    # direct dependence of the enveloped point conics (adjugates of duals)
    members = [Conic(adjugate(c.m)) for c in conics.values()]
    if outer is not None:
        members.append(outer)
    rank = dependence_rank(members, mode="direct", tols=tols)
    if rank != 2:
        raise CoDependenceViolation(
            f"dual grid conics have rank {rank}, expected 2"
        )
    return DualGrid(rings, conics, outer, rank)


def pentagram(P: Ring, k: int) -> Ring:
    """Diagonal map T_k: short-diagonal lines, then consecutive meets."""
    m = len(P)
    if not 2 <= k < m / 2:
        raise ValueError(f"need 2 <= k < m/2, got k={k}, m={m}")
    return w_op(v_op(P, k), 1)


def ring_residual(A: Ring, B: Ring) -> float:
    """Worst pointwise projective gap between two same-length rings."""
    if len(A) != len(B) or A.kind != B.kind:
        raise ValueError("rings are not comparable")
    return max(point_distance(a, b) for a, b in zip(A, B))


def odd_equivalence(P: Ring, a: int, tols: Tolerances = DEFAULT):
    """Projective map carrying P onto w_op(v_op(P,1), a) up to cyclic shift.

    Fits a transform from four well-spread correspondences for every
    shift, validates on the remaining points, and returns the best
    (transform, shift, residual).  Fails for even m, where the two rings
    are genuinely inequivalent.
    """
    m = len(P)
    Qr = w_op(v_op(P, 1), a)
    anchors = [0, m // 4, m // 2, (3 * m) // 4]
    best = None
    for k in range(m):
        try:
            T = transform_from_four_points(
                [P[j] for j in anchors], [Qr[j + k] for j in anchors])
        except (NotGenericPosition, np.linalg.LinAlgError, ValueError):
            continue
        residual = max(
            point_distance(T.apply_point(P[j]), Qr[j + k]) for j in range(m)
        )
        if best is None or residual < best[2]:
            best = (T, k, residual)
    if best is None or best[2] > 1e-6:
        got = "none" if best is None else f"{best[2]:.3e}"
        raise NoEquivalenceFound(
            f"no projective equivalence for m={m}, a={a} (best residual {got})"
        )
    return best
