"""Celestial symbols and the alternating join/meet construction.

A symbol m#(a1,b1;...;ak,bk) drives k rounds of "join with shift a_i,
meet with shift b_i" starting from a ring of m points.  When the a and b
letters agree as multisets the chain returns to its start for every
Poncelet m-gon, which yields a movable incidence configuration of k*m
points and k*m lines with four elements through each.  The audit below
measures exactly that: closure gap, incidence degrees, and unintended
coincidences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd

import numpy as np

from .errors import (
    AdjacentRepeat,
    LetterOutOfRange,
    SymbolSyntaxError,
)
from .poncelet import Ring
from .projective import incidence_residual, point_distance
from .ring_ops import fit_ring_conic, v_op, w_op
from .tolerances import DEFAULT, Tolerances

_SYMBOL_RE = re.compile(r"^\s*(\d+)\s*#\s*\((.*)\)\s*$", re.S)
_PAIR_RE = re.compile(r"^\s*(\d+)\s*,\s*(\d+)\s*$")


@dataclass(frozen=True)
class CelestialSymbol:
    m: int
    pairs: tuple

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def trivial(self) -> bool:
        a = sorted(p[0] for p in self.pairs)
        b = sorted(p[1] for p in self.pairs)
        return a == b

    def letters(self):
        out = []
        for a, b in self.pairs:
            out.extend((a, b))
        return out

    def __str__(self):
        body = ";".join(f"{a},{b}" for a, b in self.pairs)
        return f"{self.m}#({body})"


def validate_symbol(sym: CelestialSymbol) -> CelestialSymbol:
    if sym.m < 3:
        raise SymbolSyntaxError(f"m={sym.m} is too small")
    if not sym.pairs:
        raise SymbolSyntaxError("symbol needs at least one pair")
    for letter in sym.letters():
        if not 1 <= letter < sym.m / 2:
            raise LetterOutOfRange(
                f"letter {letter} outside [1, {sym.m}/2) in {sym}"
            )
    seq = sym.letters()
    for i, x in enumerate(seq):
        if x == seq[(i + 1) % len(seq)]:
            raise AdjacentRepeat(f"adjacent letters {x},{x} in {sym}")
    return sym


def parse_symbol(text: str) -> CelestialSymbol:
    """Parse "m#(a1,b1;...;ak,bk)" and validate the letter constraints."""
    m_ = _SYMBOL_RE.match(text)
    if not m_:
        raise SymbolSyntaxError(f"cannot parse symbol {text!r}")
    m = int(m_.group(1))
    pairs = []
    for chunk in m_.group(2).split(";"):
        p = _PAIR_RE.match(chunk)
        if not p:
            raise SymbolSyntaxError(f"bad pair {chunk!r} in {text!r}")
        pairs.append((int(p.group(1)), int(p.group(2))))
    return validate_symbol(CelestialSymbol(m, tuple(pairs)))


@dataclass
class IncidenceAudit:
    point_degrees: dict           # degree -> count of points
    line_degrees: dict            # degree -> count of lines
    extra_incidences: list        # (kind, label_i, label_j, distance)
    max_residual: float           # worst residual among counted incidences
    verdict: str                  # proper-(n4) | pre-(n4) | failed
    expected_degree: int = 4
    tolerance: dict = field(default_factory=dict)


@dataclass
class ConfigurationScene:
    symbol: CelestialSymbol
    point_rings: list
    line_rings: list
    conics: list                  # (ring label, Conic) where a fit exists
    closure_residual: float       # index-to-index, per the operator trail
    closure_offset: int           # cyclic offset with the smallest residual
    closure_best_residual: float  # residual at that offset
    audit: IncidenceAudit

    @property
    def points(self):
        return [p for ring in self.point_rings for p in ring]

    @property
    def lines(self):
        return [l for ring in self.line_rings for l in ring]


def audit_incidences(point_rings, line_rings, expected_degree: int = 4,
                     tols: Tolerances = DEFAULT) -> IncidenceAudit:
    """Count incidences and unintended coincidences over whole scenes.

    An incidence is counted below the coincidence threshold and its
    residual tracked; elements from different trail positions closer
    than the same threshold are flagged, never merged.
    """
    pts = [(f"{r.label}[{i}]", p)
           for r in point_rings for i, p in enumerate(r)]
    lns = [(f"{r.label}[{i}]", l)
           for r in line_rings for i, l in enumerate(r)]
    count_tol = tols.coincidence
    pdeg = np.zeros(len(pts), dtype=int)
    ldeg = np.zeros(len(lns), dtype=int)
    max_res = 0.0
    P = np.asarray([[float(x) for x in p.v] for _, p in pts])
    L = np.asarray([[float(x) for x in l.v] for _, l in lns])
    res = np.abs(L @ P.T)
    hits = res < count_tol
    pdeg = hits.sum(axis=0)
    ldeg = hits.sum(axis=1)
    max_res = float(res[hits].max()) if hits.any() else 0.0
    extras = []
    for kind, items in (("point", pts), ("line", lns)):
        V = np.asarray([[float(x) for x in e.v] for _, e in items])
        gram = np.abs(V @ V.T)
        close = 1.0 - gram < 0.5 * tols.coincidence ** 2
        ii, jj = np.nonzero(np.triu(close, k=1))
        for i, j in zip(ii, jj):
            d = point_distance(items[i][1], items[j][1])
            if d < tols.coincidence:
                extras.append((kind, items[i][0], items[j][0], d))
    def hist(deg):
        out = {}
        for d in deg:
            out[int(d)] = out.get(int(d), 0) + 1
        return out
    all_deg = list(pdeg) + list(ldeg)
    if all(d == expected_degree for d in all_deg) and not extras:
        verdict = f"proper-(n{expected_degree})"
    elif all(d >= expected_degree for d in all_deg):
        verdict = f"pre-(n{expected_degree})"
    else:
        verdict = "failed"
    return IncidenceAudit(hist(pdeg), hist(ldeg), extras, max_res, verdict,
                          expected_degree, tols.as_dict())


def _closure(P_first: Ring, P_last: Ring):
    """Index-matched residual plus the best cyclic offset and its residual."""
    m = len(P_first)
    direct = max(point_distance(P_last[j], P_first[j]) for j in range(m))
    best_off, best = 0, direct
    for off in range(1, m):
        r = max(point_distance(P_last[j + off], P_first[j]) for j in range(m))
        if r < best:
            best_off, best = off, r
    return direct, best_off, best


def construct(sym: CelestialSymbol, P0: Ring,
              tols: Tolerances = DEFAULT) -> ConfigurationScene:
    """Run the alternation L_i = v_{a_i}(P_{i-1}), P_i = w_{b_i}(L_i).

    The closure residual compares the final ring to P0 index-to-index;
    the best cyclic offset is reported alongside, not used for the
    verdict.
    """
    if len(P0) != sym.m:
        raise ValueError(f"ring has {len(P0)} points, symbol wants {sym.m}")
    point_rings = [Ring(P0.elements, "points", label="P0", meta=P0.meta)]
    line_rings = []
    current = point_rings[0]
    for i, (a, b) in enumerate(sym.pairs, start=1):
        L = v_op(current, a)
        L.label = f"L{i}"
        L.meta["components"] = gcd(a, sym.m)
        line_rings.append(L)
        current = w_op(L, b)
        current.label = f"P{i}"
        point_rings.append(current)
    residual, offset, best = _closure(point_rings[0], point_rings[-1])
    interior_points = point_rings[:-1]
    conics = []
    for ring in interior_points + line_rings:
        try:
            conics.append((ring.label, fit_ring_conic(ring, tols)))
        except Exception:
            pass
    audit = audit_incidences(interior_points, line_rings, 4, tols)
    return ConfigurationScene(sym, interior_points, line_rings, conics,
                              residual, offset, best, audit)


def theorem_a_scene(P: Ring, a: int, b: int, c: int,
                    tols: Tolerances = DEFAULT) -> ConfigurationScene:
    """Three-round scene m#(a,b;c,a;b,c), closing for any Poncelet ring."""
    if len({a, b, c}) != 3:
        raise ValueError("shifts must be distinct")
    sym = validate_symbol(
        CelestialSymbol(len(P), ((a, b), (c, a), (b, c))))
    return construct(sym, P, tols)


def grid_tangent_scene(L: Ring, a: int, b: int, c: int,
                       tols: Tolerances = DEFAULT):
    """Tangent rings to three grid conics and their quadruple meets.

    For each pair of shift letters the m concurrency points where two
    tangents of each ring meet are computed from one pair and verified
    against the other; returns (line rings, points, worst residual).
    """
    from .ring_ops import build_grid

    m = len(L)
    grid = build_grid(L, tols=tols)
    tangents = {}
    for x in (a, b, c):
        Px = grid.rings[x]
        Tx = v_op(Px, 0, support=grid.conics[x])
        Tx.label = f"T{x}"
        tangents[x] = Tx
    points = []
    worst = 0.0
    from .projective import meet
    for x, y in ((a, b), (a, c), (b, c)):
        Tx, Ty = tangents[x], tangents[y]
        for i in range(m):
            p = meet(Tx[i], Tx[i - y])
            for other in (Ty[i], Ty[i - x]):
                worst = max(worst, incidence_residual(other, p))
            points.append(p)
    return list(tangents.values()), points, worst


def _nested_scene_plan(letters, i, j, start_w):
    """Symbol and ring labels for the nested scene indexed by (i, j).

    The scene runs the three-round alternation over the complement
    letters {x, y, z} = letters minus {i, j}; its point rings carry the
    labels {i, x}, {i, y}, {i, z} and its line rings {j, x}, {j, y},
    {j, z}.  The symbol is rotated so the chain starts at {i, start_w}.
    """
    x, y, z = sorted(set(letters) - {i, j})
    rots = {
        x: (((z, x), (y, z), (x, y)),
            [(i, x), (i, z), (i, y)], [(j, y), (j, x), (j, z)]),
        z: (((y, z), (x, y), (z, x)),
            [(i, z), (i, y), (i, x)], [(j, x), (j, z), (j, y)]),
        y: (((x, y), (z, x), (y, z)),
            [(i, y), (i, x), (i, z)], [(j, z), (j, y), (j, x)]),
    }
    return rots[start_w]


def build_nested(m: int, shifts, tols: Tolerances = DEFAULT,
                 family=None, t0: float = 0.3):
    """Ten interlocking three-ring scenes over five shift letters.

    Rings of points and rings of lines are both indexed by the ten
    unordered letter pairs; a point ring meets a line ring exactly when
    their pairs are disjoint, so the sharing pattern is a Desargues
    (10_3) incidence.  Each scene (i, j) runs the alternation with the
    three complement letters as shifts, reuses the point rings labelled
    {i, *} and produces the line rings labelled {j, *}; the scenes are
    picked by a rotational tournament so every ring is built by three
    of them.  The result has six incidences through every one of the
    10m points and 10m lines.
    """
    from .errors import CoDependenceViolation
    from .poncelet import ConfocalFamily, PonceletPair, build_polygon

    letters = tuple(sorted(set(shifts)))
    if len(letters) != 5:
        raise ValueError("need five distinct shifts")
    if m < 11:
        raise ValueError("need m >= 11 for five distinct shifts below m/2")
    if letters[-1] >= m / 2:
        raise LetterOutOfRange(f"shift {letters[-1]} not below {m}/2")
    if family is None:
        family = ConfocalFamily(4.0, 1.0)
    pair = PonceletPair.solve(family, m, 1, t0)
    P0 = build_polygon(pair)

    # one scene per arc of the rotational tournament i -> i+1, i+2
    scenes = []
    for pos in range(5):
        for d in (1, 2):
            scenes.append((letters[pos], letters[(pos + d) % 5]))

    def setdist(r1, r2):
        return max(min(point_distance(a, b) for b in r2) for a in r1)

    point_rings, line_rings = {}, {}
    seed = frozenset(letters[:2])
    point_rings[seed] = Ring(P0.elements, "points",
                             label=f"R{sorted(seed)}", meta=P0.meta)
    worst_closure = 0.0
    worst_overlap = 0.0
    scene_records = []
    pending = list(scenes)
    progress = True
    while pending and progress:
        progress = False
        for sc in list(pending):
            i, j = sc
            comp = sorted(set(letters) - {i, j})
            start_w = next(
                (w for w in comp if frozenset((i, w)) in point_rings), None)
            if start_w is None:
                continue
            pairs, plabels, llabels = _nested_scene_plan(letters, i, j,
                                                         start_w)
            sym = validate_symbol(CelestialSymbol(m, pairs))
            scene = construct(sym, point_rings[frozenset((i, start_w))],
                              tols)
            worst_closure = max(worst_closure, scene.closure_residual)
            for ring, lab in zip(scene.point_rings, plabels):
                key = frozenset(lab)
                if key in point_rings:
                    worst_overlap = max(
                        worst_overlap, setdist(point_rings[key], ring))
                else:
                    ring.label = f"R{sorted(key)}"
                    point_rings[key] = ring
            for ring, lab in zip(scene.line_rings, llabels):
                key = frozenset(lab)
                if key in line_rings:
                    worst_overlap = max(
                        worst_overlap, setdist(line_rings[key], ring))
                else:
                    ring.label = f"S{sorted(key)}"
                    line_rings[key] = ring
            scene_records.append({"scene": sc, "symbol": str(sym),
                                  "closure": scene.closure_residual})
            pending.remove(sc)
            progress = True
    if pending:
        raise CoDependenceViolation(
            f"nested scenes {pending} have no constructible start ring"
        )
    pts = list(point_rings.values())
    lns = list(line_rings.values())
    audit = audit_incidences(pts, lns, expected_degree=6, tols=tols)
    return {
        "m": m,
        "shifts": list(letters),
        "point_rings": pts,
        "line_rings": lns,
        "point_ring_labels": {tuple(sorted(k)): r.label
                              for k, r in point_rings.items()},
        "scenes": scene_records,
        "closure_residual": worst_closure,
        "overlap_residual": worst_overlap,
        "audit": audit,
    }
