"""Scene serialization (JSON), SVG rendering, and frame export.

The JSON document is the interchange format: a flat list of rings plus
any fitted conics and the incidence audit.  The SVG renderer is
presentation only; geometry never round-trips through it.  Both are
byte-deterministic so identical scenes produce identical files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import cos, sin, sqrt, tau

import numpy as np

from .errors import SchemaError
from .poncelet import Ring
from .projective import Conic, Line, Point
from .tolerances import DEFAULT, Tolerances

JSON_EXT = ".scene.json"
SVG_EXT = ".svg"

_UPPER = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


@dataclass
class SceneDocument:
    """In-memory mirror of the on-disk scene schema."""

    backend: str                 # "f64" | "exact"
    m: int
    rings: list                  # Ring objects; shift read from meta
    conics: list = field(default_factory=list)   # (id, role, Conic)
    audit: dict = field(default_factory=dict)
    closure_residual: float = 0.0
    symbol: str = None

    @classmethod
    def from_configuration(cls, scene) -> "SceneDocument":
        # the role carries the quadratic-form kind so reading restores it
        conics = [(label, C.kind, C) for label, C in scene.conics]
        audit = _audit_dict(scene.audit)
        audit["closure_offset"] = scene.closure_offset
        audit["closure_best_residual"] = scene.closure_best_residual
        return cls("f64", scene.symbol.m,
                   list(scene.point_rings) + list(scene.line_rings),
                   conics, audit, scene.closure_residual,
                   str(scene.symbol))

    @classmethod
    def from_rings(cls, rings, conics=(), audit=None,
                   closure_residual=0.0, symbol=None) -> "SceneDocument":
        rings = list(rings)
        if not rings:
            raise ValueError("a scene document needs at least one ring")
        backend = "exact" if all(
            e.exact for r in rings for e in r) else "f64"
        return cls(backend, len(rings[0]), rings, list(conics),
                   dict(audit or {}), closure_residual, symbol)


def _audit_dict(audit) -> dict:
    return {
        "point_degrees": {str(k): audit.point_degrees[k]
                          for k in sorted(audit.point_degrees)},
        "line_degrees": {str(k): audit.line_degrees[k]
                         for k in sorted(audit.line_degrees)},
        "extra_incidences": [list(e) for e in audit.extra_incidences],
        "max_residual": audit.max_residual,
        "verdict": audit.verdict,
        "expected_degree": audit.expected_degree,
        "tolerance": audit.tolerance,
    }


def _num_out(x, backend: str):
    if backend == "exact":
        f = Fraction(x)
        return str(f.numerator) if f.denominator == 1 else str(f)
    return float(x)


def _num_in(x, backend: str, path: str):
    if backend == "exact":
        if not isinstance(x, str):
            raise SchemaError(path, "exact numbers are num/den strings")
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(path, f"bad rational {x!r}") from e
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        raise SchemaError(path, f"expected a number, got {x!r}")
    return float(x)


def scene_to_json(scene) -> bytes:
    """Serialize a scene to canonical bytes.

    Accepts a SceneDocument or anything from_configuration accepts.
    Floats go through repr (shortest round-trip form); the exact backend
    writes numerator/denominator strings, so nothing is lost either way.
    """
    if not isinstance(scene, SceneDocument):
        scene = SceneDocument.from_configuration(scene)
    b = scene.backend
    doc = {"backend": b, "m": scene.m}
    if scene.symbol is not None:
        doc["symbol"] = scene.symbol
    doc["conics"] = [
        {"id": cid, "role": role,
         "matrix6": [_num_out(C.m[i][j], b) for i, j in _UPPER]}
        for cid, role, C in scene.conics
    ]
    doc["rings"] = [
        {"label": r.label, "kind": r.kind,
         "shift": int(r.meta.get("shift", -1)),
         "elements": [[_num_out(x, b) for x in e.v] for e in r]}
        for r in scene.rings
    ]
    doc["audit"] = scene.audit
    doc["closure_residual"] = scene.closure_residual
    return (json.dumps(doc, separators=(",", ":"), sort_keys=False,
                       allow_nan=False) + "\n").encode("ascii")


def _raw_vec(cls, vals, backend: str, path: str):
    """Rebuild a point/line without renormalizing.

    Documents store vectors already in canonical form; pushing them
    through canonical() again would perturb the last bits and break the
    byte-identical round-trip guarantee.
    """
    if all(x == 0 for x in vals):
        raise SchemaError(path, "zero vector")
    obj = cls.__new__(cls)
    if backend == "exact":
        obj.v = tuple(Fraction(x) for x in vals)
    else:
        obj.v = np.asarray(vals, dtype=float)
    return obj


def _raw_conic(mat, kind: str, backend: str):
    C = Conic.__new__(Conic)
    if backend == "exact":
        C.m = tuple(tuple(Fraction(x) for x in row) for row in mat)
    else:
        C.m = np.asarray(mat, dtype=float)
    C.kind = kind
    return C


def _expect(doc, key, types, path):
    if key not in doc:
        raise SchemaError(f"{path}/{key}", "missing required field")
    val = doc[key]
    if not isinstance(val, types):
        raise SchemaError(f"{path}/{key}", f"wrong type {type(val).__name__}")
    return val


def json_to_scene(data: bytes) -> SceneDocument:
    """Parse and validate a scene document; errors carry JSON pointers."""
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError("", f"not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise SchemaError("", "top level must be an object")
    backend = _expect(doc, "backend", str, "")
    if backend not in ("f64", "exact"):
        raise SchemaError("/backend", f"unknown backend {backend!r}")
    m = _expect(doc, "m", int, "")
    symbol = doc.get("symbol")
    if symbol is not None and not isinstance(symbol, str):
        raise SchemaError("/symbol", "symbol must be a string")
    conics = []
    for i, entry in enumerate(_expect(doc, "conics", list, "")):
        path = f"/conics/{i}"
        if not isinstance(entry, dict):
            raise SchemaError(path, "conic entry must be an object")
        six = _expect(entry, "matrix6", list, path)
        if len(six) != 6:
            raise SchemaError(f"{path}/matrix6",
                              f"expected 6 entries, got {len(six)}")
        vals = [_num_in(x, backend, f"{path}/matrix6/{j}")
                for j, x in enumerate(six)]
        mat = [[0] * 3 for _ in range(3)]
        for (r, c), v in zip(_UPPER, vals):
            mat[r][c] = v
            mat[c][r] = v
        role = _expect(entry, "role", str, path)
        conics.append((_expect(entry, "id", str, path), role,
                       _raw_conic(mat, "dual" if role == "dual" else "point",
                                  backend)))
    rings = []
    for i, entry in enumerate(_expect(doc, "rings", list, "")):
        path = f"/rings/{i}"
        if not isinstance(entry, dict):
            raise SchemaError(path, "ring entry must be an object")
        kind = _expect(entry, "kind", str, path)
        if kind not in ("points", "lines"):
            raise SchemaError(f"{path}/kind", f"unknown kind {kind!r}")
        cls = Point if kind == "points" else Line
        elements = []
        for j, coords in enumerate(_expect(entry, "elements", list, path)):
            if not isinstance(coords, list) or len(coords) != 3:
                raise SchemaError(f"{path}/elements/{j}",
                                  "element must be a 3-vector")
            elements.append(_raw_vec(cls, [
                _num_in(x, backend, f"{path}/elements/{j}/{k}")
                for k, x in enumerate(coords)], backend,
                f"{path}/elements/{j}"))
        shift = _expect(entry, "shift", int, path)
        meta = {"shift": shift} if shift >= 0 else {}
        rings.append(Ring(elements, kind,
                          label=_expect(entry, "label", str, path),
                          meta=meta))
    audit = _expect(doc, "audit", dict, "")
    closure = doc.get("closure_residual", 0.0)
    if not isinstance(closure, (int, float)) or isinstance(closure, bool):
        raise SchemaError("/closure_residual", "must be a number")
    return SceneDocument(backend, m, rings, conics, audit,
                         float(closure), symbol)


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_STYLE = {
    "point_fill": "#1a1a1a",
    "point_radius": "0.035",
    "line_stroke": "#3366cc",
    "conic_stroke": "#999999",
    "stroke_width": "0.012",
    "background": "none",
}


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _safe_id(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_" else "-"
                   for ch in label) or "ring"


def _scene_bbox(scene: SceneDocument):
    xs, ys = [], []
    for r in scene.rings:
        if r.kind != "points":
            continue
        for p in r:
            z = float(p.v[2])
            if abs(z) < 1e-9:
                continue
            x, y = p.affine()
            xs.append(float(x))
            ys.append(float(y))
    if not xs:
        return (-1.0, -1.0, 2.0, 2.0)
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    w = max(x1 - x0, 1e-6)
    h = max(y1 - y0, 1e-6)
    pad_x, pad_y = 0.05 * w, 0.05 * h
    return (x0 - pad_x, y0 - pad_y, w + 2 * pad_x, h + 2 * pad_y)


def _clip_line(l, box):
    """Segment of an infinite line inside the box, or None."""
    a, b, c = (float(v) for v in l.v)
    n = sqrt(a * a + b * b)
    if n < 1e-12:
        return None
    a, b, c = a / n, b / n, c / n
    px, py = -a * c, -b * c          # foot of the origin perpendicular
    dx, dy = b, -a
    x0, y0, w, h = box
    t_lo, t_hi = -1e18, 1e18
    for p_, q_ in ((-dx, px - x0), (dx, x0 + w - px),
                   (-dy, py - y0), (dy, y0 + h - py)):
        if abs(p_) < 1e-15:
            if q_ < 0:
                return None
            continue
        t = q_ / p_
        if p_ < 0:
            t_lo = max(t_lo, t)
        else:
            t_hi = min(t_hi, t)
    if t_lo >= t_hi:
        return None
    return (px + t_lo * dx, py + t_lo * dy,
            px + t_hi * dx, py + t_hi * dy)


def _conic_path(C: Conic, segments: int = 64):
    """Closed 64-segment polyline around an ellipse conic, else None."""
    M = np.asarray([[float(x) for x in row] for row in C.m])
    if C.kind == "dual":
        from .projective import adjugate
        M = np.asarray([[float(x) for x in row] for row in adjugate(C.m)])
        n = np.abs(M).max()
        if n == 0:
            return None
        M = M / n
    Q = M[:2, :2]
    rhs = -M[:2, 2]
    try:
        ctr = np.linalg.solve(Q, rhs)
    except np.linalg.LinAlgError:
        return None
    k = -(float(ctr @ Q @ ctr) + 2 * float(M[:2, 2] @ ctr) + M[2, 2])
    evals, evecs = np.linalg.eigh(Q)
    if k < 0:
        evals, k = -evals, -k
    if evals.min() <= 0 or k <= 0:
        return None                   # hyperbola or empty: not rendered
    radii = np.sqrt(k / evals)
    pts = []
    for j in range(segments + 1):
        t = tau * j / segments
        u = evecs @ (radii * np.array([cos(t), sin(t)]))
        pts.append((ctr[0] + u[0], ctr[1] + u[1]))
    return pts


def scene_to_svg(scene, style: dict = None) -> bytes:
    """Deterministic SVG: one <g> per ring, stable ids, 5% margin fit.

    Style overrides touch presentation attributes only; the geometry in
    the path data is untouched by any style key.
    """
    if not isinstance(scene, SceneDocument):
        scene = SceneDocument.from_configuration(scene)
    st = dict(_STYLE)
    st.update(style or {})
    box = _scene_bbox(scene)
    x0, y0, w, h = box
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">',
        # flip y so the drawing matches mathematical orientation
        f'<g transform="translate(0,{_fmt(2 * y0 + h)}) scale(1,-1)">',
    ]
    for cid, _, C in scene.conics:
        pts = _conic_path(C)
        if pts is None:
            continue
        d = "M" + "L".join(f"{_fmt(x)},{_fmt(y)}" for x, y in pts) + "Z"
        out.append(
            f'<path id="conic-{_safe_id(cid)}" d="{d}" fill="none" '
            f'stroke="{st["conic_stroke"]}" '
            f'stroke-width="{st["stroke_width"]}"/>')
    for r in scene.rings:
        gid = _safe_id(r.label)
        out.append(f'<g id="ring-{gid}">')
        if r.kind == "lines":
            for i, l in enumerate(r):
                seg = _clip_line(l, box)
                if seg is None:
                    continue
                out.append(
                    f'<line id="ring-{gid}-{i}" '
                    f'x1="{_fmt(seg[0])}" y1="{_fmt(seg[1])}" '
                    f'x2="{_fmt(seg[2])}" y2="{_fmt(seg[3])}" '
                    f'stroke="{st["line_stroke"]}" '
                    f'stroke-width="{st["stroke_width"]}"/>')
        else:
            for i, p in enumerate(r):
                if abs(float(p.v[2])) < 1e-9:
                    continue
                x, y = p.affine()
                out.append(
                    f'<circle id="ring-{gid}-{i}" '
                    f'cx="{_fmt(float(x))}" cy="{_fmt(float(y))}" '
                    f'r="{st["point_radius"]}" fill="{st["point_fill"]}"/>')
        out.append('</g>')
    out.append('</g>')
    out.append('</svg>')
    return ("\n".join(out) + "\n").encode("ascii")


# ---------------------------------------------------------------------------
# animation frames
# ---------------------------------------------------------------------------

def _open_polygon(outer, caustic, m, t0, tols: Tolerances = DEFAULT) -> Ring:
    """m tangent-chord steps from t0 with no closure requirement."""
    from .poncelet import point_at_angle, poncelet_step
    from .projective import point_distance

    p0 = point_at_angle(outer, t0)
    pts = [p0]
    p, incoming = p0, None
    for _ in range(m):
        p, incoming = poncelet_step(p, incoming, outer, caustic, tols)
        pts.append(p)
    return Ring(pts[:-1], "points", label="P0",
                meta={"closure_residual": point_distance(pts[-1], p0),
                      "m": m, "t0": t0})


def animate(symbol_text: str, family, out_dir: str,
            t0_values=(0.3,), lambda_values=None, winding: int = 1,
            svg: bool = False, tols: Tolerances = DEFAULT) -> dict:
    """Export one scene frame per (t0, lambda) grid node.

    With lambda_values=None the closing caustic parameter is solved once
    and reused across the sweep.  Frames whose audit verdict is not
    proper get flagged failed in the manifest but are still written, so
    a detuned lambda renders the configuration visibly breaking.
    """
    from .celestial import construct, parse_symbol
    from .poncelet import solve_caustic

    sym = parse_symbol(symbol_text)
    os.makedirs(out_dir, exist_ok=True)
    if lambda_values is None:
        lambda_values = (solve_caustic(family, sym.m, winding, tols),)
    frames = []
    idx = 0
    for t0, lam in product(t0_values, lambda_values):
        caustic = family.member(lam)
        P0 = _open_polygon(family.outer, caustic, sym.m, t0, tols)
        scene = construct(sym, P0, tols)
        ok = (scene.audit.verdict == "proper-(n4)"
              and scene.closure_residual < tols.coincidence)
        name = f"frame_{idx:05d}"
        with open(os.path.join(out_dir, name + JSON_EXT), "wb") as f:
            f.write(scene_to_json(scene))
        if svg:
            with open(os.path.join(out_dir, name + SVG_EXT), "wb") as f:
                f.write(scene_to_svg(scene))
        frames.append({"frame": name, "t0": t0, "lambda": lam,
                       "closure_residual": scene.closure_residual,
                       "verdict": scene.audit.verdict,
                       "ok": ok})
        idx += 1
    manifest = {"symbol": str(sym), "frames": frames}
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest
