"""Command-line front door: constructions, audits, certificates, exports.

Exit codes are the scripting contract: 0 success, 1 geometry failure,
2 syntax error, 3 constraint violation, 4 I/O error.  Human-readable
tables go to stdout by default; --json switches to machine output.
Identical flags and seeds produce byte-identical stdout.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import tau

import click

from . import __version__
from .celestial import construct, parse_symbol
from .errors import (
    GeometryError,
    SchemaError,
    SymbolError,
    SymbolSyntaxError,
)
from .exact import (
    CertificateReport,
    DegenerateParameters,
    SpecialPosition,
    certify_identity_polynomial,
    lemma1_check,
    special_case_check,
)
from .incircles import centers_scene
from .poncelet import ConfocalFamily, PonceletPair, build_polygon, \
    solve_caustic
from .ring_ops import (
    build_dual_grid,
    build_grid,
    pentagram as pentagram_map,
    ring_residual,
    v_op,
)
from .scene_io import (
    SceneDocument,
    json_to_scene,
    scene_to_json,
    scene_to_svg,
)
from .tolerances import from_env


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SymbolSyntaxError as e:
            _fail(2, str(e))
        except SymbolError as e:
            _fail(3, f"{type(e).__name__}: {e}")
        except (OSError, SchemaError) as e:
            _fail(4, str(e))
        except (GeometryError, ValueError) as e:
            _fail(1, f"{type(e).__name__}: {e}")
    return wrapper


def _parse_axes(text: str):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise SymbolSyntaxError(f"bad axes {text!r}, expected A,B")
    return ConfocalFamily(a, b)


def _read_scene(path: str) -> SceneDocument:
    with open(path, "rb") as f:
        return json_to_scene(f.read())


def _polygon_from(path: str):
    doc = _read_scene(path)
    for r in doc.rings:
        if r.kind == "points":
            return r
    raise SchemaError("/rings", f"no ring of points in {path}")


def _edges_from(path: str):
    doc = _read_scene(path)
    for r in doc.rings:
        if r.kind == "lines" and r.meta.get("shift") == 1:
            return r
    return v_op(_polygon_from(path), 1)


def _write(path: str, data: bytes):
    with open(path, "wb") as f:
        f.write(data)


def _audit_table(scene) -> str:
    a = scene.audit
    rows = [
        ("symbol", str(scene.symbol)),
        ("points", str(len(scene.points))),
        ("lines", str(len(scene.lines))),
        ("point degrees", _hist(a.point_degrees)),
        ("line degrees", _hist(a.line_degrees)),
        ("closure residual", f"{scene.closure_residual:.3e}"),
        ("best offset", f"{scene.closure_offset} "
                        f"({scene.closure_best_residual:.3e})"),
        ("max incidence residual", f"{a.max_residual:.3e}"),
        ("extra incidences", str(len(a.extra_incidences))),
        ("verdict", a.verdict),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _hist(h: dict) -> str:
    return ", ".join(f"{k}x{h[k]}" for k in sorted(h))


@click.group()
@click.version_option(__version__, prog_name="poncelet-rings")
def main():
    """Movable incidence configurations from Poncelet polygons."""


# ---------------------------------------------------------------------------
# poncelet build
# ---------------------------------------------------------------------------

@main.group()
def poncelet():
    """Poncelet polygon construction."""


@poncelet.command("build")
@click.option("--axes", required=True, help="Outer semi-axis squares A,B.")
@click.option("--m", "m", required=True, type=int, help="Vertex count.")
@click.option("--winding", default=1, show_default=True, type=int)
@click.option("--t0", default=0.0, show_default=True, type=float,
              help="Eccentric angle of the first vertex.")
@click.option("--out", type=click.Path(dir_okay=False),
              help="Write the scene JSON here.")
@click.option("--json", "as_json", is_flag=True,
              help="Print the scene JSON to stdout.")
@_guarded
def poncelet_build(axes, m, winding, t0, out, as_json):
    """Build a closed (m, winding) polygon in a confocal pair."""
    family = _parse_axes(axes)
    pair = PonceletPair.solve(family, m, winding, t0)
    P = build_polygon(pair, from_env())
    doc = SceneDocument.from_rings(
        [P], conics=[("outer", "outer", pair.outer),
                     ("caustic", "caustic", pair.caustic)],
        closure_residual=P.meta["closure_residual"])
    data = scene_to_json(doc)
    if out:
        _write(out, data)
    if as_json:
        click.echo(data.decode(), nl=False)
    else:
        click.echo(f"m={m} winding={winding} t0={t0}")
        click.echo(f"closure residual {P.meta['closure_residual']:.3e}")
        if out:
            click.echo(f"wrote {out}")


# ---------------------------------------------------------------------------
# celestial construct / validate
# ---------------------------------------------------------------------------

@main.group()
def celestial():
    """Celestial-symbol configurations."""


@celestial.command("construct")
@click.option("--symbol", "symbol_text", required=True)
@click.option("--from", "from_file", type=click.Path(exists=True,
                                                     dir_okay=False),
              help="Scene file with the starting polygon.")
@click.option("--axes", help="Solve a Poncelet polygon in this family.")
@click.option("--t0", default=0.3, show_default=True, type=float)
@click.option("--winding", default=1, show_default=True, type=int)
@click.option("--svg", "svg_file", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@_guarded
def celestial_construct(symbol_text, from_file, axes, t0, winding,
                        svg_file, out, as_json):
    """Run the symbol's join/meet alternation and audit the incidences."""
    tols = from_env()
    sym = parse_symbol(symbol_text)
    if from_file:
        P0 = _polygon_from(from_file)
    else:
        family = _parse_axes(axes or "4,1")
        pair = PonceletPair.solve(family, sym.m, winding, t0)
        P0 = build_polygon(pair, tols)
    scene = construct(sym, P0, tols)
    if out:
        _write(out, scene_to_json(scene))
    if svg_file:
        _write(svg_file, scene_to_svg(scene))
    if as_json:
        click.echo(scene_to_json(scene).decode(), nl=False)
    else:
        click.echo(_audit_table(scene))
    ok = (scene.audit.verdict == "proper-(n4)"
          and scene.closure_residual < tols.coincidence)
    sys.exit(0 if ok else 1)


@celestial.command("validate")
@click.option("--symbol", "symbol_text", required=True)
@click.option("--json", "as_json", is_flag=True)
@_guarded
def celestial_validate(symbol_text, as_json):
    """Parse a symbol and report its structure and trivial flag."""
    sym = parse_symbol(symbol_text)
    if as_json:
        click.echo(json.dumps({
            "symbol": str(sym), "m": sym.m, "k": sym.k,
            "pairs": [list(p) for p in sym.pairs],
            "trivial": sym.trivial,
        }, sort_keys=True))
    else:
        click.echo(f"symbol   {sym}")
        click.echo(f"m        {sym.m}")
        click.echo(f"rounds   {sym.k}")
        click.echo(f"pairs    {' '.join(f'({a},{b})' for a, b in sym.pairs)}")
        click.echo(f"trivial  {'yes' if sym.trivial else 'no'}")


# ---------------------------------------------------------------------------
# grid / grid dual
# ---------------------------------------------------------------------------

@main.group(invoke_without_command=True)
@click.option("--from", "from_file", type=click.Path(exists=True,
                                                     dir_okay=False))
@click.option("--rings", "rings_opt",
              help="Comma-separated ring indices to report.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def grid(ctx, from_file, rings_opt, as_json):
    """Poncelet grid audits (point rings of pairwise edge meets)."""
    if ctx.invoked_subcommand is not None:
        return
    if not from_file:
        _fail(2, "grid requires --from FILE")
    _grid_report(from_file, rings_opt, as_json, dual=False)


@grid.command("dual")
@click.option("--from", "from_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@_guarded
def grid_dual(from_file, as_json):
    """Dual grid audit (line rings enveloping direct-dependent conics)."""
    _grid_report(from_file, None, as_json, dual=True)


@_guarded
def _grid_report(from_file, rings_opt, as_json, dual):
    tols = from_env()
    if dual:
        P = _polygon_from(from_file)
        g = build_dual_grid(P, tols=tols)
    else:
        L = _edges_from(from_file)
        g = build_grid(L, tols=tols)
    wanted = sorted(g.rings)
    if rings_opt:
        wanted = [int(x) for x in rings_opt.split(",")]
        for i in wanted:
            if i not in g.rings:
                raise ValueError(f"grid has no ring {i}")
    import numpy as np
    rows = []
    for i in wanted:
        ring, C = g.rings[i], g.conics[i]
        worst = 0.0
        for e in ring:
            vec = np.asarray([float(x) for x in e.v])
            worst = max(worst, abs(float(vec @ np.asarray(C.m) @ vec)))
        rows.append({"ring": i, "size": len(ring), "fit_residual": worst})
    report = {"mode": "dual" if dual else "primal",
              "rank": g.rank, "rings": rows}
    if as_json:
        click.echo(json.dumps(report, sort_keys=True))
    else:
        click.echo(f"{report['mode']} grid, dependence rank {g.rank}")
        for r in rows:
            click.echo(f"ring {r['ring']:>2}  size {r['size']:>3}  "
                       f"fit residual {r['fit_residual']:.3e}")


# ---------------------------------------------------------------------------
# incircles
# ---------------------------------------------------------------------------

@main.command("incircles")
@click.option("--from", "from_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--shifts", required=True, help="Three letters a,b,c.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@_guarded
def incircles_cmd(from_file, shifts, out, as_json):
    """Incircle centers of square cells and their collinearity audit."""
    tols = from_env()
    try:
        a, b, c = (int(x) for x in shifts.split(","))
    except ValueError:
        raise SymbolSyntaxError(f"bad shifts {shifts!r}, expected a,b,c")
    L = _edges_from(from_file)
    scene = centers_scene(L, a, b, c, tols)
    if out:
        _write(out, scene_to_json(scene))
    if as_json:
        click.echo(scene_to_json(scene).decode(), nl=False)
    else:
        click.echo(_audit_table(scene))
        click.echo(f"worst four-center collinearity "
                   f"{scene.closure_residual:.3e}")
    ok = (scene.audit.verdict.startswith(("proper", "pre"))
          and scene.closure_residual < tols.coincidence)
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------------------
# certify
# ---------------------------------------------------------------------------

@main.group()
def certify():
    """Exact rational certificates for the concurrency lemma."""


def _emit_report(report: CertificateReport, passing: bool):
    click.echo(report.to_json())
    sys.exit(0 if passing else 1)


@certify.command("lemma1")
@click.option("--samples", default=200, show_default=True, type=int)
@click.option("--seed", default=42, show_default=True, type=int)
@_guarded
def certify_lemma1(samples, seed):
    """Check the concurrency determinants at random rational parameters."""
    rng = random.Random(seed)
    checked = 0
    special = 0
    failures = []
    while checked + special < samples:
        params = tuple(
            Fraction(rng.randint(-60, 60), rng.randint(1, 30))
            for _ in range(4))
        try:
            d1, d2 = lemma1_check(*params)
        except DegenerateParameters:
            continue
        except SpecialPosition:
            special += 1
            continue
        if d1 != 0 or d2 != 0:
            failures.append([str(p) for p in params])
        checked += 1
    verdict = "pass" if not failures else "fail"
    report = CertificateReport(
        identity="quadruple_tangent_concurrency_sampled",
        variables=("s", "t", "u", "v"),
        max_degree=12,
        term_counts={"samples": checked, "special_skipped": special},
        verdict=verdict,
        details={"seed": seed, "failures": failures},
    )
    _emit_report(report, verdict == "pass")


@certify.command("polynomial")
@_guarded
def certify_polynomial():
    """Expand both determinant identities symbolically; must be zero."""
    report = certify_identity_polynomial()
    _emit_report(report, report.verdict == "zero")


@certify.command("special")
@click.option("--case", "case", required=True,
              type=click.Choice(["mirror-x", "swap-mirror",
                                 "point-mirror", "point-swap"]))
@click.option("--s", "s_", default="2/3", show_default=True)
@click.option("--t", "t_", default="1/7", show_default=True)
@click.option("--a", "a_", default="1/5", show_default=True)
@_guarded
def certify_special(case, s_, t_, a_):
    """Certify one special-position class at exact parameters."""
    report = special_case_check(Fraction(s_), Fraction(t_), Fraction(a_),
                                case)
    _emit_report(report, report.verdict == "verified")


# ---------------------------------------------------------------------------
# pentagram
# ---------------------------------------------------------------------------

@main.command("pentagram")
@click.option("--from", "from_file", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--k", "k", required=True, type=int)
@click.option("--check-commute", "k2", type=int,
              help="Also verify T_k and T_k2 commute on this polygon.")
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@_guarded
def pentagram_cmd(from_file, k, k2, out, as_json):
    """Apply the diagonal map T_k; optionally test commutation with T_k2."""
    tols = from_env()
    P = _polygon_from(from_file)
    Q = pentagram_map(P, k)
    Q.label = f"T{k}(P0)"
    doc = SceneDocument.from_rings([Q])
    if out:
        _write(out, scene_to_json(doc))
    commute = None
    if k2 is not None:
        lhs = pentagram_map(pentagram_map(P, k), k2)
        rhs = pentagram_map(pentagram_map(P, k2), k)
        commute = ring_residual(lhs, rhs)
    if as_json:
        payload = {"k": k, "m": len(P)}
        if commute is not None:
            payload["commute_residual"] = commute
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        click.echo(f"T_{k} applied to an m={len(P)} polygon")
        if commute is not None:
            click.echo(f"commutation residual with T_{k2}: {commute:.3e}")
    if commute is not None and commute > tols.coincidence:
        sys.exit(1)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _sweep_cell(args):
    sym, family, winding, t0, lam, tols = args
    from .scene_io import _open_polygon
    try:
        P0 = _open_polygon(family.outer, family.member(lam), sym.m, t0,
                           tols)
        scene = construct(sym, P0, tols)
        residual = scene.closure_residual
        verdict = scene.audit.verdict
    except GeometryError as e:
        residual, verdict = float("inf"), f"error:{type(e).__name__}"
    return t0, lam, residual, verdict


@main.command("sweep")
@click.option("--symbol", "symbol_text", required=True)
@click.option("--axes", default="4,1", show_default=True)
@click.option("--winding", default=1, show_default=True, type=int)
@click.option("--t0-grid", "t0_grid", default=16, show_default=True,
              type=int)
@click.option("--lambda-grid", "lambda_grid", default=1, show_default=True,
              type=int, help="1 pins lambda to the closing value.")
@click.option("--out", default="sweep", show_default=True,
              help="Prefix for the CSV and figure files.")
@click.option("--workers", default=4, show_default=True, type=int)
@_guarded
def sweep(symbol_text, axes, winding, t0_grid, lambda_grid, out, workers):
    """Residual landscape over t0 (and optionally lambda) grids.

    Writes PREFIX.csv with columns t0, lambda, residual, verdict and a
    matplotlib figure PREFIX.png of the same data.
    """
    tols = from_env()
    sym = parse_symbol(symbol_text)
    family = _parse_axes(axes)
    lam_star = solve_caustic(family, sym.m, winding, tols)
    t0s = [tau * j / t0_grid for j in range(t0_grid)]
    if lambda_grid <= 1:
        lams = [lam_star]
    else:
        lo, hi = 0.5 * lam_star, min(family.B * 0.98,
                                     lam_star + 0.5 * (family.B - lam_star))
        lams = sorted(set(
            [lo + (hi - lo) * j / (lambda_grid - 1)
             for j in range(lambda_grid)] + [lam_star]))
    jobs = [(sym, family, winding, t0, lam, tols)
            for t0 in t0s for lam in lams]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        rows = list(pool.map(_sweep_cell, jobs))
    csv_path, fig_path = f"{out}.csv", f"{out}.png"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t0", "lambda", "residual", "verdict"])
    for t0, lam, residual, verdict in rows:
        writer.writerow([repr(t0), repr(lam), repr(residual), verdict])
    with open(csv_path, "w") as f:
        f.write(buf.getvalue())
    _sweep_figure(rows, t0s, lams, str(sym), fig_path)
    worst = max(r[2] for r in rows)
    click.echo(f"{len(rows)} cells, worst residual {worst:.3e}")
    click.echo(f"wrote {csv_path}")
    click.echo(f"wrote {fig_path}")


def _sweep_figure(rows, t0s, lams, title, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    fig, ax = plt.subplots(figsize=(7, 4))
    if len(lams) == 1:
        res = [max(r[2], 1e-18) for r in rows]
        ax.semilogy(t0s, res, marker=".")
        ax.set_xlabel("t0")
        ax.set_ylabel("closure residual")
    else:
        grid = np.full((len(lams), len(t0s)), np.nan)
        index = {(round(t, 12), round(l, 12)): r
                 for t, l, r, _ in rows}
        for i, lam in enumerate(lams):
            for j, t0 in enumerate(t0s):
                grid[i, j] = index[(round(t0, 12), round(lam, 12))]
        im = ax.imshow(np.log10(np.maximum(grid, 1e-18)), aspect="auto",
                       origin="lower",
                       extent=[t0s[0], t0s[-1], lams[0], lams[-1]])
        fig.colorbar(im, ax=ax, label="log10 residual")
        ax.set_xlabel("t0")
        ax.set_ylabel("lambda")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

@main.command("serve")
@click.option("--port", default=8781, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@_guarded
def serve(port, host):
    """Start the scene HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
