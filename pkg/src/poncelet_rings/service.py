"""HTTP facade computing scenes live for the explorer UI and scripts.

Stateless apart from an in-process cache of solved caustic parameters.
Domain failures never turn into 500s: bad symbols and impossible
geometry come back as structured 422 bodies {code, step, message}, and
a detuned lambda still returns 200 with a failing audit so the client
can render the break.
"""

from __future__ import annotations

import json
import threading

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import __version__
from .celestial import construct, parse_symbol
from .errors import GeometryError, SymbolError
from .poncelet import ConfocalFamily, solve_caustic
from .scene_io import _open_polygon, scene_to_json
from .tolerances import from_env

app = FastAPI(title="poncelet-rings", version=__version__)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

_lambda_cache = {}
_lambda_lock = threading.Lock()


def _error(status: int, code: str, step: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"code": code, "step": step, "message": message},
    )


def _cached_lambda(A: float, B: float, m: int, winding: int) -> float:
    key = (A, B, m, winding)
    with _lambda_lock:
        if key in _lambda_cache:
            return _lambda_cache[key]
    # solve outside the lock; worst case two threads both compute it
    lam = solve_caustic(ConfocalFamily(A, B), m, winding, from_env())
    with _lambda_lock:
        _lambda_cache[key] = lam
    return lam


@app.get("/api/health")
def health():
    return {"status": "ok", "version": __version__}


@app.get("/api/symbol/validate")
def validate_symbol_endpoint(symbol: str = ""):
    try:
        sym = parse_symbol(symbol)
    except SymbolError as e:
        return {"valid": False, "code": type(e).__name__, "message": str(e)}
    return {
        "valid": True,
        "symbol": str(sym),
        "m": sym.m,
        "k": sym.k,
        "pairs": [list(p) for p in sym.pairs],
        "trivial": sym.trivial,
    }


@app.post("/api/scene")
async def scene_endpoint(request: Request):
    try:
        body = await request.json()
    except json.JSONDecodeError:
        return _error(400, "MalformedJSON", "parse", "body is not JSON")
    if not isinstance(body, dict):
        return _error(400, "MalformedJSON", "parse",
                      "body must be an object")
    try:
        symbol_text = body["symbol"]
        axes = body["axes"]
        A, B = float(axes[0]), float(axes[1])
        winding = int(body.get("winding", 1))
        t0 = float(body.get("t0", 0.3))
        lam = body.get("lambda")
        if lam is not None:
            lam = float(lam)
    except (KeyError, TypeError, ValueError, IndexError) as e:
        return _error(400, "MalformedJSON", "parse",
                      f"bad request body: {e}")
    tols = from_env()
    try:
        sym = parse_symbol(symbol_text)
    except SymbolError as e:
        return _error(422, type(e).__name__, "parse_symbol", str(e))
    try:
        family = ConfocalFamily(A, B)
    except ValueError as e:
        return _error(422, "BadAxes", "family", str(e))
    try:
        if lam is None:
            lam = _cached_lambda(A, B, sym.m, winding)
        caustic = family.member(lam)
        P0 = _open_polygon(family.outer, caustic, sym.m, t0, tols)
        scene = construct(sym, P0, tols)
    except (GeometryError, ValueError) as e:
        return _error(422, type(e).__name__, "construct", str(e))
    return Response(content=scene_to_json(scene),
                    media_type="application/json",
                    headers={"X-Lambda": repr(lam)})
