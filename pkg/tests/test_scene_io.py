import json
from fractions import Fraction

import pytest

from poncelet_rings.celestial import construct, parse_symbol
from poncelet_rings.errors import SchemaError
from poncelet_rings.exact import certify_identity_polynomial, phi_point
from poncelet_rings.poncelet import (
    ConfocalFamily,
    PonceletPair,
    Ring,
    build_polygon,
)
from poncelet_rings.projective import Point
from poncelet_rings.scene_io import (
    SceneDocument,
    animate,
    json_to_scene,
    scene_to_json,
    scene_to_svg,
)

FAMILY = ConfocalFamily(4.0, 1.0)


@pytest.fixture(scope="module")
def gr_scene():
    pair = PonceletPair.solve(FAMILY, 7, 1, 0.37)
    return construct(parse_symbol("7#(3,1;2,3;1,2)"), build_polygon(pair))


class TestJson:
    def test_gr_round_trip_byte_identical(self, gr_scene):
        data = scene_to_json(gr_scene)
        again = scene_to_json(json_to_scene(data))
        assert again == data

    def test_schema_fields(self, gr_scene):
        doc = json.loads(scene_to_json(gr_scene))
        assert doc["backend"] == "f64"
        assert doc["m"] == 7
        assert doc["symbol"] == "7#(3,1;2,3;1,2)"
        assert len(doc["rings"]) == 6
        for ring in doc["rings"]:
            assert len(ring["elements"]) == 7
        assert all(len(c["matrix6"]) == 6 for c in doc["conics"])
        assert doc["audit"]["verdict"] == "proper-(n4)"

    def test_empty_ring_scene_minimal(self):
        doc = SceneDocument.from_rings(
            [Ring([Point([1.0, 0.0, 1.0]), Point([0.0, 1.0, 1.0])],
                  "points", label="P0")])
        data = scene_to_json(doc)
        parsed = json.loads(data)
        assert parsed["m"] == 2 and parsed["conics"] == []
        assert scene_to_json(json_to_scene(data)) == data

    def test_exact_backend_fraction_strings(self):
        pts = [phi_point(Fraction(n, 3)) for n in (1, 2, 4, 5, 7)]
        doc = SceneDocument.from_rings([Ring(pts, "points", label="E")])
        assert doc.backend == "exact"
        data = scene_to_json(doc)
        raw = json.loads(data)
        for coords in raw["rings"][0]["elements"]:
            assert all(isinstance(x, str) for x in coords)
        back = json_to_scene(data)
        assert all(p.exact for p in back.rings[0])
        assert scene_to_json(back) == data

    def test_certificate_embeds_as_audit_extension(self):
        report = certify_identity_polynomial()
        doc = SceneDocument.from_rings(
            [Ring([phi_point(Fraction(n)) for n in (1, 2, 3)],
                  "points", label="W")],
            audit={"certificate": json.loads(report.to_json())})
        back = json_to_scene(scene_to_json(doc))
        assert back.audit["certificate"]["verdict"] == "zero"

    def test_missing_rings_pointer(self):
        with pytest.raises(SchemaError) as e:
            json_to_scene(b'{"backend":"f64","m":7,"conics":[],"audit":{}}')
        assert e.value.path == "/rings"

    def test_wrong_matrix_length(self, gr_scene):
        doc = json.loads(scene_to_json(gr_scene))
        doc["conics"][0]["matrix6"] = doc["conics"][0]["matrix6"][:5]
        with pytest.raises(SchemaError) as e:
            json_to_scene(json.dumps(doc).encode())
        assert e.value.path == "/conics/0/matrix6"

    def test_not_json(self):
        with pytest.raises(SchemaError):
            json_to_scene(b"not json at all")

    def test_bad_backend_and_kind(self, gr_scene):
        with pytest.raises(SchemaError) as e:
            json_to_scene(b'{"backend":"f32","m":7}')
        assert e.value.path == "/backend"
        doc = json.loads(scene_to_json(gr_scene))
        doc["rings"][0]["kind"] = "segments"
        with pytest.raises(SchemaError) as e:
            json_to_scene(json.dumps(doc).encode())
        assert e.value.path == "/rings/0/kind"


class TestSvg:
    def test_gr_element_counts(self, gr_scene):
        svg = scene_to_svg(gr_scene).decode()
        assert svg.count("<line ") == 21
        assert svg.count("<circle ") == 21

    def test_deterministic(self, gr_scene):
        assert scene_to_svg(gr_scene) == scene_to_svg(gr_scene)

    def test_one_group_per_ring(self, gr_scene):
        svg = scene_to_svg(gr_scene).decode()
        assert svg.count('<g id="ring-') == 6

    def test_viewbox_has_margin(self, gr_scene):
        svg = scene_to_svg(gr_scene).decode()
        vb = svg.split('viewBox="')[1].split('"')[0]
        x0, y0, w, h = (float(t) for t in vb.split())
        xs = [float(p.affine()[0]) for p in gr_scene.points]
        assert x0 < min(xs) and x0 + w > max(xs)
        assert w > (max(xs) - min(xs)) * 1.05 - 1e-9

    def test_empty_points_scene(self):
        doc = SceneDocument.from_rings(
            [Ring([], "lines", label="L")], symbol=None)
        doc.m = 0
        svg = scene_to_svg(doc).decode()
        assert '<g id="ring-L">' in svg

    def test_style_changes_attributes_only(self, gr_scene):
        base = scene_to_svg(gr_scene).decode()
        red = scene_to_svg(gr_scene, {"line_stroke": "#ff0000"}).decode()

        def geometry(svg):
            return [tok for tok in svg.split()
                    if tok.startswith(("x1=", "x2=", "y1=", "y2=",
                                       "cx=", "cy=", "d="))]

        assert geometry(base) == geometry(red)
        assert '#ff0000' in red and '#ff0000' not in base


class TestAnimate:
    def test_t0_sweep(self, tmp_path):
        man = animate("7#(3,1;2,3;1,2)", FAMILY, str(tmp_path),
                      t0_values=[0.1 * j for j in range(8)])
        assert len(man["frames"]) == 8
        assert all(f["ok"] for f in man["frames"])
        assert all(f["closure_residual"] < 1e-6 for f in man["frames"])
        assert (tmp_path / "frame_00007.scene.json").exists()
        assert (tmp_path / "manifest.json").exists()

    def test_single_frame(self, tmp_path):
        man = animate("7#(3,1;2,3;1,2)", FAMILY, str(tmp_path),
                      t0_values=[0.3], svg=True)
        assert len(man["frames"]) == 1
        assert (tmp_path / "frame_00000.svg").exists()

    def test_detuned_lambda_flagged(self, tmp_path):
        from poncelet_rings.poncelet import solve_caustic
        lam = solve_caustic(FAMILY, 7, 1)
        man = animate("7#(3,1;2,3;1,2)", FAMILY, str(tmp_path),
                      t0_values=[0.3], lambda_values=[lam, lam * 0.9])
        oks = [f["ok"] for f in man["frames"]]
        assert oks == [True, False]
        assert man["frames"][1]["closure_residual"] > 1e-3
