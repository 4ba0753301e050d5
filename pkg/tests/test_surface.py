import json
from fractions import Fraction

import pytest

from saddlegraph.errors import (
    Disconnected,
    FieldMismatch,
    GluingMismatch,
    NonConvexPolygon,
    ParseError,
    SingularMatrix,
    UnknownName,
)
from saddlegraph.scalars import ExactScalar, Mat2, vec
from saddlegraph.surface import apply_matrix, builtin, parse_surface, surface_info


def shoelace_area(pg):
    # independent oracle: shoelace on the vertex list
    total = ExactScalar(0)
    verts = pg.vertices
    n = len(verts)
    for i in range(n):
        total = total + verts[i].wedge(verts[(i + 1) % n])
    return total * ExactScalar(Fraction(1, 2))


def test_square_torus():
    s = builtin("square_torus")
    info = surface_info(s)
    assert info.genus == 1
    assert info.num_marked == 1
    assert info.stratum == (0,)
    assert info.total_area == ExactScalar(1)
    assert info.is_translation


def test_regular_octagon():
    s = builtin("regular_octagon")
    info = surface_info(s)
    assert info.genus == 2
    assert info.num_marked == 1
    assert info.stratum == (4,)
    # oracle: 8 corner angles of 3pi/4 each -> cone angle 6pi
    assert s.cone_halfturns == (6,)
    # oracle: shoelace area of the octagon, 8(1+sqrt 2)
    assert sum(
        (shoelace_area(p) for p in s.polygons), start=ExactScalar(0)
    ) == ExactScalar(8, 8, 2)
    assert info.total_area == ExactScalar(8, 8, 2)
    assert info.is_translation


def test_l_shape():
    s = builtin("L_shape_2x1")
    info = surface_info(s)
    assert info.genus == 2
    assert info.num_marked == 1
    assert info.stratum == (4,)
    assert s.cone_halfturns == (6,)
    assert info.total_area == ExactScalar(3)
    assert info.is_translation


def test_unknown_builtin():
    with pytest.raises(UnknownName):
        builtin("nope")


def torus_json(**overrides):
    doc = {
        "field_d": 1,
        "polygons": [
            {
                "name": "sq",
                "vertices": [
                    [["0", "0"], ["0", "0"]],
                    [["1", "0"], ["0", "0"]],
                    [["1", "0"], ["1", "0"]],
                    [["0", "0"], ["1", "0"]],
                ],
            }
        ],
        "gluings": [
            {"from": ["sq", 0], "to": ["sq", 2], "sign": 1},
            {"from": ["sq", 1], "to": ["sq", 3], "sign": 1},
        ],
    }
    doc.update(overrides)
    return doc


def test_parse_roundtrip():
    s = parse_surface(json.dumps(torus_json()).encode())
    assert s == builtin("square_torus")
    assert hash(s) == hash(builtin("square_torus"))


def test_parse_strict_keys():
    doc = torus_json()
    doc["extra"] = 1
    with pytest.raises(ParseError):
        parse_surface(json.dumps(doc))
    doc = torus_json()
    doc["polygons"][0]["color"] = "red"
    with pytest.raises(ParseError):
        parse_surface(json.dumps(doc))


def test_gluing_mismatch():
    # glue a unit edge against the diagonal of a shifted square:
    doc = torus_json()
    doc["polygons"][0]["vertices"][2] = [["2", "0"], ["1", "0"]]
    with pytest.raises((GluingMismatch, NonConvexPolygon)):
        parse_surface(json.dumps(doc))


def test_sign_minus_one_needs_equal_vec():
    doc = torus_json()
    doc["gluings"][0]["sign"] = -1
    with pytest.raises(GluingMismatch):
        parse_surface(json.dumps(doc))


def test_nonconvex_rejected():
    doc = torus_json()
    doc["polygons"][0]["vertices"].append([["1/2", "0"], ["1/2", "0"]])
    with pytest.raises((NonConvexPolygon, GluingMismatch, ParseError)):
        parse_surface(json.dumps(doc))


def test_pillowcase_like_half_translation():
    # two unit squares glued with -1 signs on the side pairs: half-translation
    doc = {
        "field_d": 1,
        "polygons": [
            {
                "name": "a",
                "vertices": [
                    [["0", "0"], ["0", "0"]],
                    [["1", "0"], ["0", "0"]],
                    [["1", "0"], ["1", "0"]],
                    [["0", "0"], ["1", "0"]],
                ],
            },
            {
                "name": "b",
                "vertices": [
                    [["0", "0"], ["0", "0"]],
                    [["1", "0"], ["0", "0"]],
                    [["1", "0"], ["1", "0"]],
                    [["0", "0"], ["1", "0"]],
                ],
            },
        ],
        "gluings": [
            {"from": ["a", 0], "to": ["b", 0], "sign": -1},
            {"from": ["a", 2], "to": ["b", 2], "sign": -1},
            {"from": ["a", 1], "to": ["b", 3], "sign": 1},
            {"from": ["a", 3], "to": ["b", 1], "sign": 1},
        ],
    }
    s = parse_surface(json.dumps(doc))
    info = surface_info(s)
    assert not info.is_translation
    assert info.genus == 0
    # pillowcase: four pi-cones
    assert info.stratum == (-1, -1, -1, -1)


def test_apply_matrix_identity_and_shear():
    s = builtin("square_torus")
    assert apply_matrix(s, Mat2.identity()) == s
    sheared = apply_matrix(s, Mat2(1, 1, 0, 1))
    assert surface_info(sheared).total_area == ExactScalar(1)
    assert surface_info(apply_matrix(s, Mat2(2, 0, 0, 1))).total_area == ExactScalar(2)


def test_apply_matrix_roundtrip():
    s = builtin("regular_octagon")
    A = Mat2(1, ExactScalar(0, 1, 2), 0, 1)
    back = apply_matrix(apply_matrix(s, A), A.inverse())
    assert back == s


def test_apply_matrix_negative_det():
    s = builtin("regular_octagon")
    R = Mat2(1, 0, 0, -1)
    t = apply_matrix(s, R)
    assert surface_info(t).total_area == surface_info(s).total_area
    assert apply_matrix(t, R) == s


def test_apply_matrix_errors():
    s = builtin("square_torus")
    with pytest.raises(SingularMatrix):
        apply_matrix(s, Mat2(1, 1, 1, 1))
    with pytest.raises(FieldMismatch):
        apply_matrix(s, Mat2(ExactScalar(0, 1, 2), 0, 0, 1))


def test_euler_formula_torus():
    s = builtin("square_torus")
    V = len(s.corner_classes)
    E = len(s.gluings) // 2
    F = len(s.polygons)
    assert V - E + F == 2 - 2 * s.genus
    assert s.cone_halfturns == (2,)
