import pytest

from saddlegraph.connections import enumerate_connections
from saddlegraph.errors import NotPairwiseDisjoint, UnknownFormat, UnknownVertex
from saddlegraph.graph import (
    SCGraph,
    bounds_triangle,
    build_graph,
    distance,
    export,
    import_jsonl,
    triangle_faces,
    triangles,
)
from saddlegraph.scalars import ExactScalar
from saddlegraph.surface import builtin

from oracles import primitive_vectors, torus_interior_crossings


def hol_tuple(c):
    h = c.holonomy
    return (int(h.x.a), int(h.y.a))


def torus_graph(L2):
    s = builtin("square_torus")
    return s, build_graph(s, ExactScalar(L2))


def by_hol(g, pq):
    for i, c in g.vertices.items():
        if hol_tuple(c) == pq:
            return i
    raise AssertionError(pq)


def test_torus_graph_l2_2():
    # vertices (1,0),(0,1),(1,1),(-1,1); edges exactly the det +-1 pairs
    s, g = torus_graph(2)
    assert len(g.vertices) == 4
    assert g.edge_count() == 5
    assert not g.has_edge(by_hol(g, (1, 1)), by_hol(g, (-1, 1)))


def test_torus_graph_l2_1():
    s, g = torus_graph(1)
    assert len(g.vertices) == 2
    assert g.edge_count() == 1


def test_adjacency_law_two_ways():
    # edge iff |p wedge q| = 1: determinant law vs the piece-level counts
    s, g = torus_graph(9)
    ids = sorted(g.vertices)
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            a, b = g.vertices[ids[i]], g.vertices[ids[j]]
            pa, pb = hol_tuple(a), hol_tuple(b)
            det = abs(pa[0] * pb[1] - pa[1] * pb[0])
            assert g.has_edge(ids[i], ids[j]) == (det == 1)
            assert (torus_interior_crossings(pa, pb) == 0) == (det == 1)


def test_distance_examples():
    s, g = torus_graph(25)
    assert distance(g, by_hol(g, (1, 0)), by_hol(g, (0, 1))) == 1
    assert distance(g, by_hol(g, (1, 0)), by_hol(g, (1, 2))) == 2
    assert distance(g, by_hol(g, (1, 0)), by_hol(g, (1, 0))) == 0
    with pytest.raises(UnknownVertex):
        distance(g, "missing", by_hol(g, (1, 0)))


def test_distance_unreachable():
    g = SCGraph(builtin("square_torus"), ExactScalar(1), {"a": None, "b": None}, [])
    assert distance(g, "a", "b") is None


def test_bounds_triangle_farey():
    s, g = torus_graph(2)
    c10, c01, c11 = (
        g.vertices[by_hol(g, (1, 0))],
        g.vertices[by_hol(g, (0, 1))],
        g.vertices[by_hol(g, (1, 1))],
    )
    w = bounds_triangle(s, c10, c01, c11)
    assert w is not None
    assert w.holonomy_sum_is_zero()
    assert set(w.sides) == {c10.id, c01.id, c11.id}
    # torus one-marked-point: the triple bounds two distinct triangles
    faces = triangle_faces(s, c10, c01, c11)
    assert len(faces) == 2
    assert faces[0].tag != faces[1].tag


def test_bounds_triangle_sign_choice():
    # (1,0),(0,1),(1,-1): signs allow (1,0)-(0,1) = (1,-1)
    s, g = torus_graph(2)
    trio = [
        g.vertices[by_hol(g, (1, 0))],
        g.vertices[by_hol(g, (0, 1))],
        g.vertices[by_hol(g, (-1, 1))],
    ]
    w = bounds_triangle(s, *trio)
    assert w is not None
    assert w.holonomy_sum_is_zero()


def test_bounds_triangle_precondition():
    s, g = torus_graph(25)
    trio = [
        g.vertices[by_hol(g, (1, 0))],
        g.vertices[by_hol(g, (0, 1))],
        g.vertices[by_hol(g, (1, 2))],
    ]
    with pytest.raises(NotPairwiseDisjoint):
        bounds_triangle(s, *trio)


def test_triangles_torus_l2_2():
    s, g = torus_graph(2)
    ws = triangles(g, 100)
    # two disjoint triples, each bounding two faces
    assert len(ws) == 4
    for w in ws:
        assert w.holonomy_sum_is_zero()
        assert len(set(w.sides)) == 3


def test_octagon_triangle_witnesses():
    # truncation covering the canonical triangulation edges (len2 <= 16+8r2)
    s = builtin("regular_octagon")
    g = build_graph(s, ExactScalar(16, 8, 2))
    ws = triangles(g, 8)
    assert len(ws) >= 1
    for w in ws:
        assert w.holonomy_sum_is_zero()
        assert w.face.area2().sign() > 0


def test_export_dot_and_jsonl():
    s, g = torus_graph(2)
    dot = export(g, "dot").decode()
    assert dot.count(" -- ") == 5
    data = export(g, "jsonl")
    verts, edges = import_jsonl(data)
    assert verts == set(g.vertices)
    assert edges == g.edges
    with pytest.raises(UnknownFormat):
        export(g, "xml")


def test_monotone_induced_subgraph():
    s, g_small = torus_graph(2)
    _, g_big = torus_graph(9)
    assert set(g_small.vertices) <= set(g_big.vertices)
    for a, b in g_small.edges:
        assert g_big.has_edge(a, b)
    for a in g_small.vertices:
        for b in g_small.vertices:
            if a < b and g_big.has_edge(a, b):
                assert g_small.has_edge(a, b)
