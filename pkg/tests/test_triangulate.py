import random

import pytest

from saddlegraph.connections import enumerate_connections, intersections
from saddlegraph.errors import SeedNotDisjoint, UnknownEdge
from saddlegraph.scalars import ExactScalar, vec
from saddlegraph.surface import builtin
from saddlegraph.triangulate import (
    complete_triangulation,
    expected_edge_count,
    expected_face_count,
    flip,
    flip_bfs,
)


def hol_tuple(c):
    h = c.holonomy
    return (int(h.x.a), int(h.y.a))


def torus_tri():
    s = builtin("square_torus")
    return s, complete_triangulation(s)


def test_torus_canonical_triangulation():
    s, tri = torus_tri()
    assert expected_edge_count(s) == 3
    assert expected_face_count(s) == 2
    assert len(tri.edges) == 3
    assert len(tri.faces) == 2
    hols = sorted(hol_tuple(c) for c in tri.edges.values())
    assert hols == [(0, 1), (1, 0), (1, 1)]


def test_octagon_triangulation_cardinality():
    s = builtin("regular_octagon")
    tri = complete_triangulation(s)
    assert len(tri.edges) == 9 == expected_edge_count(s)
    assert len(tri.faces) == 6 == expected_face_count(s)
    # Euler: V - E + F = 2 - 2g with V = 1 marked class
    assert 1 - 9 + 6 == 2 - 2 * s.genus
    total = ExactScalar(0)
    for f in tri.faces:
        total = total + f.area2()
    assert total == s.total_area2()


def test_l_shape_triangulation():
    s = builtin("L_shape_2x1")
    tri = complete_triangulation(s)
    assert len(tri.edges) == expected_edge_count(s) == 9
    assert len(tri.faces) == 6


def test_seed_respected():
    s = builtin("square_torus")
    conns = enumerate_connections(s, ExactScalar(5))
    c12 = next(c for c in conns if hol_tuple(c) == (1, 2))
    tri = complete_triangulation(s, seed=[c12])
    assert c12.id in tri.edges
    for c in tri.edges.values():
        assert intersections(c, c12) == 0


def test_seed_not_disjoint():
    s = builtin("square_torus")
    conns = enumerate_connections(s, ExactScalar(5))
    c10 = next(c for c in conns if hol_tuple(c) == (1, 0))
    c12 = next(c for c in conns if hol_tuple(c) == (1, 2))
    with pytest.raises(SeedNotDisjoint):
        complete_triangulation(s, seed=[c10, c12])


def test_determinism():
    s = builtin("square_torus")
    t1 = complete_triangulation(s)
    t2 = complete_triangulation(builtin("square_torus"))
    assert t1.key() == t2.key()


def test_flip_farey():
    # flipping (1,0) out of {(1,0),(0,1),(1,1)} must produce the mediant (1,2)
    s, tri = torus_tri()
    e10 = next(c.id for c in tri.edges.values() if hol_tuple(c) == (1, 0))
    t2 = flip(tri, e10)
    assert t2 is not None
    hols = sorted(hol_tuple(c) for c in t2.edges.values())
    assert hols == [(0, 1), (1, 1), (1, 2)]


def test_flip_other_diagonal():
    # flipping (1,1) gives the other diagonal of the unit square: (1,-1)
    s, tri = torus_tri()
    e11 = next(c.id for c in tri.edges.values() if hol_tuple(c) == (1, 1))
    t2 = flip(tri, e11)
    hols = sorted(hol_tuple(c) for c in t2.edges.values())
    assert hols == [(-1, 1), (0, 1), (1, 0)]


def test_flip_involution():
    s, tri = torus_tri()
    for eid in list(tri.edges):
        t2 = flip(tri, eid)
        assert t2 is not None
        new_edge = next(i for i in t2.edges if i not in tri.edges)
        t3 = flip(t2, new_edge)
        assert t3 is not None
        assert t3.key() == tri.key()


def test_flip_unknown_edge():
    s, tri = torus_tri()
    with pytest.raises(UnknownEdge):
        flip(tri, "nope")


def test_flip_involution_random_walk():
    # involution along a random reachable walk, fixed seed
    s, tri = torus_tri()
    rng = random.Random(7)
    cur = tri
    for _ in range(25):
        eid = rng.choice(sorted(cur.edges))
        nxt = flip(cur, eid)
        if nxt is None:
            continue
        back = next(i for i in nxt.edges if i not in cur.edges)
        again = flip(nxt, back)
        assert again is not None and again.key() == cur.key()
        cur = nxt


def test_flip_bfs_depth0_and_1():
    s, tri = torus_tri()
    g0 = flip_bfs(s, tri, 0)
    assert len(g0.nodes) == 1
    g1 = flip_bfs(s, tri, 1)
    # all three edges flippable on the torus
    assert len(g1.nodes) == 4
    for node in g1.nodes.values():
        assert len(node.edges) == 3


def test_flip_bfs_connected_depth3():
    s, tri = torus_tri()
    g = flip_bfs(s, tri, 3)
    # connectivity probe: every node reached by construction is linked
    keys = set(g.nodes)
    seen = {next(iter(keys))}
    frontier = [next(iter(keys))]
    adj = {}
    for ln in g.links:
        a, b = tuple(ln)
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    while frontier:
        cur = frontier.pop()
        for nxt in adj.get(cur, ()):  # noqa: B020
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    assert seen == keys


def test_octagon_flip_involution():
    s = builtin("regular_octagon")
    tri = complete_triangulation(s)
    flippable = 0
    for eid in sorted(tri.edges):
        t2 = flip(tri, eid)
        if t2 is None:
            continue
        flippable += 1
        back = next(i for i in t2.edges if i not in tri.edges)
        t3 = flip(t2, back)
        assert t3 is not None and t3.key() == tri.key()
    assert flippable >= 1
