from fractions import Fraction

import pytest

from saddlegraph.connections import edge_connection, enumerate_connections
from saddlegraph.errors import DirectionLeavesField, PreconditionViolated
from saddlegraph.flow import (
    UNKNOWN,
    direction_decomposition,
    flow_interval_first_hit,
    trace_ray,
)
from saddlegraph.scalars import ExactScalar, vec
from saddlegraph.surface import builtin


def corner_start(s, poly=0, vtx=0):
    return (poly, s.polygons[poly].vertices[vtx])


def test_trace_ray_diagonal():
    s = builtin("square_torus")
    traj = trace_ray(s, corner_start(s), vec(1, 1), max_len2=ExactScalar(9))
    assert traj.terminal == "hit_marked"
    assert traj.len2 == ExactScalar(2)
    assert len(traj.pieces) == 1


def test_trace_ray_2_1():
    s = builtin("square_torus")
    traj = trace_ray(s, corner_start(s), vec(2, 1), max_len2=ExactScalar(9))
    assert traj.terminal == "hit_marked"
    assert traj.len2 == ExactScalar(5)


def test_trace_ray_budget():
    s = builtin("square_torus")
    traj = trace_ray(
        s, corner_start(s), vec(1, 0), max_len2=ExactScalar(Fraction(1, 4))
    )
    assert traj.terminal == "budget_exceeded"
    assert traj.len2 > ExactScalar(Fraction(1, 4))


def test_trace_ray_sector_check():
    s = builtin("square_torus")
    with pytest.raises(PreconditionViolated):
        trace_ray(s, corner_start(s), vec(-1, -1), max_len2=ExactScalar(9))


def test_torus_horizontal_cylinder():
    s = builtin("square_torus")
    dec = direction_decomposition(s, vec(1, 0))
    assert dec.periodic
    assert len(dec.cylinders) == 1
    cyl = dec.cylinders[0]
    assert cyl.circ_param == ExactScalar(1)
    assert cyl.height_param == ExactScalar(1)
    assert cyl.area == ExactScalar(1)
    assert cyl.simple_plus and cyl.simple_minus
    assert len(cyl.boundary_plus) == 1 and len(cyl.boundary_minus) == 1
    assert cyl.boundary_plus == cyl.boundary_minus


def test_torus_diagonal_cylinder():
    s = builtin("square_torus")
    dec = direction_decomposition(s, vec(1, 1))
    assert dec.periodic
    assert len(dec.cylinders) == 1
    assert dec.cylinders[0].area == ExactScalar(1)
    # circumference^2 = 2, height^2 = 1/2
    assert dec.cylinders[0].circumference2 == ExactScalar(2)
    assert dec.cylinders[0].height2 == ExactScalar(Fraction(1, 2))


def test_torus_irrational_direction_unknown():
    s = builtin("square_torus")
    dec = direction_decomposition(
        s, vec(1, ExactScalar(0, 1, 2)), crossing_budget=300
    )
    assert dec is UNKNOWN or not dec.periodic


def test_octagon_horizontal_cylinders():
    # frozen by hand: two cylinders, c1=2+2sqrt2 h1=2, c2=4+2sqrt2 h2=sqrt2
    s = builtin("regular_octagon")
    dec = direction_decomposition(s, vec(1, 0))
    assert dec.periodic
    assert len(dec.cylinders) == 2
    areas = sorted(c.area for c in dec.cylinders)
    assert areas == [ExactScalar(4, 4, 2), ExactScalar(4, 4, 2)]
    total = areas[0] + areas[1]
    assert total == ExactScalar(8, 8, 2)
    simple = [c for c in dec.cylinders if c.simple_plus and c.simple_minus]
    assert len(simple) == 1
    c_simple = simple[0]
    assert c_simple.circumference2 == ExactScalar(12, 8, 2)  # (2+2sqrt2)^2
    assert c_simple.height2 == ExactScalar(4)
    other = [c for c in dec.cylinders if c is not c_simple][0]
    assert other.circumference2 == ExactScalar(24, 16, 2)  # (4+2sqrt2)^2
    assert other.height2 == ExactScalar(2)
    assert not other.simple_plus and not other.simple_minus
    assert len(other.boundary_plus) == 2 and len(other.boundary_minus) == 2


def test_octagon_slanted_cylinders_area():
    s = builtin("regular_octagon")
    dec = direction_decomposition(s, vec(1, 1))
    assert dec.periodic
    total = ExactScalar(0)
    for c in dec.cylinders:
        total = total + c.area
    assert total == ExactScalar(8, 8, 2)


def test_l_shape_horizontal():
    s = builtin("L_shape_2x1")
    dec = direction_decomposition(s, vec(1, 0))
    assert dec.periodic
    assert len(dec.cylinders) == 2
    assert sorted(c.circ_param for c in dec.cylinders) == [
        ExactScalar(1),
        ExactScalar(2),
    ]
    total = ExactScalar(0)
    for c in dec.cylinders:
        total = total + c.area
    assert total == ExactScalar(3)


def test_direction_field_check():
    s = builtin("regular_octagon")
    with pytest.raises(DirectionLeavesField):
        direction_decomposition(s, vec(1, ExactScalar(0, 1, 3)))


def test_flow_interval_vertical_edge_right():
    # unfolding oracle on the unit square: rays to the right meet the vertex
    # at distance 1; both corner rays tie, broken toward the start corner
    s = builtin("square_torus")
    conns = enumerate_connections(s, ExactScalar(1))
    vert = next(c for c in conns if c.holonomy == vec(0, 1))
    hit = flow_interval_first_hit(s, vert, side="right")
    assert hit.flow_param == ExactScalar(1)
    assert hit.dist2 == ExactScalar(1)
    assert hit.foot == ExactScalar(0)


def test_flow_interval_diagonal():
    # transversal = torus diagonal (1,1), flow to the right side
    # (perpendicular (1,-1)): the corner ray from (0,0) travels to (1,0)
    # hit at distance sqrt(1/2): the nearest lattice point in that family
    s = builtin("square_torus")
    conns = enumerate_connections(s, ExactScalar(2))
    diag = next(c for c in conns if c.holonomy == vec(1, 1))
    hit = flow_interval_first_hit(s, diag, side="right")
    assert hit.dist2 == ExactScalar(Fraction(1, 2))
    assert hit.foot == ExactScalar(Fraction(1, 2))


def test_flow_interval_left_side():
    s = builtin("square_torus")
    conns = enumerate_connections(s, ExactScalar(1))
    horiz = next(c for c in conns if c.holonomy == vec(1, 0))
    hit = flow_interval_first_hit(s, horiz, side="left")
    assert hit.flow_param == ExactScalar(1)
    assert hit.foot == ExactScalar(0)
