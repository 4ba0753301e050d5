from hypothesis import given
from hypothesis import strategies as st

from saddlegraph.predicates import (
    SegRel,
    convex_clip,
    is_strictly_convex_ccw,
    min_dist2_to_segment,
    orient,
    point_in_convex,
    polygon_area2,
    seg_relation,
)
from saddlegraph.scalars import ExactScalar, vec

coords = st.integers(min_value=-20, max_value=20)
points = st.builds(vec, coords, coords)


def test_orient_examples():
    assert orient(vec(0, 0), vec(1, 0), vec(0, 1)) == 1
    assert orient(vec(0, 0), vec(1, 1), vec(2, 2)) == 0
    p = vec(0, 0)
    q = vec(1, 0)
    r = vec(1, ExactScalar(0, -1, 2))  # (1, -sqrt2)
    assert orient(p, q, r) == -1


@given(points, points, points)
def test_orient_antisymmetric(p, q, r):
    assert orient(p, q, r) == -orient(q, p, r)
    assert orient(p, q, r) == -orient(p, r, q)
    assert orient(p, q, r) == orient(q, r, p)


def test_seg_relation_examples():
    s = seg_relation((vec(0, 0), vec(1, 0)), (vec(0, 1), vec(1, 1)))
    assert s == SegRel.DISJOINT
    s = seg_relation((vec(0, 0), vec(1, 1)), (vec(1, 0), vec(0, 1)))
    assert s == SegRel.INTERIOR_CROSS
    s = seg_relation((vec(0, 0), vec(1, 0)), (vec(1, 0), vec(1, 1)))
    assert s == SegRel.ENDPOINT_TOUCH


def test_seg_relation_collinear():
    a = (vec(0, 0), vec(2, 0))
    assert seg_relation(a, (vec(1, 0), vec(3, 0))) == SegRel.COLLINEAR_OVERLAP
    assert seg_relation(a, (vec(2, 0), vec(3, 0))) == SegRel.ENDPOINT_TOUCH
    assert seg_relation(a, (vec(3, 0), vec(4, 0))) == SegRel.DISJOINT


def test_t_touch_is_endpoint_touch():
    # endpoint of one segment interior to the other
    s = seg_relation((vec(0, 0), vec(2, 0)), (vec(1, 0), vec(1, 1)))
    assert s == SegRel.ENDPOINT_TOUCH


@given(points, points, points, points)
def test_seg_relation_symmetric(a, b, c, d):
    if a == b or c == d:
        return
    assert seg_relation((a, b), (c, d)) == seg_relation((c, d), (a, b))
    assert seg_relation((a, b), (d, c)) == seg_relation((c, d), (a, b))


def test_min_dist2():
    assert min_dist2_to_segment(vec(0, 0), vec(1, -1), vec(1, 1)) == ExactScalar(1)
    assert min_dist2_to_segment(vec(0, 0), vec(3, 4), vec(5, 4)) == ExactScalar(25)


def test_convex_clip_square():
    sq = [vec(0, 0), vec(2, 0), vec(2, 2), vec(0, 2)]
    # keep x >= 1
    out = convex_clip(sq, [(vec(1, 0), vec(1, 0))])
    assert polygon_area2(out) == ExactScalar(4)
    assert point_in_convex(vec(Fr(3, 2), 1), out, strict=True)
    out2 = convex_clip(sq, [(vec(3, 0), vec(1, 0))])
    assert polygon_area2(out2 or [vec(0, 0)]) == ExactScalar(0) or out2 == []


def Fr(a, b):
    from fractions import Fraction

    return Fraction(a, b)


def test_strict_convexity():
    assert is_strictly_convex_ccw([vec(0, 0), vec(1, 0), vec(0, 1)])
    assert not is_strictly_convex_ccw([vec(0, 0), vec(1, 0), vec(2, 0), vec(0, 1)])
    assert not is_strictly_convex_ccw([vec(0, 0), vec(0, 1), vec(1, 0)])  # cw
