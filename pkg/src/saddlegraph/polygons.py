"""Admissible polygons: developed immersions, the embedding checker, strip
extensions, pentagon construction, and coconvexification.

An admissible map sends a plane polygon into the surface by a local
half-translation which embeds the interior and maps exactly the vertices to
marked points.  We realize it as a cell decomposition: the pullback of the
polygon gluing edges cuts the plane polygon into convex cells, each carried
into one chart by z -> eps*z + tau.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .connections import intersections
from .errors import (
    AnchorInvalid,
    HypothesisViolated,
    InternalGeometryError,
    PreconditionViolated,
    UnknownCylinderStatus,
)
from .flow import direction_decomposition, flow_interval_first_hit
from .predicates import (
    convex_clip,
    is_strictly_convex_ccw,
    on_segment,
    orient,
    point_in_convex,
    polygon_area2,
)
from .scalars import ExactScalar, Vec2
from .triangulate import connection_through

_HALF = ExactScalar(Fraction(1, 2))


@dataclass(frozen=True)
class Cell:
    """Convex region of the plane polygon mapped into one chart."""

    poly: int
    eps: int
    tau: Vec2
    region: tuple  # ccw Vec2 list in polygon-plane coordinates

    def to_chart(self, z):
        return Vec2(self.eps * z.x + self.tau.x, self.eps * z.y + self.tau.y)

    def chart_region(self):
        pts = [self.to_chart(z) for z in self.region]
        if self.eps < 0:
            pts.reverse()
        return pts


@dataclass
class AdmissibilityReport:
    admissible: bool
    violations: list
    cells: tuple = ()
    vertex_corners: tuple = ()


class AdmissiblePolygon:
    """Plane polygon + developed immersion data + boundary connection ids."""

    def __init__(self, surface, vertices, anchor, cells, vertex_corners,
                 side_conns, diagonal_conns):
        self.surface = surface
        self.vertices = tuple(vertices)
        self.anchor = anchor
        self.cells = tuple(cells)
        self.vertex_corners = tuple(vertex_corners)
        self.side_conns = tuple(side_conns)
        self.diagonal_conns = dict(diagonal_conns)

    @property
    def side_ids(self):
        return tuple(c.id for c in self.side_conns)

    @property
    def diagonal_ids(self):
        return {k: c.id for k, c in self.diagonal_conns.items()}

    def area2(self):
        return polygon_area2(self.vertices)

    def __repr__(self):
        return f"AdmissiblePolygon({len(self.vertices)} vertices)"


def _clip_halfplane(region, p, normal):
    return convex_clip(region, [(p, normal)])


def _develop_cells(surface, region, anchor):
    """Push a convex plane region onto the surface from an anchor placement.

    anchor = (poly, eps, tau) maps plane coords into the chart of `poly`.
    Returns (cells, marked_hits) where marked_hits are plane points mapping
    to marked corners (with containment kind against the original region).
    """
    poly0, eps0, tau0 = anchor
    out_cells = []
    marked_hits = []
    stack = [(poly0, eps0, tau0, list(region))]
    guard = 0
    while stack:
        guard += 1
        if guard > 50_000:
            raise InternalGeometryError("cell development did not terminate")
        poly, eps, tau, reg = stack.pop()
        if len(reg) < 3 or polygon_area2(reg).sign() <= 0:
            continue
        pg = surface.polygons[poly]
        # pull the chart polygon back to plane coordinates
        pull = [Vec2(eps * (v.x - tau.x), eps * (v.y - tau.y)) for v in pg.vertices]
        if eps < 0:
            pull.reverse()
        n = len(pull)
        # record marked-corner pullbacks that touch the current region
        for q in pull:
            if point_in_convex(q, reg):
                marked_hits.append(q)
        # inside part
        inner = list(reg)
        for i in range(n):
            a, b = pull[i], pull[(i + 1) % n]
            inner = _clip_halfplane(inner, a, (b - a).rot90())
            if not inner:
                break
        if inner and polygon_area2(inner).sign() > 0:
            out_cells.append(Cell(poly, eps, tau, tuple(inner)))
        # beyond parts, peeled off one half-plane at a time
        rest = list(reg)
        for i in range(n):
            a, b = pull[i], pull[(i + 1) % n]
            outward = -(b - a).rot90()
            beyond = _clip_halfplane(rest, a, outward)
            if beyond and polygon_area2(beyond).sign() > 0:
                # chart edge index: account for the reversal applied to pull
                e = i if eps > 0 else (n - 1 - i) % n
                tr = surface.transition(poly, e)
                neps = eps * tr.sign
                ntau = Vec2(
                    tr.sign * tau.x + tr.shift.x, tr.sign * tau.y + tr.shift.y
                )
                stack.append((tr.poly, neps, ntau, beyond))
            rest = _clip_halfplane(rest, a, (b - a).rot90())
            if not rest:
                break
    return out_cells, marked_hits


def _fan_triangles(vertices):
    """Fan decomposition from a reflex vertex (at most one is supported)."""
    n = len(vertices)
    reflex = [
        i
        for i in range(n)
        if orient(vertices[(i - 1) % n], vertices[i], vertices[(i + 1) % n]) <= 0
    ]
    if len(reflex) > 1:
        raise PreconditionViolated("only one reflex vertex is supported")
    base = reflex[0] if reflex else 0
    tris = []
    for k in range(1, n - 1):
        tris.append((base, (base + k) % n, (base + k + 1) % n))
    return tris, base


def _point_in_region(pt, vertices, strict=False):
    """Point in a simple ccw polygon with at most one reflex vertex."""
    tris, _ = _fan_triangles(vertices)
    inside = any(
        point_in_convex(pt, [vertices[i], vertices[j], vertices[k]])
        for i, j, k in tris
    )
    if not inside:
        return False
    if not strict:
        return True
    n = len(vertices)
    for i in range(n):
        if on_segment(pt, vertices[i], vertices[(i + 1) % n]):
            return False
    return True


def _anchor_across(surface, cells, a, b):
    """Anchor placement valid on the far side of the oriented segment [a, b].

    Picks a developed cell touching the segment with positive length; when
    the segment's image runs along a chart edge the anchor is pushed through
    the gluing.
    """
    for c in cells:
        reg = list(c.region)
        hp = [
            (reg[k], (reg[(k + 1) % len(reg)] - reg[k]).rot90())
            for k in range(len(reg))
        ]
        part = convex_clip([a, b], hp)
        if len(part) < 2 or part[0] == part[-1]:
            continue
        pa, pb = c.to_chart(part[0]), c.to_chart(part[-1])
        pg = surface.polygons[c.poly]
        for e in range(len(pg)):
            ea, eb = pg.edge(e)
            if on_segment(pa, ea, eb) and on_segment(pb, ea, eb):
                tr = surface.transition(c.poly, e)
                return (
                    tr.poly,
                    c.eps * tr.sign,
                    Vec2(
                        tr.sign * c.tau.x + tr.shift.x,
                        tr.sign * c.tau.y + tr.shift.y,
                    ),
                )
        return (c.poly, c.eps, c.tau)
    raise InternalGeometryError("no developed cell touches the fan diagonal")


def _develop_region(surface, vertices, anchor):
    """Cells + marked-point pullbacks for a simple ccw region (<= 1 reflex)."""
    if _is_convex(vertices):
        return _develop_cells(surface, vertices, anchor)
    tris, base = _fan_triangles(vertices)
    # develop fan triangles in an order that starts where the anchor is valid
    regions = [
        (vertices[i], vertices[j], vertices[k]) for i, j, k in tris
    ]
    poly0 = surface.polygons[anchor[0]]
    pull = [
        Vec2(anchor[1] * (v.x - anchor[2].x), anchor[1] * (v.y - anchor[2].y))
        for v in poly0.vertices
    ]
    if anchor[1] < 0:
        pull.reverse()
    start = None
    for idx, reg in enumerate(regions):
        hp = [
            (reg[k], (reg[(k + 1) % 3] - reg[k]).rot90()) for k in range(3)
        ]
        inter = convex_clip(pull, hp)
        if inter and polygon_area2(inter).sign() > 0:
            start = idx
            break
    if start is None:
        raise AnchorInvalid("anchor region does not meet its chart polygon")
    all_cells = []
    all_hits = []
    anchors = {start: anchor}
    cells_of = {}
    order = [start] + [
        start + d * s
        for d in range(1, len(regions))
        for s in (1, -1)
        if 0 <= start + d * s < len(regions)
    ]
    for idx in order:
        if idx not in anchors:
            # transport the anchor across the shared fan diagonal
            prev = idx - 1 if idx > start else idx + 1
            shared = regions[idx][0], (
                regions[idx][1] if idx > start else regions[idx][2]
            )
            anchors[idx] = _anchor_across(surface, cells_of[prev], *shared)
        cells, hits = _develop_cells(surface, regions[idx], anchors[idx])
        cells_of[idx] = cells
        all_cells.extend(cells)
        all_hits.extend(hits)
    return all_cells, all_hits


def _is_convex(vertices):
    n = len(vertices)
    return all(
        orient(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) > 0
        for i in range(n)
    )


def is_admissible(surface, vertices, anchor):
    """Check the admissible-map conditions for a plane polygon + anchor.

    The polygon must be simple and counterclockwise (at most one reflex
    vertex); `anchor` places it into a chart.  Returns an
    AdmissibilityReport; the interior-embedding check is a pairwise overlay
    of developed cells.
    """
    vertices = tuple(vertices)
    if polygon_area2(vertices).sign() <= 0:
        raise PreconditionViolated("polygon must be counterclockwise")
    violations = []
    cells, marked_hits = _develop_region(surface, vertices, anchor)
    if not cells:
        raise AnchorInvalid("anchor region does not meet its chart polygon")
    # area conservation: the cells partition the polygon
    total = ExactScalar(0)
    for c in cells:
        total = total + polygon_area2(c.region)
    if total != polygon_area2(vertices):
        raise AnchorInvalid("development does not cover the polygon")

    # condition 3: marked preimages are exactly the polygon vertices
    vertex_set = set(v.key() for v in vertices)
    flagged = set()
    for q in marked_hits:
        if q.key() in vertex_set or q.key() in flagged:
            continue
        flagged.add(q.key())
        if _point_in_region(q, vertices, strict=True):
            violations.append(f"interior point {q.text()} maps to a marked point")
        else:
            violations.append(
                f"boundary point {q.text()} maps to a marked point but is no vertex"
            )
    # vertices must land on marked corners
    vertex_corners = []
    for v in vertices:
        corner = None
        for c in cells:
            if point_in_convex(v, list(c.region)):
                img = c.to_chart(v)
                for idx, q in enumerate(surface.polygons[c.poly].vertices):
                    if img == q:
                        corner = (c.poly, idx)
                        break
            if corner:
                break
        if corner is None:
            violations.append(f"vertex {v.text()} does not map to a marked point")
        vertex_corners.append(corner)

    # condition 2: interior embedding via pairwise cell overlay
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            ci, cj = cells[i], cells[j]
            if ci.poly != cj.poly:
                continue
            if ci.eps == cj.eps and ci.tau == cj.tau:
                continue
            ri = ci.chart_region()
            rj = cj.chart_region()
            inter = convex_clip(
                ri,
                [
                    (rj[k], (rj[(k + 1) % len(rj)] - rj[k]).rot90())
                    for k in range(len(rj))
                ],
            )
            if not inter:
                continue
            if len(inter) >= 3 and polygon_area2(inter).sign() > 0:
                violations.append(
                    f"cells {i} and {j} overlap with positive area in chart"
                )
                continue
            # degenerate overlap: a violation only if both pullbacks meet the
            # open polygon (boundary self-gluing is allowed)
            pts = inter
            back_i = [Vec2(ci.eps * (p.x - ci.tau.x), ci.eps * (p.y - ci.tau.y))
                      for p in pts]
            back_j = [Vec2(cj.eps * (p.x - cj.tau.x), cj.eps * (p.y - cj.tau.y))
                      for p in pts]
            def interior_touch(back):
                if len(back) == 1:
                    return _point_in_region(back[0], vertices, strict=True)
                mid = (back[0] + back[-1]) * _HALF
                return _point_in_region(mid, vertices, strict=True)
            if interior_touch(back_i) and interior_touch(back_j):
                violations.append(
                    f"cells {i} and {j} identify interior points along an edge"
                )
    return AdmissibilityReport(
        admissible=not violations,
        violations=violations,
        cells=tuple(cells),
        vertex_corners=tuple(vertex_corners),
    )


def _segment_connection(surface, cells, a, b):
    """Trace the image of the plane segment [a, b] as a saddle connection."""
    mid = (a + b) * _HALF
    d_plane = b - a
    for c in cells:
        if point_in_convex(mid, list(c.region)):
            chart_mid = c.to_chart(mid)
            d_chart = Vec2(c.eps * d_plane.x, c.eps * d_plane.y)
            return connection_through(surface, c.poly, chart_mid, d_chart)
    raise InternalGeometryError("segment midpoint not covered by any cell")


def _frame_data_at_segment(surface, cells, conn, a, b):
    """Orientation and frame sign linking a plane segment to its connection.

    Returns (fwd, to_dev) where `fwd` says whether the polygon traversal
    a -> b matches the connection's canonical orientation, and `to_dev` maps
    plane-frame vectors into the connection's developed frame.
    """
    mid = (a + b) * _HALF
    d_plane = b - a
    for c in cells:
        if not point_in_convex(mid, list(c.region)):
            continue
        chart_mid = c.to_chart(mid)
        d_chart = Vec2(c.eps * d_plane.x, c.eps * d_plane.y)
        for piece in conn.pieces:
            if piece.poly != c.poly:
                continue
            pv = piece.exit - piece.entry
            if (chart_mid - piece.entry).wedge(pv).sign() == 0 and on_segment(
                chart_mid, piece.entry, piece.exit
            ):
                fwd = d_chart.dot(pv).sign() > 0
                eps_conn = 1 if pv.dot(conn.hol_raw).sign() > 0 else -1
                sgn = eps_conn * c.eps

                def to_dev(w, s=sgn):
                    return Vec2(s * w.x, s * w.y)

                return fwd, to_dev
    raise InternalGeometryError("segment not aligned with its connection")


def build_admissible(surface, vertices, anchor):
    """Validated AdmissiblePolygon; raises on inadmissibility."""
    report = is_admissible(surface, vertices, anchor)
    if not report.admissible:
        raise PreconditionViolated(
            "polygon is not admissible: " + "; ".join(report.violations)
        )
    n = len(vertices)
    sides = [
        _segment_connection(surface, report.cells, vertices[k], vertices[(k + 1) % n])
        for k in range(n)
    ]
    diagonals = {}
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            diagonals[(i, j)] = _segment_connection(
                surface, report.cells, vertices[i], vertices[j]
            )
    return AdmissiblePolygon(
        surface, vertices, anchor, report.cells, report.vertex_corners,
        sides, diagonals,
    )


# -- strip extension -------------------------------------------------------------


def extend_strip(surface, apoly, side, flow_dir=None, crossing_budget=10_000):
    """Extend an admissible polygon across one side by the first-hit lemma.

    The strip runs parallel to `flow_dir` (default: perpendicular to the
    side); all other vertices must lie inside the side's strip and strictly
    left of the side's line, and the side image must differ from every other
    side image.
    """
    verts = apoly.vertices
    n = len(verts)
    va, vb = verts[side], verts[(side + 1) % n]
    svec = vb - va
    if flow_dir is None:
        flow_dir = -svec.rot90()  # outward: right of the ccw side
    if svec.wedge(flow_dir).sign() >= 0:
        raise PreconditionViolated("flow direction must point out of the polygon")
    side_conn = apoly.side_conns[side]
    for k, c in enumerate(apoly.side_conns):
        if k != side and c.id == side_conn.id:
            raise HypothesisViolated(
                "side image equals another side image (simple-cylinder side)"
            )
    # strip hypotheses: every other vertex inside the closed strip and
    # strictly on the inner side of the side's line
    den = svec.wedge(flow_dir)
    for k, v in enumerate(verts):
        if k in (side, (side + 1) % n):
            continue
        # v = va + u*svec + t*flow_dir
        rel = v - va
        u = rel.wedge(flow_dir) / den
        t = svec.wedge(rel) / den
        if t.sign() >= 0:
            raise HypothesisViolated("vertex on the flow side of the side's line")
        if u.sign() < 0 or (u - ExactScalar(1)).sign() > 0:
            raise HypothesisViolated("vertex outside the side's strip")

    # express the flow in the side connection's developed frame
    fwd, to_dev = _frame_data_at_segment(surface, apoly.cells, side_conn, va, vb)
    hit = flow_interval_first_hit(
        surface, side_conn, flow_dir=to_dev(flow_dir),
        crossing_budget=crossing_budget,
    )
    foot = hit.foot if fwd else ExactScalar(1) - hit.foot
    new_vertex = va + svec * foot + flow_dir * hit.flow_param
    new_verts = list(verts[: side + 1]) + [new_vertex] + list(verts[side + 1 :])
    return build_admissible(surface, new_verts, apoly.anchor)


# -- pentagons over triangles ------------------------------------------------


@dataclass(frozen=True)
class PentagonResult:
    kind: str               # "pentagon" | "simple_cylinder" | "non_simple_cylinder"
    polygon: AdmissiblePolygon
    cylinder: object = None


def _face_region_cells(surface, face):
    anchor = (face.anchor_corner[0], 1, Vec2(ExactScalar(0), ExactScalar(0)))
    cells, _ = _develop_cells(surface, face.vertices(), anchor)
    return anchor, cells


def _connection_meets_cells_interior(surface, conn, cells, region):
    """Does the connection's interior meet the open immersed region?"""
    for cell in cells:
        chart_cell = cell.chart_region()
        hp = [
            (chart_cell[k], (chart_cell[(k + 1) % len(chart_cell)] - chart_cell[k]).rot90())
            for k in range(len(chart_cell))
        ]
        for poly, (a, b) in conn.chart_pieces():
            if poly != cell.poly:
                continue
            clipped = convex_clip([a, b], hp)
            if len(clipped) >= 2 and clipped[0] != clipped[-1]:
                mid = (clipped[0] + clipped[-1]) * _HALF
                if point_in_convex(mid, chart_cell, strict=True):
                    return True
    return False


def _triangle_cylinder(surface, witness, crossing_budget):
    """Locate a cylinder containing the witness triangle, if any.

    Returns (cylinder, side_index, fwd3, parallel_side_k) or None; raises
    UnknownCylinderStatus when a side direction cannot be certified.
    """
    face = witness.face
    verts = face.vertices()
    anchor, cells = _face_region_cells(surface, face)
    found = []
    for k in range(3):
        d = face.hols[k]
        dec = direction_decomposition(surface, d, crossing_budget)
        if not dec.periodic:
            raise UnknownCylinderStatus(
                f"direction {d.text()} could not be certified periodic"
            )
        gamma = {}
        for cyl in dec.cylinders:
            for cid in cyl.boundary_minus + cyl.boundary_plus:
                gamma[cid] = cyl.dev.conns[cid]
        blocked = False
        for conn in gamma.values():
            if _connection_meets_cells_interior(surface, conn, cells, verts):
                blocked = True
                break
        if blocked:
            continue
        # contained: the side-k connection lies on the boundary of the
        # cylinder adjacent on the triangle's side
        c3 = gamma[witness.sides[k]]
        fwd3, _ = _frame_data_at_segment(
            surface, cells, c3, verts[k], verts[(k + 1) % 3]
        )
        want_end = 0 if fwd3 else 1
        for cyl in dec.cylinders:
            for comp_name in ("minus", "plus"):
                comp = getattr(cyl.dev, comp_name)
                if (c3.id, want_end) in comp.steps:
                    found.append((cyl, comp_name, fwd3, k, c3))
    if not found:
        return None
    for item in found:
        if item[0].simple_minus and item[0].simple_plus:
            return item
    return found[0]


def _cylinder_frame(surface, cyl, bottom_name):
    """Plane frame with the chosen boundary component at the bottom.

    Returns (f1, f2, bottom, top, x_top_offset, anchor) where a bottom-walk
    param a sits at a*f1, a top-walk param q sits at (x_top_offset - q)*f1 +
    h*f2, and `anchor` maps these plane coordinates into a chart.
    """
    dev = cyl.dev
    d = cyl.direction
    e1, e2 = d, d.rot90()
    x0 = dev.cross_minus + dev.cross_plus
    poly0, chi, q0 = dev.anchor
    if bottom_name == "minus":
        f1, f2 = e1, e2
        anchor = (poly0, chi, q0)
        return f1, f2, dev.minus, dev.plus, x0, anchor
    # flip the frame: the plus walk becomes the bottom, running along -e1
    f1, f2 = -e1, -e2
    k_vec = e1 * x0 + e2 * cyl.height_param
    tau = Vec2(chi * k_vec.x + q0.x, chi * k_vec.y + q0.y)
    return f1, f2, dev.plus, dev.minus, x0, (poly0, chi, tau)


def _walk_lengths(direction, comp, conns):
    out = []
    for cid, _end in comp.steps:
        hol = conns[cid].hol_raw
        out.append(abs(hol.dot(direction) / direction.len2()))
    return out


def pentagon_of_triangle(surface, witness, crossing_budget=10_000):
    """Admissible pentagon (or cylinder polygon) around a triangle witness.

    Dispatch: a triangle inside a simple cylinder yields that cylinder's
    quadrilateral; inside a non-simple cylinder, a pentagon with one interior
    angle of exactly pi; otherwise two strip extensions produce a pentagon
    strictly convex at every vertex.
    """
    located = _triangle_cylinder(surface, witness, crossing_budget)
    if located is not None:
        cyl, comp_name, fwd3, k3, c3 = located
        if cyl.simple_minus and cyl.simple_plus:
            quad = _simple_cylinder_quad(surface, cyl)
            return PentagonResult("simple_cylinder", quad, cyl)
        pent = _non_simple_pentagon(surface, cyl, comp_name, witness, k3, fwd3)
        return PentagonResult("non_simple_cylinder", pent, cyl)
    pent = _corollary_pentagon(surface, witness, crossing_budget)
    return PentagonResult("pentagon", pent)


def _simple_cylinder_quad(surface, cyl):
    d = cyl.direction
    e1, e2 = d, d.rot90()
    c = cyl.circ_param
    h = cyl.height_param
    x0 = cyl.dev.cross_minus + cyl.dev.cross_plus
    # top end of the plus connection nearest a canonical fundamental domain
    x4 = x0
    while x4.sign() < 0:
        x4 = x4 + c
    while (x4 - c).sign() >= 0:
        x4 = x4 - c
    z = ExactScalar(0)
    q1 = Vec2(z, z)
    q2 = e1 * c
    q4 = e1 * x4 + e2 * h
    q3 = q4 + e1 * c
    poly0, chi, tau = cyl.dev.anchor
    return build_admissible(surface, [q1, q2, q3, q4], (poly0, chi, tau))


def _non_simple_pentagon(surface, cyl, bottom_name, witness, k3, fwd3):
    face = witness.face
    verts = face.vertices()
    f1, f2, bottom, top, x0, anchor = _cylinder_frame(surface, cyl, bottom_name)
    conns = cyl.dev.conns
    d = cyl.direction
    bot_lens = _walk_lengths(d, bottom, conns)
    top_lens = _walk_lengths(d, top, conns)
    c = cyl.circ_param
    h = cyl.height_param
    # locate gamma3 on the bottom walk
    a, b = verts[k3], verts[(k3 + 1) % 3]
    want_end = 0 if fwd3 else 1
    s3 = None
    for idx, step in enumerate(bottom.steps):
        if step == (witness.sides[k3], want_end):
            s3 = idx
            break
    if s3 is None:
        raise InternalGeometryError("triangle side not on the located boundary")
    t_start = bottom.cum_params[s3]
    t3 = bot_lens[s3]
    # map the face frame onto the cylinder frame along gamma3
    base_a = f1 * t_start
    sigma = 1 if (b - a).dot(f1).sign() > 0 else -1
    def to_frame(z):
        return Vec2(sigma * z.x + base_a.x - sigma * a.x,
                    sigma * z.y + base_a.y - sigma * a.y)
    apex = to_frame(verts[(k3 + 2) % 3])
    # frame coordinates of the apex
    den = f1.wedge(f2)
    xa = (apex.wedge(f2)) / den
    ya = (f1.wedge(apex)) / den
    if ya != h:
        raise InternalGeometryError("triangle apex is not on the far boundary")
    q_a = x0 - xa
    # the apex must sit over a top-walk junction, up to circumference wraps
    j = None
    for idx, cum in enumerate(top.cum_params):
        quot = (q_a - cum) / c
        if quot.b == 0 and quot.a.denominator == 1:
            j = idx
            break
    if j is None:
        raise InternalGeometryError("apex not aligned with a top junction")
    z = ExactScalar(0)
    a3 = Vec2(z, z) + f1 * t_start
    a4 = f1 * (t_start + t3)
    apex_pt = f1 * xa + f2 * h
    if len(top.steps) >= 2:
        t_left = top_lens[j]
        t_right = top_lens[(j - 1) % len(top.steps)]
        a2 = f1 * (xa - t_left) + f2 * h
        a5 = f1 * (xa + t_right) + f2 * h
        vertices = [a3, a4, a5, apex_pt, a2]
    else:
        t_next = bot_lens[(s3 + 1) % len(bottom.steps)]
        a5 = f1 * (t_start + t3 + t_next)
        a2 = f1 * (xa - c) + f2 * h
        vertices = [a3, a4, a5, apex_pt, a2]
    return build_admissible(surface, vertices, anchor)


def _anchor_near_vertex(apoly, vertex):
    """Anchor placement from a developed cell touching the given vertex."""
    for c in apoly.cells:
        if point_in_convex(vertex, list(c.region)):
            return (c.poly, c.eps, c.tau)
    raise InternalGeometryError("no cell touches the requested vertex")


def coconvexify(surface, apoly, reflex_vertex, crossing_budget=10_000):
    """Straighten a quadrilateral that fails strict convexity at one vertex.

    Repeated strip extensions below the offending edge produce a sequence of
    admissible pentagons; the sequence ends with a strictly convex
    quadrilateral.  Termination is certified by the surface-area bound on
    the lengths of the produced connections.
    """
    verts = apoly.vertices
    if len(verts) != 4:
        raise PreconditionViolated("coconvexify expects a quadrilateral")
    for k in range(4):
        o = orient(verts[(k - 1) % 4], verts[k], verts[(k + 1) % 4])
        if k != reflex_vertex and o <= 0:
            raise PreconditionViolated(
                "the three non-reflex vertices must be strictly convex"
            )
    r = reflex_vertex
    if orient(verts[(r - 1) % 4], verts[r], verts[(r + 1) % 4]) > 0:
        return []
    a1, b, a3, a4 = (verts[(r + i) % 4] for i in range(4))
    # termination bound: |A3 Ahat|^2 stays below T2 and each step produces a
    # new connection; finitely many connections are shorter than T
    area2 = surface.total_area2()
    l13 = (a3 - a1).len2()
    sin2_start = _sin2(a3, b, a1)
    sin2_ext = _sin2(a3, a1, a4)
    t2_bound = (area2 * area2) / (l13 * min(sin2_start, sin2_ext))
    seen = set()
    seq = []
    cur = apoly
    cur_verts = (a1, b, a3, a4)
    steps = 0
    cap = None
    while True:
        if orient(cur_verts[3], cur_verts[0], cur_verts[1]) > 0:
            for k in range(4):
                if orient(cur_verts[(k - 1) % 4], cur_verts[k],
                          cur_verts[(k + 1) % 4]) <= 0:
                    raise InternalGeometryError(
                        "coconvexification broke convexity elsewhere"
                    )
            if seq:
                seq.append(cur)
            return seq
        steps += 1
        if steps > 64 and cap is None:
            from .connections import enumerate_connections

            cap = len(enumerate_connections(surface, t2_bound))
        if cap is not None and steps > cap:
            raise InternalGeometryError("coconvexification exceeded its cap")
        w = cur_verts[2] - cur_verts[3]
        svec = cur_verts[2] - cur_verts[1]
        flow = w if svec.wedge(w).sign() < 0 else -w
        pent = extend_strip(surface, cur, 1, flow_dir=flow,
                            crossing_budget=crossing_budget)
        seq.append(pent)
        new_pt = pent.vertices[2]
        new_conn = pent.side_conns[2]  # Ahat -> A3
        if new_conn.id in seen:
            raise InternalGeometryError("coconvexification revisited a connection")
        seen.add(new_conn.id)
        if ((new_pt - cur_verts[2]).len2() - t2_bound).sign() >= 0:
            raise InternalGeometryError("coconvexification left its length bound")
        nxt_verts = (cur_verts[0], new_pt, cur_verts[2], cur_verts[3])
        anchor = _anchor_near_vertex(pent, cur_verts[0])
        cur = build_admissible(surface, nxt_verts, anchor)
        cur_verts = nxt_verts


def _sin2(origin, p, q):
    u = p - origin
    v = q - origin
    c = u.wedge(v)
    return (c * c) / (u.len2() * v.len2())


def _corollary_pentagon(surface, witness, crossing_budget):
    face = witness.face
    verts = list(face.vertices())
    base = 0
    apoly = build_admissible(
        surface, verts,
        (face.anchor_corner[0], 1, Vec2(ExactScalar(0), ExactScalar(0))),
    )
    w = verts[(base + 1) % 3] - verts[base]
    # first extension: across the apex -> base-start side
    s2 = (base + 2) % 3
    svec = apoly.vertices[base] - apoly.vertices[s2]
    flow = w if svec.wedge(w).sign() < 0 else -w
    quad = extend_strip(surface, apoly, s2, flow_dir=flow,
                        crossing_budget=crossing_budget)
    # second extension: across the base-end -> apex side (now shifted)
    s1 = (base + 1) % 3
    qi = s1 if s1 < s2 else s1 + 1
    va = quad.vertices[qi]
    vb = quad.vertices[(qi + 1) % 5]
    svec = vb - va
    flow = w if svec.wedge(w).sign() < 0 else -w
    pent = extend_strip(surface, quad, qi, flow_dir=flow,
                        crossing_budget=crossing_budget)
    for i in range(5):
        if orient(pent.vertices[i], pent.vertices[(i + 1) % 5],
                  pent.vertices[(i + 2) % 5]) <= 0:
            raise InternalGeometryError("pentagon not strictly convex")
    return pent
