"""Straight-line flow: ray tracing, interval first-hit, cylinder decomposition.

Lengths along a fixed direction are carried as flow parameters (multiples of
|dir|), which keeps every comparison inside the field.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .connections import Piece, SaddleConnection, edge_connection
from .errors import (
    DirectionLeavesField,
    InternalGeometryError,
    NoHitWithinBudget,
    PreconditionViolated,
)
from .germs import class_germ_cycles, germ_ends
from .predicates import SegRel, on_segment, seg_relation
from .scalars import ExactScalar, Vec2
from .surface import PolygonalSurface

DEFAULT_CROSSING_BUDGET = 10_000


def _check_direction(surface, direction):
    """Direction must live in one quadratic field compatible with the surface."""
    if direction.is_zero():
        raise PreconditionViolated("direction must be nonzero")
    ds = {comp.d for comp in (direction.x, direction.y) if not comp.is_rational}
    if surface.field_d != 1:
        ds.add(surface.field_d)
    if len(ds) > 1:
        raise DirectionLeavesField(
            f"direction mixes sqrt fields {sorted(ds)} with the surface"
        )


@dataclass(frozen=True)
class Trajectory:
    pieces: tuple
    flow_param: ExactScalar      # total length = flow_param * |direction|
    len2: ExactScalar
    terminal: str                # "hit_marked" | "budget_exceeded"
    hit_corner: tuple | None     # (poly, vtx) when terminal == hit_marked
    hit_class: int | None


def _exit_of_ray(surface, poly, pos, direction):
    """First boundary event of the ray pos + t*direction, t > 0, in `poly`.

    Returns (t, point, vertex_index_or_None, edge_index_or_None).
    """
    pg = surface.polygons[poly]
    n = len(pg)
    best = None
    for e in range(n):
        a, b = pg.edge(e)
        evec = b - a
        den = direction.wedge(evec)
        if den.sign() == 0:
            continue
        t = (a - pos).wedge(evec) / den
        if t.sign() <= 0:
            continue
        x = pos + direction * t
        if not on_segment(x, a, b):
            continue
        if best is None or (t - best[0]).sign() < 0:
            best = (t, x, e)
    if best is None:
        raise InternalGeometryError("ray found no exit from a convex polygon")
    t, x, e = best
    for idx, v in enumerate(pg.vertices):
        if x == v:
            return t, x, idx, None
    return t, x, None, e


def _start_chart(surface, start, direction):
    """Validate/normalize a ray start so the ray enters its polygon."""
    poly, pos = start
    pg = surface.polygons[poly]
    for idx, v in enumerate(pg.vertices):
        if pos == v:
            u, w = surface.corner_rays(poly, idx)
            if u.wedge(direction).sign() < 0 or direction.wedge(w).sign() < 0:
                raise PreconditionViolated(
                    "direction not in the outgoing sector of the start corner"
                )
            return poly, pos
    return poly, pos


def trace_ray(surface, start, direction, max_len2=None,
              crossing_budget=DEFAULT_CROSSING_BUDGET):
    """Trace the flow ray from `start` until the first marked point.

    Stops exactly at the first corner hit; if the squared length of the next
    boundary event exceeds `max_len2` (or the crossing budget runs out) the
    trajectory ends with terminal "budget_exceeded".
    """
    _check_direction(surface, direction)
    poly, pos = _start_chart(surface, start, direction)
    d = direction
    dl2 = direction.len2()
    pieces = []
    total = ExactScalar(0)
    for _ in range(crossing_budget):
        t, x, vtx, edge = _exit_of_ray(surface, poly, pos, d)
        new_total = total + t
        if max_len2 is not None:
            ln2 = new_total * new_total * dl2
            if (ln2 - max_len2).sign() > 0:
                pieces.append(Piece(poly, pos, x))
                return Trajectory(
                    tuple(pieces), new_total, ln2, "budget_exceeded", None, None
                )
        pieces.append(Piece(poly, pos, x))
        total = new_total
        if vtx is not None:
            cls = surface.class_of[(poly, vtx)]
            return Trajectory(
                tuple(pieces), total, total * total * dl2,
                "hit_marked", (poly, vtx), cls,
            )
        tr = surface.transition(poly, edge)
        poly = tr.poly
        pos = tr.apply(x)
        d = tr.apply_dir(d)
    return Trajectory(
        tuple(pieces), total, total * total * dl2, "budget_exceeded", None, None
    )


def _trajectory_connection(surface, start_corner, traj):
    """Promote a corner-to-corner trajectory into a SaddleConnection."""
    word = []
    for piece, nxt in zip(traj.pieces, traj.pieces[1:]):
        pg = surface.polygons[piece.poly]
        for e in range(len(pg)):
            a, b = pg.edge(e)
            if on_segment(piece.exit, a, b):
                tr = surface.transition(piece.poly, e)
                if tr.poly == nxt.poly and tr.apply(piece.exit) == nxt.entry:
                    word.append((piece.poly, e))
                    break
        else:
            raise InternalGeometryError("trajectory pieces do not chain")
    # developed displacement: chart signs realign every piece with the first
    d0 = traj.pieces[0].exit - traj.pieces[0].entry
    hol = Vec2(ExactScalar(0), ExactScalar(0))
    for piece in traj.pieces:
        dv = piece.exit - piece.entry
        hol = hol + dv * _chart_sign(d0, dv)
    return SaddleConnection(
        surface,
        traj.pieces,
        start_corner,
        traj.hit_corner,
        tuple(word),
        hol,
    )


def _chart_sign(d0, dv):
    """Sign aligning a piece direction with the developed frame direction."""
    w = d0.wedge(dv)
    if w.sign() != 0:
        raise InternalGeometryError("trajectory piece not parallel to the flow")
    return 1 if d0.dot(dv).sign() > 0 else -1


# -- directional decomposition -------------------------------------------------


@dataclass(frozen=True)
class BoundaryComponent:
    steps: tuple          # ((conn_id, departing_end), ...)
    circ_param: ExactScalar
    cum_params: tuple     # start param of each step


@dataclass(frozen=True)
class Cylinder:
    direction: Vec2
    circ_param: ExactScalar
    height_param: ExactScalar
    area: ExactScalar
    boundary_minus: tuple  # connection ids along the minus component
    boundary_plus: tuple
    simple_minus: bool
    simple_plus: bool
    dev: object = field(compare=False, repr=False, default=None)

    @property
    def circumference2(self):
        return self.circ_param * self.circ_param * self.direction.len2()

    @property
    def height2(self):
        return self.height_param * self.height_param * self.direction.len2()


@dataclass(frozen=True)
class CylinderDev:
    """Development payload: minus walk along +dir, plus walk along -dir."""

    minus: BoundaryComponent
    plus: BoundaryComponent
    anchor: tuple          # (poly, eps, tau): dev plane -> chart of minus start
    cross_minus: ExactScalar   # param on minus walk where the height ray left
    cross_plus: ExactScalar    # param on plus walk where it landed
    conns: dict                # id -> SaddleConnection


@dataclass(frozen=True)
class DirectionDecomposition:
    periodic: bool
    cylinders: tuple = ()


UNKNOWN = DirectionDecomposition(False, ())


def _flow_param(direction, hol):
    """|hol| as a multiple of |direction| for hol parallel to direction."""
    if direction.wedge(hol).sign() != 0:
        raise InternalGeometryError("holonomy not parallel to direction")
    return abs(hol.dot(direction) / direction.len2())


def direction_connections(surface, direction, crossing_budget):
    """All saddle connections parallel to `direction`, or None when a
    separatrix fails to close within the budget."""
    _check_direction(surface, direction)
    found = {}
    for (p, e), (q, f, _s) in surface.gluings.items():
        if (q, f) < (p, e):
            continue
        if surface.polygons[p].edge_vec(e).wedge(direction).sign() == 0:
            c = edge_connection(surface, p, e)
            found[c.id] = c
    for p, pg in enumerate(surface.polygons):
        for v in range(len(pg)):
            u, w = surface.corner_rays(p, v)
            for delta in (direction, -direction):
                if u.wedge(delta).sign() > 0 and delta.wedge(w).sign() > 0:
                    traj = trace_ray(
                        surface, (p, pg.vertices[v]), delta,
                        crossing_budget=crossing_budget,
                    )
                    if traj.terminal != "hit_marked":
                        return None
                    c = _trajectory_connection(surface, (p, v), traj)
                    found.setdefault(c.id, c)
    return found


def _is_vertex(surface, poly, pt):
    return any(pt == v for v in surface.polygons[poly].vertices)


def _ray_first_locus_crossing(surface, start, direction, loci, crossing_budget):
    """First transverse crossing of the ray with a family of connections.

    Returns ("cross", flow_param, conn_id, chart_point, poly, ray_dir_in_chart)
    or ("marked", flow_param, None, point, poly, ray_dir) if a corner is hit
    first.  Crossing points at marked corners never count.
    """
    poly, pos = start
    d = direction
    dl2 = direction.len2()
    total = ExactScalar(0)
    for _ in range(crossing_budget):
        t, x, vtx, edge = _exit_of_ray(surface, poly, pos, d)
        seg = (pos, x)
        best = None
        for conn_id, (a, b) in loci.get(poly, ()):  # noqa: B020
            rel = seg_relation(seg, (a, b))
            if rel is SegRel.DISJOINT:
                continue
            if rel is SegRel.COLLINEAR_OVERLAP:
                raise InternalGeometryError("height ray runs along a connection")
            if rel is SegRel.INTERIOR_CROSS:
                from .predicates import segment_cross_point

                pt = segment_cross_point(seg, (a, b))
            else:
                pt = None
                for cand in (x, pos, a, b):
                    if on_segment(cand, *seg) and on_segment(cand, a, b):
                        pt = cand
                        break
                if pt is None or pt == pos:
                    continue
                if _is_vertex(surface, poly, pt):
                    continue
            tp = (pt - pos).dot(d) / dl2
            if tp.sign() <= 0:
                continue
            if best is None or (tp - best[0]).sign() < 0:
                best = (tp, conn_id, pt)
        if best is not None:
            tp, conn_id, pt = best
            return ("cross", total + tp, conn_id, pt, poly, d)
        total = total + t
        if vtx is not None:
            return ("marked", total, None, x, poly, d)
        tr = surface.transition(poly, edge)
        poly, pos, d = tr.poly, tr.apply(x), tr.apply_dir(d)
    raise NoHitWithinBudget("height ray exhausted its crossing budget")


def _loci_index(conns):
    idx = {}
    for c in conns.values():
        for poly, seg in c.chart_pieces():
            idx.setdefault(poly, []).append((c.id, seg))
    return idx


def _point_on_connection_param(conn, poly, pt, direction):
    """Flow param of a point along a connection, measured from its end-0."""
    total = ExactScalar(0)
    dl2 = direction.len2()
    for piece in conn.pieces:
        if piece.poly == poly:
            da = (pt - piece.entry).wedge(piece.exit - piece.entry)
            if da.sign() == 0 and on_segment(pt, piece.entry, piece.exit):
                return total + abs((pt - piece.entry).dot(direction)) / dl2
        total = total + abs((piece.exit - piece.entry).dot(direction)) / dl2
    # edge-locus pieces are mirrored; try the partner chart
    if conn.is_edge_locus:
        piece = conn.pieces[0]
        e = conn.word_edge()
        tr = conn.surface.transition(piece.poly, e)
        if tr.poly == poly:
            back_tr = conn.surface.transition(tr.poly, tr.edge)
            back = back_tr.apply(pt)
            if on_segment(back, piece.entry, piece.exit):
                return abs((back - piece.entry).dot(direction)) / dl2
    raise InternalGeometryError("crossing point not found on its connection")


def _point_at_param(conn, param, direction, strict=False):
    """Chart point of the given flow param along the connection (from end 0).

    With `strict` the point must fall in the open interior of some piece;
    returns None when it lands on a chart transition.
    """
    dl2 = direction.len2()
    total = ExactScalar(0)
    for piece in conn.pieces:
        dv = piece.exit - piece.entry
        t_piece = abs(dv.dot(direction)) / dl2
        rel = param - total
        if (rel - t_piece).sign() <= 0:
            if strict and (rel.sign() == 0 or (rel - t_piece).sign() == 0):
                return None
            frac = rel / t_piece
            return piece.poly, piece.entry + dv * frac, dv
        total = total + t_piece
    raise InternalGeometryError("param beyond connection length")


def _inward_start(surface, poly, pt, n):
    """Move a boundary ray start to the chart its direction points into."""
    pg = surface.polygons[poly]
    for e in range(len(pg)):
        a, b = pg.edge(e)
        if on_segment(pt, a, b):
            inward = (b - a).rot90()
            s = inward.dot(n).sign()
            if s < 0:
                tr = surface.transition(poly, e)
                return tr.poly, tr.apply(pt), tr.apply_dir(n)
            return poly, pt, n
    return poly, pt, n


def direction_decomposition(surface, direction,
                            crossing_budget=DEFAULT_CROSSING_BUDGET):
    """Certified cylinder decomposition in `direction`, or Unknown."""
    conns = direction_connections(surface, direction, crossing_budget)
    if conns is None:
        return UNKNOWN
    if not conns:
        raise InternalGeometryError("periodic direction with no connections")

    cycles = class_germ_cycles(surface, conns.values())
    for cls_idx, cyc in enumerate(cycles):
        if len(cyc) != surface.cone_halfturns[cls_idx]:
            raise InternalGeometryError(
                "germ count does not match the cone angle; decomposition bug"
            )
    succ = {}
    for cyc in cycles:
        m = len(cyc)
        for i, g in enumerate(cyc):
            succ[(g.conn_id, g.end)] = cyc[(i + 1) % m]

    # boundary components: depart along succ(arrival germ), cylinder on the left
    used = set()
    components = []
    comp_of = {}
    for key in sorted(succ):
        if key in used:
            continue
        steps = []
        cums = []
        total = ExactScalar(0)
        cur = key
        while True:
            used.add(cur)
            steps.append(cur)
            cums.append(total)
            total = total + _flow_param(direction, conns[cur[0]].hol_raw)
            arrival = (cur[0], 1 - cur[1])
            cur = succ[arrival]
            cur = (cur.conn_id, cur.end)
            if cur == key:
                break
        comp = BoundaryComponent(tuple(steps), total, tuple(cums))
        for st in steps:
            comp_of[st] = len(components)
        components.append(comp)

    loci = _loci_index(conns)
    paired = {}
    cylinders = []
    for ci, comp in enumerate(components):
        if ci in paired:
            continue
        conn_id, end = comp.steps[0]
        conn = conns[conn_id]
        t_conn = _flow_param(direction, conn.hol_raw)
        denom = 2
        result = None
        while True:
            param = t_conn * ExactScalar(Fraction(1, denom))
            from_end0 = param if end == 0 else t_conn - param
            located = _point_at_param(conn, from_end0, direction, strict=True)
            if located is not None:
                poly, pt, piece_dir = located
                # traversal direction of this walk step in the piece chart;
                # rescale to |direction| so flow params measure true height
                tau = piece_dir if end == 0 else -piece_dir
                sgn = 1 if tau.dot(direction).sign() > 0 else -1
                n_chart = Vec2(sgn * direction.x, sgn * direction.y).rot90()
                poly, pt, n_chart = _inward_start(surface, poly, pt, n_chart)
                kind, h, hit_id, hit_pt, hit_poly, d_hit = (
                    _ray_first_locus_crossing(
                        surface, (poly, pt), n_chart, loci, crossing_budget
                    )
                )
                if kind == "cross":
                    result = (param, h, hit_id, hit_pt, hit_poly, d_hit)
                    break
            denom *= 2
            if denom > 2**24:
                raise InternalGeometryError("height ray keeps hitting corners")
        param, h, hit_id, hit_pt, hit_poly, d_hit = result
        hit_conn = conns[hit_id]
        # the far walk has the cylinder on its left: it sees the ray arriving
        # from its left side, so its traversal w'' satisfies w'' x d_hit < 0
        partner_key = None
        for hend in (0, 1):
            wdir = _conn_dir_at(hit_conn, hit_poly, hit_pt, hend)
            if wdir.wedge(d_hit).sign() < 0:
                partner_key = (hit_id, hend)
                break
        if partner_key is None:
            raise InternalGeometryError("cannot orient the far boundary")
        cj = comp_of[partner_key]
        partner = components[cj]
        paired[ci] = cj
        paired[cj] = ci
        p_minus = comp.cum_params[0] + param
        from_end0_hit = _point_on_connection_param(
            hit_conn, hit_poly, hit_pt, direction
        )
        sidx = partner.steps.index(partner_key)
        t_hit = _flow_param(direction, hit_conn.hol_raw)
        along = from_end0_hit if partner_key[1] == 0 else t_hit - from_end0_hit
        p_plus = partner.cum_params[sidx] + along
        anchor = _component_anchor(conns, comp, direction)
        dev = CylinderDev(comp, partner, anchor, p_minus, p_plus, dict(conns))
        cylinders.append(
            Cylinder(
                direction=direction,
                circ_param=comp.circ_param,
                height_param=h,
                area=comp.circ_param * h * direction.len2(),
                boundary_minus=tuple(s[0] for s in comp.steps),
                boundary_plus=tuple(s[0] for s in partner.steps),
                simple_minus=len(comp.steps) == 1,
                simple_plus=len(partner.steps) == 1,
                dev=dev,
            )
        )
        if partner.circ_param != comp.circ_param:
            raise InternalGeometryError("cylinder boundary lengths disagree")

    total_area = ExactScalar(0)
    for cyl in cylinders:
        total_area = total_area + cyl.area
    if total_area != surface.total_area():
        raise InternalGeometryError("cylinder areas do not tile the surface")
    return DirectionDecomposition(True, tuple(cylinders))


def _conn_dir_at(conn, poly, pt, end):
    """Traversal direction (for the walk departing from `end`) at a chart point."""
    pieces = conn.pieces if end == 0 else [
        Piece(p.poly, p.exit, p.entry) for p in reversed(conn.pieces)
    ]
    for piece in pieces:
        if piece.poly != poly:
            continue
        if (pt - piece.entry).wedge(piece.exit - piece.entry).sign() == 0 and \
                on_segment(pt, piece.entry, piece.exit):
            return piece.exit - piece.entry
    if conn.is_edge_locus:
        piece = conn.pieces[0]
        e = conn.word_edge()
        tr = conn.surface.transition(piece.poly, e)
        if tr.poly == poly:
            a, b = tr.apply(piece.entry), tr.apply(piece.exit)
            dv = b - a if end == 0 else a - b
            if on_segment(pt, a, b):
                return dv
    raise InternalGeometryError("point not on the connection in this chart")


def _component_anchor(conns, comp, direction):
    conn_id, end = comp.steps[0]
    conn = conns[conn_id]
    germ = germ_ends(conn)[end]
    poly, vtx = germ.corner
    q0 = conn.surface.polygons[poly].vertices[vtx]
    chi = 1 if germ.direction.dot(direction).sign() > 0 else -1
    return (poly, chi, q0)


# -- interval flow first hit ----------------------------------------------------


@dataclass(frozen=True)
class FirstHit:
    hit_class: int
    flow_param: ExactScalar   # distance = flow_param * |flow_dir|
    dist2: ExactScalar
    foot: ExactScalar         # parameter in [0, 1] along the transversal
    corner: tuple


def _rotate_to_sector(surface, corner, g_dir, n_dir):
    """Find the corner sector (walking around the vertex class) containing the
    ray direction `n_dir`, starting from the sector of the germ `g_dir`."""
    poly, vtx = corner
    g, n = g_dir, n_dir
    ccw = g.wedge(n).sign() > 0
    u, w = surface.corner_rays(poly, vtx)
    if ccw:
        if g.wedge(n).sign() >= 0 and n.wedge(w).sign() >= 0 \
                and u.wedge(n).sign() >= 0:
            return poly, vtx, n
    else:
        if n.wedge(g).sign() >= 0 and u.wedge(n).sign() >= 0 \
                and n.wedge(w).sign() >= 0:
            return poly, vtx, n
    for _ in range(128):
        if ccw:
            q, f, s = surface.gluings[(poly, (vtx - 1) % len(surface.polygons[poly]))]
            poly, vtx = q, f
        else:
            q, f, s = surface.gluings[(poly, vtx)]
            poly, vtx = q, (f + 1) % len(surface.polygons[q])
        n = Vec2(s * n.x, s * n.y)
        u, w = surface.corner_rays(poly, vtx)
        if u.wedge(n).sign() >= 0 and n.wedge(w).sign() >= 0:
            return poly, vtx, n
    raise InternalGeometryError("sector walk did not locate the ray direction")


class _Window:
    __slots__ = ("poly", "eps", "tau", "wa", "wb", "tmin")

    def __init__(self, poly, eps, tau, wa, wb, tmin):
        self.poly = poly
        self.eps = eps
        self.tau = tau
        self.wa = wa
        self.wb = wb
        self.tmin = tmin


def flow_interval_first_hit(surface, transversal, side="left", flow_dir=None,
                            crossing_budget=DEFAULT_CROSSING_BUDGET):
    """First marked point met by the ray family flowing off a transversal.

    Flows every point of the closed transversal (a saddle connection) in a
    fixed developed direction; default direction is the perpendicular on the
    chosen side.  Ties: smaller flow distance, then smaller foot parameter,
    then smaller vertex class index.
    """
    pieces = transversal.pieces
    v = transversal.hol_raw
    if flow_dir is None:
        flow_dir = v.rot90() if side == "left" else -v.rot90()
    n = flow_dir
    den = v.wedge(n)
    if den.sign() == 0:
        raise PreconditionViolated("flow direction parallel to the transversal")
    nl2 = n.len2()

    def coords(x):
        # x = u*v + t*n
        return (x.wedge(n) / den, v.wedge(x) / den)

    # developed placements of the transversal pieces
    placements = []
    eps, tau = 1, -pieces[0].entry
    placements.append((eps, tau))
    for piece, nxt in zip(pieces, pieces[1:]):
        pg = surface.polygons[piece.poly]
        for e in range(len(pg)):
            a, b = pg.edge(e)
            if on_segment(piece.exit, a, b):
                tr = surface.transition(piece.poly, e)
                if tr.poly == nxt.poly and tr.apply(piece.exit) == nxt.entry:
                    eps = eps * tr.sign
                    tau = Vec2(tau.x - eps * tr.shift.x, tau.y - eps * tr.shift.y)
                    break
        else:
            raise InternalGeometryError("transversal pieces do not chain")
        placements.append((eps, tau))

    def dev(i, z):
        e, t = placements[i]
        return Vec2(e * z.x + t.x, e * z.y + t.y)

    hits = []          # (t, u, class, corner)
    unknown_bound = None

    def spawn_ray(poly, pos, dchart, u):
        nonlocal unknown_bound
        traj = trace_ray(surface, (poly, pos), dchart,
                         crossing_budget=crossing_budget)
        if traj.terminal == "hit_marked":
            hits.append((traj.flow_param, u, traj.hit_class, traj.hit_corner))
        else:
            b = traj.flow_param
            if unknown_bound is None or (b - unknown_bound).sign() < 0:
                unknown_bound = b

    # endpoint rays (closed ray family)
    g0 = pieces[0].exit - pieces[0].entry
    p0, v0, n0 = _rotate_to_sector(
        surface, transversal.start_corner, g0, Vec2(n.x, n.y)
    )
    spawn_ray(p0, surface.polygons[p0].vertices[v0], n0, ExactScalar(0))
    gk = pieces[-1].entry - pieces[-1].exit
    ek, tk = placements[-1]
    nk = Vec2(ek * n.x, ek * n.y)
    p1, v1, n1 = _rotate_to_sector(surface, transversal.end_corner, gk, nk)
    spawn_ray(p1, surface.polygons[p1].vertices[v1], n1, ExactScalar(1))
    # junction rays
    for i in range(len(pieces) - 1):
        e_i, _ = placements[i]
        xdev = dev(i, pieces[i].exit)
        u_j, _tj = coords(xdev)
        poly, pos, dchart = _inward_start(
            surface, pieces[i].poly, pieces[i].exit, Vec2(e_i * n.x, e_i * n.y)
        )
        spawn_ray(poly, pos, dchart, u_j)

    heap = []
    counter = itertools.count()
    for i, piece in enumerate(pieces):
        wa, wb = dev(i, piece.entry), dev(i, piece.exit)
        e_i, t_i = placements[i]
        poly_i = piece.poly
        # a window on a polygon edge with outward flow starts in the partner
        pg = surface.polygons[poly_i]
        for f in range(len(pg)):
            a, b = pg.edge(f)
            if on_segment(piece.entry, a, b) and on_segment(piece.exit, a, b):
                inward = (b - a).rot90()
                nchart = Vec2(e_i * n.x, e_i * n.y)
                if inward.dot(nchart).sign() < 0:
                    tr = surface.transition(poly_i, f)
                    poly_i = tr.poly
                    e_i = e_i * tr.sign
                    t_i = Vec2(t_i.x - e_i * tr.shift.x, t_i.y - e_i * tr.shift.y)
                break
        win = _Window(poly_i, e_i, t_i, wa, wb, ExactScalar(0))
        heapq.heappush(heap, (ExactScalar(0), next(counter), win))

    expansions = 0
    while heap:
        best = min(hits) if hits else None
        top_t = heap[0][0]
        if best is not None and (top_t - best[0]).sign() > 0:
            break
        _, _, win = heapq.heappop(heap)
        expansions += 1
        if expansions > crossing_budget:
            raise NoHitWithinBudget("window worklist exceeded the budget")
        _expand_window(surface, win, coords, n, heap, counter, hits)

    if not hits:
        raise NoHitWithinBudget("no marked point met within the budget")
    best = min(hits)
    if unknown_bound is not None and (unknown_bound - best[0]).sign() < 0:
        raise NoHitWithinBudget("an endpoint ray outran the budget first")
    t, u, cls, corner = best
    return FirstHit(cls, t, t * t * nl2, u, corner)


def _expand_window(surface, win, coords, n, heap, counter, hits):
    poly = surface.polygons[win.poly]
    m = len(poly)
    devs = [Vec2(win.eps * q.x + win.tau.x, win.eps * q.y + win.tau.y)
            for q in poly.vertices]
    ua, ta = coords(win.wa)
    ub, tb = coords(win.wb)
    if ub < ua:
        ua, ub = ub, ua
        ta, tb = tb, ta

    def t_line(u):
        if ub == ua:
            return ta
        return ta + (tb - ta) * (u - ua) / (ub - ua)

    blockers = {}
    for idx, dq in enumerate(devs):
        u, t = coords(dq)
        if ua < u < ub and (t - t_line(u)).sign() > 0:
            cur = blockers.get(u)
            if cur is None or (t - cur[0]).sign() < 0:
                blockers[u] = (t, idx)
    for u, (t, idx) in blockers.items():
        cls = surface.class_of[(win.poly, idx)]
        hits.append((t, u, cls, (win.poly, idx)))

    cuts = [ua] + sorted(blockers) + [ub]
    for u1, u2 in zip(cuts, cuts[1:]):
        if not (u1 < u2):
            continue
        exits = []
        for f in range(m):
            A, B = devs[f], devs[(f + 1) % m]
            uA, tA = coords(A)
            uB, tB = coords(B)
            if uA == uB:
                continue  # edge parallel to the flow: grazing only
            lo, hi = (uA, uB) if uA < uB else (uB, uA)
            l, h = max(lo, u1), min(hi, u2)
            if not (l < h):
                continue
            # clip edge to [l, h] by its u-parameter
            def at(uu):
                s = (uu - uA) / (uB - uA)
                return A + (B - A) * s
            pa, pb = at(l), at(h)
            umid = (l + h) * ExactScalar(Fraction(1, 2))
            tmid = coords(at(umid))[1]
            if (tmid - t_line(umid)).sign() <= 0:
                continue
            exits.append((f, pa, pb, l, h))
        if len(exits) != 1:
            raise InternalGeometryError(
                f"expected one exit edge per corridor, found {len(exits)}"
            )
        f, pa, pb, l, h = exits[0]
        tr = surface.transition(win.poly, f)
        neps = win.eps * tr.sign
        ntau = Vec2(win.tau.x - neps * tr.shift.x, win.tau.y - neps * tr.shift.y)
        tmin = min(coords(pa)[1], coords(pb)[1])
        child = _Window(tr.poly, neps, ntau, pa, pb, tmin)
        heapq.heappush(heap, (tmin, next(counter), child))
