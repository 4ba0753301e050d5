"""Cyclic ordering of connection germs around marked points.

A germ is one end of a saddle connection together with its outgoing chart
direction.  Around each vertex class the germs are ordered along the same
clockwise wedge walk that computes cone angles; this ordering drives both
cylinder boundary walks and triangulation face tracing.
"""

from __future__ import annotations

import functools
from typing import NamedTuple

from .errors import InternalGeometryError


class Germ(NamedTuple):
    conn_id: str
    end: int      # 0: start corner, 1: end corner
    corner: tuple
    direction: object  # outgoing chart direction (Vec2)


def germ_ends(conn):
    p0 = conn.pieces[0]
    p1 = conn.pieces[-1]
    return (
        Germ(conn.id, 0, conn.start_corner, p0.exit - p0.entry),
        Germ(conn.id, 1, conn.end_corner, p1.entry - p1.exit),
    )


def class_germ_cycles(surface, conns):
    """Clockwise cyclic germ order at every vertex class.

    Returns a list indexed by class of germ lists; boundary germs (along a
    polygon edge) occupy the slot shared by the two adjacent wedges.
    """
    by_corner = {}
    for conn in conns:
        for g in germ_ends(conn):
            by_corner.setdefault(g.corner, []).append(g)

    cycles = []
    for cls_idx, cycle in enumerate(surface.corner_classes):
        n = len(cycle)
        interior = [[] for _ in range(n)]
        boundary = [None] * n
        for j, corner in enumerate(cycle):
            u, v = surface.corner_rays(*corner)
            for g in by_corner.get(corner, ()):  # noqa: B020
                d = g.direction
                cu = u.wedge(d).sign()
                cv = v.wedge(d).sign()
                if cu == 0 and u.dot(d).sign() > 0:
                    if boundary[j] is not None:
                        raise InternalGeometryError("two germs share an edge ray")
                    boundary[j] = g
                elif cv == 0 and v.dot(d).sign() > 0:
                    slot = (j - 1) % n
                    if boundary[slot] is not None:
                        raise InternalGeometryError("two germs share an edge ray")
                    boundary[slot] = g
                elif cu > 0 and d.wedge(v).sign() > 0:
                    interior[j].append(g)
                else:
                    raise InternalGeometryError(
                        f"germ direction outside its corner sector at {corner}"
                    )
        ordered = []
        for j in range(n):
            # clockwise within the wedge: sweep from the v-ray towards u
            ins = sorted(
                interior[j],
                key=functools.cmp_to_key(
                    lambda g1, g2: g1.direction.wedge(g2.direction).sign()
                ),
            )
            for g1, g2 in zip(ins, ins[1:]):
                if g1.direction.wedge(g2.direction).sign() == 0:
                    raise InternalGeometryError("two germs share an interior ray")
            ordered.extend(ins)
            if boundary[j] is not None:
                ordered.append(boundary[j])
        cycles.append(ordered)
    return cycles


def successor_map(cycles):
    """Germ -> next germ clockwise at the same vertex class."""
    succ = {}
    for cyc in cycles:
        m = len(cyc)
        for i, g in enumerate(cyc):
            succ[(g.conn_id, g.end)] = cyc[(i + 1) % m]
    return succ
