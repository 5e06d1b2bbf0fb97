"""Planar diagram data for the smooth link of a grid diagram.

Walking a knot's segments in order, every pass through a crossing point
(over or under) starts a new edge.  Crossings come out in PD form
``(a, b, c, d)``: ``a`` is the incoming under-edge and the rest follow
counterclockwise around the crossing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grid import GridDiagram, traverse
from .invariants import crossings as grid_crossings


@dataclass(frozen=True)
class PlanarDiagram:
    pd: tuple[tuple[int, int, int, int], ...]
    signs: tuple[int, ...]
    # for each crossing: (over arc, incoming under arc, outgoing under arc)
    arcs: tuple[tuple[int, int, int], ...]
    n_arcs: int

    @property
    def writhe(self) -> int:
        return sum(self.signs)


def _passages(g: GridDiagram):
    """Crossing passages along the (single) component, in traversal order.

    Yields (crossing index, is_over, direction) with direction a unit
    (dcol, drow) vector.
    """
    cross = grid_crossings(g)
    index = {(cr.column, cr.row): i for i, cr in enumerate(cross)}
    (comp,) = traverse(g)
    out = []
    for seg in comp:
        (c0, r0), (c1, r1) = seg.start, seg.end
        if seg.kind == "vertical":
            step = 1 if r1 > r0 else -1
            for r in range(r0 + step, r1, step):
                i = index.get((c0, r))
                if i is not None:
                    out.append((i, True, (0, step)))
        else:
            step = 1 if c1 > c0 else -1
            for c in range(c0 + step, c1, step):
                i = index.get((c, r0))
                if i is not None:
                    out.append((i, False, (step, 0)))
    return cross, out


# sides of a crossing in counterclockwise order
_CCW = ((-1, 0), (0, -1), (1, 0), (0, 1))


def planar_diagram(g: GridDiagram) -> PlanarDiagram:
    """PD code of the knot L(g); requires a single component."""
    cross, passes = _passages(g)
    k = len(cross)
    if k == 0:
        return PlanarDiagram((), (), (), 1)
    m = len(passes)  # 2k
    # edge j runs from pass j to pass j+1
    side_edge = [dict() for _ in range(k)]
    under = [None] * k
    over = [None] * k
    arc_of_edge = [0] * m
    # arcs break after each under-pass; start counting just after one
    first_under = next(j for j, p in enumerate(passes) if not p[1])
    arc = 0
    for step in range(m):
        j = (first_under + step) % m
        arc_of_edge[j] = arc
        nxt = passes[(j + 1) % m]
        if not nxt[1] and step != m - 1:
            arc += 1
    n_arcs = arc + 1
    for j, (i, is_over, (dx, dy)) in enumerate(passes):
        e_in, e_out = (j - 1) % m, j
        side_edge[i][(-dx, -dy)] = e_in
        side_edge[i][(dx, dy)] = e_out
        if is_over:
            over[i] = e_in
        else:
            under[i] = (e_in, e_out, (-dx, -dy))
    pd = []
    arcs = []
    for i in range(k):
        e_in, e_out, in_side = under[i]
        start = _CCW.index(in_side)
        pd.append(tuple(side_edge[i][_CCW[(start + s) % 4]] for s in range(4)))
        arcs.append((arc_of_edge[over[i]], arc_of_edge[e_in], arc_of_edge[e_out]))
    return PlanarDiagram(tuple(pd), tuple(cr.sign for cr in cross), tuple(arcs), n_arcs)
