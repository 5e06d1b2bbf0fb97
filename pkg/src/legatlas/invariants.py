"""Classical invariants of the Legendrian link of a grid diagram.

The front of the Legendrian link is read off the grid: NW and SE corners
are smoothed, NE and SW corners become cusps, the picture is rotated 45
degrees clockwise and every crossing is flipped.  An NE corner becomes a
right cusp whose upper branch is the horizontal segment; an SW corner a
left cusp whose upper branch is the vertical segment.  Cusps on an O at
an NE corner or on an X at an SW corner count as downward.  That choice
is the one under which X:NE stabilization raises r by one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .grid import GridDiagram, component_count, inverse

# Global sign of the rotation number.  Flip to -1 to adopt the opposite
# orientation convention everywhere at once.
ROTATION_SIGN = 1


class Crossing(NamedTuple):
    column: int
    row: int
    sign: int


@dataclass(frozen=True)
class CornerStats:
    ne: int
    nw: int
    se: int
    sw: int
    ne_x: int  # NE corners sitting on an X marking
    sw_x: int  # SW corners sitting on an X marking

    @property
    def total(self) -> int:
        return self.ne + self.nw + self.se + self.sw

    @property
    def down_cusps(self) -> int:
        return (self.ne - self.ne_x) + self.sw_x

    @property
    def up_cusps(self) -> int:
        return self.ne_x + (self.sw - self.sw_x)


@dataclass(frozen=True)
class ClassicalInvariants:
    tb: int
    r: int
    sl: int
    writhe_grid: int
    c_plus: int
    c_minus: int

    def __str__(self) -> str:
        return f"tb={self.tb} r={self.r} sl={self.sl}"


def crossings(g: GridDiagram) -> list[Crossing]:
    """Interior intersections of vertical and horizontal segments.

    Verticals pass over horizontals.  Signs follow the right-handed
    convention: a crossing is positive when the vertical (over) direction
    turned a quarter counterclockwise points along the horizontal (under)
    direction, e.g. over going north and under going west.
    """
    x, o = g.x_rows, g.o_rows
    x_col, o_col = inverse(x), inverse(o)
    out = []
    for c in range(1, g.size + 1):
        a, b = x[c - 1], o[c - 1]
        up = 1 if b > a else -1
        for r in range(min(a, b) + 1, max(a, b)):
            h0, h1 = o_col[r - 1], x_col[r - 1]
            if min(h0, h1) < c < max(h0, h1):
                east = 1 if h1 > h0 else -1
                out.append(Crossing(c, r, -up * east))
    return out


def writhe_grid(g: GridDiagram) -> int:
    return sum(cr.sign for cr in crossings(g))


def corner_stats(g: GridDiagram) -> CornerStats:
    x, o = g.x_rows, g.o_rows
    x_col, o_col = inverse(x), inverse(o)
    counts = {"NE": 0, "NW": 0, "SE": 0, "SW": 0}
    ne_x = sw_x = 0
    for c in range(1, g.size + 1):
        for letter, r, other_r in (("X", x[c - 1], o[c - 1]), ("O", o[c - 1], x[c - 1])):
            other_c = (o_col if letter == "X" else x_col)[r - 1]
            # the bend extends away from the corner, so the corner names the
            # opposite of where the segments go
            kind = ("N" if other_r < r else "S") + ("E" if other_c < c else "W")
            counts[kind] += 1
            if letter == "X":
                ne_x += kind == "NE"
                sw_x += kind == "SW"
    return CornerStats(counts["NE"], counts["NW"], counts["SE"], counts["SW"], ne_x, sw_x)


def classical_invariants(g: GridDiagram) -> ClassicalInvariants:
    w = writhe_grid(g)
    cs = corner_stats(g)
    cusps = cs.ne + cs.sw
    # flipping crossings negates the writhe; the rotation does not change it
    tb = -w - cusps // 2
    c_minus, c_plus = cs.down_cusps, cs.up_cusps
    if ROTATION_SIGN < 0:
        c_minus, c_plus = c_plus, c_minus
    r = (c_minus - c_plus) // 2
    return ClassicalInvariants(tb, r, tb - r, w, c_plus, c_minus)


def tb_r(g: GridDiagram) -> tuple[int, int]:
    inv = classical_invariants(g)
    return inv.tb, inv.r


def summary_line(g: GridDiagram) -> str:
    inv = classical_invariants(g)
    return f"tb={inv.tb} r={inv.r} sl={inv.sl} components={component_count(g)}"
