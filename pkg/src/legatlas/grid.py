"""Grid diagrams: two permutations placing X and O markings on an n x n grid.

Columns are numbered left to right and rows bottom to top, both starting
at 1.  ``x_rows[c - 1]`` is the row of the X marking in column ``c``;
``o_rows`` likewise for O.  Vertical segments run from X to O, horizontal
segments from O to X.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence


class GridError(ValueError):
    """Base class for malformed grid input."""


class LengthMismatch(GridError):
    def __init__(self, nx: int, no: int):
        super().__init__(f"x has {nx} entries but o has {no}")
        self.nx, self.no = nx, no


class NotAPermutation(GridError):
    def __init__(self, which: str, index: int):
        super().__init__(f"{which} is not a permutation: bad entry at position {index}")
        self.which, self.index = which, index


class SharedCell(GridError):
    def __init__(self, column: int):
        super().__init__(f"X and O share a cell in column {column}")
        self.column = column


class ParseError(GridError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True, slots=True)
class GridDiagram:
    """An immutable grid diagram.

    The constructor trusts its input; use :func:`validate` (or
    :func:`decode`) on anything that did not come out of this package.
    """

    x_rows: tuple[int, ...]
    o_rows: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.x_rows)

    def __str__(self) -> str:
        return encode(self)

    def __lt__(self, other: "GridDiagram") -> bool:
        return (self.size, self.x_rows, self.o_rows) < (other.size, other.x_rows, other.o_rows)


class Segment(NamedTuple):
    kind: str  # "vertical" | "horizontal"
    index: int  # column for vertical, row for horizontal
    start: tuple[int, int]  # (column, row) of the tail marking
    end: tuple[int, int]  # (column, row) of the head marking

    @property
    def direction(self) -> tuple[int, int]:
        dc = (self.end[0] > self.start[0]) - (self.end[0] < self.start[0])
        dr = (self.end[1] > self.start[1]) - (self.end[1] < self.start[1])
        return dc, dr

    @property
    def span(self) -> tuple[int, int]:
        i = 1 if self.kind == "vertical" else 0
        return tuple(sorted((self.start[i], self.end[i])))


def _check_perm(seq: Sequence[int], which: str) -> None:
    n = len(seq)
    seen = set()
    for i, v in enumerate(seq, start=1):
        if not isinstance(v, int) or not 1 <= v <= n or v in seen:
            raise NotAPermutation(which, i)
        seen.add(v)


def validate(x: Iterable[int], o: Iterable[int]) -> GridDiagram:
    """Build a GridDiagram from raw row sequences, checking every invariant."""
    x, o = tuple(x), tuple(o)
    if len(x) != len(o):
        raise LengthMismatch(len(x), len(o))
    if not x:
        raise GridError("grid must have size at least 1")
    _check_perm(x, "x")
    _check_perm(o, "o")
    for c, (a, b) in enumerate(zip(x, o), start=1):
        if a == b:
            raise SharedCell(c)
    return GridDiagram(x, o)


def inverse(perm: Sequence[int]) -> list[int]:
    """Column (1-based) of the marking in each row, as a 0-indexed list."""
    inv = [0] * len(perm)
    for c, r in enumerate(perm, start=1):
        inv[r - 1] = c
    return inv


def component_count(g: GridDiagram) -> int:
    """Number of link components: cycles of column -> next column."""
    n = g.size
    x_col = inverse(g.x_rows)
    seen = [False] * n
    count = 0
    for start in range(n):
        if seen[start]:
            continue
        count += 1
        c = start
        while not seen[c]:
            seen[c] = True
            # vertical X->O lands on row o_rows[c]; that row's horizontal ends at its X
            c = x_col[g.o_rows[c] - 1] - 1
    return count


def is_knot(g: GridDiagram) -> bool:
    return component_count(g) == 1


def segments(g: GridDiagram) -> list[Segment]:
    """All 2n oriented segments, verticals (by column) then horizontals (by row)."""
    n = g.size
    out = []
    for c in range(1, n + 1):
        out.append(Segment("vertical", c, (c, g.x_rows[c - 1]), (c, g.o_rows[c - 1])))
    x_col, o_col = inverse(g.x_rows), inverse(g.o_rows)
    for r in range(1, n + 1):
        out.append(Segment("horizontal", r, (o_col[r - 1], r), (x_col[r - 1], r)))
    return out


def traverse(g: GridDiagram) -> list[list[Segment]]:
    """Segments grouped into closed components, each in traversal order.

    Each component starts with the vertical segment of its lowest column.
    """
    segs = segments(g)
    n = g.size
    vert = segs[:n]
    horiz = segs[n:]
    used = [False] * n
    comps = []
    for c in range(n):
        if used[c]:
            continue
        comp = []
        col = c
        while not used[col]:
            used[col] = True
            v = vert[col]
            h = horiz[v.end[1] - 1]
            comp.extend((v, h))
            col = h.end[0] - 1
        comps.append(comp)
    return comps


# -- text formats -----------------------------------------------------------

_LINE = re.compile(r"(\d+);x=(\d+(?:,\d+)*);o=(\d+(?:,\d+)*)")


def encode(g: GridDiagram) -> str:
    return "{};x={};o={}".format(
        g.size, ",".join(map(str, g.x_rows)), ",".join(map(str, g.o_rows))
    )


def _first_mismatch(text: str) -> int:
    """Byte offset where ``text`` stops looking like a grid line."""
    pos = 0
    m = re.match(r"\d+", text)
    if not m:
        return 0
    pos = m.end()
    for tag in (";x=", ";o="):
        if not text.startswith(tag, pos):
            for i, ch in enumerate(tag):
                if pos + i >= len(text) or text[pos + i] != ch:
                    return pos + i
        pos += len(tag)
        m = re.compile(r"\d+(?:,\d+)*").match(text, pos)
        if not m:
            return pos
        pos = m.end()
    return pos


def decode(text: str) -> GridDiagram:
    """Parse ``<n>;x=<r1>,...;o=<s1>,...`` and validate the result."""
    line = text.rstrip("\n")
    m = _LINE.fullmatch(line)
    if m is None:
        raise ParseError("malformed grid line", len(line[: _first_mismatch(line)].encode()))
    n = int(m.group(1))
    x = [int(v) for v in m.group(2).split(",")]
    o = [int(v) for v in m.group(3).split(",")]
    if len(x) != n or len(o) != n:
        bad = m.start(2) if len(x) != n else m.start(3)
        raise ParseError(f"expected {n} entries", bad)
    return validate(x, o)


def read_grids(lines: Iterable[str]) -> Iterator[GridDiagram]:
    """Stream grids from newline-delimited records, skipping comments and blanks."""
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        yield decode(line)


def render_ascii(g: GridDiagram, filler: str = ".") -> str:
    """Top line is row n; cells separated by single spaces."""
    n = g.size
    rows = []
    for r in range(n, 0, -1):
        cells = []
        for c in range(n):
            if g.x_rows[c] == r:
                cells.append("X")
            elif g.o_rows[c] == r:
                cells.append("O")
            else:
                cells.append(filler)
        rows.append(" ".join(cells))
    return "\n".join(rows)
