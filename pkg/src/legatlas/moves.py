"""Grid moves (cyclic permutations, commutations, stabilizations), stabilization types, and symmetries.

A stabilization type ``M:D`` replaces one marking by a 2x2 block whose cell
at compass corner ``D`` is empty, holding a single ``M`` marking diagonally
opposite the empty cell and two markings of the other letter on the other
diagonal.  The marking that gets replaced therefore has the letter opposite
to ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .grid import GridDiagram, GridError, inverse


class IllegalMove(GridError):
    pass


class NoSuchMarking(GridError):
    pass


CORNERS = ("NW", "NE", "SW", "SE")
OPPOSITE = {"NW": "SE", "SE": "NW", "NE": "SW", "SW": "NE"}
# (column offset, row offset) inside a block whose SW cell is (c, r)
_OFFSET = {"SW": (0, 0), "SE": (1, 0), "NW": (0, 1), "NE": (1, 1)}


@dataclass(frozen=True, slots=True)
class StabType:
    letter: str
    corner: str

    def __str__(self) -> str:
        return f"{self.letter}:{self.corner}"

    @classmethod
    def parse(cls, text: str) -> "StabType":
        letter, _, corner = text.partition(":")
        t = cls(letter, corner)
        if t not in ALL_TYPES:
            raise ValueError(f"unknown stabilization type {text!r}")
        return t

    @property
    def acts_on(self) -> str:
        """Letter of the marking this stabilization replaces."""
        return "O" if self.letter == "X" else "X"


ALL_TYPES = tuple(StabType(l, c) for l in "XO" for c in CORNERS)
LEGENDRIAN_TYPES = frozenset(StabType.parse(s) for s in ("X:NW", "X:SE", "O:NW", "O:SE"))
POSITIVE_TYPES = frozenset(StabType.parse(s) for s in ("X:NE", "O:SW"))
NEGATIVE_TYPES = frozenset(StabType.parse(s) for s in ("X:SW", "O:NE"))
TRANSVERSE_TYPES = LEGENDRIAN_TYPES | NEGATIVE_TYPES

# expected change of (tb, r) under stabilization
TB_R_DELTA = {t: (0, 0) for t in LEGENDRIAN_TYPES}
TB_R_DELTA.update({t: (-1, 1) for t in POSITIVE_TYPES})
TB_R_DELTA.update({t: (-1, -1) for t in NEGATIVE_TYPES})


def sign_of(t: StabType) -> Optional[str]:
    if t in POSITIVE_TYPES:
        return "positive"
    if t in NEGATIVE_TYPES:
        return "negative"
    return None


@dataclass(frozen=True, slots=True)
class MoveDescriptor:
    """One move.  ``arg`` is the edge name (cyc) or axis (comm); ``site`` is
    a 1-based column (stab/destab) or the lower index of a commuted pair."""

    kind: str  # cyc | comm | stab | destab
    arg: str = ""
    site: int = 0
    stype: Optional[StabType] = None

    def __str__(self) -> str:
        if self.kind == "cyc":
            return f"cyc:{self.arg}"
        if self.kind == "comm":
            return f"comm:{self.arg}:{self.site}"
        return f"{self.kind}:{self.stype}@{self.site}"

    @classmethod
    def parse(cls, text: str) -> "MoveDescriptor":
        text = text.strip()
        kind, _, rest = text.partition(":")
        try:
            if kind == "cyc" and rest in CYCLIC_EDGES:
                return cls("cyc", rest)
            if kind == "comm":
                axis, _, idx = rest.partition(":")
                if axis in ("rows", "cols"):
                    return cls("comm", axis, int(idx))
            if kind in ("stab", "destab"):
                t, _, site = rest.partition("@")
                return cls(kind, site=int(site), stype=StabType.parse(t))
        except ValueError:
            pass
        raise ValueError(f"cannot parse move {text!r}")

    def inverse(self) -> "MoveDescriptor":
        """The move undoing this one on the diagram it produced."""
        if self.kind == "cyc":
            return MoveDescriptor("cyc", _CYC_INVERSE[self.arg])
        if self.kind == "comm":
            return self
        if self.kind == "stab":
            # the new block's left column is the stabilized column
            return MoveDescriptor("destab", site=self.site, stype=self.stype)
        return MoveDescriptor("stab", site=self.site, stype=self.stype)


# -- cyclic permutations ------------------------------------------------------

CYCLIC_EDGES = ("top", "bottom", "left", "right")
_CYC_INVERSE = {"top": "bottom", "bottom": "top", "left": "right", "right": "left"}


def _cyc(x: tuple, o: tuple, edge: str) -> tuple[tuple, tuple]:
    n = len(x)
    if edge == "top":
        return tuple(v % n + 1 for v in x), tuple(v % n + 1 for v in o)
    if edge == "bottom":
        return tuple((v - 2) % n + 1 for v in x), tuple((v - 2) % n + 1 for v in o)
    if edge == "left":
        return x[1:] + x[:1], o[1:] + o[:1]
    if edge == "right":
        return x[-1:] + x[:-1], o[-1:] + o[:-1]
    raise IllegalMove(f"unknown edge {edge!r}")


def cyclic_permute(g: GridDiagram, edge: str) -> GridDiagram:
    """Move the top row to the bottom (``top``), bottom row to the top, leftmost
    column to the right (``left``), or rightmost column to the left."""
    return GridDiagram(*_cyc(g.x_rows, g.o_rows, edge))


# -- commutations -------------------------------------------------------------


def _commutable(a: tuple[int, int], b: tuple[int, int]) -> bool:
    lo1, hi1 = sorted(a)
    lo2, hi2 = sorted(b)
    if len({lo1, hi1, lo2, hi2}) < 4:
        return False
    if hi1 < lo2 or hi2 < lo1:
        return True
    return (lo1 < lo2 and hi2 < hi1) or (lo2 < lo1 and hi1 < hi2)


def _legal_comms(x: tuple, o: tuple) -> list[tuple[str, int]]:
    n = len(x)
    out = []
    for c in range(n - 1):
        if _commutable((x[c], o[c]), (x[c + 1], o[c + 1])):
            out.append(("cols", c + 1))
    xc, oc = inverse(x), inverse(o)
    for r in range(n - 1):
        if _commutable((xc[r], oc[r]), (xc[r + 1], oc[r + 1])):
            out.append(("rows", r + 1))
    return out


def legal_commutations(g: GridDiagram) -> list[MoveDescriptor]:
    """Column commutations first, then row commutations, by lower index."""
    return [MoveDescriptor("comm", axis, i) for axis, i in _legal_comms(g.x_rows, g.o_rows)]


def _swap(x: tuple, o: tuple, axis: str, i: int) -> tuple[tuple, tuple]:
    if axis == "cols":
        k = i - 1
        x = x[:k] + (x[k + 1], x[k]) + x[k + 2:]
        o = o[:k] + (o[k + 1], o[k]) + o[k + 2:]
        return x, o

    def sw(v):
        return i + 1 if v == i else i if v == i + 1 else v

    return tuple(map(sw, x)), tuple(map(sw, o))


def apply_commutation(g: GridDiagram, m: MoveDescriptor) -> GridDiagram:
    if m.kind != "comm" or (m.arg, m.site) not in _legal_comms(g.x_rows, g.o_rows):
        raise IllegalMove(f"{m} is not a legal commutation here")
    return GridDiagram(*_swap(g.x_rows, g.o_rows, m.arg, m.site))


# -- stabilization ------------------------------------------------------------


def _stab(x: tuple, o: tuple, t: StabType, c: int) -> tuple[tuple, tuple]:
    """Stabilize at the ``t.acts_on`` marking of 0-based column ``c``."""
    n = len(x)
    single_is_x = t.letter == "X"
    r = (o if single_is_x else x)[c]
    ec, er = _OFFSET[t.corner]
    sc, sr = _OFFSET[OPPOSITE[t.corner]]
    # the other diagonal: the two corners that are neither empty nor single
    diag = [_OFFSET[k] for k in CORNERS if k not in (t.corner, OPPOSITE[t.corner])]
    single = [0] * (n + 1)
    double = [0] * (n + 1)
    src_single = x if single_is_x else o
    src_double = o if single_is_x else x
    for j in range(n):
        nj = j if j < c else j + 1
        v = src_single[j]
        if j == c:
            nj = c + ec
        if v == r:
            v = r + er
        elif v > r:
            v += 1
        single[nj] = v
        if j != c:
            v = src_double[j]
            double[nj] = v if v < r else v + 1
    single[c + sc] = r + sr
    for dc, dr in diag:
        double[c + dc] = r + dr
    if single_is_x:
        return tuple(single), tuple(double)
    return tuple(double), tuple(single)


def stabilize(g: GridDiagram, t: StabType, site: int) -> GridDiagram:
    """Stabilize at the marking of letter ``t.acts_on`` in column ``site``.

    The new column is inserted right of ``site`` and the new row directly
    above the marking's row.
    """
    if not 1 <= site <= g.size:
        raise NoSuchMarking(f"no column {site} in a grid of size {g.size}")
    return GridDiagram(*_stab(g.x_rows, g.o_rows, t, site - 1))


def _destabs(x: tuple, o: tuple) -> list[tuple[StabType, int, int]]:
    """Every 2x2 stabilization pattern as (type, 0-based column, 1-based row)."""
    n = len(x)
    out = []
    for c in range(n - 1):
        marks = {}
        for dc in (0, 1):
            marks[(dc, x[c + dc])] = "X"
            marks[(dc, o[c + dc])] = "O"
        rows = sorted({r for _, r in marks} | {r - 1 for _, r in marks})
        for r in rows:
            if r < 1 or r >= n:
                continue
            cells = {k: marks.get((dc, r + dr)) for k, (dc, dr) in _OFFSET.items()}
            empty = [k for k, v in cells.items() if v is None]
            if len(empty) != 1:
                continue
            e = empty[0]
            letter = cells[OPPOSITE[e]]
            others = [cells[k] for k in CORNERS if k not in (e, OPPOSITE[e])]
            if others[0] == others[1] != letter:
                out.append((StabType(letter, e), c, r))
    return out


def _destab(x: tuple, o: tuple, t: StabType, c: int, r: int) -> tuple[tuple, tuple]:
    n = len(x)
    single_is_x = t.letter == "X"
    src_single = x if single_is_x else o
    src_double = o if single_is_x else x
    single = [0] * (n - 1)
    double = [0] * (n - 1)

    def row(v):
        return v if v < r else v - 1 if v > r + 1 else r

    for j in range(n):
        nj = j if j <= c else j - 1
        vs = src_single[j]
        if not (c <= j <= c + 1 and r <= vs <= r + 1):
            single[nj] = row(vs)
        vd = src_double[j]
        if not (c <= j <= c + 1 and r <= vd <= r + 1):
            double[nj] = row(vd)
    double[c] = r
    if single_is_x:
        return tuple(single), tuple(double)
    return tuple(double), tuple(single)


def destabilizations(g: GridDiagram) -> list[tuple[MoveDescriptor, GridDiagram]]:
    """All typed destabilizations, ordered by column then row."""
    out = []
    for t, c, r in _destabs(g.x_rows, g.o_rows):
        h = GridDiagram(*_destab(g.x_rows, g.o_rows, t, c, r))
        out.append((MoveDescriptor("destab", site=c + 1, stype=t), h))
    return out


def destabilize(g: GridDiagram, t: StabType, site: int) -> GridDiagram:
    for m, h in destabilizations(g):
        if m.stype == t and m.site == site:
            return h
    raise IllegalMove(f"no {t} destabilization with left column {site}")


# -- dispatch -----------------------------------------------------------------


def apply_move(g: GridDiagram, m: MoveDescriptor) -> GridDiagram:
    if m.kind == "cyc":
        return cyclic_permute(g, m.arg)
    if m.kind == "comm":
        return apply_commutation(g, m)
    if m.kind == "stab":
        return stabilize(g, m.stype, m.site)
    if m.kind == "destab":
        return destabilize(g, m.stype, m.site)
    raise IllegalMove(f"unknown move kind {m.kind!r}")


def apply_path(g: GridDiagram, path) -> GridDiagram:
    for m in path:
        g = apply_move(g, m)
    return g


# -- symmetries ---------------------------------------------------------------


def reverse(g: GridDiagram) -> GridDiagram:
    """Swap X and O: reverses the orientation of the link."""
    return GridDiagram(g.o_rows, g.x_rows)


def legendrian_mirror(g: GridDiagram) -> GridDiagram:
    """Rotate the grid by 180 degrees."""
    n = g.size
    return GridDiagram(
        tuple(n + 1 - v for v in reversed(g.x_rows)),
        tuple(n + 1 - v for v in reversed(g.o_rows)),
    )


def transverse_mirror(g: GridDiagram) -> GridDiagram:
    return reverse(legendrian_mirror(g))
