"""Topological fingerprints used to bucket grids by smooth knot type.

The Alexander polynomial and determinant do not see chirality, so the
fingerprint also carries the Jones polynomial.  Names come from an
optional CSV table; nothing here calls out to external software.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import Optional

import numpy as np

from .diagram import PlanarDiagram, planar_diagram
from .grid import GridDiagram, GridError, component_count


class MultiComponent(GridError):
    pass


class UnknownName(LookupError):
    pass


# -- Alexander polynomial -----------------------------------------------------


def _alexander_matrix(pdg: PlanarDiagram, t: complex) -> np.ndarray:
    k = pdg.n_arcs
    m = np.zeros((k, k), dtype=complex)
    for row, ((over, a_in, a_out), sign) in enumerate(zip(pdg.arcs, pdg.signs)):
        m[row, over] += 1 - t
        if sign > 0:
            m[row, a_in] += t
            m[row, a_out] -= 1
        else:
            m[row, a_in] -= 1
            m[row, a_out] += t
    return m


def _normalize(coeffs: list[int]) -> tuple[int, ...]:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    i = 0
    while i < len(coeffs) and coeffs[i] == 0:
        i += 1
    coeffs = coeffs[i:]
    if not coeffs:
        return ()
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return tuple(coeffs)


def _alexander_numeric(pdg: PlanarDiagram) -> Optional[tuple[int, ...]]:
    k = pdg.n_arcs
    size = k - 1
    npts = k + 1
    ts = np.exp(2j * np.pi * np.arange(npts) / npts)
    mats = np.stack([_alexander_matrix(pdg, t)[:size, :size] for t in ts])
    dets = np.linalg.det(mats)
    coeffs = np.fft.fft(dets) / npts
    # fft with exp(-i...) recovers coefficients of increasing degree
    real = coeffs.real
    rounded = np.rint(real)
    if np.max(np.abs(real - rounded)) > 1e-6 or np.max(np.abs(coeffs.imag)) > 1e-6:
        return None
    return _normalize([int(v) for v in rounded])


def _det_fraction(m: list[list[Fraction]]) -> Fraction:
    m = [row[:] for row in m]
    n = len(m)
    det = Fraction(1)
    for i in range(n):
        p = next((r for r in range(i, n) if m[r][i] != 0), None)
        if p is None:
            return Fraction(0)
        if p != i:
            m[i], m[p] = m[p], m[i]
            det = -det
        det *= m[i][i]
        for r in range(i + 1, n):
            f = m[r][i] / m[i][i]
            if f:
                for c in range(i, n):
                    m[r][c] -= f * m[i][c]
    return det


def _alexander_exact(pdg: PlanarDiagram) -> tuple[int, ...]:
    """Exact fallback: evaluate at integer points and interpolate."""
    k = pdg.n_arcs
    size = k - 1
    points = list(range(2, 2 + k))
    values = []
    for t in points:
        rows = [[Fraction(0)] * k for _ in range(k)]
        for row, ((over, a_in, a_out), sign) in enumerate(zip(pdg.arcs, pdg.signs)):
            rows[row][over] += 1 - t
            rows[row][a_in] += t if sign > 0 else -1
            rows[row][a_out] += -1 if sign > 0 else t
        values.append(_det_fraction([r[:size] for r in rows[:size]]))
    # Lagrange interpolation into monomial coefficients
    coeffs = [Fraction(0)] * len(points)
    for i, (xi, yi) in enumerate(zip(points, values)):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(points):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for d in range(len(basis) - 1):
                basis[d] -= xj * basis[d + 1]
            denom *= xi - xj
        for d, b in enumerate(basis):
            coeffs[d] += yi * b / denom
    return _normalize([int(c) for c in coeffs])


def _is_alexander(p: tuple[int, ...]) -> bool:
    return bool(p) and p == p[::-1] and abs(sum(p)) == 1


def alexander_from_pd(pdg: PlanarDiagram) -> tuple[int, ...]:
    if pdg.n_arcs <= 1:
        return (1,)
    p = _alexander_numeric(pdg)
    if p is None or not _is_alexander(p):
        p = _alexander_exact(pdg)
    return p


def alexander_polynomial(g: GridDiagram) -> tuple[int, ...]:
    """Symmetrized Alexander polynomial of the knot L(g).

    Returned as the full palindromic coefficient sequence with positive
    leading coefficient, e.g. ``(1, -1, 1)`` for a trefoil.
    """
    if component_count(g) != 1:
        raise MultiComponent("Alexander polynomial needs a knot")
    return alexander_from_pd(planar_diagram(g))


def determinant_of(alex: tuple[int, ...]) -> int:
    return abs(sum(c * (-1) ** i for i, c in enumerate(alex)))


def knot_determinant(g: GridDiagram) -> int:
    return determinant_of(alexander_polynomial(g))


# -- Jones polynomial ---------------------------------------------------------

# Laurent polynomials in A are dicts {exponent: coefficient}.


def _pmul(p: dict, q: dict) -> dict:
    out: dict = {}
    for a, x in p.items():
        for b, y in q.items():
            out[a + b] = out.get(a + b, 0) + x * y
    return {e: c for e, c in out.items() if c}


def _padd(into: dict, p: dict, shift: int = 0) -> None:
    for e, c in p.items():
        e += shift
        v = into.get(e, 0) + c
        if v:
            into[e] = v
        else:
            into.pop(e, None)


_LOOP = {2: -1, -2: -1}


def _crossing_order(pd) -> list[int]:
    # greedily pick the crossing sharing the most labels with what is open
    remaining = set(range(len(pd)))
    order = []
    open_labels: set = set()
    while remaining:
        best = max(remaining, key=lambda i: (sum(l in open_labels for l in pd[i]), -i))
        remaining.discard(best)
        order.append(best)
        for l in pd[best]:
            if l in open_labels:
                open_labels.discard(l)
            else:
                open_labels.add(l)
    return order


def _join(partner: dict, u: int, v: int) -> int:
    """Add an arc joining edge ends u and v; return the number of loops closed."""
    if u == v:
        return 1
    pu = partner.pop(u, None)
    if pu is not None:
        del partner[pu]
        if pu == v:
            return 1
    pv = partner.pop(v, None)
    if pv is not None:
        del partner[pv]
    left = u if pu is None else pu
    right = v if pv is None else pv
    partner[left] = right
    partner[right] = left
    return 0


def kauffman_bracket(pd) -> dict:
    """Unnormalized bracket: every closed loop, the last one included,
    contributes d = -A^2 - A^-2."""
    states: dict = {(): {0: 1}}
    for i in _crossing_order(pd):
        a, b, c, d = pd[i]
        nxt: dict = {}
        for key, poly in states.items():
            for shift, pairs in ((1, ((a, b), (c, d))), (-1, ((a, d), (b, c)))):
                partner = dict(key)
                loops = _join(partner, *pairs[0]) + _join(partner, *pairs[1])
                term = {e + shift: co for e, co in poly.items()}
                for _ in range(loops):
                    term = _pmul(term, _LOOP)
                _padd(nxt.setdefault(tuple(sorted(partner.items())), {}), term)
        states = {k: v for k, v in nxt.items() if v}
    return states.get((), {})


def _divide_by_loop(p: dict) -> dict:
    # p / (-A^2 - A^-2), exact
    p = dict(p)
    out: dict = {}
    while p:
        top = max(p)
        c = p[top]
        # leading term of divisor is -A^2
        q = top - 2
        out[q] = -c
        _padd(p, {q + 2: -c, q - 2: -c})
    return out


def jones_from_pd(pdg: PlanarDiagram) -> tuple[int, tuple[int, ...]]:
    """Jones polynomial as (lowest power of t, coefficients)."""
    if not pdg.pd:
        return (0, (1,))
    bracket = _divide_by_loop(kauffman_bracket(pdg.pd))
    w = pdg.writhe
    # (-A^3)^(-w) <K>, then A = t^(-1/4)
    factor = -1 if w % 2 else 1
    terms = {}
    for e, c in bracket.items():
        ea = e - 3 * w
        if ea % 4:
            raise ArithmeticError("bracket exponent not divisible by 4")
        terms[-ea // 4] = c * factor
    lo, hi = min(terms), max(terms)
    return lo, tuple(terms.get(i, 0) for i in range(lo, hi + 1))


def jones_polynomial(g: GridDiagram) -> tuple[int, tuple[int, ...]]:
    if component_count(g) != 1:
        raise MultiComponent("Jones polynomial is computed for knots only")
    return jones_from_pd(planar_diagram(g))


def mirror_jones(j: tuple[int, tuple[int, ...]]) -> tuple[int, tuple[int, ...]]:
    lo, co = j
    return -(lo + len(co) - 1), tuple(reversed(co))


def format_jones(j: tuple[int, tuple[int, ...]]) -> str:
    lo, co = j
    return f"{lo}:" + " ".join(map(str, co))


def parse_jones(text: str) -> tuple[int, tuple[int, ...]]:
    lo, _, rest = text.partition(":")
    return int(lo), tuple(int(v) for v in rest.split())


# -- fingerprints -------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Fingerprint:
    components: int
    alexander: tuple[int, ...]
    determinant: int
    jones: Optional[tuple[int, tuple[int, ...]]] = None
    name: str = field(default="", compare=False)

    @property
    def key(self) -> str:
        """Filesystem- and sort-friendly bucket key (ignores the name)."""
        s = "a" + ",".join(str(c) for c in self.alexander)
        if self.jones is not None:
            lo, co = self.jones
            s += f"_j{lo}_" + ",".join(str(c) for c in co)
        return s

    def label(self) -> str:
        return self.name or self.key


def fingerprint(g: GridDiagram, with_jones: bool = True, table: "KnotTable | None" = None) -> Fingerprint:
    """Fingerprint of the smooth knot L(g)."""
    if component_count(g) != 1:
        raise MultiComponent("fingerprints are defined for knots")
    pdg = planar_diagram(g)
    alex = alexander_from_pd(pdg)
    fp = Fingerprint(1, alex, determinant_of(alex), jones_from_pd(pdg) if with_jones else None)
    if table is not None:
        fp = replace(fp, name=table.lookup(fp))
    return fp


def mirror_fingerprint(fp: Fingerprint, table: "KnotTable | None" = None) -> Fingerprint:
    jones = mirror_jones(fp.jones) if fp.jones is not None else None
    out = Fingerprint(fp.components, fp.alexander, fp.determinant, jones)
    if table is not None:
        out = replace(out, name=table.lookup(out, mirror_of=fp.name))
    return out


def smooth_type_of_legendrian(g: GridDiagram, with_jones: bool = True, table: "KnotTable | None" = None) -> Fingerprint:
    """Fingerprint of the smooth type of the Legendrian knot of g: the mirror of L(g)."""
    return mirror_fingerprint(fingerprint(g, with_jones, table), table)


# -- name table ---------------------------------------------------------------


def alexander_half(alex: tuple[int, ...]) -> tuple[int, ...]:
    """Central coefficient followed by the higher ones."""
    mid = len(alex) // 2
    return tuple(alex[mid:])


def alexander_from_half(half: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(reversed(half[1:])) + tuple(half)


@dataclass
class KnotTable:
    """Named knot types keyed by invariants.

    Columns: ``name,alexander,determinant,chirality`` with an optional
    ``jones`` column (``<lowest power>:<coefficients>``).  ``alexander`` is
    the symmetric half, central coefficient first, space separated.
    """

    rows: list[dict]

    @classmethod
    def from_csv(cls, text: str) -> "KnotTable":
        reader = csv.DictReader(io.StringIO(text))
        required = {"name", "alexander", "determinant", "chirality"}
        if not required <= set(reader.fieldnames or ()):
            raise ValueError(f"knot table needs columns {sorted(required)}")
        rows = []
        for rec in reader:
            half = tuple(int(v) for v in rec["alexander"].split())
            alex = _normalize(list(alexander_from_half(half)))
            row = {
                "name": rec["name"].strip(),
                "alexander": alex,
                "determinant": int(rec["determinant"]),
                "chirality": rec["chirality"].strip(),
                "jones": parse_jones(rec["jones"]) if rec.get("jones") else None,
            }
            if row["chirality"] not in ("chiral", "amphichiral"):
                raise ValueError(f"bad chirality {row['chirality']!r}")
            rows.append(row)
        return cls(rows)

    @classmethod
    def load(cls, path) -> "KnotTable":
        with open(path, newline="") as fh:
            return cls.from_csv(fh.read())

    @classmethod
    def builtin(cls) -> "KnotTable":
        text = resources.files("legatlas").joinpath("data/knots.csv").read_text()
        return cls.from_csv(text)

    def lookup(self, fp: Fingerprint, mirror_of: str = "") -> str:
        """Name for ``fp``, or '' if the table has no matching row."""
        for row in self.rows:
            if row["alexander"] != fp.alexander or row["determinant"] != fp.determinant:
                continue
            if row["jones"] is None or fp.jones is None:
                if mirror_of:
                    return _mirror_name(mirror_of, row["chirality"])
                return row["name"]
            if row["jones"] == fp.jones:
                return row["name"]
            if row["chirality"] == "chiral" and mirror_jones(row["jones"]) == fp.jones:
                return _mirror_name(row["name"], "chiral")
        return ""


def _mirror_name(name: str, chirality: str) -> str:
    if chirality == "amphichiral":
        return name
    return name[1:] if name.startswith("m") else "m" + name
