import random

import pytest
import sympy
from sympy.polys.matrices import DomainMatrix
from hypothesis import given, settings

from legatlas import moves as mv
from legatlas.atlas import enumerate_grids
from legatlas.fingerprint import (
    Fingerprint,
    KnotTable,
    MultiComponent,
    alexander_half,
    alexander_polynomial,
    fingerprint,
    jones_polynomial,
    knot_determinant,
    mirror_jones,
    parse_jones,
    format_jones,
    smooth_type_of_legendrian,
)
from legatlas.grid import validate

from conftest import FIGURE_EIGHT, TREFOIL, UNKNOT, grids, random_knot

T = sympy.Symbol("t")


def winding_alexander(g):
    """Alexander polynomial from the matrix of winding numbers at the lattice
    points of the grid: det = +-t^k (1 - t)^(n-1) Delta(t)."""
    n = g.size
    wind = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            # rightward ray from (i, j); vertical segments sit at x = c - 1/2
            w = 0
            for c in range(1, n + 1):
                if c - 0.5 <= i:
                    continue
                lo, hi = sorted((g.x_rows[c - 1], g.o_rows[c - 1]))
                if lo - 0.5 < j < hi - 0.5:
                    w += 1 if g.o_rows[c - 1] > g.x_rows[c - 1] else -1
            wind[i][j] = w
    top = max(max(row) for row in wind)
    m = sympy.Matrix(n, n, lambda i, j: T ** (top - wind[i][j]))
    det = DomainMatrix.from_Matrix(m).det().as_expr()
    q, r = sympy.div(sympy.Poly(det, T), sympy.Poly((1 - T) ** (n - 1), T))
    assert r.is_zero
    coeffs = [int(c) for c in q.all_coeffs()]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
    if coeffs[0] < 0:
        coeffs = [-c for c in coeffs]
    return tuple(coeffs)


def test_unknot_fingerprint():
    fp = fingerprint(UNKNOT)
    assert (fp.components, fp.alexander, fp.determinant) == (1, (1,), 1)
    assert knot_determinant(UNKNOT) == 1


def test_known_polynomials():
    assert alexander_polynomial(TREFOIL) == (1, -1, 1)
    assert alexander_polynomial(FIGURE_EIGHT) == (1, -3, 1)
    assert knot_determinant(TREFOIL) == 3
    assert knot_determinant(FIGURE_EIGHT) == 5
    # L(TREFOIL) is left-handed: V = -t^-4 + t^-3 + t^-1
    assert jones_polynomial(TREFOIL) == (-4, (-1, 1, 0, 1))
    assert jones_polynomial(FIGURE_EIGHT) == (-2, (1, -1, 1, -1, 1))


@pytest.mark.parametrize("seed", range(40))
def test_alexander_matches_winding_matrix(seed):
    rng = random.Random(seed)
    g = random_knot(rng, rng.randint(5, 10))
    assert alexander_polynomial(g) == winding_alexander(g)


def test_winding_oracle_on_known_knots():
    assert winding_alexander(TREFOIL) == (1, -1, 1)
    assert winding_alexander(FIGURE_EIGHT) == (1, -3, 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_small_grids_are_unknots(n):
    for g in enumerate_grids(n, knots_only=True):
        assert alexander_polynomial(g) == (1,)
        assert jones_polynomial(g) == (0, (1,))


@settings(max_examples=60, deadline=None)
@given(grids(min_n=3, max_n=9, knots=True))
def test_polynomial_shape(g):
    alex = alexander_polynomial(g)
    assert alex == alex[::-1]
    assert alex[0] > 0
    assert abs(sum(alex)) == 1
    assert knot_determinant(g) % 2 == 1
    assert knot_determinant(mv.legendrian_mirror(g)) == knot_determinant(g)


def test_walk_keeps_fingerprint():
    rng = random.Random(21)
    for _ in range(10):
        g = random_knot(rng, 6)
        fp = fingerprint(g)
        h = g
        for _ in range(50):
            options = [mv.MoveDescriptor("cyc", e) for e in mv.CYCLIC_EDGES]
            options += mv.legal_commutations(h)
            if h.size < 9:
                options += [mv.MoveDescriptor("stab", site=rng.randint(1, h.size), stype=t) for t in mv.ALL_TYPES]
            options += [m for m, _ in mv.destabilizations(h)] if h.size > 2 else []
            h = mv.apply_move(h, rng.choice(options))
        assert fingerprint(h) == fp


def test_mirror_flips_jones_only():
    leg = smooth_type_of_legendrian(TREFOIL)
    fp = fingerprint(TREFOIL)
    assert (leg.alexander, leg.determinant) == (fp.alexander, fp.determinant)
    assert leg.jones == mirror_jones(fp.jones) == (1, (1, 0, 1, -1))


def test_multicomponent_rejected():
    with pytest.raises(MultiComponent):
        fingerprint(validate([2, 1, 4, 3], [1, 2, 3, 4]))


def test_jones_text_round_trip():
    j = (-4, (-1, 1, 0, 1))
    assert parse_jones(format_jones(j)) == j


def test_name_lookup():
    table = KnotTable.builtin()
    assert fingerprint(TREFOIL, table=table).name == "m3_1"
    assert smooth_type_of_legendrian(TREFOIL, table=table).name == "3_1"
    assert fingerprint(FIGURE_EIGHT, table=table).name == "4_1"
    assert smooth_type_of_legendrian(FIGURE_EIGHT, table=table).name == "4_1"


def test_lookup_miss_is_empty():
    table = KnotTable.from_csv("name,alexander,determinant,chirality\n3_1,-1 1,3,chiral\n")
    assert fingerprint(FIGURE_EIGHT, table=table).name == ""
    # without a jones column the mirror name comes from chirality
    assert fingerprint(TREFOIL, table=table).name == "3_1"
    assert smooth_type_of_legendrian(TREFOIL, table=table).name == "m3_1"


def test_table_validation():
    with pytest.raises(ValueError):
        KnotTable.from_csv("name,alexander\n3_1,-1 1\n")
    with pytest.raises(ValueError):
        KnotTable.from_csv("name,alexander,determinant,chirality\n3_1,-1 1,3,sideways\n")


def test_half_format():
    assert alexander_half((2, -3, 2)) == (-3, 2)


def test_key_ignores_name():
    a = Fingerprint(1, (1,), 1, (0, (1,)), "0_1")
    b = Fingerprint(1, (1,), 1, (0, (1,)), "")
    assert a == b and a.key == b.key == "a1_j0_1"
