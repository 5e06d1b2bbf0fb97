import random

import pytest
from hypothesis import given

from legatlas import moves as mv
from legatlas.grid import component_count, validate
from legatlas.invariants import (
    classical_invariants,
    corner_stats,
    crossings,
    summary_line,
    tb_r,
    writhe_grid,
)

from conftest import FIGURE_EIGHT, TREFOIL, UNKNOT, grids, random_grid


def test_unknot_values():
    assert crossings(UNKNOT) == []
    assert writhe_grid(UNKNOT) == 0
    cs = corner_stats(UNKNOT)
    assert (cs.ne, cs.nw, cs.se, cs.sw) == (1, 1, 1, 1)
    inv = classical_invariants(UNKNOT)
    assert (inv.tb, inv.r, inv.sl) == (-1, 0, -1)
    assert summary_line(UNKNOT) == "tb=-1 r=0 sl=-1 components=1"


def test_crossing_sign_convention():
    # column 2 runs north through rows 2 and 3; row 2 runs west, row 3 east
    g = validate([2, 1, 3, 4], [3, 4, 2, 1])
    signs = {(cr.column, cr.row): cr.sign for cr in crossings(g)}
    assert signs == {(2, 2): 1, (2, 3): -1}


def test_known_knots():
    assert tb_r(TREFOIL) == (1, 0)
    assert tb_r(FIGURE_EIGHT) == (-3, 0)
    assert tb_r(mv.legendrian_mirror(TREFOIL)) == (1, 0)


@given(grids(max_n=10))
def test_corner_balance(g):
    cs = corner_stats(g)
    assert cs.total == 2 * g.size
    assert cs.ne == cs.sw
    inv = classical_invariants(g)
    assert inv.c_plus + inv.c_minus == cs.ne + cs.sw
    assert inv.sl == inv.tb - inv.r


@given(grids(max_n=10))
def test_rotation_keeps_writhe(g):
    assert writhe_grid(mv.legendrian_mirror(g)) == writhe_grid(g)


@given(grids(max_n=10, knots=True))
def test_knot_parity(g):
    inv = classical_invariants(g)
    assert (inv.tb + inv.r) % 2 == 1


def test_xne_raises_r():
    rng = random.Random(4)
    for _ in range(500):
        g = random_grid(rng, rng.randint(2, 9))
        h = mv.stabilize(g, mv.StabType.parse("X:NE"), rng.randint(1, g.size))
        assert tb_r(h) == (tb_r(g)[0] - 1, tb_r(g)[1] + 1)


def test_invariance_under_legendrian_moves():
    rng = random.Random(9)
    for _ in range(2000):
        g = random_grid(rng, rng.randint(2, 10))
        inv = classical_invariants(g)
        key = (inv.tb, inv.r, inv.sl)
        for e in mv.CYCLIC_EDGES:
            h = mv.cyclic_permute(g, e)
            i2 = classical_invariants(h)
            assert (i2.tb, i2.r, i2.sl) == key
        for m in mv.legal_commutations(g):
            i2 = classical_invariants(mv.apply_commutation(g, m))
            assert (i2.tb, i2.r, i2.sl) == key
        for m, h in mv.destabilizations(g):
            i2 = classical_invariants(h)
            dtb, dr = mv.TB_R_DELTA[m.stype]
            assert (i2.tb, i2.r) == (inv.tb - dtb, inv.r - dr)
