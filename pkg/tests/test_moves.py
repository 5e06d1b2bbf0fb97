import random

import pytest
from hypothesis import given

from legatlas import moves as mv
from legatlas.fingerprint import alexander_polynomial
from legatlas.grid import GridDiagram, component_count, validate
from legatlas.invariants import classical_invariants, tb_r
from legatlas.moves import MoveDescriptor, StabType

from conftest import UNKNOT, grids, random_grid, random_knot


def test_taxonomy_table():
    names = lambda s: sorted(str(t) for t in s)
    assert names(mv.LEGENDRIAN_TYPES) == ["O:NW", "O:SE", "X:NW", "X:SE"]
    assert names(mv.POSITIVE_TYPES) == ["O:SW", "X:NE"]
    assert names(mv.NEGATIVE_TYPES) == ["O:NE", "X:SW"]
    assert mv.TRANSVERSE_TYPES == mv.LEGENDRIAN_TYPES | mv.NEGATIVE_TYPES
    assert len(mv.ALL_TYPES) == 8


def test_cyclic_top_example():
    g = mv.cyclic_permute(UNKNOT, "top")
    assert g == validate([1, 2], [2, 1])


@given(grids())
def test_cyclic_n_times_is_identity(g):
    for edge in mv.CYCLIC_EDGES:
        h = g
        for _ in range(g.size):
            h = mv.cyclic_permute(h, edge)
        assert h == g
        assert mv.apply_move(mv.cyclic_permute(g, edge), MoveDescriptor("cyc", edge).inverse()) == g


def test_commutation_examples():
    nested = validate([1, 2, 3, 4], [4, 3, 1, 2])  # col spans {1,4}, {2,3}
    assert MoveDescriptor("comm", "cols", 1) in mv.legal_commutations(nested)
    crossed = validate([1, 2, 4, 3], [3, 4, 1, 2])  # {1,3}, {2,4}
    assert MoveDescriptor("comm", "cols", 1) not in mv.legal_commutations(crossed)
    touching = validate([1, 3, 2, 4], [3, 4, 1, 2])  # {1,3}, {3,4}
    assert MoveDescriptor("comm", "cols", 1) not in mv.legal_commutations(touching)


def test_shared_endpoint_swap_is_not_legendrian():
    # swapping such columns anyway keeps the knot type but shifts (tb, r)
    # by a stabilization step, so it must not count as a commutation
    rng = random.Random(7)
    seen = 0
    for _ in range(1000):
        g = random_knot(rng, 6)
        legal = set(mv.legal_commutations(g))
        for i in range(1, 6):
            a = {g.x_rows[i - 1], g.o_rows[i - 1]}
            b = {g.x_rows[i], g.o_rows[i]}
            if a & b:
                assert MoveDescriptor("comm", "cols", i) not in legal
                h = GridDiagram(*mv._swap(g.x_rows, g.o_rows, "cols", i))
                (tb0, r0), (tb1, r1) = tb_r(g), tb_r(h)
                assert (abs(tb1 - tb0), abs(r1 - r0)) == (1, 1)
                assert component_count(h) == component_count(g)
                seen += 1
    assert seen > 100


def test_legal_commutations_preserve_topology():
    rng = random.Random(11)
    for _ in range(10_000):
        g = random_grid(rng, rng.randint(3, 8))
        k = component_count(g)
        alex = alexander_polynomial(g) if k == 1 else None
        for m in mv.legal_commutations(g):
            h = mv.apply_commutation(g, m)
            assert component_count(h) == k
            if alex is not None:
                assert alexander_polynomial(h) == alex


@given(grids())
def test_commutation_is_involution(g):
    for m in mv.legal_commutations(g):
        h = mv.apply_commutation(g, m)
        assert m in mv.legal_commutations(h)
        assert mv.apply_commutation(h, m) == g


def test_illegal_commutation_raises():
    crossed = validate([1, 2, 4, 3], [3, 4, 1, 2])
    with pytest.raises(mv.IllegalMove):
        mv.apply_commutation(crossed, MoveDescriptor("comm", "cols", 1))


def block_at(g, c, r):
    """Letters in the 2x2 block with SW cell (c, r), keyed by corner."""
    out = {}
    for corner, (dc, dr) in {"SW": (0, 0), "SE": (1, 0), "NW": (0, 1), "NE": (1, 1)}.items():
        col, row = c + dc, r + dr
        out[corner] = "X" if g.x_rows[col - 1] == row else "O" if g.o_rows[col - 1] == row else None
    return out


def test_xse_example():
    g = mv.stabilize(UNKNOT, StabType.parse("X:SE"), 1)
    assert g.size == 3
    # the O of column 1 sat in row 1, so the block is columns 1-2, rows 1-2
    assert block_at(g, 1, 1) == {"SE": None, "NW": "X", "SW": "O", "NE": "O"}


@pytest.mark.parametrize("t", mv.ALL_TYPES, ids=str)
def test_block_shape_every_type(t):
    rng = random.Random(hash(str(t)) & 0xFFFF)
    for _ in range(200):
        g = random_grid(rng, rng.randint(2, 7))
        site = rng.randint(1, g.size)
        h = mv.stabilize(g, t, site)
        r = (g.o_rows if t.letter == "X" else g.x_rows)[site - 1]
        block = block_at(h, site, r)
        assert block[t.corner] is None
        assert block[mv.OPPOSITE[t.corner]] == t.letter
        others = [block[k] for k in mv.CORNERS if k not in (t.corner, mv.OPPOSITE[t.corner])]
        assert others == [t.acts_on] * 2


@pytest.mark.parametrize("t", mv.ALL_TYPES, ids=str)
def test_stabilize_then_destabilize(t):
    rng = random.Random(5)
    for _ in range(300):
        g = random_grid(rng, rng.randint(2, 8))
        site = rng.randint(1, g.size)
        h = mv.stabilize(g, t, site)
        m = MoveDescriptor("stab", site=site, stype=t)
        assert mv.apply_move(h, m.inverse()) == g
        assert any(d.stype == t and back == g for d, back in mv.destabilizations(h))


def test_stabilization_deltas_and_topology():
    rng = random.Random(8)
    for t in mv.ALL_TYPES:
        for _ in range(300):
            g = random_grid(rng, rng.randint(2, 8))
            h = mv.stabilize(g, t, rng.randint(1, g.size))
            (tb0, r0), (tb1, r1) = tb_r(g), tb_r(h)
            assert (tb1 - tb0, r1 - r0) == mv.TB_R_DELTA[t]
            assert component_count(h) == component_count(g)
            if component_count(g) == 1:
                assert alexander_polynomial(h) == alexander_polynomial(g)


@given(grids(min_n=3))
def test_destabilizations_replay(g):
    for m, h in mv.destabilizations(g):
        assert h.size == g.size - 1
        assert mv.stabilize(h, m.stype, m.site) == g


# 180 degree rotation exchanges corners NE<->SW and NW<->SE
_ROT = {"NE": "SW", "SW": "NE", "NW": "SE", "SE": "NW"}


@given(grids(min_n=3))
def test_destab_count_under_rotation(g):
    ours = sorted(str(StabType(m.stype.letter, _ROT[m.stype.corner])) for m, _ in mv.destabilizations(g))
    theirs = sorted(str(m.stype) for m, _ in mv.destabilizations(mv.legendrian_mirror(g)))
    assert ours == theirs


def test_no_such_marking():
    with pytest.raises(mv.NoSuchMarking):
        mv.stabilize(UNKNOT, StabType.parse("X:NE"), 3)


def test_symmetry_examples():
    assert mv.reverse(UNKNOT) == validate([1, 2], [2, 1])
    g = validate([1, 2, 3, 4, 5], [3, 4, 5, 1, 2])
    assert mv.legendrian_mirror(g) == validate([1, 2, 3, 4, 5], [4, 5, 1, 2, 3])


@given(grids())
def test_symmetries(g):
    inv = classical_invariants(g)
    for op in (mv.reverse, mv.legendrian_mirror):
        h = op(g)
        assert op(h) == g
        hi = classical_invariants(h)
        assert (hi.tb, hi.r) == (inv.tb, -inv.r)
    assert mv.transverse_mirror(g) == mv.legendrian_mirror(mv.reverse(g))
    assert tb_r(mv.transverse_mirror(g)) == (inv.tb, inv.r)


@pytest.mark.parametrize(
    "text",
    ["cyc:top", "cyc:left", "comm:cols:3", "comm:rows:1", "stab:X:SE@5", "destab:O:NE@2"],
)
def test_descriptor_text_round_trip(text):
    assert str(MoveDescriptor.parse(text)) == text


@pytest.mark.parametrize("text", ["cyc:up", "comm:diag:1", "stab:Y:SE@1", "stab:X:SE", "nope"])
def test_descriptor_parse_errors(text):
    with pytest.raises(ValueError):
        MoveDescriptor.parse(text)


def test_sl_drops():
    rng = random.Random(2)
    for _ in range(500):
        g = random_grid(rng, rng.randint(2, 8))
        sl = classical_invariants(g).sl
        site = rng.randint(1, g.size)
        for t in mv.POSITIVE_TYPES:
            assert classical_invariants(mv.stabilize(g, t, site)).sl == sl - 2
        for t in mv.NEGATIVE_TYPES:
            assert classical_invariants(mv.stabilize(g, t, site)).sl == sl
