import random

import pytest
from hypothesis import strategies as st

from legatlas.grid import GridDiagram, component_count

UNKNOT = GridDiagram((2, 1), (1, 2))
# L(g) is a left-handed trefoil; its Legendrian knot is the right-handed one at tb = 1
TREFOIL = GridDiagram((1, 2, 3, 4, 5), (3, 4, 5, 1, 2))
FIGURE_EIGHT = GridDiagram((1, 2, 4, 3, 6, 5), (3, 6, 1, 5, 4, 2))


def random_grid(rng: random.Random, n: int) -> GridDiagram:
    x = list(range(1, n + 1))
    rng.shuffle(x)
    while True:
        o = list(range(1, n + 1))
        rng.shuffle(o)
        if all(a != b for a, b in zip(x, o)):
            return GridDiagram(tuple(x), tuple(o))


def random_knot(rng: random.Random, n: int) -> GridDiagram:
    while True:
        g = random_grid(rng, n)
        if component_count(g) == 1:
            return g


@st.composite
def grids(draw, min_n=2, max_n=9, knots=False):
    n = draw(st.integers(min_n, max_n))
    x = draw(st.permutations(range(1, n + 1)))
    o = draw(st.permutations(range(1, n + 1)).filter(lambda o: all(a != b for a, b in zip(x, o))))
    g = GridDiagram(tuple(x), tuple(o))
    if knots and component_count(g) != 1:
        # knots are common enough that rejecting links keeps the search cheap
        from hypothesis import assume

        assume(False)
    return g


@pytest.fixture
def rng():
    return random.Random(12345)


def legendrian_walk(rng: random.Random, g: GridDiagram, steps: int, max_size: int):
    """Random walk by Legendrian moves; returns (end, path)."""
    from legatlas import moves as mv

    path = []
    for _ in range(steps):
        options = [mv.MoveDescriptor("cyc", e) for e in mv.CYCLIC_EDGES]
        options += mv.legal_commutations(g)
        if g.size < max_size:
            t = rng.choice(sorted(mv.LEGENDRIAN_TYPES, key=str))
            options.append(mv.MoveDescriptor("stab", site=rng.randint(1, g.size), stype=t))
        if g.size > 2:
            options += [m for m, _ in mv.destabilizations(g) if m.stype in mv.LEGENDRIAN_TYPES]
        m = rng.choice(options)
        g = mv.apply_move(g, m)
        path.append(m)
    return g, path


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
