"""Randomized invariants checked with hypothesis."""
from __future__ import annotations

import itertools
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from ietcert.cocycle import Cocycle, birkhoff_sum
from ietcert.errors import OutOfDomain, TieNotDefined
from ietcert.iet import Permutation, apply, involution_check, inverse_iet, new_iet
from ietcert.rauzy import RauzyRun, conservation_holds, rauzy_iterate, snapshot
from ietcert.rigidity import WindowA, window_membership
from ietcert.towers import Towers

f = Cocycle.half_jump()


@st.composite
def symmetric_iets(draw, dims=(2, 3, 4, 5), bits=40):
    d = draw(st.sampled_from(dims))
    ints = draw(st.lists(st.integers(1, 2**bits), min_size=d, max_size=d))
    total = sum(ints)
    return new_iet(Permutation.symmetric(d), [F(k, total) for k in ints])


IRREDUCIBLE = [
    p
    for d in range(2, 6)
    for p in map(Permutation.from_monodromy, itertools.permutations(range(1, d + 1)))
    if p.is_irreducible
]


@st.composite
def irreducible_iets(draw):
    perm = draw(st.sampled_from(IRREDUCIBLE))
    d = perm.d
    ints = draw(st.lists(st.integers(1, 2**30), min_size=d, max_size=d))
    return new_iet(perm, [F(k, sum(ints)) for k in ints])


points = st.integers(0, 2**32 - 1).map(lambda k: F(k, 2**32))
settings.register_profile("ietcert", deadline=None, max_examples=60)
settings.load_profile("ietcert")


@given(symmetric_iets(), points, st.integers(0, 60), st.integers(0, 60))
def test_cocycle_identity(T, x, m, n):
    try:
        y = apply(T, x, m)
    except OutOfDomain:
        return
    assert birkhoff_sum(T, f, x, m + n).sum == birkhoff_sum(T, f, x, m).sum + birkhoff_sum(T, f, y, n).sum


@given(symmetric_iets(), points, st.integers(1, 60))
def test_negative_sums(T, x, n):
    y = apply(T, x, -n)
    assert birkhoff_sum(T, f, x, -n).sum == -birkhoff_sum(T, f, y, n).sum


@given(irreducible_iets(), points, st.integers(-30, 30), st.integers(-30, 30))
def test_apply_composes(T, x, m, n):
    assert apply(T, apply(T, x, m), n) == apply(T, x, m + n)


@given(irreducible_iets(), points)
def test_apply_bijective(T, x):
    assert apply(T, apply(T, x, 1), -1) == x
    assert apply(inverse_iet(T), x) == apply(T, x, -1)


@given(symmetric_iets(), points, st.integers(0, 200))
def test_involution(T, x, n):
    try:
        assert involution_check(T, x, n)
    except OutOfDomain:
        pass


@given(symmetric_iets(bits=64), st.integers(0, 300))
def test_conservation(T, n):
    run = RauzyRun(T)
    for _ in range(n):
        try:
            run.step()
        except TieNotDefined:
            break
        assert conservation_holds(snapshot(run))


@given(symmetric_iets(dims=(2, 3, 4), bits=20), st.integers(0, 25), points, st.integers(0, 400))
def test_towers_match_orbit(T, depth, x, n):
    try:
        state = rauzy_iterate(T, depth)
    except TieNotDefined:
        return
    run = RauzyRun(T, marker=F(1, 2), extra_scale=2**33)
    run.run(state.n)
    tw = Towers(run)
    X = x * run.scale
    assert X.denominator == 1
    assert tw.birkhoff(int(X), n) == birkhoff_sum(T, f, x, n).sum


@given(st.integers(3, 6), st.lists(st.fractions(F(-1, 2), F(1, 2)), min_size=6, max_size=6), st.integers(2, 5))
def test_window_monotone(d, offsets, factor):
    """A vector in the window also lies in every window with widened bounds."""
    A = WindowA.for_dimension(d)
    w = F(1, 100 * d**3)
    lam = [c + o * w for c, o in zip(A.center, offsets)]
    wide = WindowA.custom([c - factor * w for c in A.center], [c + factor * w for c in A.center])
    if window_membership(A, lam):
        assert window_membership(wide, lam)
