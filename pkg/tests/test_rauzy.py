from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from ietcert.errors import NotPositive, TieNotDefined
from ietcert.iet import Permutation, apply, is_symmetric, new_iet
from ietcert.oracle import base_grid, first_return
from ietcert.rauzy import (
    RauzyRun,
    conservation_holds,
    height_ratio_bound,
    initial_state,
    is_positive,
    normalize,
    path_from_kinds,
    projection,
    rauzy_iterate,
    rauzy_step,
    tower_floor_of,
)

SYM2 = Permutation.symmetric(2)


def euclid_kinds(a: int, b: int) -> str:
    """Subtractive Euclid on (a, b) = (lambda_1, lambda_2): 'T' when the last top interval wins."""
    out = []
    while a != b:
        if b > a:
            out.append("T")
            b -= a
        else:
            out.append("B")
            a -= b
    return "".join(out)


def random_iet(rng: random.Random, d: int, bits: int = 64):
    ints = [rng.randrange(1, 2**bits) for _ in range(d)]
    return new_iet(Permutation.symmetric(d), [F(k, sum(ints)) for k in ints])


class TestStep:
    def test_two_fifths(self):
        s = rauzy_step(initial_state(new_iet(SYM2, ["2/5", "3/5"])))
        assert s.iet_n.lengths == (F(2, 5), F(1, 5))
        assert s.heights == (2, 1)

    def test_step_matches_first_return(self):
        s = rauzy_step(initial_state(new_iet(SYM2, ["2/5", "3/5"])))
        assert s.base_length == F(3, 5)
        for x in base_grid(F(3, 5), 20):
            fr = first_return(s.origin, x, F(3, 5))
            assert fr.image == apply(s.iet_n, x)

    def test_tie(self):
        s = rauzy_step(initial_state(new_iet(SYM2, ["1/3", "2/3"])))
        assert s.iet_n.lengths == (F(1, 3), F(1, 3))
        with pytest.raises(TieNotDefined):
            rauzy_step(s)

    def test_step_conserves(self):
        s = initial_state(new_iet(Permutation.symmetric(4), ["1/10", "2/10", "3/10", "4/10"]))
        for _ in range(3):
            s = rauzy_step(s)
            assert conservation_holds(s)

    def test_step_agrees_with_iterate(self):
        T = random_iet(random.Random(4), 5)
        s = initial_state(T)
        for _ in range(40):
            s = rauzy_step(s)
        t = rauzy_iterate(T, 40)
        assert (s.iet_n, s.heights, s.path) == (t.iet_n, t.heights, t.path)


class TestIterate:
    def test_depth_zero(self):
        T = new_iet(Permutation.symmetric(3), ["1/7", "2/7", "4/7"])
        s = rauzy_iterate(T, 0)
        assert s.heights == (1, 1, 1) and s.iet_n == T

    @pytest.mark.parametrize("p,q", [(2, 5), (3, 8), (13, 34), (5, 7), (1, 9), (89, 233)])
    def test_euclid(self, p, q):
        T = new_iet(SYM2, [F(p, q), F(q - p, q)])
        kinds = euclid_kinds(p, q - p)
        s = rauzy_iterate(T, len(kinds))
        assert s.path.serialize() == kinds
        with pytest.raises(TieNotDefined) as err:
            rauzy_iterate(T, len(kinds) + 1)
        assert err.value.depth == len(kinds)

    def test_rational_terminates(self):
        T = new_iet(Permutation.symmetric(3), ["1/7", "2/7", "4/7"])
        run = RauzyRun(T)
        with pytest.raises(TieNotDefined):
            for _ in range(1000):
                run.step()
        assert run.depth < 1000

    def test_heights_monotone(self):
        run = RauzyRun(random_iet(random.Random(7), 4))
        prev = list(run.h)
        for _ in range(200):
            run.step()
            assert all(b >= a for a, b in zip(prev, run.h))
            assert sum(b != a for a, b in zip(prev, run.h)) == 1
            prev = list(run.h)


class TestNormalize:
    def test_rescale(self):
        s = rauzy_step(initial_state(new_iet(SYM2, ["2/5", "3/5"])))
        assert normalize(s).lengths == (F(2, 3), F(1, 3))

    def test_fixed_point(self):
        T = new_iet(Permutation.symmetric(3), ["1/7", "2/7", "4/7"])
        assert normalize(rauzy_iterate(T, 0)) == T

    def test_keeps_permutation(self):
        s = rauzy_iterate(random_iet(random.Random(1), 4), 17)
        assert normalize(s).perm == s.iet_n.perm
        assert is_symmetric(normalize(s).perm) == is_symmetric(s.iet_n.perm)


class TestProjection:
    T = new_iet(SYM2, ["2/5", "3/5"])

    def test_already_in_base(self):
        assert projection(rauzy_iterate(self.T, 1), F(1, 5)) == (F(1, 5), 0)

    def test_nine_tenths(self):
        s = rauzy_iterate(self.T, 1)
        assert projection(s, F(9, 10)) == (F(3, 10), 1)
        assert apply(self.T, F(9, 10), -1) == F(3, 10)

    def test_round_trip(self):
        T = random_iet(random.Random(3), 4, bits=16)
        s = rauzy_iterate(T, 12)
        for k in range(40):
            x = F(2 * k + 1, 80)
            p, ell = projection(s, x)
            assert 0 <= p < s.base_length
            assert apply(T, p, ell) == x
            # no earlier backward iterate lies in the base
            assert all(apply(T, x, -i) >= s.base_length for i in range(ell))


class TestTowers:
    def test_base_floor(self):
        s = rauzy_iterate(new_iet(SYM2, ["2/5", "3/5"]), 1)
        assert tower_floor_of(s, F(1, 5)) == (1, 0)
        assert tower_floor_of(s, F(1, 2)) == (2, 0)

    def test_next_floor(self):
        T = random_iet(random.Random(5), 3, bits=16)
        s = rauzy_iterate(T, 10)
        for k in range(60):
            x = F(2 * k + 1, 120)
            a, j = tower_floor_of(s, x)
            if j + 1 < s.heights[a - 1]:
                assert tower_floor_of(s, apply(T, x)) == (a, j + 1)

    def test_floors_tile(self):
        T = random_iet(random.Random(6), 4, bits=16)
        s = rauzy_iterate(T, 15)
        assert sum(h * v for h, v in zip(s.heights, s.iet_n.lengths)) == 1
        counts: dict[tuple[int, int], int] = {}
        N = 400
        for k in range(N):
            key = tower_floor_of(s, F(2 * k + 1, 2 * N))
            counts[key] = counts.get(key, 0) + 1
        # every floor receives its share of the grid, up to one point per endpoint
        for a in range(1, 5):
            for j in range(s.heights[a - 1]):
                assert abs(counts.get((a, j), 0) - N * s.iet_n.lengths[a - 1]) <= 1


@pytest.mark.parametrize("d", [2, 3, 4])
def test_first_return_oracle(d):
    """Heights and the induced map agree with first returns found by orbit iteration."""
    for seed in range(5):
        T = random_iet(random.Random(seed), d, bits=20)
        for depth in range(0, 13):
            s = rauzy_iterate(T, depth)
            base = s.base_length
            for x in base_grid(base, 8):
                fr = first_return(T, x, base)
                a, j = tower_floor_of(s, x)
                assert j == 0
                assert fr.time == s.heights[a - 1]
                assert fr.image == apply(s.iet_n, x)


class TestPositivity:
    def test_empty(self):
        assert not is_positive(path_from_kinds(SYM2, ""))

    def test_top_bottom(self):
        p = path_from_kinds(SYM2, "TB")
        assert sorted(v for row in p.matrix for v in row) == [1, 1, 1, 2]
        assert is_positive(p)

    def test_concatenation(self):
        p = path_from_kinds(SYM2, "TB")
        assert is_positive(p + path_from_kinds(SYM2, "TTB"))
        assert is_positive(path_from_kinds(SYM2, "BTB"))

    def test_rho_needs_positive(self):
        with pytest.raises(NotPositive):
            height_ratio_bound(path_from_kinds(SYM2, "T"))


class TestHeightRatio:
    def test_top_bottom_is_three(self):
        assert height_ratio_bound(path_from_kinds(SYM2, "TB")) == 3

    def test_small_denominators_ending_in_top_bottom(self):
        seen = 0
        for q in range(3, 60):
            for p in range(1, q):
                T = new_iet(SYM2, [F(p, q), F(q - p, q)])
                kinds = euclid_kinds(p, q - p)
                for n in range(2, len(kinds) + 1):
                    if kinds[n - 2:n] == "TB":
                        h = rauzy_iterate(T, n).heights
                        assert F(max(h), min(h)) < 3
                        seen += 1
        assert seen > 100

    @pytest.mark.parametrize("d", [3, 4])
    def test_random_states(self, d):
        rng = random.Random(d)
        checked = 0
        for _ in range(500):
            run = RauzyRun(random_iet(rng, d))
            run.run(rng.randrange(20, 80))
            k = run.shortest_positive_suffix()
            if k is None:
                continue
            rho = height_ratio_bound(run.path(run.depth - k, run.depth))
            assert rho >= 1
            assert F(max(run.h), min(run.h)) < rho
            checked += 1
        assert checked > 100
