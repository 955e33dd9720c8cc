"""Acceptance suite: one test (or one part) per criterion, summarized at the end of the run.

Runs with ``pytest -m acceptance -rA``; the terminal summary prints one
PASS/FAIL line per criterion.  Parts that are run faithfully but cannot pass
under the stated budget are marked ``xfail(strict=True)``; the analysis is in
the project's decisions ledger.
"""
from __future__ import annotations

import random
import time
from fractions import Fraction as F
from functools import lru_cache

import pytest

from ietcert.cocycle import (
    Cocycle,
    bounded_sums_probe,
    check_cancellation,
    check_half_point_identity,
    paired_levels_even,
    skew_orbit,
)
from ietcert.errors import OutOfDomain, SamplingExhausted, TieNotDefined
from ietcert.iet import Permutation, SkewPoint, apply, involution_check, new_iet
from ietcert.oracle import base_grid, check_certificate, first_return
from ietcert.pipeline import ExperimentConfig, draw, longest_decreasing
from ietcert.rauzy import RauzyRun, conservation_holds, rauzy_iterate, snapshot, tower_floor_of
from ietcert.rigidity import build_certificate, essential_value_on_floor, find_renormalization_hits, is_special
from ietcert.sampling import sample_symmetric_iet

pytestmark = pytest.mark.acceptance

f = Cocycle.half_jump()
DIMS = (2, 3, 4, 5)
SEEDS = range(6)  # 6 seeds per dimension, 24 IETs in all


def samples():
    return [(d, s, sample_symmetric_iet(1000 * d + s, d)) for d in DIMS for s in SEEDS]


def dyadic_points(seed: int, count: int) -> list[F]:
    rng = random.Random(seed)
    return [F(rng.randrange(1, 2**32), 2**32) for _ in range(count)]


# 1 -------------------------------------------------------------------------------------
@pytest.mark.criterion("1")
def test_involution_suite(criterion):
    t0 = time.perf_counter()
    checked = skipped = 0
    failures = []
    for d, s, T in samples():
        for x in dyadic_points(s, 100):
            try:
                if not involution_check(T, x, 1000):
                    failures.append((d, s, x))
                checked += 1
            except OutOfDomain:
                skipped += 1
    elapsed = time.perf_counter() - t0
    criterion["detail"] = f"{checked} points on 24 IETs, n <= 1000, {elapsed:.1f}s, skipped {skipped}"
    assert not failures
    assert checked >= 20 * 100 - skipped and skipped == 0
    assert elapsed < 60


# 2 -------------------------------------------------------------------------------------
@pytest.mark.criterion("2")
def test_odd_cocycle_identities(criterion):
    t0 = time.perf_counter()
    bad = [(d, s) for d, s, T in samples() if not (check_half_point_identity(T, f, 1000) and check_cancellation(T, f, 1000))]
    control = new_iet(Permutation.from_monodromy((3, 1, 4, 2)), ["1/10", "2/10", "3/10", "4/10"])
    control_fails = not check_half_point_identity(control, f, 1000)
    elapsed = time.perf_counter() - t0
    criterion["detail"] = f"24 IETs, n <= 1000, non-symmetric control fails: {control_fails}, {elapsed:.1f}s"
    assert not bad
    assert control_fails
    assert elapsed < 60


# 3 -------------------------------------------------------------------------------------
@pytest.mark.criterion("3")
def test_tower_conservation(criterion):
    depths = []
    for d, s, T in samples():
        run = RauzyRun(T)
        while run.depth < 10_000:
            try:
                run.step()
            except TieNotDefined:
                break
            assert sum(h * v for h, v in zip(run.h, run.lam)) == run.total0
            if run.depth % 250 == 0:
                # the same identity on the rational snapshot
                assert conservation_holds(snapshot(run))
        depths.append(run.depth)
    criterion["detail"] = f"every depth up to the tie, deepest {max(depths)}"


# 4 -------------------------------------------------------------------------------------
@pytest.mark.criterion("4")
def test_brute_force_towers(criterion):
    cases = 0
    for d in (2, 3, 4):
        for seed in range(10):
            T = sample_symmetric_iet(seed, d, denominator_bits=24)
            for depth in range(13):
                try:
                    state = rauzy_iterate(T, depth)
                except TieNotDefined:
                    break
                base = state.base_length
                for x in base_grid(base, 6):
                    fr = first_return(T, x, base)
                    a, j = tower_floor_of(state, x)
                    assert j == 0
                    assert fr.time == state.heights[a - 1]
                    assert fr.image == apply(state.iet_n, x)
                    # floor i of the orbit is floor i of tower a
                    for i, y in enumerate(fr.floors):
                        assert tower_floor_of(state, y) == (a, i)
                    cases += 1
    criterion["detail"] = f"{cases} first returns, d <= 4, depth <= 12"


# 5 -------------------------------------------------------------------------------------
@lru_cache(maxsize=None)
def certify_batch(d: int, denominator_bits: int = 128, max_depth: int = 10_000, sampler: str = "planted"):
    """Seeds 0..19: (seed, T or None, scan summary, certificates), and the elapsed time."""
    cfg = ExperimentConfig(d=d, sampler=sampler, denominator_bits=denominator_bits, max_depth=max_depth)
    t0 = time.perf_counter()
    batch = []
    for seed in range(20):
        try:
            T = draw(cfg, seed)
        except SamplingExhausted:
            batch.append((seed, None, {"status": "SamplingExhausted"}, []))
            continue
        scan = find_renormalization_hits(T, cfg.window(), max_depth=max_depth, max_hits=cfg.max_hits)
        batch.append((seed, T, scan.summary(), [build_certificate(h) for h in scan.hits]))
    return batch, time.perf_counter() - t0


def seed_meets_criterion(certs) -> bool:
    passing = [c for c in certs if c.passed]
    for c in passing:
        assert c.birkhoff_on_Xi == -1 and c.birkhoff_at_half == 0
        assert c.measure_Xi >= 1 / (10 * c.hit.d * c.rho_gamma)
    return longest_decreasing([c.rigidity_displacement for c in passing]) >= 3


def _criterion5(criterion, d, **budget):
    batch, elapsed = certify_batch(d, **budget)
    good = [seed for seed, _, _, certs in batch if seed_meets_criterion(certs)]
    statuses = {}
    for _, _, scan, _ in batch:
        statuses[scan["status"]] = statuses.get(scan["status"], 0) + 1
    # independent recomputation of every passing certificate of the good seeds
    for seed, T, _, certs in batch:
        if seed in good:
            for c in certs:
                if c.passed:
                    rep = check_certificate(T, c, points=4, seed=seed)
                    assert rep.ok and rep.agrees
    criterion["detail"] = f"seeds meeting it: {good}, scan status {statuses}, {elapsed:.0f}s"
    assert elapsed < 600
    assert good


@pytest.mark.criterion("5", part="d=3")
def test_certificates_d3(criterion):
    _criterion5(criterion, 3)


@pytest.mark.criterion("5", part="d=4")
def test_certificates_d4(criterion):
    _criterion5(criterion, 4)


@pytest.mark.criterion("5", part="d=5")
@pytest.mark.xfail(strict=True, reason="no d = 5 window loop fits 3 times into 10^4 steps; see decisions ledger")
def test_certificates_d5(criterion):
    _criterion5(criterion, 5)


@pytest.mark.criterion("5", part="d=5, max_depth 3*10^4 (supplemental)")
def test_certificates_d5_deeper(criterion):
    _criterion5(criterion, 5, max_depth=30_000)


@pytest.mark.criterion("5", part="uniform sampler (recorded)")
def test_uniform_sampler_record(criterion):
    lines = []
    for d in (3, 4, 5):
        batch, _ = certify_batch(d, sampler="uniform")
        ties = sorted(scan.get("tie_depth") or 0 for _, _, scan, _ in batch)
        windows = sum(scan.get("window_depths", 0) for _, _, scan, _ in batch)
        passed = sum(c.passed for _, _, _, certs in batch for c in certs)
        lines.append(f"d={d}: median tie depth {ties[10]}, window depths {windows}, passing {passed}")
    criterion["detail"] = "; ".join(lines)


# 6 -------------------------------------------------------------------------------------
def _criterion6(criterion, batches, select):
    checked = missing = 0
    for batch in batches:
        for _, _, _, certs in batch:
            for c in certs:
                if not (c.passed and select(c)):
                    continue
                ev = essential_value_on_floor(c, -1)
                checked += 1
                if not (ev.found and ev.measure > 0 and ev.n == c.h_k):
                    missing += 1
    criterion["detail"] = f"{checked - missing}/{checked} certificates with a witness set"
    assert checked > 0
    assert missing == 0


@pytest.mark.criterion("6", part="odd d")
def test_essential_value_odd(criterion):
    batches = [certify_batch(3)[0], certify_batch(5, max_depth=30_000)[0]]
    _criterion6(criterion, batches, lambda c: not is_special(c.hit))


@pytest.mark.criterion("6", part="even d")
@pytest.mark.xfail(strict=True, reason="T^h moves an even-case floor by about 25 floor widths; see decisions ledger")
def test_essential_value_even(criterion):
    _criterion6(criterion, [certify_batch(4)[0]], lambda c: True)


# 7 -------------------------------------------------------------------------------------
@pytest.mark.criterion("7")
def test_coboundary_control(criterion):
    # lambda_1 + lambda_2 = 1/2, so 1/2 is the left endpoint of the third interval
    T = new_iet(Permutation.symmetric(4), ["1/5", "3/10", "1/3", "1/6"])
    grid = [F(2 * k + 1, 2000) for k in range(1000)]
    worst = bounded_sums_probe(T, f, grid, 10**5)
    criterion["detail"] = f"max |S_n f| = {worst} over n <= 10^5 and 1000 points"
    assert worst <= 1


# 8 -------------------------------------------------------------------------------------
@pytest.mark.criterion("8")
def test_recurrence(criterion):
    flagged = []
    times = []
    for d, s, T in samples():
        x = dyadic_points(7 + s, 1)[0]
        stats = skew_orbit(T, f, SkewPoint(x, 0), 10**6, stop_at_first_return=True)
        if stats.return_times:
            times.append(stats.return_times[0])
        else:
            flagged.append((d, s))
    # a non-return is flagged for inspection, not a failure
    criterion["detail"] = f"{len(times)}/24 returned, longest first return {max(times, default=None)}, flagged {flagged}"
    assert f.zero_mean


# 9 -------------------------------------------------------------------------------------
@pytest.mark.criterion("9")
def test_parity(criterion):
    pairs = 0
    for d, s, T in samples():
        x, y = dyadic_points(11 + s, 2)
        assert paired_levels_even(T, f, SkewPoint(x, 0), SkewPoint(y, 0), 10**4)
        assert paired_levels_even(T, f, SkewPoint(x, 3), SkewPoint(y, -1), 10**4)
        pairs += 2
    criterion["detail"] = f"{pairs} orbit pairs, 10^4 steps"
