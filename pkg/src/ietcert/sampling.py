"""Seeded samplers of symmetric IETs.

``sample_symmetric_iet`` draws lengths uniformly at random with a fixed bit
size.  ``plant_symmetric_iet`` builds lengths whose Rauzy-Veech path repeats a
loop that starts and ends at the symmetric permutation with lengths in the
window, so that renormalization hits occur at predictable depths.  Both use
``random.Random`` (Mersenne Twister) seeded with the given integer, which makes
every draw reproducible across platforms.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import SamplingExhausted
from .iet import Iet, Permutation, new_iet
from .rigidity import WindowA, _ScaledWindow


def sample_symmetric_iet(seed: int, d: int, denominator_bits: int = 128, max_retries: int = 64) -> Iet:
    """Symmetric IET with lengths k_i / sum(k), k_i uniform in [1, 2^bits)."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if denominator_bits < 1:
        raise ValueError("denominator_bits must be positive")
    rng = random.Random(seed)
    for _ in range(max_retries):
        ints = [rng.randrange(1, 2**denominator_bits) for _ in range(d)]
        # the first step compares the last top symbol d with the last bottom symbol 1
        if ints[0] == ints[-1]:
            continue
        total = sum(ints)
        return new_iet(Permutation.symmetric(d), [Fraction(k, total) for k in ints])
    raise SamplingExhausted(f"no tie-free draw in {max_retries} attempts (seed {seed})")


@dataclass(frozen=True)
class PlantedLoop:
    """A loop of the induction from the symmetric permutation back to itself.

    ``matrix`` maps lengths at the end of the loop (listed by top position)
    to lengths at its start, so lambda = matrix @ v follows the loop and
    arrives at v.
    """

    d: int
    length: int
    matrix: tuple[tuple[int, ...], ...]

    def apply(self, v: list[int]) -> list[int]:
        return [sum(m * x for m, x in zip(row, v)) for row in self.matrix]


def _window_point(rng: random.Random, A: WindowA, bits: int, shrink: int = 4) -> list[int]:
    """Integer vector whose normalized version lies well inside the window."""
    S = 2**bits
    c = A.center
    half = [(hi - lo) / (2 * shrink) for lo, hi in zip(A.lows, A.highs)]
    out = []
    for ck, wk in zip(c, half):
        u = Fraction(rng.randrange(-(2**bits), 2**bits), 2**bits)
        out.append(int((ck + u * wk) * S))
    return out


def find_loop(lam0: list[int], A: WindowA, targets: list[list[int]], max_steps: int) -> PlantedLoop | None:
    """Run the induction on lam0 (symmetric start) until a symmetric depth whose
    loop matrix keeps every target inside the window.

    Stretches where one interval wins many consecutive steps are skipped in
    bulk; none of the skipped depths can be in the window.
    """
    d = len(lam0)
    pi0 = list(range(d))
    pi1 = [d - 1 - a for a in range(d)]
    lam = list(lam0)
    M = [[int(i == j) for j in range(d)] for i in range(d)]
    window = _ScaledWindow(A)
    n = 0

    def addcol(dst: int, src: int, k: int) -> None:
        for row in M:
            row[dst] += k * row[src]

    while n < max_steps:
        a0, a1 = pi0.index(d - 1), pi1.index(d - 1)
        if lam[a0] == lam[a1]:
            return None
        win, row = (a0, pi1) if lam[a0] > lam[a1] else (a1, pi0)
        tail = [b for b in range(d) if row[b] > row[win]]
        S = sum(lam[b] for b in tail)
        j = (lam[win] - max(lam[b] for b in tail)) // S - 1
        j = min(j, (sum(lam) - 2 * d * min(lam[b] for b in tail) - 1) // S)
        if j > 0:
            # whole cycles through the tail leave the permutation unchanged
            lam[win] -= j * S
            n += j * len(tail)
            for b in tail:
                addcol(b, win, j)
            continue
        los = a1 if win == a0 else a0
        lam[win] -= lam[los]
        pw = row[win]
        for b in range(d):
            if row[b] > pw and b != los:
                row[b] += 1
        row[los] = pw + 1
        addcol(los, win, 1)
        n += 1
        if any(pi1[a] != d - 1 - pi0[a] for a in range(d)):
            continue
        order = sorted(range(d), key=lambda a: pi0[a])
        Q = tuple(tuple(M[i][order[k]] for k in range(d)) for i in range(d))
        loop = PlantedLoop(d, n, Q)
        top = list(range(d))
        if all(window.contains(w, top, sum(w)) for w in (loop.apply(t) for t in targets)):
            return loop
    return None


def plant_symmetric_iet(
    seed: int,
    d: int,
    denominator_bits: int = 128,
    max_depth: int = 10_000,
    min_loops: int = 3,
    target_bits: int = 24,
    attempts: int = 64,
) -> tuple[Iet, PlantedLoop, int]:
    """Symmetric IET whose induction repeats one loop as often as the budgets allow.

    A random end vector v inside the window is fixed first, then a loop Q with
    Q v in the window is searched from a random start.  The loop count L is
    the largest with L * loop.length <= max_depth, Q^j v in the window for
    j < L, and sum(Q^L v) < 2^denominator_bits, so the returned lengths have
    a common denominator below 2^denominator_bits and depths
    j * loop.length (j = 1..L) are window depths.  Of ``attempts`` candidate
    loops the one with the largest L is kept.  Returns (iet, loop, L).
    """
    if min_loops < 1:
        raise ValueError("min_loops must be at least 1")
    rng = random.Random(seed)
    A = WindowA.for_dimension(d)
    window = _ScaledWindow(A)
    top = list(range(d))
    best = None
    for _ in range(attempts):
        v = _window_point(rng, A, target_bits)
        # the search start only needs to survive max_depth steps without a tie
        lam0 = _window_point(rng, A, 96, shrink=1)
        loop = find_loop(lam0, A, [v], max_depth // min_loops)
        if loop is None:
            continue
        chain = [v]
        while len(chain) * loop.length <= max_depth:
            w = loop.apply(chain[-1])
            if sum(w).bit_length() > denominator_bits:
                break
            chain.append(w)
            if not window.contains(w, top, sum(w)):
                break
        # chain[L] is the starting vector; chain[0..L-1] must all be window points
        L = len(chain) - 1
        while L >= 1 and not all(window.contains(w, top, sum(w)) for w in chain[:L]):
            L -= 1
        if L >= min_loops and (best is None or L > best[2]):
            best = (chain[L], loop, L)
    if best is not None:
        lam, loop, L = best
        total = sum(lam)
        return new_iet(Permutation.symmetric(d), [Fraction(x, total) for x in lam]), loop, L
    raise SamplingExhausted(f"no loop within budget for d={d}, seed {seed}")


__all__ = ["PlantedLoop", "find_loop", "plant_symmetric_iet", "sample_symmetric_iet"]
