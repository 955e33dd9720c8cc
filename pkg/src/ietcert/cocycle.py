"""Integer-valued piecewise-constant cocycles and their Birkhoff sums.

The two-sided Birkhoff sum follows the usual convention

    S_n c(x) =  c(x) + ... + c(T^{n-1} x)        for n >= 1,
                0                                for n = 0,
               -(c(T^{-1} x) + ... + c(T^{n} x))  for n <= -1,

so that ``S_{m+n} c(x) = S_m c(x) + S_n c(T^m x)`` for all integers m, n.
"""
from __future__ import annotations

from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import OutOfDomain
from .iet import Iet, ScaledIet, SkewPoint, format_rational, to_rational

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Cocycle:
    """Piecewise-constant function on [0, 1) with explicit breakpoint values.

    ``values[i]`` is the value on the i-th open piece; the point 0 takes the
    value of the first piece.
    """

    breakpoints: tuple[Fraction, ...]
    values: tuple[int, ...]
    at_breakpoints: tuple[int, ...]

    def __post_init__(self) -> None:
        bps = self.breakpoints
        if any(not 0 < b < 1 for b in bps) or any(a >= b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing inside (0, 1)")
        if len(self.values) != len(bps) + 1 or len(self.at_breakpoints) != len(bps):
            raise ValueError("need one value per piece and one per breakpoint")

    @classmethod
    def half_jump(cls) -> Cocycle:
        """f = indicator of (0, 1/2) minus indicator of (1/2, 1), f(1/2) = 0."""
        return cls((HALF,), (1, -1), (0,))

    @classmethod
    def zero(cls) -> Cocycle:
        return cls((), (0,), ())

    @property
    def pieces(self) -> list[tuple[Fraction, Fraction]]:
        ends = [Fraction(0), *self.breakpoints, Fraction(1)]
        return list(zip(ends, ends[1:]))

    @property
    def mean(self) -> Fraction:
        return sum((v * (b - a) for v, (a, b) in zip(self.values, self.pieces)), Fraction(0))

    @property
    def zero_mean(self) -> bool:
        return self.mean == 0

    def __call__(self, x) -> int:
        return evaluate(self, x)

    def serialize(self) -> dict:
        return {
            "breakpoints": [format_rational(b) for b in self.breakpoints],
            "values": list(self.values),
            "at_breakpoints": list(self.at_breakpoints),
        }

    @classmethod
    def from_dict(cls, data: dict) -> Cocycle:
        return cls(
            tuple(to_rational(b) for b in data["breakpoints"]),
            tuple(int(v) for v in data["values"]),
            tuple(int(v) for v in data["at_breakpoints"]),
        )


def evaluate(c: Cocycle, x) -> int:
    x = to_rational(x)
    if not 0 <= x < 1:
        raise OutOfDomain(f"{x} outside [0, 1)")
    i = bisect_left(c.breakpoints, x)
    if i < len(c.breakpoints) and c.breakpoints[i] == x:
        return c.at_breakpoints[i]
    return c.values[i]


def is_odd(c: Cocycle) -> bool:
    """c(x) = -c(1 - x), checked on the combinatorial data."""
    bps = c.breakpoints
    if tuple(1 - b for b in reversed(bps)) != bps:
        return False
    if tuple(-v for v in reversed(c.values)) != c.values:
        return False
    return tuple(-v for v in reversed(c.at_breakpoints)) == c.at_breakpoints


class _ScaledCocycle:
    """Cocycle evaluation on the integer lattice of a ScaledIet."""

    def __init__(self, c: Cocycle, scale: int):
        self.c = c
        self.bps = [int(b * scale) for b in c.breakpoints]
        for b, q in zip(self.bps, c.breakpoints):
            if Fraction(b, scale) != q:
                raise ValueError("scale does not resolve the breakpoints")

    def value(self, X: int) -> int:
        i = bisect_left(self.bps, X)
        if i < len(self.bps) and self.bps[i] == X:
            return self.c.at_breakpoints[i]
        return self.c.values[i]

    def hits_breakpoint(self, X: int) -> bool:
        i = bisect_left(self.bps, X)
        return i < len(self.bps) and self.bps[i] == X


def _scaled(T: Iet, c: Cocycle, *points: Fraction) -> tuple[ScaledIet, _ScaledCocycle]:
    S = ScaledIet.for_points(T, *points, *c.breakpoints, HALF)
    return S, _ScaledCocycle(c, S.scale)


@dataclass(frozen=True)
class BirkhoffReport:
    x: Fraction
    n: int
    sum: int
    orbit_hit_half: bool


def birkhoff_sum(T: Iet, c: Cocycle, x, n: int) -> BirkhoffReport:
    if T.domain_length != 1:
        raise ValueError("birkhoff_sum expects a normalized IET")
    x = to_rational(x)
    if not 0 <= x < 1:
        raise OutOfDomain(f"{x} outside [0, 1)")
    S, C = _scaled(T, c, x)
    X = S.lift(x)
    half = S.lift(HALF)
    total = 0
    hit = False
    if n >= 0:
        for _ in range(n):
            hit = hit or X == half or C.hits_breakpoint(X)
            total += C.value(X)
            X = S.forward(X)
    else:
        for _ in range(-n):
            X = S.backward(X)
            hit = hit or X == half or C.hits_breakpoint(X)
            total -= C.value(X)
    return BirkhoffReport(x, n, total, hit)


def _half_orbit_sums(T: Iet, c: Cocycle, n_max: int) -> tuple[list[int], list[int], list[int]]:
    """Forward sums S_k(1/2) for k <= n_max + 1, backward sums S_{-k}(1/2) for
    k <= n_max, and the values c(T^k(1/2)) for k <= n_max."""
    S, C = _scaled(T, c)
    half = S.lift(HALF)
    fwd = [0]
    vals = []
    X = half
    for _ in range(n_max + 1):
        v = C.value(X)
        vals.append(v)
        fwd.append(fwd[-1] + v)
        X = S.forward(X)
    bwd = [0]
    X = half
    for _ in range(n_max):
        X = S.backward(X)
        bwd.append(bwd[-1] - C.value(X))
    return fwd, bwd, vals


def check_half_point_identity(T: Iet, c: Cocycle, n_max: int) -> bool:
    """S_{n+1} c(1/2) == S_{-n} c(1/2) for every 0 <= n <= n_max."""
    fwd, bwd, _ = _half_orbit_sums(T, c, n_max)
    return all(fwd[n + 1] == bwd[n] for n in range(n_max + 1))


def first_half_point_failure(T: Iet, c: Cocycle, n_max: int) -> int | None:
    fwd, bwd, _ = _half_orbit_sums(T, c, n_max)
    for n in range(n_max + 1):
        if fwd[n + 1] != bwd[n]:
            return n
    return None


def check_cancellation(T: Iet, c: Cocycle, n_max: int) -> bool:
    """S_{2n} c(T^{-n}(1/2)) == -c(T^n(1/2)) for every 0 <= n <= n_max.

    The left side telescopes to S_n c(1/2) - S_{-n} c(1/2).
    """
    fwd, bwd, vals = _half_orbit_sums(T, c, n_max)
    return all(fwd[n] - bwd[n] == -vals[n] for n in range(n_max + 1))


@dataclass
class OrbitStats:
    start: SkewPoint
    steps: int
    level_counts: Counter = field(default_factory=Counter)
    min_level: int = 0
    max_level: int = 0
    return_times: list[int] = field(default_factory=list)
    final_level: int = 0
    trace: list[int] | None = None

    def summary(self) -> dict:
        return {
            "x": format_rational(self.start.x),
            "start_level": self.start.level,
            "steps": self.steps,
            "min_level": self.min_level,
            "max_level": self.max_level,
            "final_level": self.final_level,
            "returns_to_zero": len(self.return_times),
            "first_return": self.return_times[0] if self.return_times else None,
            "distinct_levels": len(self.level_counts),
        }


def skew_orbit(
    T: Iet,
    c: Cocycle,
    start: SkewPoint,
    steps: int,
    keep_trace: bool = False,
    stop_at_first_return: bool = False,
) -> OrbitStats:
    """Iterate (x, r) -> (T x, r + c(x)); the level after n steps is r + S_n c(x)."""
    if T.domain_length != 1:
        raise ValueError("skew_orbit expects a normalized IET")
    S, C = _scaled(T, c, start.x)
    X = S.lift(start.x)
    level = start.level
    stats = OrbitStats(start, 0, min_level=level, max_level=level)
    stats.level_counts[level] += 1
    trace = [level] if keep_trace else None
    for n in range(1, steps + 1):
        level += C.value(X)
        X = S.forward(X)
        stats.level_counts[level] += 1
        if level < stats.min_level:
            stats.min_level = level
        elif level > stats.max_level:
            stats.max_level = level
        if trace is not None:
            trace.append(level)
        stats.steps = n
        if level == 0:
            stats.return_times.append(n)
            if stop_at_first_return:
                break
    stats.final_level = level
    stats.trace = trace
    return stats


def paired_levels_even(T: Iet, c: Cocycle, p: SkewPoint, q: SkewPoint, steps: int) -> bool:
    """Whether the two skew orbits keep an even level sum for ``steps`` steps."""
    S, C = _scaled(T, c, p.x, q.x)
    X, Y = S.lift(p.x), S.lift(q.x)
    a, b = p.level, q.level
    if (a + b) % 2:
        return False
    for _ in range(steps):
        a += C.value(X)
        b += C.value(Y)
        X, Y = S.forward(X), S.forward(Y)
        if (a + b) % 2:
            return False
    return True


_INT64_SAFE = 2**62


def orbit_sum_sweep(T: Iet, c: Cocycle, xs: Sequence, n_max: int) -> list[int]:
    """max over 1 <= n <= n_max of |S_n c(x)| for each x, exact.

    Uses numpy int64 lanes when every scaled quantity fits, plain integers
    otherwise.
    """
    xs = [to_rational(x) for x in xs]
    S, C = _scaled(T, c, *xs)
    X0 = [S.lift(x) for x in xs]
    if S.scale * 2 < _INT64_SAFE and n_max < _INT64_SAFE:
        return _sweep_numpy(S, C, X0, n_max)
    out = []
    for X in X0:
        total = best = 0
        for _ in range(n_max):
            total += C.value(X)
            X = S.forward(X)
            best = max(best, abs(total))
        out.append(best)
    return out


def _sweep_numpy(S: ScaledIet, C: _ScaledCocycle, X0: list[int], n_max: int) -> list[int]:
    lefts = np.array(S._top_lefts, dtype=np.int64)
    offs = np.array(S._top_offsets, dtype=np.int64)
    bps = np.array(C.bps, dtype=np.int64)
    piece_vals = np.array(C.c.values, dtype=np.int64)
    at_vals = np.array(C.c.at_breakpoints or [0], dtype=np.int64)
    X = np.array(X0, dtype=np.int64)
    total = np.zeros_like(X)
    best = np.zeros_like(X)
    for _ in range(n_max):
        i = np.searchsorted(bps, X, side="left")
        on_bp = np.zeros(X.shape, dtype=bool)
        if len(bps):
            j = np.minimum(i, len(bps) - 1)
            on_bp = bps[j] == X
            vals = np.where(on_bp, at_vals[j], piece_vals[i])
        else:
            vals = piece_vals[i]
        total += vals
        np.maximum(best, np.abs(total), out=best)
        X += offs[np.searchsorted(lefts, X, side="right") - 1]
    return [int(v) for v in best]


def bounded_sums_probe(T: Iet, c: Cocycle, x_samples: Iterable, n_max: int) -> int:
    """max over samples and 1 <= n <= n_max of |S_n c(x)|."""
    values = orbit_sum_sweep(T, c, list(x_samples), n_max)
    return max(values, default=0)


__all__ = [
    "BirkhoffReport",
    "Cocycle",
    "HALF",
    "OrbitStats",
    "birkhoff_sum",
    "bounded_sums_probe",
    "check_cancellation",
    "check_half_point_identity",
    "evaluate",
    "first_half_point_failure",
    "is_odd",
    "orbit_sum_sweep",
    "paired_levels_even",
    "skew_orbit",
]
