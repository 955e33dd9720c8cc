"""Rauzy-Veech induction with Rohlin tower bookkeeping.

Convention: the two candidates are the last symbols of the top and bottom rows.
On a Top step the top candidate wins and the loser is reinserted in the bottom
row right after the winner; on a Bottom step the roles of the rows swap.  The
winner's length drops by the loser's length and the loser's tower is stacked
on the winner's: ``h[loser] += h[winner]``.

Heights transform as ``h_n = E_n h_{n-1}`` with ``E_n = I + e_loser e_winner^T``,
so the Rauzy matrix of a path is ``B = E_n ... E_1`` and ``h_n = B (1, ..., 1)``
when the path starts at depth 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .errors import NotPositive, OutOfDomain, TieNotDefined
from .iet import Iet, Permutation, to_rational

TOP = "T"
BOTTOM = "B"


@dataclass(frozen=True)
class RauzyStep:
    kind: str
    winner: int
    loser: int

    def __post_init__(self) -> None:
        if self.kind not in (TOP, BOTTOM):
            raise ValueError(f"unknown step kind {self.kind!r}")
        if self.winner == self.loser:
            raise ValueError("winner and loser must differ")


@dataclass(frozen=True)
class RauzyPath:
    d: int
    steps: tuple[RauzyStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def matrix(self) -> tuple[tuple[int, ...], ...]:
        return rauzy_matrix(self.d, self.steps)

    def serialize(self) -> str:
        return "".join(s.kind for s in self.steps)

    def __add__(self, other: RauzyPath) -> RauzyPath:
        if other.d != self.d:
            raise ValueError("paths over different alphabets")
        return RauzyPath(self.d, self.steps + other.steps)


def rauzy_matrix(d: int, steps: Iterable[RauzyStep]) -> tuple[tuple[int, ...], ...]:
    """Product E_n ... E_1 of the elementary height matrices."""
    B = [[int(i == j) for j in range(d)] for i in range(d)]
    for s in steps:
        # left-multiplying by E = I + e_l e_w^T adds row w to row l
        w, l = s.winner - 1, s.loser - 1
        B[l] = [x + y for x, y in zip(B[l], B[w])]
    return tuple(tuple(row) for row in B)


def path_from_kinds(perm: Permutation, kinds: str) -> RauzyPath:
    """Replay a string over {T, B} from ``perm``, reading off winners and losers."""
    top = list(perm.top_order)
    bottom = list(perm.bottom_order)
    steps = []
    for k in kinds:
        if k == TOP:
            w, l = top[-1], bottom[-1]
            bottom.pop()
            bottom.insert(bottom.index(w) + 1, l)
        elif k == BOTTOM:
            w, l = bottom[-1], top[-1]
            top.pop()
            top.insert(top.index(w) + 1, l)
        else:
            raise ValueError(f"unknown step kind {k!r}")
        steps.append(RauzyStep(k, w, l))
    return RauzyPath(perm.d, tuple(steps))


def is_positive(path: RauzyPath) -> bool:
    if not path.steps:
        return False
    return all(v >= 1 for row in path.matrix for v in row)


def height_ratio_bound(path: RauzyPath) -> Fraction:
    """rho = max row sum / min entry of the Rauzy matrix.

    If ``h_n = B h`` with ``h >= 1`` then ``h_n[a] <= rowsum_a * max(h)`` and
    ``h_n[b] >= min_c B[b][c] * sum(h) > min_c B[b][c] * max(h)``, so
    ``max h_n / min h_n < rho``.
    """
    if not is_positive(path):
        raise NotPositive("height ratio bound needs a positive path")
    return _rho(path.matrix)


def _rho(B: Sequence[Sequence[int]]) -> Fraction:
    return Fraction(max(sum(row) for row in B), min(min(row) for row in B))


class RauzyRun:
    """Mutable induction engine on integer-scaled lengths.

    Lengths are stored as integers ``lam * scale``.  Every step is recorded so
    that towers at any depth can be unfolded later (see :mod:`ietcert.towers`).
    When a ``marker`` is given (the breakpoint of a one-jump cocycle with values
    ``v_left``, ``v_right`` and ``v_at``), its projection ``p_n(marker)`` and
    floor are tracked, together with the cocycle sum over each tower excluding
    the floor that contains the marker.
    """

    def __init__(
        self,
        T: Iet,
        marker: Fraction | None = None,
        values: tuple[int, int, int] = (1, -1, 0),
        extra_scale: int = 1,
    ):
        self.origin = T
        self.d = d = T.d
        scale = extra_scale
        for v in T.lengths:
            scale = lcm(scale, v.denominator)
        if marker is not None:
            marker = to_rational(marker)
            if not 0 <= marker < T.domain_length:
                raise OutOfDomain(f"marker {marker} outside the domain")
            scale = lcm(scale, marker.denominator)
        self.scale = scale
        self.lam = [int(v * scale) for v in T.lengths]
        self.total0 = sum(self.lam)
        self.total = self.total0
        self.top = [a - 1 for a in T.perm.top_order]
        self.bottom = [a - 1 for a in T.perm.bottom_order]
        self.h = [1] * d
        self.depth = 0
        self.tie = False
        # per-step records; index m - 1 describes the step from depth m - 1 to m
        self.kind: list[str] = []
        self.winner: list[int] = []
        self.loser: list[int] = []
        self.first: list[int] = []  # lower part of the new loser tower
        self.second: list[int] = []  # upper part
        self.first_height: list[int] = []
        self.offset: list[int] = []  # T_{m-1}(z) - z on the lower part's base
        self.cut: list[int] = []  # |lambda^m| (scaled)
        self.losses: list[list[int]] = [[] for _ in range(d)]
        self.loser_height: list[int] = []  # h[loser] after the step
        self.marker = marker
        self.values = values
        if marker is not None:
            self.mk_point = int(marker * scale)
            self.mk_floor = 0
            self.mk_symbol = self.symbol_at(self.mk_point)
            self.K = [0] * d
            lefts = self.top_lefts()
            for a in range(d):
                if a != self.mk_symbol:
                    self.K[a] = values[0] if lefts[a] < self.mk_point else values[1]
            self.K0 = list(self.K)
            # K values of the two symbols touched by each step, after the step
            self.K_loser: list[int] = []
            self.K_winner: list[int] = []
            self.touched: list[list[int]] = [[] for _ in range(d)]
            # marker data indexed by depth (entry 0 is the initial state)
            self.mk_symbol_at: list[int] = [self.mk_symbol]
            self.mk_point_at: list[int] = [self.mk_point]
            self.mk_floor_at: list[int] = [0]

    # geometry at the current depth -------------------------------------------------
    def top_lefts(self) -> list[int]:
        out = [0] * self.d
        acc = 0
        for a in self.top:
            out[a] = acc
            acc += self.lam[a]
        return out

    def bottom_lefts(self) -> list[int]:
        out = [0] * self.d
        acc = 0
        for a in self.bottom:
            out[a] = acc
            acc += self.lam[a]
        return out

    def offsets(self) -> list[int]:
        tl, bl = self.top_lefts(), self.bottom_lefts()
        return [b - a for a, b in zip(tl, bl)]

    def symbol_at(self, X: int) -> int:
        acc = 0
        for a in self.top:
            acc += self.lam[a]
            if X < acc:
                return a
        raise OutOfDomain(f"{X} outside [0, {self.total})")

    def permutation(self) -> Permutation:
        pi0 = [0] * self.d
        pi1 = [0] * self.d
        for p, a in enumerate(self.top):
            pi0[a] = p + 1
        for p, a in enumerate(self.bottom):
            pi1[a] = p + 1
        return Permutation(tuple(pi0), tuple(pi1))

    def is_symmetric(self) -> bool:
        d = self.d
        return all(self.bottom[d - 1 - k] == a for k, a in enumerate(self.top))

    def iet(self) -> Iet:
        s = self.scale
        return Iet(self.permutation(), tuple(Fraction(v, s) for v in self.lam))

    # induction -----------------------------------------------------------------------
    def can_step(self) -> bool:
        return self.lam[self.top[-1]] != self.lam[self.bottom[-1]]

    def step(self) -> RauzyStep:
        a0, a1 = self.top[-1], self.bottom[-1]
        la0, la1 = self.lam[a0], self.lam[a1]
        if la0 == la1:
            self.tie = True
            raise TieNotDefined(self.depth)
        if la0 > la1:
            kind, w, l = TOP, a0, a1
            # the removed piece is T(I_l); its base I_l is unchanged
            off = self.total - self.lam[l] - self.top_lefts()[l]
            first, second, hf = l, w, self.h[l]
        else:
            kind, w, l = BOTTOM, a1, a0
            # the removed piece is I_l; it is the image of the right end of I_w
            off = self.total - self.lam[w] - self.top_lefts()[w]
            first, second, hf = w, l, self.h[w]
        new_total = self.total - self.lam[l]
        if self.marker is not None:
            self._advance_marker(kind, w, l, first, second, hf, off, new_total)
        self.lam[w] -= self.lam[l]
        if kind == TOP:
            self.bottom.pop()
            self.bottom.insert(self.bottom.index(w) + 1, l)
        else:
            self.top.pop()
            self.top.insert(self.top.index(w) + 1, l)
        self.h[l] += self.h[w]
        self.total = new_total
        self.depth += 1
        self.kind.append(kind)
        self.winner.append(w)
        self.loser.append(l)
        self.first.append(first)
        self.second.append(second)
        self.first_height.append(hf)
        self.offset.append(off)
        self.cut.append(new_total)
        self.losses[l].append(self.depth)
        self.loser_height.append(self.h[l])
        if self.marker is not None:
            self.mk_symbol_at.append(self.mk_symbol)
            self.mk_point_at.append(self.mk_point)
            self.mk_floor_at.append(self.mk_floor)
            self.K_loser.append(self.K[l])
            self.K_winner.append(self.K[w])
            self.touched[w].append(self.depth)
            self.touched[l].append(self.depth)
        return RauzyStep(kind, w + 1, l + 1)

    def _advance_marker(self, kind, w, l, first, second, hf, off, new_total) -> None:
        old_symbol, old_point = self.mk_symbol, self.mk_point
        if old_point >= new_total:
            self.mk_point = old_point - off
            self.mk_floor += hf
            new_symbol = l
        elif kind == BOTTOM and old_symbol == w and old_point >= self.top_lefts()[w] + self.lam[w] - self.lam[l]:
            # the right end of I_w is relabelled l without changing floors
            new_symbol = l
        else:
            new_symbol = old_symbol
        v_left, v_right, _ = self.values
        K = self.K
        new_l = K[first] + K[second]
        if old_symbol in (first, second) and new_symbol != l:
            # the copy of the marker floor inside the new loser tower misses the marker
            rep = self.top_lefts()[l] if kind == TOP else self.top_lefts()[w] + self.lam[w] - self.lam[l]
            if old_symbol == second:
                rep += off
            new_l += v_left if rep < old_point else v_right
        if old_symbol == w and new_symbol == l:
            # the winner keeps its floors but no longer carries the marker
            rep = self.top_lefts()[w]
            K[w] += v_left if rep < old_point else v_right
        K[l] = new_l
        self.mk_symbol = new_symbol

    def run(self, n: int) -> int:
        """Advance up to n steps; stops quietly on a tie. Returns steps taken."""
        done = 0
        while done < n and self.can_step():
            self.step()
            done += 1
        if done < n and not self.can_step():
            self.tie = True
        return done

    def steps(self, start: int = 0, stop: int | None = None) -> tuple[RauzyStep, ...]:
        stop = self.depth if stop is None else stop
        return tuple(
            RauzyStep(self.kind[i], self.winner[i] + 1, self.loser[i] + 1) for i in range(start, stop)
        )

    def path(self, start: int = 0, stop: int | None = None) -> RauzyPath:
        return RauzyPath(self.d, self.steps(start, stop))

    # point location ------------------------------------------------------------------
    def locate(self, X: int, depth: int | None = None) -> tuple[int, int, int]:
        """(symbol, floor, base point) of the scaled point X in the depth towers.

        Walks forward through the recorded steps, O(depth).
        """
        depth = self.depth if depth is None else depth
        if not 0 <= X < self.total0:
            raise OutOfDomain(f"{X} outside the original domain")
        floor = 0
        cut, offset, fh = self.cut, self.offset, self.first_height
        for m in range(depth):
            if X >= cut[m]:
                X -= offset[m]
                floor += fh[m]
        if depth != self.depth:
            return self._symbol_at_depth(X, depth), floor, X
        return self.symbol_at(X), floor, X

    def _symbol_at_depth(self, X: int, depth: int) -> int:
        replay = RauzyRun(self.origin, extra_scale=self.scale)
        if replay.scale != self.scale:
            raise AssertionError("scale mismatch on replay")
        replay.run(depth)
        return replay.symbol_at(X)

    def suffix_matrix(self, length: int) -> list[list[int]]:
        """Rauzy matrix of the last ``length`` steps."""
        d = self.d
        B = [[int(i == j) for j in range(d)] for i in range(d)]
        for m in range(self.depth - length, self.depth):
            w, l = self.winner[m], self.loser[m]
            B[l] = [x + y for x, y in zip(B[l], B[w])]
        return B

    def shortest_positive_suffix(self, limit: int | None = None) -> int | None:
        """Length of the shortest positive suffix of the recorded path, if any.

        The suffix matrix is extended backwards: ``B <- B E_m`` adds column l
        to column w.
        """
        d = self.d
        B = [[int(i == j) for j in range(d)] for i in range(d)]
        zeros = d * d - d
        limit = self.depth if limit is None else min(limit, self.depth)
        for g in range(1, limit + 1):
            m = self.depth - g
            w, l = self.winner[m], self.loser[m]
            for row in B:
                if row[w] == 0 and row[l] != 0:
                    zeros -= 1
                row[w] += row[l]
            if zeros == 0:
                return g
        return None


@dataclass(frozen=True)
class RauzyState:
    """Immutable snapshot of the induction at depth n."""

    origin: Iet
    n: int
    iet_n: Iet
    heights: tuple[int, ...]
    path: RauzyPath
    domain_length: Fraction = field(default=Fraction(1))

    @property
    def base_left(self) -> Fraction:
        return Fraction(0)

    @property
    def base_length(self) -> Fraction:
        return self.iet_n.domain_length

    def serialize(self) -> dict:
        return {
            "depth": self.n,
            "lengths": [str(v) for v in self.iet_n.lengths],
            "heights": list(self.heights),
            "path": self.path.serialize(),
            "domain_length": str(self.domain_length),
        }


def initial_state(T: Iet) -> RauzyState:
    return RauzyState(T, 0, T, (1,) * T.d, RauzyPath(T.d), T.domain_length)


def _replay(state: RauzyState, marker: Fraction | None = None, extra_scale: int = 1) -> RauzyRun:
    run = RauzyRun(state.origin, marker=marker, extra_scale=extra_scale)
    for s in state.path.steps:
        got = run.step()
        if got != s:
            raise ValueError("state path does not match its origin")
    return run


def rauzy_step(state: RauzyState) -> RauzyState:
    T = state.iet_n
    a0, a1 = T.perm.top_order[-1], T.perm.bottom_order[-1]
    la0, la1 = T.length(a0), T.length(a1)
    if la0 == la1:
        raise TieNotDefined(state.n)
    top, bottom = list(T.perm.top_order), list(T.perm.bottom_order)
    lengths = list(T.lengths)
    if la0 > la1:
        kind, w, l = TOP, a0, a1
        bottom.pop()
        bottom.insert(bottom.index(w) + 1, l)
    else:
        kind, w, l = BOTTOM, a1, a0
        top.pop()
        top.insert(top.index(w) + 1, l)
    lengths[w - 1] -= lengths[l - 1]
    pi0 = [0] * T.d
    pi1 = [0] * T.d
    for p, a in enumerate(top, start=1):
        pi0[a - 1] = p
    for p, a in enumerate(bottom, start=1):
        pi1[a - 1] = p
    heights = list(state.heights)
    heights[l - 1] += heights[w - 1]
    step = RauzyStep(kind, w, l)
    return RauzyState(
        state.origin,
        state.n + 1,
        Iet(Permutation(tuple(pi0), tuple(pi1)), tuple(lengths)),
        tuple(heights),
        RauzyPath(T.d, state.path.steps + (step,)),
        state.domain_length,
    )


def rauzy_iterate(T: Iet, n: int) -> RauzyState:
    """n steps from depth 0; raises TieNotDefined(depth) if a tie comes first."""
    if n < 0:
        raise ValueError("n must be non-negative")
    run = RauzyRun(T)
    for _ in range(n):
        run.step()
    return snapshot(run)


def snapshot(run: RauzyRun) -> RauzyState:
    return RauzyState(
        run.origin, run.depth, run.iet(), tuple(run.h), run.path(), run.origin.domain_length
    )


def normalize(state: RauzyState) -> Iet:
    return state.iet_n.normalized()


def projection(state: RauzyState, x) -> tuple[Fraction, int]:
    """(p_n(x), l): the first backward iterate of x in I^n and its time."""
    x = to_rational(x)
    if not 0 <= x < state.domain_length:
        raise OutOfDomain(f"{x} outside [0, {state.domain_length})")
    run = _replay(state, extra_scale=x.denominator)
    _, floor, X = run.locate(int(x * run.scale))
    return Fraction(X, run.scale), floor


def tower_floor_of(state: RauzyState, x) -> tuple[int, int]:
    """(alpha, j) with x in T^j(I^n_alpha)."""
    x = to_rational(x)
    if not 0 <= x < state.domain_length:
        raise OutOfDomain(f"{x} outside [0, {state.domain_length})")
    run = _replay(state, extra_scale=x.denominator)
    symbol, floor, _ = run.locate(int(x * run.scale))
    return symbol + 1, floor


def conservation_holds(state: RauzyState) -> bool:
    return sum(h * v for h, v in zip(state.heights, state.iet_n.lengths)) == state.domain_length


__all__ = [
    "BOTTOM",
    "TOP",
    "RauzyPath",
    "RauzyRun",
    "RauzyState",
    "RauzyStep",
    "conservation_holds",
    "height_ratio_bound",
    "initial_state",
    "is_positive",
    "normalize",
    "path_from_kinds",
    "projection",
    "rauzy_iterate",
    "rauzy_matrix",
    "rauzy_step",
    "snapshot",
    "tower_floor_of",
]

