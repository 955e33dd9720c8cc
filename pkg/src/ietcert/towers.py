"""Rohlin towers of a recorded Rauzy-Veech run, unfolded on demand.

Heights grow exponentially with the depth, so nothing here ever walks a tower
floor by floor.  Every step of a :class:`~ietcert.rauzy.RauzyRun` records how
the new loser tower is glued from two towers of the previous depth: floor ``j``
over a base point ``z`` is floor ``j`` of ``first`` over ``z`` when
``j < first_height``, and floor ``j - first_height`` of ``second`` over
``z + offset`` otherwise.  Floor coordinates and cocycle sums over floor ranges
follow by recursing through those gluings, at cost linear in the depth.

All coordinates are integers on the run's lattice (``x * run.scale``).
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .errors import OutOfDomain
from .rauzy import RauzyRun


@dataclass(frozen=True)
class Piece:
    """An open base interval (lo, hi) of tower ``symbol`` at floor ``floor``."""

    symbol: int
    lo: int
    hi: int
    floor: int = 0

    @property
    def length(self) -> int:
        return self.hi - self.lo

    def point(self) -> int:
        """An interior lattice point."""
        if self.hi - self.lo < 2:
            raise ValueError("piece too short for an interior lattice point")
        return self.lo + (self.hi - self.lo) // 2


class Towers:
    """Tower geometry and cocycle sums for the current depth of ``run``.

    The run must track a marker (the single breakpoint of the cocycle).
    Symbols are 0-based here, as in :class:`RauzyRun`.
    """

    def __init__(self, run: RauzyRun):
        if run.marker is None:
            raise ValueError("tower sums need a run that tracks the cocycle breakpoint")
        self.run = run
        self.depth = run.depth
        self.d = run.d
        self.lam = list(run.lam)
        self.h = list(run.h)
        self.total = run.total
        self.top = list(run.top)
        self.bottom = list(run.bottom)
        self.lefts = run.top_lefts()
        self.image_lefts = run.bottom_lefts()
        self.offsets = [b - a for a, b in zip(self.lefts, self.image_lefts)]
        self._sorted_lefts = sorted((self.lefts[a], a) for a in range(self.d))
        self._sorted_image_lefts = sorted((self.image_lefts[a], a) for a in range(self.d))
        self.v_left, self.v_right, self.v_at = run.values
        self.marker0 = run.mk_point_at[0]
        # where the breakpoint sits at this depth: tower, floor and base point
        self.mk_symbol = run.mk_symbol
        self.mk_floor = run.mk_floor
        self.mk_point = run.mk_point

    # the induced map at the current depth ------------------------------------------
    def symbol_at(self, X: int) -> int:
        if not 0 <= X < self.total:
            raise OutOfDomain(f"{X} outside the base [0, {self.total})")
        i = bisect_right(self._sorted_lefts, (X, self.d)) - 1
        return self._sorted_lefts[i][1]

    def image_symbol_at(self, Y: int) -> int:
        if not 0 <= Y < self.total:
            raise OutOfDomain(f"{Y} outside the base [0, {self.total})")
        i = bisect_right(self._sorted_image_lefts, (Y, self.d)) - 1
        return self._sorted_image_lefts[i][1]

    def induced(self, X: int) -> int:
        return X + self.offsets[self.symbol_at(X)]

    def induced_inverse(self, Y: int) -> int:
        return Y - self.offsets[self.image_symbol_at(Y)]

    def split(self, lo: int, hi: int) -> list[Piece]:
        """Split the open interval (lo, hi) of the base along the intervals I_b."""
        out = []
        while lo < hi:
            b = self.symbol_at(lo)
            end = min(hi, self.lefts[b] + self.lam[b])
            out.append(Piece(b, lo, end))
            lo = end
        return out

    def split_image(self, lo: int, hi: int) -> list[Piece]:
        """Split (lo, hi) along the image intervals T_n(I_b); pieces carry b."""
        out = []
        while lo < hi:
            b = self.image_symbol_at(lo)
            end = min(hi, self.image_lefts[b] + self.lam[b])
            out.append(Piece(b, lo, end))
            lo = end
        return out

    # history lookups -----------------------------------------------------------------
    def _last_loss(self, b: int, m: int) -> int:
        """Depth of the last step <= m where b lost, or 0 if none."""
        lst = self.run.losses[b]
        i = bisect_right(lst, m)
        return lst[i - 1] if i else 0

    def height(self, b: int, m: int | None = None) -> int:
        m = self.depth if m is None else m
        s = self._last_loss(b, m)
        return self.run.loser_height[s - 1] if s else 1

    def _K(self, b: int, m: int) -> int:
        run = self.run
        lst = run.touched[b]
        i = bisect_right(lst, m)
        if not i:
            return run.K0[b]
        s = lst[i - 1]
        return run.K_loser[s - 1] if run.loser[s - 1] == b else run.K_winner[s - 1]

    def _marker_value(self, b: int, m: int, z: int) -> int:
        run = self.run
        if run.mk_symbol_at[m] != b:
            return 0
        mk = run.mk_point_at[m]
        if z < mk:
            return self.v_left
        if z > mk:
            return self.v_right
        return self.v_at

    def _value(self, X: int) -> int:
        if X < self.marker0:
            return self.v_left
        if X > self.marker0:
            return self.v_right
        return self.v_at

    def full_sum(self, b: int, z: int, m: int | None = None) -> int:
        """Cocycle sum over all floors of tower b above base point z."""
        m = self.depth if m is None else m
        return self._K(b, m) + self._marker_value(b, m, z)

    # unfolding -----------------------------------------------------------------------
    def floor_point(self, b: int, z: int, j: int, m: int | None = None) -> int:
        """Coordinate of floor j above base point z in tower b at depth m."""
        run = self.run
        m = self.depth if m is None else m
        if not 0 <= j < self.height(b, m):
            raise ValueError(f"floor {j} outside tower {b + 1}")
        while True:
            s = self._last_loss(b, m)
            if not s:
                return z
            hf = run.first_height[s - 1]
            if j < hf:
                b = run.first[s - 1]
            else:
                z += run.offset[s - 1]
                j -= hf
                b = run.second[s - 1]
            m = s - 1

    def range_sum(self, b: int, z: int, a: int, c: int, m: int | None = None) -> int:
        """Cocycle sum over floors a, ..., c - 1 of tower b above base point z."""
        run = self.run
        m = self.depth if m is None else m
        if a < 0 or c > self.height(b, m):
            raise ValueError("floor range outside the tower")
        total = 0
        stack = [(b, z, a, c, m)]
        while stack:
            b, z, a, c, m = stack.pop()
            if a >= c:
                continue
            s = self._last_loss(b, m)
            if not s:
                total += self._value(z)
                continue
            h = run.loser_height[s - 1]
            if a == 0 and c == h:
                total += self.full_sum(b, z, s)
                continue
            hf = run.first_height[s - 1]
            if a < hf:
                stack.append((run.first[s - 1], z, a, min(c, hf), s - 1))
            if c > hf:
                stack.append((run.second[s - 1], z + run.offset[s - 1], max(a, hf) - hf, c - hf, s - 1))
        return total

    # points ------------------------------------------------------------------------------
    def locate(self, X: int) -> tuple[int, int, int]:
        """(symbol, floor, base point) of the coordinate X at this depth."""
        run = self.run
        if not 0 <= X < run.total0:
            raise OutOfDomain(f"{X} outside the original domain")
        floor = 0
        cut, offset, fh = run.cut, run.offset, run.first_height
        for m in range(self.depth):
            if X >= cut[m]:
                X -= offset[m]
                floor += fh[m]
        return self.symbol_at(X), floor, X

    def advance(self, b: int, z: int, r: int, t: int) -> tuple[int, int, int]:
        """Position of T^t applied to floor r above z in tower b (t may be negative)."""
        if t >= 0:
            t += r
            while t >= self.h[b]:
                t -= self.h[b]
                z = z + self.offsets[b]
                b = self.symbol_at(z)
            return b, z, t
        t = -t
        while t > r:
            t -= r + 1
            b = self.image_symbol_at(z)
            z = z - self.offsets[b]
            r = self.h[b] - 1
        return b, z, r - t

    def forward_sum(self, b: int, z: int, r: int, t: int) -> int:
        """S_t c at floor r above z in tower b, for t >= 0."""
        total = 0
        while r + t > self.h[b]:
            total += self.range_sum(b, z, r, self.h[b])
            t -= self.h[b] - r
            r = 0
            z = z + self.offsets[b]
            b = self.symbol_at(z)
        return total + self.range_sum(b, z, r, r + t)

    def birkhoff(self, X: int, n: int) -> int:
        """S_n c(x) for the coordinate X, any sign of n."""
        b, j, z = self.locate(X)
        if n >= 0:
            return self.forward_sum(b, z, j, n)
        b2, z2, r2 = self.advance(b, z, j, n)
        return -self.forward_sum(b2, z2, r2, -n)

    # intervals -----------------------------------------------------------------------
    def push(self, piece: Piece, t: int) -> list[tuple[Piece, Piece, int]]:
        """Push floor ``piece.floor`` over (lo, hi) forward by t >= 0 steps.

        Returns triples (source sub-piece, image piece, S_t value) such that T^t
        is a translation and S_t c is constant on each source sub-piece.  Cuts
        happen at discontinuities of the induced map and where the breakpoint
        of the cocycle passes through a visited floor range.
        """
        out = []
        # each work item: (source piece, current piece, remaining time, sum so far)
        work = [(piece, piece, t, 0)]
        mk_b, mk_floor, mk_z = self.mk_symbol, self.mk_floor, self.mk_point
        while work:
            src, cur, rem, acc = work.pop()
            b, r = cur.symbol, cur.floor
            end = min(r + rem, self.h[b])
            # floors r .. end - 1 are visited in this tower
            if b == mk_b and r <= mk_floor < end and cur.lo < mk_z < cur.hi:
                cut = mk_z - cur.lo
                left = (Piece(src.symbol, src.lo, src.lo + cut, src.floor), Piece(b, cur.lo, mk_z, r))
                right = (Piece(src.symbol, src.lo + cut, src.hi, src.floor), Piece(b, mk_z, cur.hi, r))
                work.append((*left, rem, acc))
                work.append((*right, rem, acc))
                continue
            z = cur.point()
            acc += self.range_sum(b, z, r, end)
            rem -= end - r
            if end < self.h[b]:
                out.append((src, Piece(b, cur.lo, cur.hi, end), acc))
                continue
            # past the top floor: back to the base through the induced map
            lo, hi = cur.lo + self.offsets[b], cur.hi + self.offsets[b]
            for p in self.split(lo, hi):
                shift = p.lo - lo
                sub = Piece(src.symbol, src.lo + shift, src.lo + shift + p.length, src.floor)
                if rem == 0:
                    out.append((sub, p, acc))
                else:
                    work.append((sub, p, rem, acc))
        out.sort(key=lambda item: item[0].lo)
        return out


__all__ = ["Piece", "Towers"]
