"""Exact interval exchange transformations.

Symbols are the integers ``1..d``.  A permutation is stored as the pair of
position maps ``(pi0, pi1)``: ``pi0[a - 1]`` is the position of symbol ``a`` in
the top row (before the exchange) and ``pi1[a - 1]`` its position in the bottom
row (after the exchange).  Intervals are half-open, ``I_a = [l_a, r_a)``.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Sequence

from .errors import NonPositiveLength, NotBijective, OutOfDomain, Reducible

RationalLike = Fraction | int | str


def to_rational(value: RationalLike) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are rejected: every number in the system is exact.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"exact rational expected, got {value!r}")
    return Fraction(value)


def format_rational(value: Fraction | int) -> str:
    """Lowest-terms ``"p/q"`` string, or ``"p"`` for integers."""
    return str(Fraction(value))


@dataclass(frozen=True)
class Permutation:
    pi0: tuple[int, ...]
    pi1: tuple[int, ...]

    def __post_init__(self) -> None:
        d = len(self.pi0)
        if d < 2 or len(self.pi1) != d:
            raise NotBijective("pi0 and pi1 must have the same length d >= 2")
        for row in (self.pi0, self.pi1):
            if sorted(row) != list(range(1, d + 1)):
                raise NotBijective(f"{row} is not a bijection onto 1..{d}")

    @classmethod
    def symmetric(cls, d: int) -> Permutation:
        return cls(tuple(range(1, d + 1)), tuple(range(d, 0, -1)))

    @classmethod
    def from_monodromy(cls, sigma: Sequence[int]) -> Permutation:
        """Canonical pair with pi0 = identity and pi1(k) = sigma[k - 1]."""
        return cls(tuple(range(1, len(sigma) + 1)), tuple(sigma))

    @classmethod
    def parse(cls, text: str) -> Permutation:
        top, bottom = text.split(";")
        return cls(tuple(int(t) for t in top.split(",")), tuple(int(t) for t in bottom.split(",")))

    def serialize(self) -> str:
        return ",".join(map(str, self.pi0)) + ";" + ",".join(map(str, self.pi1))

    @property
    def d(self) -> int:
        return len(self.pi0)

    @cached_property
    def top_order(self) -> tuple[int, ...]:
        """Symbols listed by top-row position."""
        order = [0] * self.d
        for a, p in enumerate(self.pi0, start=1):
            order[p - 1] = a
        return tuple(order)

    @cached_property
    def bottom_order(self) -> tuple[int, ...]:
        order = [0] * self.d
        for a, p in enumerate(self.pi1, start=1):
            order[p - 1] = a
        return tuple(order)

    @cached_property
    def monodromy(self) -> tuple[int, ...]:
        """The map k -> pi1(pi0^{-1}(k)) as a tuple indexed by k - 1."""
        return tuple(self.pi1[a - 1] for a in self.top_order)

    @cached_property
    def is_irreducible(self) -> bool:
        sigma = self.monodromy
        return all(max(sigma[:k]) != k for k in range(1, self.d))

    def inverse(self) -> Permutation:
        return Permutation(self.pi1, self.pi0)


def is_symmetric(perm: Permutation) -> bool:
    d = perm.d
    return all(s == d + 1 - k for k, s in enumerate(perm.monodromy, start=1))


@dataclass(frozen=True)
class Iet:
    perm: Permutation
    lengths: tuple[Fraction, ...]

    @property
    def d(self) -> int:
        return self.perm.d

    @cached_property
    def domain_length(self) -> Fraction:
        return sum(self.lengths, Fraction(0))

    def length(self, symbol: int) -> Fraction:
        return self.lengths[symbol - 1]

    @cached_property
    def left_endpoints(self) -> tuple[Fraction, ...]:
        """Left endpoint l_a of I_a, indexed by symbol - 1."""
        out = [Fraction(0)] * self.d
        acc = Fraction(0)
        for a in self.perm.top_order:
            out[a - 1] = acc
            acc += self.lengths[a - 1]
        return tuple(out)

    @cached_property
    def image_left_endpoints(self) -> tuple[Fraction, ...]:
        """Left endpoint of T(I_a), indexed by symbol - 1."""
        out = [Fraction(0)] * self.d
        acc = Fraction(0)
        for a in self.perm.bottom_order:
            out[a - 1] = acc
            acc += self.lengths[a - 1]
        return tuple(out)

    @cached_property
    def offsets(self) -> tuple[Fraction, ...]:
        """Translation T(x) - x on I_a, indexed by symbol - 1."""
        return tuple(b - a for a, b in zip(self.left_endpoints, self.image_left_endpoints))

    def center(self, symbol: int) -> Fraction:
        return self.left_endpoints[symbol - 1] + self.lengths[symbol - 1] / 2

    def symbol_at(self, x: Fraction) -> int:
        """Symbol of the exchanged interval containing x."""
        if not 0 <= x < self.domain_length:
            raise OutOfDomain(f"{x} outside [0, {self.domain_length})")
        acc = Fraction(0)
        for a in self.perm.top_order:
            acc += self.lengths[a - 1]
            if x < acc:
                return a
        raise AssertionError("unreachable")

    def image_symbol_at(self, y: Fraction) -> int:
        """Symbol a with y in T(I_a)."""
        if not 0 <= y < self.domain_length:
            raise OutOfDomain(f"{y} outside [0, {self.domain_length})")
        acc = Fraction(0)
        for a in self.perm.bottom_order:
            acc += self.lengths[a - 1]
            if y < acc:
                return a
        raise AssertionError("unreachable")

    def discontinuities(self) -> tuple[Fraction, ...]:
        """Interior left endpoints of the exchanged intervals."""
        return tuple(sorted(self.left_endpoints[a - 1] for a in self.perm.top_order[1:]))

    def normalized(self) -> Iet:
        total = self.domain_length
        return Iet(self.perm, tuple(v / total for v in self.lengths))

    def canonical(self) -> Iet:
        """Relabel symbols by top position so that pi0 is the identity."""
        order = self.perm.top_order
        rename = {old: new for new, old in enumerate(order, start=1)}
        pi1 = [0] * self.d
        for old, new in rename.items():
            pi1[new - 1] = self.perm.pi1[old - 1]
        return Iet(Permutation(tuple(range(1, self.d + 1)), tuple(pi1)),
                   tuple(self.lengths[a - 1] for a in order))

    def serialize(self) -> dict:
        return {
            "perm": self.perm.serialize(),
            "lengths": [format_rational(v) for v in self.lengths],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Iet:
        return new_iet(Permutation.parse(data["perm"]), [to_rational(v) for v in data["lengths"]])


def new_iet(perm: Permutation, lengths: Iterable[RationalLike], strict: bool = True) -> Iet:
    """Validated IET; ``strict`` rejects reducible permutations."""
    values = tuple(to_rational(v) for v in lengths)
    if len(values) != perm.d:
        raise ValueError(f"expected {perm.d} lengths, got {len(values)}")
    for v in values:
        if v <= 0:
            raise NonPositiveLength(f"length {v} is not positive")
    if strict and not perm.is_irreducible:
        raise Reducible(f"permutation {perm.serialize()} is reducible")
    return Iet(perm, values)


def inverse_iet(T: Iet, canonical: bool = True) -> Iet:
    """The inverse map as an IET: rows swapped, lengths kept by label."""
    inv = Iet(T.perm.inverse(), T.lengths)
    return inv.canonical() if canonical else inv


class ScaledIet:
    """Integer model of ``T`` on the lattice ``(1/scale) Z``.

    Orbits of rational points with denominator dividing ``scale`` stay on the
    lattice, so long orbits run on plain integers.
    """

    def __init__(self, T: Iet, scale: int):
        self.T = T
        self.scale = scale
        s = Fraction(scale)
        top = T.perm.top_order
        bottom = T.perm.bottom_order
        self.total = _as_int(T.domain_length * s)
        self._top_lefts = [_as_int(T.left_endpoints[a - 1] * s) for a in top]
        self._top_offsets = [_as_int(T.offsets[a - 1] * s) for a in top]
        self._bottom_lefts = [_as_int(T.image_left_endpoints[a - 1] * s) for a in bottom]
        self._bottom_offsets = [_as_int(T.offsets[a - 1] * s) for a in bottom]

    @classmethod
    def for_points(cls, T: Iet, *points: Fraction) -> ScaledIet:
        scale = 1
        for v in T.lengths:
            scale = lcm(scale, v.denominator)
        for p in points:
            scale = lcm(scale, Fraction(p).denominator)
        return cls(T, scale)

    def lift(self, x: Fraction) -> int:
        return _as_int(Fraction(x) * self.scale)

    def project(self, X: int) -> Fraction:
        return Fraction(X, self.scale)

    def forward(self, X: int) -> int:
        return X + self._top_offsets[bisect_right(self._top_lefts, X) - 1]

    def backward(self, X: int) -> int:
        return X - self._bottom_offsets[bisect_right(self._bottom_lefts, X) - 1]

    def power(self, X: int, n: int) -> int:
        if n >= 0:
            for _ in range(n):
                X = self.forward(X)
        else:
            for _ in range(-n):
                X = self.backward(X)
        return X


def _as_int(q: Fraction) -> int:
    if q.denominator != 1:
        raise ValueError(f"{q} is not on the integer lattice")
    return q.numerator


def apply(T: Iet, x: RationalLike, n: int = 1) -> Fraction:
    """T^n(x), exact; negative n iterates the inverse."""
    x = to_rational(x)
    if not 0 <= x < T.domain_length:
        raise OutOfDomain(f"{x} outside [0, {T.domain_length})")
    S = ScaledIet.for_points(T, x)
    return S.project(S.power(S.lift(x), n))


def involution_check(T: Iet, x: RationalLike, n_max: int) -> bool:
    """Check T^{-n}(1 - x) == 1 - T^n(x) for 1 <= n <= n_max.

    Raises OutOfDomain when the orbit of x reaches 0, where the reflection
    x -> 1 - x leaves the half-open domain.
    """
    if T.domain_length != 1:
        raise ValueError("involution_check expects a normalized IET")
    x = to_rational(x)
    if not 0 < x < 1:
        raise OutOfDomain(f"{x} must lie in (0, 1) so that 1 - x is in the domain")
    S = ScaledIet.for_points(T, x)
    one = S.scale
    fwd = S.lift(x)
    bwd = one - fwd
    for _ in range(n_max):
        fwd = S.forward(fwd)
        bwd = S.backward(bwd)
        if fwd == 0:
            raise OutOfDomain("forward orbit reached the endpoint 0")
        if bwd != one - fwd:
            return False
    return True


@dataclass(frozen=True)
class SkewPoint:
    x: Fraction
    level: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.x < 1:
            raise OutOfDomain(f"{self.x} outside [0, 1)")
