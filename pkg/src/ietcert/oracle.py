"""Independent recomputation of certificate values.

Nothing here reuses the certificate's Xi segments or its segment analysis.
Sample points of Xi are re-located from scratch, and Birkhoff sums are
recomputed either by direct orbit iteration (short horizons) or through the
towers of a fresh induction run, which walks T one tower passage at a time
from the point's own floor.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .cocycle import HALF, Cocycle, birkhoff_sum, evaluate
from .iet import Iet, ScaledIet, apply
from .rigidity import RigidityCertificate, certificate_run
from .towers import Towers

DIRECT_LIMIT = 200_000


@dataclass
class OracleReport:
    method: str
    points: int
    on_xi_ok: bool
    at_half_ok: bool
    difference_ok: bool
    half_sum: int
    xi_sums: list[int]
    agrees: bool
    mismatches: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.on_xi_ok and self.at_half_ok and self.difference_ok

    def serialize(self) -> dict:
        return {
            "method": self.method,
            "points": self.points,
            "on_xi": self.on_xi_ok,
            "at_half": self.at_half_ok,
            "difference_formula": self.difference_ok,
            "half_sum": self.half_sum,
            "xi_sums": sorted(set(self.xi_sums)),
            "agrees_with_certificate": self.agrees,
            "mismatches": self.mismatches[:5],
        }


def fresh_towers(T: Iet, depth: int) -> Towers:
    """Towers of a new run advanced to ``depth``, sharing no state with any hit."""
    run = certificate_run(T)
    run.run(depth)
    return Towers(run)


def check_certificate(
    T: Iet,
    cert: RigidityCertificate,
    c: Cocycle | None = None,
    points: int = 100,
    seed: int = 0,
) -> OracleReport:
    """Recompute S_h c on random points of Xi, at 1/2, and the difference formula.

    ``on_xi_ok`` and ``at_half_ok`` compare with the target values -1 and 0;
    ``agrees`` compares the recomputed sums with whatever the certificate
    reports, which is meaningful for failed certificates too.  For x on floor i of Xi (x = T^{-i} of a point of B_k, 0 <= i < q_k) the
    difference S_h c(x) - S_h c(1/2) must equal c(T^i x).
    """
    c = c or Cocycle.half_jump()
    h = cert.h_k
    expected = cert.birkhoff_on_Xi
    rng = random.Random(seed)
    xs = cert.sample_points(points, rng)
    mismatches = []
    direct = h <= DIRECT_LIMIT
    if direct:
        def S(x: Fraction) -> int:
            return birkhoff_sum(T, c, x, h).sum
    else:
        tw = fresh_towers(T, cert.hit.n_k)
        scale = tw.run.scale

        def S(x: Fraction) -> int:
            X = x * scale
            if X.denominator != 1:
                raise ValueError("sample point off the run lattice")
            return tw.birkhoff(int(X), h)

    half_sum = S(HALF)
    at_half_ok = half_sum == cert.birkhoff_at_half == 0
    on_xi_ok = True
    diff_ok = True
    sums = []
    lo_B, hi_B = cert.B_k
    for x in xs:
        s = S(x)
        sums.append(s)
        if s != expected or expected != -1:
            on_xi_ok = False
            mismatches.append({"x": str(x), "sum": s})
        # find the floor i with T^i x in B_k
        i = _floor_index(T, cert, x, lo_B, hi_B, tw if not direct else None)
        if i is None or s - half_sum != evaluate(c, _image(T, cert, x, i, None if direct else tw)):
            diff_ok = False
            mismatches.append({"x": str(x), "floor": i})
    agrees = half_sum == cert.birkhoff_at_half and (expected is None or all(s == expected for s in sums))
    return OracleReport(
        "direct" if direct else "fresh-towers",
        len(xs),
        on_xi_ok,
        at_half_ok,
        diff_ok,
        half_sum,
        sums,
        agrees,
        mismatches,
    )


def _image(T: Iet, cert: RigidityCertificate, x: Fraction, i: int, tw: Towers | None) -> Fraction:
    if tw is None:
        return apply(T, x, i)
    scale = tw.run.scale
    b, j, z = tw.locate(int(x * scale))
    b2, z2, r2 = tw.advance(b, z, j, i)
    return Fraction(tw.floor_point(b2, z2, r2), scale)


def _floor_index(
    T: Iet, cert: RigidityCertificate, x: Fraction, lo: Fraction, hi: Fraction, tw: Towers | None
) -> int | None:
    """Smallest 0 <= i < q_k with T^i x in B_k."""
    q = cert.q_k
    if tw is None:
        S = ScaledIet.for_points(T, x, lo, hi)
        X, L, H = S.lift(x), S.lift(lo), S.lift(hi)
        for i in range(q):
            if L < X < H:
                return i
            X = S.forward(X)
        return None
    # B_k lies on floor ell of tower alpha: x is either below it in that
    # tower or on a top floor of the tower it belongs to
    scale = tw.run.scale
    a, ell = cert.hit.alpha - 1, cert.hit.ell_k
    b, j, z = tw.locate(int(x * scale))
    i = ell - j if b == a and j <= ell else tw.h[b] - j + ell
    if i >= q:
        return None
    b2, z2, r2 = tw.advance(b, z, j, i)
    y = Fraction(tw.floor_point(b2, z2, r2), scale)
    if lo < y < hi:
        return i
    return None


# first-return towers by direct iteration ---------------------------------------------
@dataclass(frozen=True)
class FirstReturn:
    x: Fraction
    time: int
    image: Fraction
    floors: tuple[Fraction, ...]


def first_return(T: Iet, x: Fraction, base_length: Fraction, limit: int = 10**6) -> FirstReturn:
    """Iterate T from x in [0, base_length) until the orbit re-enters it."""
    S = ScaledIet.for_points(T, x, base_length)
    X, B = S.lift(x), S.lift(base_length)
    if not 0 <= X < B:
        raise ValueError("x must lie in the base")
    floors = [X]
    Y = S.forward(X)
    while Y >= B:
        floors.append(Y)
        if len(floors) > limit:
            raise RuntimeError("no return within the limit")
        Y = S.forward(Y)
    return FirstReturn(x, len(floors), S.project(Y), tuple(S.project(v) for v in floors))


def base_grid(base_length: Fraction, per_unit: int) -> list[Fraction]:
    """Grid points k * base_length / per_unit plus midpoints, all in [0, base_length)."""
    pts = [base_length * Fraction(2 * k + 1, 2 * per_unit) for k in range(per_unit)]
    pts += [base_length * Fraction(k, per_unit) for k in range(per_unit)]
    return sorted(pts)


__all__ = [
    "DIRECT_LIMIT",
    "FirstReturn",
    "OracleReport",
    "base_grid",
    "check_certificate",
    "first_return",
    "fresh_towers",
]
