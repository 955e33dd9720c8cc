"""Renormalization hits, the claim inequalities and rigidity certificates.

A hit is a depth n of the Rauzy-Veech induction of a symmetric IET where the
induced map is again symmetric, its normalized lengths lie in a small window
around a reference vector, and the last steps form a positive path.  At a hit
the point 1/2 sits on floor ``ell`` of the tower over ``I^n_alpha``; a
certificate then exhibits a tower of sets Xi on which the Birkhoff sum of f at
time ``h_k`` is identically -1.

Heights at a hit are far too large to enumerate floors, so every set is kept as
a few segments (tower, open base interval, range of floors) and every map or sum
is evaluated through :class:`~ietcert.towers.Towers`.  Coordinates inside this
module are integers on the run's lattice; they are converted to Fractions only
for reporting.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .cocycle import HALF, Cocycle
from .errors import ClaimViolation, DiscontinuityInXi, TieNotDefined
from .iet import Iet, format_rational, to_rational
from .rauzy import RauzyRun, RauzyState, _rho, snapshot
from .towers import Piece, Towers

ODD = "odd"
EVEN = "even"

CENTER_OF_INTERVAL = "CenterOfInterval"
MIDDLE_OF_DOMAIN = "MiddleOfDomain"
OTHER = "Other"

# certificates need c +- lambda/100 and friends on the lattice, with room for
# an interior point in every piece
LATTICE_REFINEMENT = 200

# segments that do not return to their own tower are checked floor by floor
PER_FLOOR_LIMIT = 64


@dataclass(frozen=True)
class WindowA:
    """Open box of normalized lengths, indexed by top-row position."""

    d: int
    parity: str
    lows: tuple[Fraction, ...]
    highs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.lows) != self.d or len(self.highs) != self.d:
            raise ValueError("one bound per position")
        if any(lo >= hi for lo, hi in zip(self.lows, self.highs)):
            raise ValueError("empty coordinate interval")
        # a probability vector fits strictly inside iff the sums straddle 1
        if not sum(self.lows) < 1 < sum(self.highs):
            raise ValueError("window contains no normalized length vector")

    @classmethod
    def for_dimension(cls, d: int) -> WindowA:
        if d < 2:
            raise ValueError("d must be at least 2")
        w = Fraction(1, 100 * d**3)
        if d % 2:
            base = Fraction(1, d)
            return cls(d, ODD, (base - w,) * d, (base + w,) * d)
        base = Fraction(1, d - 1)
        scales = [Fraction(3, 7), Fraction(4, 7)] + [Fraction(1)] * (d - 2)
        return cls(d, EVEN, tuple(s * (base - w) for s in scales), tuple(s * (base + w) for s in scales))

    @classmethod
    def custom(cls, lows: Sequence, highs: Sequence) -> WindowA:
        lows = tuple(to_rational(v) for v in lows)
        highs = tuple(to_rational(v) for v in highs)
        d = len(lows)
        return cls(d, ODD if d % 2 else EVEN, lows, highs)

    @property
    def center(self) -> tuple[Fraction, ...]:
        """The reference vector the window is built around, normalized."""
        mids = [(lo + hi) / 2 for lo, hi in zip(self.lows, self.highs)]
        total = sum(mids)
        return tuple(m / total for m in mids)

    def contains_positions(self, by_position: Sequence[Fraction]) -> bool:
        total = sum(by_position)
        return all(lo < v / total < hi for v, lo, hi in zip(by_position, self.lows, self.highs))

    def serialize(self) -> dict:
        return {
            "d": self.d,
            "parity": self.parity,
            "lows": [format_rational(v) for v in self.lows],
            "highs": [format_rational(v) for v in self.highs],
        }


def window_membership(A: WindowA, lengths: Sequence, top_order: Sequence[int] | None = None) -> bool:
    """Strict membership of the normalized lengths.

    ``lengths`` is indexed by symbol; ``top_order`` lists symbols (1-based) by
    top-row position and defaults to the identity.
    """
    values = [to_rational(v) for v in lengths]
    if len(values) != A.d:
        raise ValueError("dimension mismatch")
    order = top_order or range(1, A.d + 1)
    return A.contains_positions([values[a - 1] for a in order])


class _ScaledWindow:
    """Integer cross-multiplied bounds for the scan's hot loop."""

    def __init__(self, A: WindowA):
        self.lows = [(v.numerator, v.denominator) for v in A.lows]
        self.highs = [(v.numerator, v.denominator) for v in A.highs]

    def contains(self, lam: Sequence[int], top: Sequence[int], total: int) -> bool:
        for pos, a in enumerate(top):
            x = lam[a]
            p, q = self.lows[pos]
            if x * q <= p * total:
                return False
            p, q = self.highs[pos]
            if x * q >= p * total:
                return False
        return True


@dataclass
class RenormalizationHit:
    n_k: int
    state: RauzyState
    alpha: int  # 1-based symbol
    ell_k: int
    half_projection_kind: str
    gamma_len: int
    rho_gamma: Fraction
    towers: Towers = field(repr=False)

    @property
    def d(self) -> int:
        return self.state.iet_n.d

    @property
    def top_order(self) -> tuple[int, ...]:
        return self.state.iet_n.perm.top_order

    def summary(self) -> dict:
        return {
            "depth": self.n_k,
            "alpha": self.alpha,
            "ell_k": self.ell_k,
            "half_projection_kind": self.half_projection_kind,
            "gamma_len": self.gamma_len,
            "rho_gamma": format_rational(self.rho_gamma),
            "heights": list(self.state.heights),
            "lengths": [format_rational(v) for v in self.state.iet_n.lengths],
        }


@dataclass
class HitScan:
    hits: list[RenormalizationHit]
    status: str  # "ok", "NoHits", "TieNotDefined"
    depth_reached: int
    tie_depth: int | None = None
    symmetric_depths: int = 0
    window_depths: int = 0

    def summary(self) -> dict:
        return {
            "status": self.status,
            "hits": len(self.hits),
            "depth_reached": self.depth_reached,
            "tie_depth": self.tie_depth,
            "symmetric_depths": self.symmetric_depths,
            "window_depths": self.window_depths,
        }


def certificate_run(T: Iet) -> RauzyRun:
    """A run tracking 1/2 on a lattice fine enough for every claim point."""
    base = 2
    for v in T.lengths:
        base = lcm(base, v.denominator)
    return RauzyRun(T, marker=HALF, extra_scale=LATTICE_REFINEMENT * base)


def classify_projection(run: RauzyRun) -> str:
    p, a = run.mk_point, run.mk_symbol
    left = run.top_lefts()[a]
    if 2 * p == 2 * left + run.lam[a]:
        return CENTER_OF_INTERVAL
    if 2 * p == run.total:
        return MIDDLE_OF_DOMAIN
    return OTHER


def find_renormalization_hits(
    T: Iet,
    A: WindowA,
    gamma_len: int | None = None,
    max_depth: int = 10_000,
    max_hits: int = 3,
    run: RauzyRun | None = None,
) -> HitScan:
    """Scan depths 1..max_depth for hits.

    ``gamma_len=None`` uses the shortest positive suffix at each candidate
    depth.  A tie ends the scan and is reported in the status, as is the
    absence of any hit.
    """
    if T.domain_length != 1:
        raise ValueError("expects a normalized IET")
    run = run or certificate_run(T)
    win = _ScaledWindow(A)
    hits: list[RenormalizationHit] = []
    sym = in_window = 0
    status, tie_depth = "ok", None
    while run.depth < max_depth and len(hits) < max_hits:
        try:
            run.step()
        except TieNotDefined as exc:
            status, tie_depth = "TieNotDefined", exc.depth
            break
        if not run.is_symmetric():
            continue
        sym += 1
        if not win.contains(run.lam, run.top, run.total):
            continue
        in_window += 1
        if gamma_len is None:
            g = run.shortest_positive_suffix()
            if g is None:
                continue
        else:
            if gamma_len > run.depth:
                continue
            B = run.suffix_matrix(gamma_len)
            if any(v == 0 for row in B for v in row):
                continue
            g = gamma_len
        hits.append(
            RenormalizationHit(
                n_k=run.depth,
                state=snapshot(run),
                alpha=run.mk_symbol + 1,
                ell_k=run.mk_floor,
                half_projection_kind=classify_projection(run),
                gamma_len=g,
                rho_gamma=_rho(run.suffix_matrix(g)),
                towers=Towers(run),
            )
        )
    if status == "ok" and not hits:
        status = "NoHits"
    return HitScan(hits, status, run.depth, tie_depth, sym, in_window)


# pairing and h_k -------------------------------------------------------------------------
def is_special(hit: RenormalizationHit) -> bool:
    """Even d with alpha in the first two or the last top position."""
    d = hit.d
    if d % 2:
        return False
    pos = hit.state.iet_n.perm.pi0[hit.alpha - 1]
    return pos in (1, 2, d)


def partner(hit: RenormalizationHit) -> int:
    """The symbol paired with alpha (1-based); only for the two-tower cases."""
    perm = hit.state.iet_n.perm
    d = hit.d
    pos = perm.pi0[hit.alpha - 1]
    if d % 2:
        return perm.bottom_order[pos - 1]
    return perm.top_order[d + 2 - pos - 1]


def compute_h_k(hit: RenormalizationHit) -> int:
    h = hit.state.heights
    if is_special(hit):
        top = hit.top_order
        d = hit.d
        return h[top[0] - 1] + h[top[1] - 1] + 2 * h[top[d - 1] - 1]
    return h[hit.alpha - 1] + h[partner(hit) - 1]


# claims ----------------------------------------------------------------------------------
@dataclass
class ClaimResult:
    passed: bool
    witness: dict

    def serialize(self) -> dict:
        return {"pass": self.passed, "witness": self.witness}


@dataclass
class ClaimReport:
    claims: dict[str, ClaimResult]

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.claims.values())

    def flags(self) -> dict[str, bool]:
        return {k: v.passed for k, v in self.claims.items()}

    def failed(self) -> list[str]:
        return [k for k, v in self.claims.items() if not v.passed]


ITINERARIES = {
    1: ("1", "d", "2", "d", "1", "d", "2", "d", "1"),
    2: ("2", "d", "1", "d", "2", "d", "1", "d", "2"),
    "d": ("d", "1", "d", "2", "d", "2", "d", "1", "d"),
}


class _Geometry:
    """Scaled lengths, centers and maps at the hit depth."""

    def __init__(self, hit: RenormalizationHit):
        tw = hit.towers
        self.tw = tw
        self.scale = tw.run.scale
        self.a = hit.alpha - 1
        self.lam = tw.lam
        self.lam_a = tw.lam[self.a]
        self.left_a = tw.lefts[self.a]
        # twice the center keeps everything integral
        self.c2 = 2 * self.left_a + self.lam_a
        self.c = self.c2 // 2
        if self.c2 % 2:
            raise AssertionError("lattice too coarse for the center")
        self.p = tw.mk_point
        self.ell = tw.mk_floor
        self.half = tw.marker0

    def ball(self, num: int, den: int) -> tuple[int, int]:
        """(c - num/den * lambda, c + num/den * lambda)."""
        r = self.lam_a * num
        if r % den:
            raise AssertionError("lattice too coarse for the claim interval")
        r //= den
        return self.c - r, self.c + r

    def frac(self, X: int) -> Fraction:
        return Fraction(X, self.scale)

    def inside(self, lo: int, hi: int, b: int) -> bool:
        left = self.tw.lefts[b]
        return left <= lo and hi <= left + self.lam[b]

    def forward_interval(self, lo: int, hi: int) -> tuple[int, int, int] | None:
        """T_n on (lo, hi) if it lies in one interval: (symbol, lo', hi')."""
        pieces = self.tw.split(lo, hi)
        if len(pieces) != 1:
            return None
        b = pieces[0].symbol
        return b, lo + self.tw.offsets[b], hi + self.tw.offsets[b]

    def backward_interval(self, lo: int, hi: int) -> tuple[int, int, int] | None:
        """T_n^{-1} on (lo, hi) if it lies in one image interval."""
        pieces = self.tw.split_image(lo, hi)
        if len(pieces) != 1:
            return None
        b = pieces[0].symbol
        return b, lo - self.tw.offsets[b], hi - self.tw.offsets[b]

    def continuity(self, lo: int, hi: int, m: int, forward: bool) -> tuple[bool, list[int]]:
        """Sufficient exact test that T^{+-m} is a translation on (lo, hi).

        Each full passage through a tower must start from an interval lying in
        one I_b (forward) or one T_n(I_b) (backward); a final partial passage
        stays inside floors of one tower, where T is continuous.
        """
        rem = m
        path = []
        while rem > 0:
            step = self.forward_interval(lo, hi) if forward else self.backward_interval(lo, hi)
            if step is None:
                return False, path
            b, lo2, hi2 = step
            path.append(b + 1)
            if forward and self.tw.h[b] > rem:
                return True, path
            rem -= self.tw.h[b]
            lo, hi = lo2, hi2
        return True, path

    def coordinate_after(self, X: int, t: int) -> int:
        """T^t of the base point X of tower alpha, as a coordinate."""
        b = self.tw.symbol_at(X)
        b2, z2, r2 = self.tw.advance(b, X, 0, t)
        return self.tw.floor_point(b2, z2, r2)


def _claim_A1(g: _Geometry, d: int) -> ClaimResult:
    lam = g.lam
    imax = max(range(d), key=lambda b: lam[b])
    imin = min(range(d), key=lambda b: lam[b])
    gap = lam[imax] - lam[imin]
    bound = Fraction(g.lam_a, 40 * d * d)
    return ClaimResult(
        gap < bound,
        {"pair": [imax + 1, imin + 1], "gap": str(g.frac(gap)), "bound": str(bound / g.scale)},
    )


def _claim_B1(g: _Geometry, d: int, top: Sequence[int]) -> ClaimResult:
    lam = [Fraction(v) for v in g.lam]
    s1, s2 = top[0] - 1, top[1] - 1
    rest = [top[k] - 1 for k in range(2, d)]
    terms: list[tuple[str, Fraction]] = []
    for i in rest:
        for j in rest:
            if i < j:
                terms.append((f"|l{i + 1}-l{j + 1}|", abs(lam[i] - lam[j])))
    t1 = Fraction(7, 3) * lam[s1]
    t2 = Fraction(7, 4) * lam[s2]
    for i in rest:
        terms.append((f"|l{i + 1}-7/3 l{s1 + 1}|", abs(lam[i] - t1)))
        terms.append((f"|l{i + 1}-7/4 l{s2 + 1}|", abs(lam[i] - t2)))
    terms.append(("|7/3 l1-7/4 l2|", abs(t1 - t2)))
    name, worst = max(terms, key=lambda kv: kv[1])
    bound = Fraction(g.lam_a, 40 * d * d)
    return ClaimResult(worst < bound, {"term": name, "value": str(worst / g.scale), "bound": str(bound / g.scale)})


def _claim_A2(g: _Geometry) -> ClaimResult:
    # T^ell translates I^n_alpha, so the claim compares p with c_alpha
    dist2 = abs(2 * g.p - g.c2)
    ok = dist2 * 10 < 2 * g.lam_a
    return ClaimResult(ok, {"p_minus_c": str(Fraction(2 * g.p - g.c2, 2 * g.scale)), "bound": str(Fraction(g.lam_a, 10 * g.scale))})


def _claims_two_tower(g: _Geometry, hit: RenormalizationHit, h_k: int, abar: int) -> dict[str, ClaimResult]:
    out = {}
    lo, hi = g.ball(2, 5)
    fw_ok, fw_path = g.continuity(lo, hi, h_k, True)
    bw_ok, bw_path = g.continuity(lo, hi, h_k, False)
    out["A3(i)"] = ClaimResult(fw_ok and bw_ok, {"forward_towers": fw_path, "backward_towers": bw_path})

    a, b = g.a, abar - 1
    ok = g.inside(lo, hi, a)
    trail = {}
    f1 = g.forward_interval(lo, hi) if ok else None
    ok = ok and f1 is not None and g.inside(f1[1], f1[2], b)
    f2 = g.forward_interval(f1[1], f1[2]) if ok else None
    ok = ok and f2 is not None and g.inside(f2[1], f2[2], a)
    trail["forward"] = ok
    b1 = g.backward_interval(lo, hi)
    ok2 = b1 is not None and g.inside(b1[1], b1[2], b)
    b2 = g.backward_interval(b1[1], b1[2]) if ok2 else None
    ok2 = ok2 and b2 is not None and g.inside(b2[1], b2[2], a)
    trail["backward"] = ok2
    out["A3(ii)"] = ClaimResult(ok and ok2, trail)

    ylo, yhi = g.ball(1, 5)
    t_lo = g.coordinate_after(ylo, h_k)
    t_hi = g.coordinate_after(yhi, h_k)
    chain = [lo, t_lo, g.p, t_hi, hi]
    ordered = all(x < y for x, y in zip(chain, chain[1:]))
    out["A3(iii)"] = ClaimResult(ordered, {"chain": [str(g.frac(x)) for x in chain]})
    return out


def _b_table(hit: RenormalizationHit) -> tuple[str, ...]:
    pos = hit.state.iet_n.perm.pi0[hit.alpha - 1]
    return ITINERARIES[pos if pos in (1, 2) else "d"]


def _claims_special(g: _Geometry, hit: RenormalizationHit, h_k: int) -> dict[str, ClaimResult]:
    out = {}
    d = hit.d
    top = hit.top_order
    lo, hi = g.ball(1, 50)
    fw_ok, fw_path = g.continuity(lo, hi, h_k, True)
    bw_ok, bw_path = g.continuity(lo, hi, h_k, False)
    out["B2(i)"] = ClaimResult(fw_ok and bw_ok, {"forward_towers": fw_path, "backward_towers": bw_path})

    table = _b_table(hit)
    want = {i: top[(d if t == "d" else int(t)) - 1] - 1 for i, t in zip(range(-4, 5), table)}
    seen: dict[int, int | None] = {0: g.a if g.inside(lo, hi, g.a) else None}
    cur = (lo, hi) if seen[0] is not None else None
    for i in range(1, 5):
        step = g.forward_interval(*cur) if cur else None
        cur = (step[1], step[2]) if step else None
        pieces = g.tw.split(*cur) if cur else []
        seen[i] = pieces[0].symbol if len(pieces) == 1 else None
        if seen[i] is None:
            cur = None
    cur = (lo, hi)
    for i in range(-1, -5, -1):
        step = g.backward_interval(*cur) if cur else None
        seen[i] = step[0] if step else None
        cur = (step[1], step[2]) if step else None
    ok = all(seen[i] == want[i] for i in range(-4, 5))
    # report positions in the top row, the way the tables are written
    pos = hit.state.iet_n.perm.pi0
    got = [pos[seen[i]] if seen[i] is not None else None for i in range(-4, 5)]
    out["B2(ii)"] = ClaimResult(ok, {"itinerary_positions": got, "expected": list(table)})

    dist2 = abs(2 * g.p - g.c2)
    out["B2(iii)"] = ClaimResult(
        dist2 * 50 < 2 * g.lam_a,
        {"p_minus_c": str(Fraction(2 * g.p - g.c2, 2 * g.scale)), "bound": str(Fraction(g.lam_a, 50 * g.scale))},
    )
    return out


def verify_claims(hit: RenormalizationHit, h_k: int | None = None) -> ClaimReport:
    """Exact pass/fail for every claim that applies to the hit."""
    h_k = compute_h_k(hit) if h_k is None else h_k
    g = _Geometry(hit)
    d = hit.d
    claims: dict[str, ClaimResult] = {}
    if d % 2:
        claims["A1"] = _claim_A1(g, d)
    else:
        claims["B1"] = _claim_B1(g, d, hit.top_order)
    claims["A2"] = _claim_A2(g)
    if is_special(hit):
        claims.update(_claims_special(g, hit, h_k))
    else:
        claims.update(_claims_two_tower(g, hit, h_k, partner(hit)))
    return ClaimReport(claims)


# certificates ----------------------------------------------------------------------------
@dataclass(frozen=True)
class Segment:
    """Floors f_lo..f_hi (inclusive) of tower ``symbol`` over the open base (lo, hi)."""

    symbol: int
    lo: int
    hi: int
    f_lo: int
    f_hi: int

    @property
    def floors(self) -> int:
        return self.f_hi - self.f_lo + 1


@dataclass
class SegmentReport:
    segment: Segment
    returns_home: bool
    displacement: int | None  # scaled, sup of |T^h x - x| over the segment
    values: set[int]
    problem: str | None = None


@dataclass
class RigidityCertificate:
    hit: RenormalizationHit
    h_k: int
    q_k: int
    B_k: tuple[Fraction, Fraction]
    Xi_k: list[Segment]
    measure_Xi: Fraction
    sym_diff_measure: Fraction
    rigidity_displacement: Fraction | None
    claims: ClaimReport
    birkhoff_on_Xi: int | None
    birkhoff_at_half: int
    rho_gamma: Fraction
    measure_bound: Fraction
    problems: list[str]
    segments: list[SegmentReport] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return (
            self.claims.all_pass
            and not self.problems
            and self.birkhoff_on_Xi == -1
            and self.birkhoff_at_half == 0
            and self.measure_Xi >= self.measure_bound
        )

    def floor_piece(self, index: int = 0) -> Piece:
        """One floor of Xi as a tower piece: the top floor of the first segment."""
        s = self.Xi_k[index]
        return Piece(s.symbol, s.lo, s.hi, s.f_hi)

    def sample_points(self, count: int, rng) -> list[Fraction]:
        """Random lattice rationals inside Xi, floor-uniform over the segments."""
        tw = self.hit.towers
        scale = tw.run.scale
        total = sum(s.floors for s in self.Xi_k)
        out = []
        for _ in range(count):
            k = rng.randrange(total)
            for s in self.Xi_k:
                if k < s.floors:
                    break
                k -= s.floors
            j = s.f_lo + k
            z = rng.randrange(s.lo + 1, s.hi)
            out.append(Fraction(tw.floor_point(s.symbol, z, j), scale))
        return out

    def serialize(self, seed: int | None = None) -> dict:
        scale = self.hit.towers.run.scale
        return {
            "seed": seed,
            "d": self.hit.d,
            "depth": self.hit.n_k,
            "alpha": self.hit.alpha,
            "ell_k": self.hit.ell_k,
            "h_k": self.h_k,
            "q_k": self.q_k,
            "B_k": [format_rational(self.B_k[0]), format_rational(self.B_k[1])],
            "measure_Xi": format_rational(self.measure_Xi),
            "sym_diff": format_rational(self.sym_diff_measure),
            "displacement": None if self.rigidity_displacement is None else format_rational(self.rigidity_displacement),
            "claims": self.claims.flags(),
            "birkhoff_on_Xi": self.birkhoff_on_Xi,
            "birkhoff_at_half": self.birkhoff_at_half,
            "rho_gamma": format_rational(self.rho_gamma),
            "measure_bound": format_rational(self.measure_bound),
            "half_projection_kind": self.hit.half_projection_kind,
            "Xi_segments": [
                {
                    "tower": s.symbol + 1,
                    "base": [format_rational(Fraction(s.lo, scale)), format_rational(Fraction(s.hi, scale))],
                    "floors": [s.f_lo, s.f_hi],
                }
                for s in self.Xi_k
            ],
            "passed": self.passed,
            "problems": self.problems,
        }


def _base_interval(g: _Geometry, special: bool) -> tuple[int, int]:
    lam = g.lam_a
    if special:
        return g.c + lam // 100, g.c + lam // 50
    return g.c + lam // 5, g.c + 2 * lam // 5


def build_xi(hit: RenormalizationHit, base: tuple[int, int], q: int) -> list[Segment]:
    """Xi = union of T^{-i}(T^ell(base)) for 0 <= i < q, as tower segments."""
    tw = hit.towers
    a, ell = hit.alpha - 1, hit.ell_k
    lo, hi = base
    segs = [Segment(a, lo, hi, max(0, ell - q + 1), ell)]
    below = q - 1 - ell
    if below > 0:
        # below the base the sets wrap to the top floors of the preceding towers
        for piece in tw.split_image(lo, hi):
            b = piece.symbol
            off = tw.offsets[b]
            segs.append(Segment(b, piece.lo - off, piece.hi - off, tw.h[b] - below, tw.h[b] - 1))
    return segs


def _overlap(x: Segment | Piece, y: Segment | Piece) -> int:
    return max(0, min(x.hi, y.hi) - max(x.lo, y.lo))


def _sym_diff(hit: RenormalizationHit, base: tuple[int, int], q: int) -> int:
    """Leb(Xi triangle T(Xi)) = 2 (|B| - Leb(T(B) meet T^{-(q-1)}(B))), scaled."""
    tw = hit.towers
    a, ell = hit.alpha - 1, hit.ell_k
    lo, hi = base
    if ell + 1 < tw.h[a]:
        image = [Piece(a, lo, hi, ell + 1)]
    else:
        image = tw.split(lo + tw.offsets[a], hi + tw.offsets[a])
    lowest: list[Piece] = []
    if ell >= q - 1:
        lowest = [Piece(a, lo, hi, ell - q + 1)]
    else:
        below = q - 1 - ell
        for piece in tw.split_image(lo, hi):
            b = piece.symbol
            off = tw.offsets[b]
            lowest.append(Piece(b, piece.lo - off, piece.hi - off, tw.h[b] - below))
    meet = sum(_overlap(x, y) for x in image for y in lowest if x.symbol == y.symbol and x.floor == y.floor)
    return 2 * ((hi - lo) - meet)


def _analyze_segment(tw: Towers, seg: Segment, h_k: int) -> SegmentReport:
    """Displacement and Birkhoff values of T^{h_k} on one segment."""
    b0 = seg.symbol
    lo, hi = seg.lo, seg.hi
    # walk the base under the induced map until h_k is used up
    walk = []
    cur_lo, cur_hi, used = lo, hi, 0
    while used < h_k:
        pieces = tw.split(cur_lo, cur_hi)
        if len(pieces) != 1:
            break
        b = pieces[0].symbol
        walk.append((b, cur_lo, cur_hi))
        used += tw.h[b]
        cur_lo += tw.offsets[b]
        cur_hi += tw.offsets[b]
    home = used == h_k and len(tw.split(cur_lo, cur_hi)) == 1 and tw.symbol_at(cur_lo) == b0
    mk_b, mk_floor, mk_z = tw.mk_symbol, tw.mk_floor, tw.mk_point
    if home:
        # the orbit of floor j covers floors j.. of the first passage, every
        # floor of the middle passages and floors ..j-1 above the return point
        passages = [(b, w_lo, w_hi, True) for b, w_lo, w_hi in walk[1:]]
        passages.append((b0, lo, hi, mk_floor >= seg.f_lo))
        passages.append((b0, cur_lo, cur_hi, mk_floor < seg.f_hi))
        for b, w_lo, w_hi, relevant in passages:
            if relevant and b == mk_b and w_lo < mk_z < w_hi:
                return SegmentReport(seg, True, None, set(), "breakpoint orbit crosses a floor of Xi")
        z = seg.lo + (seg.hi - seg.lo) // 2
        floors = {seg.f_lo, seg.f_hi}
        for j in (mk_floor, mk_floor + 1):
            if seg.f_lo <= j <= seg.f_hi:
                floors.add(j)
        values = {tw.forward_sum(b0, z, j, h_k) for j in floors}
        return SegmentReport(seg, True, abs(cur_lo - lo), values)
    if seg.floors > PER_FLOOR_LIMIT:
        return SegmentReport(seg, False, None, set(), "segment does not return to its tower within h_k")
    values: set[int] = set()
    disp = 0
    for j in range(seg.f_lo, seg.f_hi + 1):
        parts = tw.push(Piece(b0, lo, hi, j), h_k)
        if len(parts) != 1:
            return SegmentReport(seg, False, None, values, "discontinuity of the Birkhoff sum inside a floor")
        src, img, val = parts[0]
        z = src.point()
        start = tw.floor_point(b0, z, j)
        end = tw.floor_point(img.symbol, img.lo + (z - src.lo), img.floor)
        disp = max(disp, abs(end - start))
        values.add(val)
    return SegmentReport(seg, False, disp, values)


def build_certificate(
    hit: RenormalizationHit,
    h_k: int | None = None,
    claims: ClaimReport | None = None,
    strict: bool = False,
) -> RigidityCertificate:
    """Construct Xi_k and certify the Birkhoff sums on it.

    With ``strict`` a failed claim raises ClaimViolation and a breakpoint
    inside a floor raises DiscontinuityInXi; otherwise both are recorded in
    ``problems`` and the certificate reports ``passed = False``.
    """
    h_k = compute_h_k(hit) if h_k is None else h_k
    claims = verify_claims(hit, h_k) if claims is None else claims
    if strict and not claims.all_pass:
        raise ClaimViolation(f"claims failed: {claims.failed()}")
    tw = hit.towers
    g = _Geometry(hit)
    scale = g.scale
    d = hit.d
    q = min(tw.h)
    special = is_special(hit)
    base = _base_interval(g, special)
    shift = g.half - g.p  # T^ell on I^n_alpha
    B_k = (Fraction(base[0] + shift, scale), Fraction(base[1] + shift, scale))
    xi = build_xi(hit, base, q)
    measure = Fraction(q * (base[1] - base[0]), scale)
    if sum(s.floors * (s.hi - s.lo) for s in xi) != q * (base[1] - base[0]):
        raise AssertionError("Xi segments do not add up to q |B|")
    sym_diff = Fraction(_sym_diff(hit, base, q), scale)
    problems = []
    reports = [_analyze_segment(tw, s, h_k) for s in xi]
    values: set[int] = set()
    disp = 0
    for r in reports:
        if r.problem:
            problems.append(r.problem)
        values |= r.values
        if r.displacement is not None:
            disp = max(disp, r.displacement)
    if strict and any("breakpoint" in p or "discontinuity" in p for p in problems):
        raise DiscontinuityInXi("; ".join(problems))
    on_xi = None
    if not problems:
        if len(values) == 1:
            on_xi = next(iter(values))
        else:
            problems.append("Birkhoff sum is not constant on Xi")
    at_half = tw.forward_sum(g.a, g.p, g.ell, h_k)
    measure_bound = 1 / (10 * d * hit.rho_gamma)
    return RigidityCertificate(
        hit=hit,
        h_k=h_k,
        q_k=q,
        B_k=B_k,
        Xi_k=xi,
        measure_Xi=measure,
        sym_diff_measure=sym_diff,
        rigidity_displacement=None if any(r.displacement is None for r in reports) else Fraction(disp, scale),
        claims=claims,
        birkhoff_on_Xi=on_xi,
        birkhoff_at_half=at_half,
        rho_gamma=hit.rho_gamma,
        measure_bound=measure_bound,
        problems=problems,
        segments=reports,
    )


# essential values -----------------------------------------------------------------------
@dataclass
class EssentialValueEvidence:
    a: int
    found: bool
    n: int | None
    intervals: list[tuple[Fraction, Fraction]]
    measure: Fraction
    method: str

    def serialize(self) -> dict:
        return {
            "a": self.a,
            "found": self.found,
            "n": self.n,
            "intervals": [[format_rational(lo), format_rational(hi)] for lo, hi in self.intervals],
            "measure": format_rational(self.measure),
            "method": self.method,
        }


def essential_value_evidence(
    T: Iet,
    c: Cocycle,
    a: int,
    probe: tuple,
    n_max: int,
    n_values: Iterable[int] | None = None,
) -> EssentialValueEvidence:
    """First n in 1..n_max (or in ``n_values``) with a positive-measure set of
    x in probe such that T^n x is in probe and S_n c(x) = a.

    The probe is pushed forward one step at a time as a finite union of open
    intervals, cut at the discontinuities of T and at the breakpoints of c, so
    every reported set is exact.
    """
    lo, hi = (to_rational(v) for v in probe)
    if not 0 <= lo < hi <= T.domain_length:
        raise ValueError("probe must be a nonempty subinterval of the domain")
    wanted = None if n_values is None else set(n_values)
    horizon = n_max if wanted is None else max(wanted, default=0)
    cuts = sorted(set(T.discontinuities()) | set(c.breakpoints))
    # pieces: (current lo, current hi, shift back to the source, running sum)
    pieces = [(lo, hi, Fraction(0), 0)]
    for n in range(1, horizon + 1):
        nxt = []
        for p_lo, p_hi, back, acc in pieces:
            inner = [x for x in cuts if p_lo < x < p_hi]
            ends = [p_lo, *inner, p_hi]
            for u, v in zip(ends, ends[1:]):
                mid = (u + v) / 2
                val = acc + c(mid)
                off = T.offsets[T.symbol_at(mid) - 1]
                nxt.append((u + off, v + off, back - off, val))
        pieces = nxt
        if wanted is not None and n not in wanted:
            continue
        found = []
        for p_lo, p_hi, back, acc in pieces:
            if acc != a:
                continue
            m_lo, m_hi = max(p_lo, lo), min(p_hi, hi)
            if m_lo < m_hi:
                found.append((m_lo + back, m_hi + back))
        if found:
            found.sort()
            return EssentialValueEvidence(a, True, n, found, sum((v - u for u, v in found), Fraction(0)), "orbit-pieces")
    return EssentialValueEvidence(a, False, None, [], Fraction(0), "orbit-pieces")


def essential_value_on_floor(cert: RigidityCertificate, a: int = -1, floor_index: int = 0) -> EssentialValueEvidence:
    """Evidence at n = h_k for one floor of Xi, from a generic tower push.

    This does not reuse the certificate's segment analysis: the floor is pushed
    through the towers with cuts wherever the induced map or the breakpoint
    orbit could split it, and the witness set is intersected with the floor.
    """
    tw = cert.hit.towers
    scale = tw.run.scale
    probe = cert.floor_piece(floor_index)
    found = []
    for src, img, val in tw.push(probe, cert.h_k):
        if val != a or img.symbol != probe.symbol or img.floor != probe.floor:
            continue
        m_lo, m_hi = max(img.lo, probe.lo), min(img.hi, probe.hi)
        if m_lo >= m_hi:
            continue
        shift = src.lo - img.lo
        u, v = m_lo + shift, m_hi + shift
        # report coordinates on the floor itself
        X = tw.floor_point(probe.symbol, u, probe.floor)
        found.append((Fraction(X, scale), Fraction(X + (v - u), scale)))
    measure = sum((v - u for u, v in found), Fraction(0))
    return EssentialValueEvidence(a, bool(found), cert.h_k if found else None, found, measure, "tower-push")


__all__ = [
    "CENTER_OF_INTERVAL",
    "EVEN",
    "MIDDLE_OF_DOMAIN",
    "ODD",
    "OTHER",
    "ClaimReport",
    "ClaimResult",
    "EssentialValueEvidence",
    "HitScan",
    "RenormalizationHit",
    "RigidityCertificate",
    "Segment",
    "WindowA",
    "build_certificate",
    "build_xi",
    "certificate_run",
    "compute_h_k",
    "essential_value_evidence",
    "essential_value_on_floor",
    "find_renormalization_hits",
    "is_special",
    "partner",
    "verify_claims",
    "window_membership",
]
