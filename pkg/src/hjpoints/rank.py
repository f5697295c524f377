"""Independent-point families on full-2-torsion elliptic curves over Q.

Points live over growing quadratic extensions Q(sqrt(d)).  Each new point
is steered to a fresh square class: a steering prime is chosen at which
every previously used class splits, the parameter is forced into a residue
class where f takes a non-residue value, and the resulting d is certified
independent by GF(2) linear algebra on prime-exponent parities.
Non-torsion is certified by exact point counts over two specialization
primes together with explicit multiples in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from . import limits
from .errors import FactorizationLimitError, SearchExhaustedError
from .fields import is_prime, legendre

DEFAULT_STEERING_START = 14
DEFAULT_PRIME_CAP = 1_000_000
DEFAULT_RETRIES = 24


@dataclass(frozen=True)
class EllipticCurveQ:
    """y**2 = (x - a1)(x - a2)(x - a3) with distinct integer roots, so the
    full 2-torsion is rational."""

    roots: tuple[int, int, int]

    def __post_init__(self):
        roots = tuple(int(a) for a in self.roots)
        object.__setattr__(self, "roots", roots)
        if len(roots) != 3:
            raise ValueError(f"need exactly three roots, got {len(roots)}")
        if len(set(roots)) != 3:
            raise ValueError("roots must be pairwise distinct")

    @property
    def e1(self) -> int:
        a1, a2, a3 = self.roots
        return a1 + a2 + a3

    @property
    def e2(self) -> int:
        a1, a2, a3 = self.roots
        return a1 * a2 + a1 * a3 + a2 * a3

    @property
    def diff_product(self) -> int:
        a1, a2, a3 = self.roots
        return (a1 - a2) * (a1 - a3) * (a2 - a3)

    def f(self, x):
        a1, a2, a3 = self.roots
        return (x - a1) * (x - a2) * (x - a3)

    def f_derivative(self, x):
        return 3 * x * x - 2 * self.e1 * x + self.e2

    def is_good_prime(self, p: int) -> bool:
        return p % 2 == 1 and is_prime(p) and self.diff_product % p != 0


@dataclass(frozen=True)
class QuadField:
    """Q(sqrt(d)) for a squarefree integer d outside {0, 1}."""

    d: int

    def __post_init__(self):
        if self.d in (0, 1) or squarefree_part(self.d) != self.d:
            raise ValueError(f"d must be squarefree and outside {{0, 1}}, got {self.d}")


@dataclass(frozen=True)
class QuadPoint:
    """Point (x, w*sqrt(d)) with x, w rational, or the identity (x is None).

    d = 1 marks points that are already rational (Weierstrass points and
    square values of f).  Non-identity points must satisfy d*w**2 = f(x)
    exactly; the check runs at construction, so every group-law result is
    re-validated.
    """

    curve: EllipticCurveQ
    d: int
    x: Fraction | None
    w: Fraction | None

    def __post_init__(self):
        if self.x is None:
            object.__setattr__(self, "w", None)
            return
        x, w = Fraction(self.x), Fraction(self.w)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)
        if self.d * w * w != self.curve.f(x):
            raise ValueError(f"({x}, {w}*sqrt({self.d})) is not on the curve")

    @property
    def is_identity(self) -> bool:
        return self.x is None

    def negate(self) -> "QuadPoint":
        if self.is_identity:
            return self
        return QuadPoint(self.curve, self.d, self.x, -self.w)

    @staticmethod
    def identity(curve: EllipticCurveQ, d: int) -> "QuadPoint":
        return QuadPoint(curve, d, None, None)


def threshold_constant(g: int) -> int:
    """Point-count threshold 2g**2 + 2g + 3 + 2g*ceil(sqrt(g**2 + 2g + 3)).

    For primes above this value a genus-g curve is guaranteed to miss some
    x whose f-value is a non-residue.
    """
    if g < 0:
        raise ValueError("genus must be >= 0")
    inner = g * g + 2 * g + 3
    root = isqrt(inner)
    if root * root != inner:
        root += 1
    return 2 * g * g + 2 * g + 3 + 2 * g * root


def nonresidue_x(curve: EllipticCurveQ, p: int, forced: bool = False) -> int:
    """Smallest x in [0, p) with f(x) a quadratic non-residue mod p.

    Existence is guaranteed for good primes above threshold_constant(1);
    pass forced=True to attempt the scan below the threshold or at bad
    primes, where it may legitimately exhaust.
    """
    if not is_prime(p) or p == 2:
        raise ValueError(f"p must be an odd prime, got {p}")
    if not forced:
        if not curve.is_good_prime(p):
            raise ValueError(f"bad reduction at {p}")
        if p <= threshold_constant(1):
            raise ValueError(
                f"p = {p} is at or below the counting threshold {threshold_constant(1)}"
            )
    for x in range(p):
        if legendre(curve.f(x), p) == -1:
            return x
    raise SearchExhaustedError(f"f takes no non-residue value over F_{p}")


def steering_prime(curve: EllipticCurveQ, previous_d, start: int = DEFAULT_STEERING_START,
                   cap: int = DEFAULT_PRIME_CAP) -> int:
    """Smallest good prime >= start at which every previous d is a nonzero
    residue, so the whole previous class span reduces to squares."""
    previous_d = list(previous_d)
    for d in previous_d:
        if squarefree_part(d) != d:
            raise ValueError(f"previous class {d} is not squarefree")
    threshold = threshold_constant(1)
    p = max(start, 3)
    while p <= cap:
        if (
            is_prime(p)
            and p > threshold
            and curve.diff_product % p != 0
            and all(d % p != 0 and legendre(d, p) == 1 for d in previous_d)
        ):
            return p
        p += 1
    raise SearchExhaustedError(f"no steering prime found in [{start}, {cap}]")


def steer_c(curve: EllipticCurveQ, p: int, x_target: int, exclusions) -> int:
    """Smallest c >= 0 with c = x_target mod p, c unused, and f(c) nonzero."""
    if not 0 <= x_target < p:
        raise ValueError(f"x_target must lie in [0, {p})")
    c = x_target
    while c in exclusions or curve.f(c) == 0:
        c += p
    return c


def _trial_factor(n: int, bound: int):
    """Factor by trial division up to bound; returns (exponents, cofactor, q)
    where q is the first untried candidate and the cofactor has no prime
    factor below q."""
    factors = {}
    q = 2
    while q <= bound and q * q <= n:
        if n % q == 0:
            e = 0
            while n % q == 0:
                n //= q
                e += 1
            factors[q] = e
        q += 1 if q == 2 else 2
    return factors, n, q


def squarefree_part(r, bound=None) -> int:
    """Unique squarefree d with r = d * (rational square); sign preserved.

    Factoring is by trial division; a cofactor that is neither a perfect
    square nor provably prime raises FactorizationLimitError.
    """
    bound = limits.trial_division_bound(bound)
    r = Fraction(r)
    if r == 0:
        raise ValueError("zero has no squarefree part")
    n = r.numerator * r.denominator
    sign = -1 if n < 0 else 1
    factors, cofactor, q = _trial_factor(abs(n), bound)
    d = sign
    for prime, e in factors.items():
        if e % 2:
            d *= prime
    if cofactor > 1:
        if cofactor < q * q:
            d *= cofactor  # no factor below its square root: prime
        elif isqrt(cofactor) ** 2 == cofactor:
            pass  # perfect square contributes nothing
        else:
            raise FactorizationLimitError(
                f"cofactor {cofactor} not factored by trial division to {bound}"
            )
    return d


def _class_symbols(d: int, bound=None) -> frozenset:
    """Prime support of a squarefree integer, with -1 marking the sign."""
    bound = limits.trial_division_bound(bound)
    symbols = set()
    if d < 0:
        symbols.add(-1)
    factors, cofactor, q = _trial_factor(abs(d), bound)
    for prime, e in factors.items():
        if e != 1:
            raise ValueError(f"{d} is not squarefree")
        symbols.add(prime)
    if cofactor > 1:
        if cofactor >= q * q:
            raise FactorizationLimitError(f"cofactor {cofactor} not factored")
        symbols.add(cofactor)
    return frozenset(symbols)


def fresh_class_check(d: int, previous_d) -> bool:
    """True when d's square class lies outside the GF(2) span of the
    previous classes in Q*/(Q*)**2.

    Classes are exponent-parity vectors over the primes (plus a sign
    coordinate); membership is decided by Gaussian elimination with XOR on
    bitmasks.
    """
    vectors = [_class_symbols(v) for v in previous_d]
    target = _class_symbols(d)
    index = {}
    for sym in sorted(set().union(target, *vectors), key=abs):
        index[sym] = len(index)

    def mask(symbols):
        bits = 0
        for sym in symbols:
            bits |= 1 << index[sym]
        return bits

    basis = []
    for vec in vectors:
        v = mask(vec)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    t = mask(target)
    for b in basis:
        t = min(t, t ^ b)
    return t != 0


def point_from_x(curve: EllipticCurveQ, x, bound=None) -> QuadPoint:
    """Point with the given rational x-coordinate over Q(sqrt(d)), where
    d is the squarefree part of f(x).  Roots of f give the rational
    2-torsion point (x, 0) with d = 1."""
    x = Fraction(x)
    fx = curve.f(x)
    if fx == 0:
        return QuadPoint(curve, 1, x, Fraction(0))
    d = squarefree_part(fx, bound)
    w_squared = fx / d
    w = Fraction(isqrt(w_squared.numerator), isqrt(w_squared.denominator))
    return QuadPoint(curve, d, x, w)


def quad_add(curve: EllipticCurveQ, d: int, p1: QuadPoint, p2: QuadPoint) -> QuadPoint:
    """Chord-tangent addition on points of the form (x, w*sqrt(d)).

    This family is closed under the group law: slopes are rational
    multiples of sqrt(d), so sums keep a rational x and a pure sqrt(d)
    y-coordinate.  Points with w = 0 are compatible with every d.
    """
    for pt in (p1, p2):
        if pt.curve != curve:
            raise ValueError("point belongs to a different curve")
        if not pt.is_identity and pt.w != 0 and pt.d != d:
            raise ValueError(f"point over sqrt({pt.d}) mixed into sqrt({d}) arithmetic")
    if p1.is_identity:
        return p2
    if p2.is_identity:
        return p1
    x1, w1, x2, w2 = p1.x, p1.w, p2.x, p2.w
    if x1 == x2:
        if w1 == -w2:
            return QuadPoint.identity(curve, d)
        if w1 != w2:
            raise ValueError("points share x but are not negatives or equal")
        mu = curve.f_derivative(x1) / (2 * w1 * d)
    else:
        mu = (w2 - w1) / (x2 - x1)
    x3 = d * mu * mu + curve.e1 - x1 - x2
    w3 = mu * (x1 - x3) - w1
    return QuadPoint(curve, d, x3, w3)


def quad_mul(curve: EllipticCurveQ, d: int, point: QuadPoint, m: int) -> QuadPoint:
    """m-th multiple by double-and-add; negative m negates the point."""
    if m < 0:
        return quad_mul(curve, d, point.negate(), -m)
    result = QuadPoint.identity(curve, d)
    addend = point
    while m:
        if m & 1:
            result = quad_add(curve, d, result, addend)
        m >>= 1
        if m:
            addend = quad_add(curve, d, addend, addend)
    return result


def count_points(curve: EllipticCurveQ, p: int) -> int:
    """Exact point count over F_p including the point at infinity:
    1 + sum over x of (1 + legendre(f(x)))."""
    if not curve.is_good_prime(p):
        raise ValueError(f"bad reduction at {p}")
    total = p + 1
    for x in range(p):
        total += legendre(curve.f(x), p)
    return total


def count_points_ext(curve: EllipticCurveQ, p: int) -> int:
    """Point count over the quadratic extension of F_p via the trace:
    with t = p + 1 - n_p, the count is p**2 + 1 - (t**2 - 2p)."""
    t = p + 1 - count_points(curve, p)
    return p * p + 1 - (t * t - 2 * p)


@dataclass(frozen=True)
class TorsionBound:
    """Multiple of every torsion order of the curve over Q(sqrt(d)).

    Built from the point counts n1, n2 over the quadratic extensions of
    F_p1, F_p2: torsion prime to p_i injects under reduction, so each
    prime power in the bound is capped by the counts at the primes that
    can see it.
    """

    bound: int
    p1: int
    p2: int
    n1: int | None = None
    n2: int | None = None


def _factor_exponents(n: int) -> dict:
    factors, cofactor, q = _trial_factor(n, max(isqrt(n) + 1, 3))
    if cofactor > 1:
        factors[cofactor] = factors.get(cofactor, 0) + 1
    return factors


def specialization_primes(curve: EllipticCurveQ, d: int) -> tuple[int, int]:
    """Two smallest odd primes of good reduction not dividing 2*d."""
    found = []
    q = 3
    while len(found) < 2:
        if curve.is_good_prime(q) and d % q != 0:
            found.append(q)
        q += 2
    return found[0], found[1]


def torsion_bound(curve: EllipticCurveQ, d: int) -> TorsionBound:
    """Certified torsion-order bound for the curve over Q(sqrt(d))."""
    if squarefree_part(d) != d:
        raise ValueError(f"d must be squarefree, got {d}")
    p1, p2 = specialization_primes(curve, d)
    n1 = count_points_ext(curve, p1)
    n2 = count_points_ext(curve, p2)
    f1 = _factor_exponents(n1)
    f2 = _factor_exponents(n2)
    bound = 1
    for ell in sorted(set(f1) | set(f2)):
        if ell == p1:
            e = f2.get(ell, 0)
        elif ell == p2:
            e = f1.get(ell, 0)
        else:
            e = min(f1.get(ell, 0), f2.get(ell, 0))
        bound *= ell**e
    return TorsionBound(bound, p1, p2, n1, n2)


def divisors(n: int) -> list[int]:
    """All positive divisors, ascending."""
    divs = [1]
    for prime, e in _factor_exponents(n).items():
        divs = [d * prime**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def certify_nontorsion(curve: EllipticCurveQ, d: int, point: QuadPoint,
                       bound: TorsionBound) -> bool:
    """True when m*P is not the identity for any divisor m of the bound.

    Every torsion order divides the bound, so passing certifies infinite
    order.
    """
    if point.is_identity:
        return False
    for m in divisors(bound.bound):
        if m > 1 and quad_mul(curve, d, point, m).is_identity:
            return False
    return True


@dataclass(frozen=True)
class RankConfig:
    """Knobs for family construction; defaults match the worked scale."""

    start: int = DEFAULT_STEERING_START
    retries: int = DEFAULT_RETRIES
    prime_cap: int = DEFAULT_PRIME_CAP
    trial_division_bound: int | None = None


@dataclass(frozen=True)
class FamilyRecord:
    """One certified point: the steering data, the fresh class, the torsion
    bound, and the multiples that were checked against the identity."""

    point: QuadPoint
    steering_prime: int
    x_target: int
    c: int
    d: int
    bound: TorsionBound
    multiples_checked: tuple[int, ...]


@dataclass(frozen=True)
class IndependentFamily:
    """Points over pairwise-distinct quadratic extensions with independent
    square classes, each certified non-torsion."""

    curve: EllipticCurveQ
    records: tuple[FamilyRecord, ...]
    complete: bool
    diagnostics: tuple[str, ...] = ()

    @property
    def points(self) -> list[QuadPoint]:
        return [rec.point for rec in self.records]

    @property
    def ds(self) -> list[int]:
        return [rec.d for rec in self.records]


def build_independent_family(curve: EllipticCurveQ, n: int,
                             config: RankConfig | None = None) -> IndependentFamily:
    """Iteratively build n points over fresh quadratic extensions.

    Per point: find a steering prime splitting all previous classes, locate
    a non-residue value of f, steer the parameter there by CRT (the prime
    itself here), take the point, check class freshness, and certify
    non-torsion; a point failing certification advances the parameter
    within its residue class and retries.  On retry exhaustion the partial
    family is returned with complete=False and a diagnostic.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    cfg = config or RankConfig()
    records = []
    previous_d = []
    used_c = set()
    diagnostics = []
    for i in range(n):
        p = steering_prime(curve, previous_d, start=cfg.start, cap=cfg.prime_cap)
        x_target = nonresidue_x(curve, p)
        record = None
        for _ in range(cfg.retries):
            c = steer_c(curve, p, x_target, used_c)
            used_c.add(c)
            point = point_from_x(curve, Fraction(c), bound=cfg.trial_division_bound)
            if not fresh_class_check(point.d, previous_d):
                raise RuntimeError(
                    f"steering produced a dependent class d={point.d} at prime {p}"
                )
            tb = torsion_bound(curve, point.d)
            if certify_nontorsion(curve, point.d, point, tb):
                record = FamilyRecord(
                    point=point,
                    steering_prime=p,
                    x_target=x_target,
                    c=c,
                    d=point.d,
                    bound=tb,
                    multiples_checked=tuple(divisors(tb.bound)),
                )
                break
        if record is None:
            diagnostics.append(
                f"retry budget ({cfg.retries}) exhausted at point {i + 1}, "
                f"steering prime {p}"
            )
            return IndependentFamily(curve, tuple(records), False, tuple(diagnostics))
        records.append(record)
        previous_d.append(record.d)
    return IndependentFamily(curve, tuple(records), True, tuple(diagnostics))


def verify_family(curve: EllipticCurveQ, family: IndependentFamily):
    """Re-check every certificate in a family from scratch.

    Returns (True, None) or (False, reason).  Checks: curve membership and
    canonical d per point, pairwise-distinct squarefree classes, GF(2)
    independence, the Legendre splitting pattern at each steering prime,
    and non-torsion against a recomputed bound.
    """
    seen_d = []
    for idx, rec in enumerate(family.records):
        pt = rec.point
        if pt.is_identity or pt.w == 0:
            return False, f"point {idx}: not a nontrivial point"
        if pt.d != rec.d or squarefree_part(rec.d) != rec.d or rec.d in (0, 1):
            return False, f"point {idx}: d is not a valid squarefree class"
        if pt.d * pt.w * pt.w != curve.f(pt.x):
            return False, f"point {idx}: not on the curve"
        if squarefree_part(curve.f(pt.x)) != rec.d:
            return False, f"point {idx}: d is not the squarefree part of f(x)"
        if rec.d in seen_d:
            return False, f"point {idx}: class {rec.d} repeats"
        if not fresh_class_check(rec.d, seen_d):
            return False, f"point {idx}: class {rec.d} dependent on previous classes"
        p = rec.steering_prime
        if not curve.is_good_prime(p):
            return False, f"point {idx}: steering prime {p} has bad reduction"
        if legendre(rec.d, p) != -1:
            return False, f"point {idx}: d is a residue at its own steering prime"
        for prev in seen_d:
            if prev % p == 0 or legendre(prev, p) != 1:
                return False, f"point {idx}: previous class {prev} does not split at {p}"
        expected = torsion_bound(curve, rec.d)
        if (expected.bound, expected.p1, expected.p2) != (rec.bound.bound, rec.bound.p1, rec.bound.p2):
            return False, f"point {idx}: torsion bound does not match recomputation"
        if not certify_nontorsion(curve, rec.d, pt, expected):
            return False, f"point {idx}: fails the non-torsion check"
        seen_d.append(rec.d)
    return True, None


def _format_rational(x: Fraction):
    x = Fraction(x)
    if x.denominator == 1:
        return int(x)
    return f"{x.numerator}/{x.denominator}"


def family_to_dict(family: IndependentFamily) -> dict:
    """JSON-ready form of a family with all certificates."""
    return {
        "roots": list(family.curve.roots),
        "count": len(family.records),
        "complete": family.complete,
        "diagnostics": list(family.diagnostics),
        "points": [
            {
                "p_steer": rec.steering_prime,
                "x_target": rec.x_target,
                "c": rec.c,
                "d": rec.d,
                "x": _format_rational(rec.point.x),
                "w": f"{rec.point.w.numerator}/{rec.point.w.denominator}",
                "torsion_bound": {
                    "B": rec.bound.bound,
                    "p1": rec.bound.p1,
                    "p2": rec.bound.p2,
                },
                "multiples_checked": list(rec.multiples_checked),
            }
            for rec in family.records
        ],
    }


def family_from_dict(obj: dict) -> IndependentFamily:
    """Inverse of :func:`family_to_dict`; points are re-validated on load."""
    curve = EllipticCurveQ(tuple(int(a) for a in obj["roots"]))
    records = []
    for entry in obj["points"]:
        point = QuadPoint(
            curve,
            int(entry["d"]),
            Fraction(str(entry["x"])),
            Fraction(str(entry["w"])),
        )
        tb = entry["torsion_bound"]
        records.append(
            FamilyRecord(
                point=point,
                steering_prime=int(entry["p_steer"]),
                x_target=int(entry["x_target"]),
                c=int(entry["c"]),
                d=int(entry["d"]),
                bound=TorsionBound(int(tb["B"]), int(tb["p1"]), int(tb["p2"])),
                multiples_checked=tuple(int(m) for m in entry["multiples_checked"]),
            )
        )
    return IndependentFamily(
        curve,
        tuple(records),
        bool(obj.get("complete", True)),
        tuple(obj.get("diagnostics", ())),
    )
