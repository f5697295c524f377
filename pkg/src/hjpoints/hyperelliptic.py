"""Certified point search on split hyperelliptic curves.

The pipeline: pick a zero-sum-free weight vector b, color the grid of root
index tuples by the square class of c minus the weighted root sum, locate a
monochromatic combinatorial line, and read off a curve point whose
x-coordinate is a linear function of c.  Each point comes with a
certificate recording the full audit trail, re-checkable from scratch by
:func:`verify_certificate`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from . import limits
from .errors import (
    ExcludedParameterError,
    FieldTooSmallError,
    ResourceLimitError,
    UnsupportedFieldError,
)
from .fields import (
    PADIC,
    PRIME,
    FieldOps,
    FieldTag,
    SquareClass,
    class_group_width,
    format_element,
    hensel_sqrt,
    legendre,
    padic_split,
    parse_element,
    parse_field_tag,
    sqrt_mod_p,
    square_class,
)
from .lines import Coloring, LineTemplate, find_line_incremental, line_cells

# Weight-vector subset sums are checked exhaustively, so lengths stay small.
MAX_B_LENGTH = 20

DEFAULT_N_MAX = 6

# The default parameter stream over the rationals is capped to keep runs
# finite; pass an explicit c_stream to go further.
DEFAULT_RATIONAL_STREAM_BOUND = 1000


@dataclass(frozen=True)
class SplitHyperellipticCurve:
    """y**2 = (x - a_1)...(x - a_2g+2) with all roots in the base field.

    The root count must be even and the roots pairwise distinct after
    canonicalization (so reductions mod p that collide are rejected).
    """

    field: FieldTag
    roots: tuple

    def __post_init__(self):
        ops = FieldOps(self.field)
        roots = tuple(ops.normalize(r) for r in self.roots)
        object.__setattr__(self, "roots", roots)
        if len(roots) < 2 or len(roots) % 2:
            raise ValueError(f"root count must be even and >= 2, got {len(roots)}")
        if len(set(roots)) != len(roots):
            raise ValueError("roots must be pairwise distinct in the field")

    @property
    def genus(self) -> int:
        return len(self.roots) // 2 - 1

    @property
    def m(self) -> int:
        """Alphabet size of the coloring grid: one symbol per root."""
        return len(self.roots)

    def value_at(self, x):
        """f(x) = product of (x - a_j)."""
        ops = FieldOps(self.field)
        acc = ops.normalize(1)
        for a in self.roots:
            acc = ops.mul(acc, ops.sub(x, a))
        return acc


def zero_sum_free(field: FieldTag, entries: tuple) -> bool:
    """True when every nonempty subset of entries sums to a nonzero value."""
    if len(entries) > MAX_B_LENGTH:
        raise ResourceLimitError(
            f"subset-sum check over {len(entries)} entries exceeds {MAX_B_LENGTH}"
        )
    ops = FieldOps(field)
    n = len(entries)
    for mask in range(1, 1 << n):
        total = ops.zero()
        for i in range(n):
            if mask >> i & 1:
                total = ops.add(total, entries[i])
        if ops.is_zero(total):
            return False
    return True


@dataclass(frozen=True)
class BVector:
    """Weight vector with no vanishing nonempty subset sum."""

    field: FieldTag
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise ValueError("weight vector must be nonempty")
        if not zero_sum_free(self.field, self.entries):
            raise ValueError(f"a nonempty subset of {self.entries} sums to zero")

    @property
    def n(self) -> int:
        return len(self.entries)


@lru_cache(maxsize=256)
def choose_b(field: FieldTag, n: int) -> BVector:
    """Deterministic zero-sum-free weight vector of length n.

    Tries the geometric candidates (1, B, B**2, ...) for B = 2, 3, ... and
    returns the first that passes the exhaustive subset-sum check.  Over
    the rationals B = 2 always works; small prime fields may exhaust every
    base, which raises FieldTooSmallError.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    ops = FieldOps(field)
    if field.kind == PRIME:
        bases = range(2, field.p + 2)
    else:
        bases = (2,)
    for base in bases:
        entries = tuple(ops.normalize(base**i) for i in range(n))
        if zero_sum_free(field, entries):
            return BVector(field, entries)
    raise FieldTooSmallError(
        f"no zero-sum-free vector of length {n} found over {field}"
    )


@dataclass(frozen=True)
class ExclusionSet:
    """All weighted root sums; parameters c must avoid these so that every
    colored value is nonzero."""

    elements: frozenset
    n: int

    def __contains__(self, x) -> bool:
        return x in self.elements

    def __len__(self) -> int:
        return len(self.elements)


@lru_cache(maxsize=64)
def _exclusion_elements(curve, b, budget) -> frozenset:
    ops = FieldOps(curve.field)
    total = curve.m**b.n
    if total > budget:
        raise ResourceLimitError(
            f"exclusion set over {curve.m}**{b.n} = {total} tuples exceeds {budget}"
        )
    elements = set()
    for combo in itertools.product(curve.roots, repeat=b.n):
        acc = ops.zero()
        for weight, root in zip(b.entries, combo):
            acc = ops.add(acc, ops.mul(weight, root))
        elements.add(acc)
    return frozenset(elements)


def exclusion_set(curve: SplitHyperellipticCurve, b: BVector, max_cells=None) -> ExclusionSet:
    """Exact, deduplicated set of all (2g+2)**n weighted root sums."""
    budget = limits.max_cells(max_cells)
    return ExclusionSet(_exclusion_elements(curve, b, budget), b.n)


def coloring_for_c(curve: SplitHyperellipticCurve, b: BVector, c, max_cells=None) -> Coloring:
    """Color each grid cell by the square class of c minus the weighted root
    sum it selects.  Requires c outside the exclusion set so that every
    colored value is nonzero."""
    k = 1 << class_group_width(curve.field)
    ops = FieldOps(curve.field)
    c = ops.normalize(c)
    if c in exclusion_set(curve, b, max_cells):
        raise ExcludedParameterError(f"parameter {c} lies in the exclusion set")
    roots = curve.roots
    entries = b.entries
    field = curve.field

    def evaluate(cell):
        val = c
        for weight, idx in zip(entries, cell):
            val = ops.sub(val, ops.mul(weight, roots[idx - 1]))
        return square_class(field, val).color_id

    return Coloring(curve.m, b.n, k, fn=evaluate, max_cells=max_cells)


@dataclass(frozen=True)
class LinearMap:
    """t maps to (t - r) / s; s is a subset sum of a zero-sum-free vector,
    hence nonzero."""

    r: object
    s: object

    def apply(self, field: FieldTag, t):
        ops = FieldOps(field)
        return ops.div(ops.sub(t, self.r), self.s)


@dataclass(frozen=True)
class PointCertificate:
    """Audit trail of one produced point.

    x = (c - r) / s comes from the monochromatic line; star_set holds the
    0-based wildcard positions of the template; class_bits is the shared
    square class of the colored line values.  y is exact over a prime
    field and a truncated expansion (as an exact rational) p-adically, in
    which case y_precision records the congruence precision.
    """

    c: object
    n: int
    template: LineTemplate
    star_set: tuple[int, ...]
    r: object
    s: object
    class_bits: SquareClass
    x: object
    y: object
    y_precision: int | None = None


def _certificate_from_line(curve, b, c, n, template, color):
    ops = FieldOps(curve.field)
    stars = template.star_positions
    s = ops.zero()
    for i in stars:
        s = ops.add(s, b.entries[i])
    r = ops.zero()
    for i, slot in enumerate(template.slots):
        if slot is not None:
            r = ops.add(r, ops.mul(b.entries[i], curve.roots[slot - 1]))
    x = ops.div(ops.sub(c, r), s)
    fx = curve.value_at(x)
    if ops.is_zero(fx):
        y = ops.zero()
    else:
        assert square_class(curve.field, fx).is_identity, (
            "line certificate produced a non-square value"
        )
        if curve.field.kind == PRIME:
            y = sqrt_mod_p(fx, curve.field.p)
        else:
            y = Fraction(hensel_sqrt(fx, curve.field.p, curve.field.k))
    y_precision = curve.field.k if curve.field.kind == PADIC else None
    return PointCertificate(
        c=c,
        n=n,
        template=template,
        star_set=stars,
        r=r,
        s=s,
        class_bits=SquareClass.from_color_id(color, class_group_width(curve.field)),
        x=x,
        y=y,
        y_precision=y_precision,
    )


def _search_point(curve, c, n_max, b_family, max_cells):
    """Inner search returning (certificate or None, usable dimension count)."""
    ops = FieldOps(curve.field)
    c = ops.normalize(c)
    usable = 0

    def family(n):
        nonlocal usable
        try:
            b = b_family(n)
        except FieldTooSmallError:
            return None
        try:
            coloring = coloring_for_c(curve, b, c, max_cells)
        except ExcludedParameterError:
            return None
        usable += 1
        return coloring

    found = find_line_incremental(family, curve.m, n_max, max_cells)
    if found is None:
        return None, usable
    n, template, color = found
    return _certificate_from_line(curve, b_family(n), c, n, template, color), usable


def find_point_for_c(
    curve: SplitHyperellipticCurve,
    c,
    n_max: int = DEFAULT_N_MAX,
    b_family=None,
    max_cells=None,
):
    """Certified point with x-coordinate (c - r)/s, or None.

    Searches grid dimensions n = 1..n_max with the canonical weight vector
    at each dimension; a dimension is skipped when c lies in its exclusion
    set or no zero-sum-free vector exists.  When the x-coordinate lands on
    a root the Weierstrass point (x, 0) is certified.
    """
    if b_family is None:
        b_family = lambda n: choose_b(curve.field, n)
    cert, _ = _search_point(curve, c, n_max, b_family, max_cells)
    return cert


def linear_family(curve: SplitHyperellipticCurve, b: BVector, max_cells=None) -> frozenset:
    """All maps t -> (t - r)/s the pipeline can emit for this weight vector.

    s ranges over nonempty-subset sums of b and r over weighted root sums
    of the complementary positions, i.e. one map per line template,
    deduplicated.
    """
    budget = limits.max_cells(max_cells)
    total = (curve.m + 1) ** b.n - curve.m**b.n
    if total > budget:
        raise ResourceLimitError(f"{total} candidate maps exceed the budget {budget}")
    ops = FieldOps(curve.field)
    maps = set()
    for star_mask in range(1, 1 << b.n):
        s = ops.zero()
        constant_positions = []
        for i in range(b.n):
            if star_mask >> i & 1:
                s = ops.add(s, b.entries[i])
            else:
                constant_positions.append(i)
        for combo in itertools.product(curve.roots, repeat=len(constant_positions)):
            r = ops.zero()
            for i, root in zip(constant_positions, combo):
                r = ops.add(r, ops.mul(b.entries[i], root))
            maps.add(LinearMap(r, s))
    return frozenset(maps)


def default_c_stream(curve: SplitHyperellipticCurve):
    """Canonical parameter order: residues 0..p-1 over a prime field,
    0, 1, -1, 2, -2, ... (to a fixed bound) otherwise."""
    if curve.field.kind == PRIME:
        return iter(range(curve.field.p))

    def rationals():
        yield Fraction(0)
        for a in range(1, DEFAULT_RATIONAL_STREAM_BOUND + 1):
            yield Fraction(a)
            yield Fraction(-a)

    return rationals()


@dataclass
class PointEnumeration:
    """Outcome of an enumeration run.

    successes counts every parameter that produced a certificate (including
    ones whose x duplicated an earlier certificate); skipped counts
    parameters excluded at every usable dimension.
    """

    certificates: list
    successes: int = 0
    failures: int = 0
    skipped: int = 0
    duplicates: int = 0

    @property
    def n_used(self) -> tuple[int, ...]:
        return tuple(sorted({cert.n for cert in self.certificates}))

    @property
    def attempts(self) -> int:
        return self.successes + self.failures


def enumerate_points(
    curve: SplitHyperellipticCurve,
    limit=None,
    n_max: int = DEFAULT_N_MAX,
    c_stream=None,
    max_cells=None,
    max_attempts=None,
) -> PointEnumeration:
    """Walk the parameter stream collecting certificates with distinct x.

    Stops when ``limit`` certificates are collected, ``max_attempts``
    non-skipped parameters have been tried, or the stream ends.  The first
    certificate for a given x wins; later duplicates are counted but
    discarded.
    """
    if c_stream is None:
        c_stream = default_c_stream(curve)
    b_family = lambda n: choose_b(curve.field, n)
    result = PointEnumeration(certificates=[])
    seen_x = set()
    for c in c_stream:
        if limit is not None and len(result.certificates) >= limit:
            break
        if max_attempts is not None and result.attempts >= max_attempts:
            break
        cert, usable = _search_point(curve, c, n_max, b_family, max_cells)
        if usable == 0:
            result.skipped += 1
            continue
        if cert is None:
            result.failures += 1
            continue
        result.successes += 1
        if cert.x in seen_x:
            result.duplicates += 1
            continue
        seen_x.add(cert.x)
        result.certificates.append(cert)
    return result


def brute_force_points(curve: SplitHyperellipticCurve, scan_cap: int = 1_000_000):
    """All affine points over a prime field by scanning every x (oracle)."""
    if curve.field.kind != PRIME:
        raise UnsupportedFieldError("exhaustive point scan needs a finite field")
    p = curve.field.p
    if p > scan_cap:
        raise ResourceLimitError(f"scan over {p} values exceeds the cap {scan_cap}")
    points = []
    for x in range(p):
        fx = curve.value_at(x)
        sym = legendre(fx, p)
        if sym == 0:
            points.append((x, 0))
        elif sym == 1:
            y = sqrt_mod_p(fx, p)
            points.append((x, y))
            points.append((x, p - y))
    return points


def verify_certificate(curve: SplitHyperellipticCurve, cert: PointCertificate, b_family=None):
    """Re-check a certificate from scratch.

    Returns (True, None) or (False, reason) where the reason starts with
    the failing clause: (i) template/line, (ii) weight sums, (iii) the
    linear relation, (iv) the square class of f(x), (v) the curve equation.
    The weight vector is recomputed deterministically, so certificates are
    self-contained.
    """
    ops = FieldOps(curve.field)
    if b_family is None:
        b_family = lambda n: choose_b(curve.field, n)
    try:
        b = b_family(cert.n)
    except FieldTooSmallError:
        return False, "ii: no zero-sum-free weight vector at this dimension"

    template = cert.template
    if template.n != cert.n:
        return False, "i: template length differs from the recorded dimension"
    if tuple(sorted(cert.star_set)) != template.star_positions:
        return False, "i: star set does not match the template"
    try:
        cells = line_cells(template, curve.m)
        coloring = coloring_for_c(curve, b, cert.c)
        colors = {coloring.evaluate(cell) for cell in cells}
    except Exception as exc:
        return False, f"i: line evaluation failed ({exc})"
    if colors != {cert.class_bits.color_id}:
        return False, "i: line is not monochromatic of the recorded class"

    s = ops.zero()
    for i in cert.star_set:
        s = ops.add(s, b.entries[i])
    if not ops.eq(s, cert.s) or ops.is_zero(cert.s):
        return False, "ii: s is not the star-subset sum of the weight vector"
    r = ops.zero()
    for i, slot in enumerate(template.slots):
        if slot is not None:
            r = ops.add(r, ops.mul(b.entries[i], curve.roots[slot - 1]))
    if not ops.eq(r, cert.r):
        return False, "ii: r does not match the template constants"

    if not ops.eq(ops.add(ops.mul(cert.x, cert.s), cert.r), cert.c):
        return False, "iii: x*s + r != c"

    fx = curve.value_at(cert.x)
    if not ops.is_zero(fx) and not square_class(curve.field, fx).is_identity:
        return False, "iv: f(x) is not a square"

    if curve.field.kind == PADIC:
        diff = Fraction(cert.y) ** 2 - fx
        k = cert.y_precision if cert.y_precision is not None else curve.field.k
        if diff != 0 and padic_split(diff, curve.field.p)[0] < k:
            return False, "v: y**2 != f(x) to the recorded precision"
    else:
        if not ops.eq(ops.mul(cert.y, cert.y), fx):
            return False, "v: y**2 != f(x)"
    return True, None


def certificate_to_dict(curve: SplitHyperellipticCurve, cert: PointCertificate) -> dict:
    """JSON-ready form; field elements follow the field's textual encoding."""
    fmt = lambda v: format_element(curve.field, v)
    record = {
        "field": str(curve.field),
        "roots": [fmt(a) for a in curve.roots],
        "c": fmt(cert.c),
        "N": cert.n,
        "template": cert.template.to_string(),
        "star_set": list(cert.star_set),
        "r": fmt(cert.r),
        "s": fmt(cert.s),
        "class_bits": list(cert.class_bits.bits),
        "x": fmt(cert.x),
        "y": fmt(cert.y),
    }
    if cert.y_precision is not None:
        record["y_precision"] = cert.y_precision
    return record


def certificate_from_dict(record: dict):
    """Inverse of :func:`certificate_to_dict`; returns (curve, certificate)."""
    field = parse_field_tag(record["field"])
    curve = SplitHyperellipticCurve(field, tuple(parse_element(field, a) for a in record["roots"]))
    cert = PointCertificate(
        c=parse_element(field, record["c"]),
        n=int(record["N"]),
        template=LineTemplate.from_string(record["template"]),
        star_set=tuple(int(i) for i in record["star_set"]),
        r=parse_element(field, record["r"]),
        s=parse_element(field, record["s"]),
        class_bits=SquareClass(tuple(int(b) for b in record["class_bits"])),
        x=parse_element(field, record["x"]),
        y=parse_element(field, record["y"]),
        y_precision=record.get("y_precision"),
    )
    return curve, cert
