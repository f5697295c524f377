"""Exact arithmetic and square classes over the supported base fields.

Three field families are supported: odd prime fields (``fp:<p>``), the
rationals (``q``), and the rationals read p-adically to a fixed working
precision (``qp:<p>:<k>``).  Prime-field elements are canonical residues
held as plain ints; rational and p-adic elements are exact
`fractions.Fraction` values, so every square-class decision is exact
(valuation parity plus a Legendre symbol on the unit part), never a
floating-point approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    InvalidFieldError,
    NoSquareRootError,
    OddValuationError,
    UndefinedClassError,
    UnsupportedFieldError,
    ZeroValuationError,
)

PRIME = "fp"
RATIONAL = "q"
PADIC = "qp"

DEFAULT_PADIC_PRECISION = 16

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test, exact for all n below 3.3e24."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _check_odd_prime(p) -> None:
    if not isinstance(p, int) or p < 3 or p % 2 == 0 or not is_prime(p):
        raise InvalidFieldError(f"modulus must be an odd prime, got {p!r}")


@dataclass(frozen=True)
class FieldTag:
    """Identifies one of the supported fields.

    ``kind`` is one of PRIME, RATIONAL, PADIC.  ``p`` is the (residue)
    characteristic, always an odd prime; ``k`` is the p-adic working
    precision.  Characteristic 2 is rejected everywhere.
    """

    kind: str
    p: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind == RATIONAL:
            if self.p is not None or self.k is not None:
                raise InvalidFieldError("the rational field takes no parameters")
        elif self.kind == PRIME:
            _check_odd_prime(self.p)
            if self.k is not None:
                raise InvalidFieldError("prime fields take no precision")
        elif self.kind == PADIC:
            _check_odd_prime(self.p)
            if not isinstance(self.k, int) or self.k < 1:
                raise InvalidFieldError(f"p-adic precision must be >= 1, got {self.k!r}")
        else:
            raise InvalidFieldError(f"unknown field kind {self.kind!r}")

    def __str__(self) -> str:
        if self.kind == RATIONAL:
            return "q"
        if self.kind == PRIME:
            return f"fp:{self.p}"
        return f"qp:{self.p}:{self.k}"


def prime_field(p: int) -> FieldTag:
    return FieldTag(PRIME, p)


def rational_field() -> FieldTag:
    return FieldTag(RATIONAL)


def padic_field(p: int, k: int = DEFAULT_PADIC_PRECISION) -> FieldTag:
    return FieldTag(PADIC, p, k)


def parse_field_tag(text: str) -> FieldTag:
    """Parse the textual forms ``fp:<p>``, ``q``, ``qp:<p>[:<k>]``."""
    parts = text.strip().split(":")
    try:
        if parts == ["q"]:
            return rational_field()
        if parts[0] == "fp" and len(parts) == 2:
            return prime_field(int(parts[1]))
        if parts[0] == "qp" and len(parts) in (2, 3):
            k = int(parts[2]) if len(parts) == 3 else DEFAULT_PADIC_PRECISION
            return padic_field(int(parts[1]), k)
    except ValueError as exc:
        raise InvalidFieldError(f"malformed field tag {text!r}") from exc
    raise InvalidFieldError(f"malformed field tag {text!r}")


def normalize_element(field: FieldTag, x):
    """Canonical representative: residue in [0, p) or a reduced Fraction."""
    if field.kind == PRIME:
        if isinstance(x, Fraction):
            den = x.denominator % field.p
            if den == 0:
                raise InvalidFieldError(f"denominator of {x} vanishes mod {field.p}")
            return x.numerator * pow(den, -1, field.p) % field.p
        return x % field.p
    return Fraction(x)


def format_element(field: FieldTag, x):
    """JSON-ready form: int for prime fields, ``num/den`` string otherwise."""
    if field.kind == PRIME:
        return int(x)
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_element(field: FieldTag, value):
    """Inverse of :func:`format_element`; also accepts plain ints."""
    if isinstance(value, str):
        value = Fraction(value)
    return normalize_element(field, Fraction(value))


class FieldOps:
    """Arithmetic on canonical elements of a single field.

    Prime-field elements are ints reduced mod p; rational and p-adic
    elements are Fractions.  All operations are pure.
    """

    __slots__ = ("field", "_modulus")

    def __init__(self, field: FieldTag):
        self.field = field
        self._modulus = field.p if field.kind == PRIME else None

    def zero(self):
        return 0 if self._modulus else Fraction(0)

    def normalize(self, x):
        return normalize_element(self.field, x)

    def add(self, a, b):
        return (a + b) % self._modulus if self._modulus else a + b

    def sub(self, a, b):
        return (a - b) % self._modulus if self._modulus else a - b

    def mul(self, a, b):
        return (a * b) % self._modulus if self._modulus else a * b

    def neg(self, a):
        return -a % self._modulus if self._modulus else -a

    def div(self, a, b):
        if self._modulus:
            b %= self._modulus
            if b == 0:
                raise ZeroDivisionError("division by a zero residue")
            return a * pow(b, -1, self._modulus) % self._modulus
        return Fraction(a) / Fraction(b)

    def is_zero(self, a) -> bool:
        return a % self._modulus == 0 if self._modulus else a == 0

    def eq(self, a, b) -> bool:
        return self.is_zero(self.sub(a, b))


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) by Euler's criterion: a**((p-1)/2) mod p.

    Returns 0 when p divides a, +1 for nonzero squares, -1 otherwise.
    """
    _check_odd_prime(p)
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod_p(a: int, p: int) -> int:
    """Square root mod an odd prime via Tonelli-Shanks.

    Returns the smaller of the two roots (determinism); 0 maps to 0.
    Raises NoSquareRootError for quadratic non-residues.
    """
    _check_odd_prime(p)
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        raise NoSquareRootError(f"{a} is not a square mod {p}")
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while legendre(z, p) != -1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return min(r, p - r)


def padic_split(r, p: int) -> tuple[int, Fraction]:
    """Write r = p**v * u with numerator and denominator of u prime to p."""
    _check_odd_prime(p)
    r = Fraction(r)
    if r == 0:
        raise ZeroValuationError("zero has no p-adic valuation")
    num, den = r.numerator, r.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v, Fraction(num, den)


@dataclass(frozen=True)
class SquareClass:
    """An element of the square-class group, a bit vector under XOR.

    Width 1 for prime fields (non-residue flag); width 2 for p-adic fields
    (bit 0 = valuation parity, bit 1 = unit-part non-residue flag).
    """

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits or any(b not in (0, 1) for b in self.bits):
            raise ValueError(f"bits must be a nonempty 0/1 tuple, got {self.bits!r}")

    def __add__(self, other: "SquareClass") -> "SquareClass":
        if len(self.bits) != len(other.bits):
            raise ValueError("square classes from different fields")
        return SquareClass(tuple(a ^ b for a, b in zip(self.bits, other.bits)))

    @property
    def is_identity(self) -> bool:
        return not any(self.bits)

    @property
    def color_id(self) -> int:
        """Dense integer encoding, bits little-endian."""
        return sum(b << i for i, b in enumerate(self.bits))

    @staticmethod
    def identity(width: int) -> "SquareClass":
        return SquareClass((0,) * width)

    @staticmethod
    def from_color_id(color: int, width: int) -> "SquareClass":
        return SquareClass(tuple((color >> i) & 1 for i in range(width)))


def class_group_width(field: FieldTag) -> int:
    if field.kind == PRIME:
        return 1
    if field.kind == PADIC:
        return 2
    raise UnsupportedFieldError("the rationals have infinitely many square classes")


def square_class(field: FieldTag, x) -> SquareClass:
    """Square class of a nonzero element.

    Multiplicative: class(x*y) = class(x) + class(y), and squares map to
    the identity.  Undefined over the rationals (the group is infinite).
    """
    width = class_group_width(field)
    if width == 1:
        a = normalize_element(field, x)
        if a == 0:
            raise UndefinedClassError("zero has no square class")
        return SquareClass(((1 - legendre(a, field.p)) // 2,))
    r = Fraction(x)
    if r == 0:
        raise UndefinedClassError("zero has no square class")
    v, u = padic_split(r, field.p)
    unit = u.numerator * pow(u.denominator, -1, field.p) % field.p
    return SquareClass((v % 2, (1 - legendre(unit, field.p)) // 2))


def hensel_sqrt(r, p: int, k: int):
    """p-adic square root of r to working precision k.

    Splits r = p**v * u (v must be even, u a residue mod p), lifts the
    smaller base root of u by Newton iteration, and returns
    p**(v/2) * u_root with the smaller of the two final lifts chosen.  The
    result y satisfies v_p(y*y - r) >= k; it is an int when v >= 0 and a
    Fraction with a power of p in the denominator when v < 0.
    """
    _check_odd_prime(p)
    if not isinstance(k, int) or k < 1:
        raise InvalidFieldError(f"precision must be >= 1, got {k!r}")
    r = Fraction(r)
    if r == 0:
        raise ZeroValuationError("zero has no p-adic square root at finite precision")
    v, u = padic_split(r, p)
    if v % 2:
        raise OddValuationError(f"valuation {v} is odd; {r} is not a p-adic square")
    prec = k - v if v < 0 else k
    modulus = p**prec
    u_mod = u.numerator * pow(u.denominator, -1, modulus) % modulus
    if legendre(u_mod % p, p) != 1:
        raise NoSquareRootError(f"unit part {u} is not a square mod {p}")
    y = sqrt_mod_p(u_mod % p, p)
    reached = 1
    while reached < prec:
        reached = min(2 * reached, prec)
        q = p**reached
        y = (y + (u_mod % q) * pow(y, -1, q)) * pow(2, -1, q) % q
    y = min(y, modulus - y)
    half = v // 2
    if v >= 0:
        return p**half * y
    return Fraction(y, p**-half)


def least_nonresidue(p: int) -> int:
    """Smallest positive quadratic non-residue mod p."""
    n = 2
    while legendre(n, p) != -1:
        n += 1
    return n


@dataclass(frozen=True)
class SquareClassGroup:
    """The finite group of square classes with one representative per class.

    Order 2 for a prime field, 4 for a p-adic field.  representatives[i]
    lies in the class whose color_id is i.
    """

    field: FieldTag
    width: int
    representatives: tuple

    def class_of(self, x) -> SquareClass:
        return square_class(self.field, x)

    def __len__(self) -> int:
        return len(self.representatives)


def square_class_group(field: FieldTag) -> SquareClassGroup:
    """Representatives {1, n0} for a prime field, {1, n0, p, p*n0} p-adically,
    with n0 the least positive non-residue mod p."""
    width = class_group_width(field)
    n0 = least_nonresidue(field.p)
    if width == 1:
        return SquareClassGroup(field, 1, (1, n0))
    p = field.p
    return SquareClassGroup(
        field, 2, (Fraction(1), Fraction(n0), Fraction(p), Fraction(p * n0))
    )
