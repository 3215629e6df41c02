"""Prime-field arithmetic, GF(p^2), and the curve y^2 = x^3 + 1 over them.

Only primes p = 2 (mod 3) are accepted; for these the curve is supersingular
with p + 1 points over GF(p). GF(p^2) is GF(p)[b]/(b^2 - d) with d the
smallest quadratic non-residue mod p.

All values are immutable. Arithmetic is affine and not constant time.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

from sympy import isprime


class AlgebraError(ValueError):
    """Invalid parameters or mixed-modulus arithmetic."""


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of ``a`` mod odd prime ``p``, or None for non-residues.

    Uses the single exponentiation when p = 3 (mod 4), Tonelli-Shanks otherwise.
    """
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
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
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def cube_root_mod(a: int, p: int) -> int:
    # cubing is a bijection on GF(p) when p = 2 (mod 3)
    return pow(a % p, (2 * p - 1) // 3, p)


@lru_cache(maxsize=None)
def nonresidue(p: int) -> int:
    d = 2
    while legendre(d, p) != -1:
        d += 1
    return d


def check_prime(p: int) -> None:
    if p < 5 or not isprime(p):
        raise AlgebraError(f"p = {p} is not a usable prime")
    if p % 3 != 2:
        raise AlgebraError(f"p = {p} is not 2 mod 3; y^2 = x^3 + 1 is not supersingular")


def byte_len(p: int) -> int:
    return (p.bit_length() + 7) // 8


class Fp:
    """Element of GF(p), stored as its canonical representative."""

    __slots__ = ("value", "p")

    def __init__(self, value: int, p: int):
        self.value = value % p
        self.p = p

    def _coerce(self, other) -> int:
        if isinstance(other, Fp):
            if other.p != self.p:
                raise AlgebraError("modulus mismatch")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(self.value + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(self.value - o, self.p)

    def __rsub__(self, other):
        return Fp(other - self.value, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Fp(self.value * o, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * Fp(o, self.p).inverse()

    def __neg__(self):
        return Fp(-self.value, self.p)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** -k
        return Fp(pow(self.value, k, self.p), self.p)

    def inverse(self) -> Fp:
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero in GF(p)")
        return Fp(pow(self.value, -1, self.p), self.p)

    def is_zero(self) -> bool:
        return self.value == 0

    def lift(self) -> Fp2:
        return Fp2(self.value, 0, self.p)

    def __eq__(self, other):
        if isinstance(other, Fp):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __repr__(self):
        return f"Fp({self.value}, {self.p})"

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(byte_len(self.p), "big")


class Fp2:
    """Element c0 + c1*b of GF(p^2) with b^2 = nonresidue(p)."""

    __slots__ = ("a", "b", "p", "d")

    def __init__(self, c0: int, c1: int, p: int):
        self.a = c0 % p
        self.b = c1 % p
        self.p = p
        self.d = nonresidue(p)

    @classmethod
    def one(cls, p: int) -> Fp2:
        return cls(1, 0, p)

    @classmethod
    def zero(cls, p: int) -> Fp2:
        return cls(0, 0, p)

    @property
    def c0(self) -> Fp:
        return Fp(self.a, self.p)

    @property
    def c1(self) -> Fp:
        return Fp(self.b, self.p)

    def _coerce(self, other):
        if isinstance(other, Fp2):
            if other.p != self.p:
                raise AlgebraError("modulus mismatch")
            return other.a, other.b
        if isinstance(other, Fp):
            if other.p != self.p:
                raise AlgebraError("modulus mismatch")
            return other.value, 0
        if isinstance(other, int):
            return other, 0
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp2(self.a + o[0], self.b + o[1], self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp2(self.a - o[0], self.b - o[1], self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp2(o[0] - self.a, o[1] - self.b, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        x0, x1 = o
        return Fp2(self.a * x0 + self.d * self.b * x1, self.a * x1 + self.b * x0, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * Fp2(o[0], o[1], self.p).inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Fp2(o[0], o[1], self.p) * self.inverse()

    def __neg__(self):
        return Fp2(-self.a, -self.b, self.p)

    def __pow__(self, k: int):
        return fp2_pow(self, k)

    def norm(self) -> int:
        return (self.a * self.a - self.d * self.b * self.b) % self.p

    def conjugate(self) -> Fp2:
        return Fp2(self.a, -self.b, self.p)

    def inverse(self) -> Fp2:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in GF(p^2)")
        ninv = pow(n, -1, self.p)
        return Fp2(self.a * ninv, -self.b * ninv, self.p)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def is_one(self) -> bool:
        return self.a == 1 and self.b == 0

    def lift(self) -> Fp2:
        return self

    def __eq__(self, other):
        if isinstance(other, Fp2):
            return self.p == other.p and self.a == other.a and self.b == other.b
        if isinstance(other, (Fp, int)):
            o = self._coerce(other)
            return self.b == 0 and self.a == o[0] % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.p))

    def __repr__(self):
        return f"Fp2({self.a}, {self.b}, {self.p})"

    def to_bytes(self) -> bytes:
        n = byte_len(self.p)
        return self.a.to_bytes(n, "big") + self.b.to_bytes(n, "big")

    @classmethod
    def from_bytes(cls, data: bytes, p: int) -> Fp2:
        n = byte_len(p)
        if len(data) != 2 * n:
            raise AlgebraError("bad GF(p^2) encoding length")
        c0, c1 = int.from_bytes(data[:n], "big"), int.from_bytes(data[n:], "big")
        if c0 >= p or c1 >= p:
            raise AlgebraError("non-canonical GF(p^2) encoding")
        return cls(c0, c1, p)


def fp2_mul(a: Fp2, b: Fp2) -> Fp2:
    return a * b


def fp2_pow(a: Fp2, k: int) -> Fp2:
    """Left-to-right square-and-multiply; negative k inverts first."""
    if k < 0:
        return fp2_pow(a.inverse(), -k)
    result = Fp2.one(a.p)
    for bit in bin(k)[2:]:
        result = result * result
        if bit == "1":
            result = result * a
    return result


@lru_cache(maxsize=None)
def cube_root_of_unity(p: int) -> Fp2:
    """Lexicographically smallest primitive cube root of unity in GF(p^2)."""
    d = nonresidue(p)
    # zeta = (-1 +- sqrt(-3)) / 2 and sqrt(-3) = t*b with t^2 = -3/d
    t = sqrt_mod(-3 * pow(d, -1, p), p)
    half = pow(2, -1, p)
    roots = sorted(((-half) % p, (s * t * half) % p) for s in (1, -1))
    return Fp2(roots[0][0], roots[0][1], p)


class Point:
    """Affine point on y^2 = x^3 + 1, or the point at infinity.

    Coordinates are both Fp or both Fp2. Use :data:`INFINITY` for the identity.
    """

    __slots__ = ("x", "y")

    def __init__(self, x, y, check: bool = True):
        self.x = x
        self.y = y
        if check and x is not None and y * y != x * x * x + 1:
            raise AlgebraError(f"({x}, {y}) is not on y^2 = x^3 + 1")

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def on_curve(self) -> bool:
        return self.is_infinity or self.y * self.y == self.x * self.x * self.x + 1

    def __neg__(self) -> Point:
        if self.is_infinity:
            return self
        return Point(self.x, -self.y, check=False)

    def __add__(self, other: Point) -> Point:
        return point_add(self, other)

    def __sub__(self, other: Point) -> Point:
        return point_add(self, -other)

    def __rmul__(self, k: int) -> Point:
        return scalar_mul(k, self)

    def lift(self) -> Point:
        if self.is_infinity:
            return self
        return Point(self.x.lift(), self.y.lift(), check=False)

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        if self.is_infinity or other.is_infinity:
            return self.is_infinity and other.is_infinity
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        if self.is_infinity:
            return "Point(INFINITY)"
        return f"Point({self.x!r}, {self.y!r})"

    def to_bytes(self, p: int) -> bytes:
        if self.is_infinity:
            return b"\x00"
        return b"\x01" + self.x.to_bytes() + self.y.to_bytes()


INFINITY = Point(None, None, check=False)


def point_from_bytes(data: bytes, p: int) -> Point:
    """Decode a GF(p)-coordinate point; rejects off-curve encodings."""
    if data == b"\x00":
        return INFINITY
    n = byte_len(p)
    if len(data) != 1 + 2 * n or data[0] != 1:
        raise AlgebraError("bad point encoding")
    x, y = int.from_bytes(data[1 : 1 + n], "big"), int.from_bytes(data[1 + n :], "big")
    if x >= p or y >= p:
        raise AlgebraError("non-canonical point encoding")
    return Point(Fp(x, p), Fp(y, p))


def point_add(P1: Point, P2: Point) -> Point:
    if P1.is_infinity:
        return P2
    if P2.is_infinity:
        return P1
    if P1.x == P2.x:
        if P1.y == -P2.y:
            return INFINITY
        lam = (3 * P1.x * P1.x) / (2 * P1.y)
    else:
        lam = (P2.y - P1.y) / (P2.x - P1.x)
    x3 = lam * lam - P1.x - P2.x
    y3 = lam * (P1.x - x3) - P1.y
    return Point(x3, y3, check=False)


def scalar_mul(k: int, P1: Point) -> Point:
    if k < 0:
        raise AlgebraError("negative scalar")
    result = INFINITY
    addend = P1
    while k:
        if k & 1:
            result = point_add(result, addend)
        addend = point_add(addend, addend)
        k >>= 1
    return result


def point_from_y(y: int, p: int) -> Point:
    """The unique GF(p) point with ordinate ``y``."""
    x = cube_root_mod(y * y - 1, p)
    return Point(Fp(x, p), Fp(y, p))


@dataclass(frozen=True)
class CurveContext:
    """Curve y^2 = x^3 + 1 over GF(p) with a generator of its order-q subgroup."""

    p: int
    q: int
    P: Point

    @property
    def cofactor(self) -> int:
        return (self.p + 1) // self.q

    def in_subgroup(self, pt: Point) -> bool:
        if not pt.is_infinity:
            if not isinstance(pt.x, Fp) or pt.x.p != self.p or not pt.on_curve():
                return False
        return scalar_mul(self.q, pt).is_infinity

    def point_bytes(self) -> int:
        return 1 + 2 * byte_len(self.p)


def setup_curve(p: int, q: int, seed: int = 0, max_tries: int = 1000) -> CurveContext:
    """Build the context for (p, q), picking the generator from ``seed``.

    Candidates are curve points with seeded random ordinates; each is multiplied
    by the cofactor until a non-identity result appears.
    """
    check_prime(p)
    if q < 3 or not isprime(q):
        raise AlgebraError(f"q = {q} is not an odd prime")
    if (p + 1) % q:
        raise AlgebraError(f"q = {q} does not divide p + 1 = {p + 1}")
    h = (p + 1) // q
    rng = random.Random(seed)
    for _ in range(max_tries):
        G = scalar_mul(h, point_from_y(rng.randrange(p), p))
        if not G.is_infinity:
            return CurveContext(p, q, G)
    raise AlgebraError("no generator found; parameters are degenerate")
