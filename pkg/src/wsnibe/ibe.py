"""Boneh-Franklin BasicIdent: setup, extract, encrypt, decrypt.

Identities are byte strings. Messages are byte strings of exactly n/8 bytes.
All randomness comes from the explicit ``rng`` argument (``random.Random``).
H1 and H2 are both SHA-256, separated by a one-byte domain tag.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .algebra import (
    AlgebraError,
    CurveContext,
    Fp,
    Fp2,
    Point,
    byte_len,
    point_from_bytes,
    scalar_mul,
    setup_curve,
    sqrt_mod,
)
from .pairing import PairingError, modified_pairing

HASH_NAME = "sha256"
TAG_H1 = b"\x01"
TAG_H2 = b"\x02"
H1_ATTEMPTS = 256
DEFAULT_N = 256


class IBEError(ValueError):
    pass


def expand(tag: bytes, data: bytes, nbytes: int) -> bytes:
    """Counter-mode SHA-256: block i = H(tag || i || data), truncated to nbytes."""
    out = bytearray()
    i = 0
    while len(out) < nbytes:
        out += hashlib.sha256(tag + i.to_bytes(4, "big") + data).digest()
        i += 1
    return bytes(out[:nbytes])


def _as_id(ident) -> bytes:
    return ident.encode() if isinstance(ident, str) else bytes(ident)


def _lp(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


def _read_lp(data: bytes, pos: int) -> tuple[bytes, int]:
    if pos + 4 > len(data):
        raise IBEError("truncated field")
    n = int.from_bytes(data[pos : pos + 4], "big")
    end = pos + 4 + n
    if end > len(data):
        raise IBEError("truncated field")
    return data[pos + 4 : end], end


def _int_bytes(v: int) -> bytes:
    return v.to_bytes(max(1, (v.bit_length() + 7) // 8), "big")


@dataclass(frozen=True)
class PublicParams:
    ctx: CurveContext
    P_pub: Point
    n: int = DEFAULT_N
    hash_name: str = HASH_NAME

    def __post_init__(self):
        if self.n <= 0 or self.n % 8:
            raise IBEError("n must be a positive multiple of 8")

    @property
    def P(self) -> Point:
        return self.ctx.P

    @property
    def msg_bytes(self) -> int:
        return self.n // 8

    def to_bytes(self) -> bytes:
        p = self.ctx.p
        return b"".join(
            _lp(f)
            for f in (
                _int_bytes(p),
                _int_bytes(self.ctx.q),
                _int_bytes(self.n),
                self.ctx.P.to_bytes(p),
                self.P_pub.to_bytes(p),
            )
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> PublicParams:
        fields, pos = [], 0
        for _ in range(5):
            f, pos = _read_lp(data, pos)
            fields.append(f)
        if pos != len(data):
            raise IBEError("trailing bytes after public parameters")
        p, q, n = (int.from_bytes(f, "big") for f in fields[:3])
        try:
            P = point_from_bytes(fields[3], p)
            P_pub = point_from_bytes(fields[4], p)
        except AlgebraError as exc:
            raise IBEError(str(exc)) from exc
        ctx = CurveContext(p, q, P)
        if P.is_infinity or not ctx.in_subgroup(P) or not ctx.in_subgroup(P_pub):
            raise IBEError("public parameters are not in the order-q subgroup")
        return cls(ctx, P_pub, n)


@dataclass(frozen=True)
class MasterKey:
    s: int

    def __repr__(self):
        return "MasterKey(<secret>)"


@dataclass(frozen=True)
class PrivateKey:
    point: Point
    owner: bytes


@dataclass(frozen=True)
class Ciphertext:
    U: Point
    V: bytes

    def to_bytes(self, p: int) -> bytes:
        return self.U.to_bytes(p) + self.V

    @classmethod
    def from_bytes(cls, data: bytes, params: PublicParams) -> Ciphertext:
        p = params.ctx.p
        if data[:1] == b"\x00":
            ulen = 1
        else:
            ulen = params.ctx.point_bytes()
        if len(data) != ulen + params.msg_bytes:
            raise IBEError("ciphertext has the wrong length")
        try:
            U = point_from_bytes(data[:ulen], p)
        except AlgebraError as exc:
            raise IBEError(str(exc)) from exc
        return cls(U, data[ulen:])


def keygen(ctx: CurveContext, n: int, rng: random.Random) -> tuple[PublicParams, MasterKey]:
    """Draw a master key for an existing curve; also used per sub-network."""
    s = rng.randrange(1, ctx.q)
    return PublicParams(ctx, scalar_mul(s, ctx.P), n), MasterKey(s)


def setup(p: int, q: int, n: int, rng: random.Random,
          curve_seed: int = 0) -> tuple[PublicParams, MasterKey]:
    if n <= 0 or n % 8:
        raise IBEError("n must be a positive multiple of 8")
    return keygen(setup_curve(p, q, curve_seed), n, rng)


def h1_map_to_point(ident, ctx: CurveContext) -> Point:
    """Try-and-increment hash to the order-q subgroup.

    Candidate x comes from H(tag || id || counter); the last expanded byte
    picks the sign of y. The point is then multiplied by the cofactor.
    """
    ident = _as_id(ident)
    p = ctx.p
    nb = byte_len(p) + 8
    for ctr in range(H1_ATTEMPTS):
        buf = expand(TAG_H1, ident + bytes([ctr]), nb + 1)
        x = int.from_bytes(buf[:nb], "big") % p
        y = sqrt_mod(x * x * x + 1, p)
        if y is None:
            continue
        if buf[-1] & 1:
            y = (-y) % p
        Q = scalar_mul(ctx.cofactor, Point(Fp(x, p), Fp(y, p), check=False))
        if not Q.is_infinity:
            return Q
    raise IBEError(f"H1 failed after {H1_ATTEMPTS} attempts; parameters are broken")


def h2_hash(g: Fp2, n: int) -> bytes:
    if n % 8:
        raise IBEError("n must be a multiple of 8")
    return expand(TAG_H2, g.to_bytes(), n // 8)


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def extract(msk: MasterKey, ident, params: PublicParams) -> PrivateKey:
    ident = _as_id(ident)
    return PrivateKey(scalar_mul(msk.s, h1_map_to_point(ident, params.ctx)), ident)


def encrypt(params: PublicParams, ident, m: bytes, rng: random.Random) -> Ciphertext:
    if len(m) != params.msg_bytes:
        raise IBEError(f"message must be {params.msg_bytes} bytes, got {len(m)}")
    ctx = params.ctx
    Q = h1_map_to_point(ident, ctx)
    r = rng.randrange(1, ctx.q)
    g = modified_pairing(Q, params.P_pub, ctx, check=False)
    return Ciphertext(scalar_mul(r, ctx.P), _xor(m, h2_hash(g ** r, params.n)))


def decrypt(sk: PrivateKey, ct: Ciphertext, params: PublicParams) -> bytes:
    if len(ct.V) != params.msg_bytes:
        raise IBEError("ciphertext mask has the wrong length")
    try:
        g = modified_pairing(sk.point, ct.U, params.ctx)
    except PairingError as exc:
        raise IBEError(f"malformed ciphertext: {exc}") from exc
    return _xor(ct.V, h2_hash(g, params.n))


def seal(params: PublicParams, ident, data: bytes, rng: random.Random) -> list[Ciphertext]:
    """Encrypt an arbitrary-length payload as length-prefixed n-bit blocks."""
    blk = params.msg_bytes
    framed = len(data).to_bytes(4, "big") + data
    framed += bytes(-len(framed) % blk)
    return [encrypt(params, ident, framed[i : i + blk], rng) for i in range(0, len(framed), blk)]


def unseal(sk: PrivateKey, cts: list[Ciphertext], params: PublicParams) -> bytes:
    framed = b"".join(decrypt(sk, ct, params) for ct in cts)
    n = int.from_bytes(framed[:4], "big")
    if 4 + n > len(framed) or any(framed[4 + n :]):
        raise IBEError("sealed payload is malformed")
    return framed[4 : 4 + n]

