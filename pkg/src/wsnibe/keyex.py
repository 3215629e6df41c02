"""Diffie-Hellman over Z_q*, session-key derivation, and the hash-keystream cipher.

The same SHA-256 serves the KDF and the keystream under distinct tags. The
symmetric layer gives confidentiality only; there is no authentication tag.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from sympy import factorint, isprime

TAG_KDF = b"\x10"
TAG_STREAM = b"\x11"
NONCE_BYTES = 12


class KeyExchangeError(ValueError):
    pass


def smallest_primitive_root(q: int) -> int:
    if q == 2:
        return 1
    factors = list(factorint(q - 1))
    for g in range(2, q):
        if all(pow(g, (q - 1) // f, q) != 1 for f in factors):
            return g
    raise KeyExchangeError(f"no primitive root mod {q}")


@dataclass(frozen=True)
class DhGroup:
    q: int
    eta: int

    def __post_init__(self):
        if not isprime(self.q) or self.q < 5:
            raise KeyExchangeError(f"DH modulus {self.q} is not a usable prime")
        if not 2 <= self.eta <= self.q - 1:
            raise KeyExchangeError("generator out of range")
        if any(pow(self.eta, (self.q - 1) // f, self.q) == 1 for f in factorint(self.q - 1)):
            raise KeyExchangeError(f"{self.eta} is not a primitive root mod {self.q}")

    @classmethod
    def for_prime(cls, q: int) -> DhGroup:
        return cls(q, smallest_primitive_root(q))

    @property
    def width(self) -> int:
        return (self.q.bit_length() + 7) // 8


@dataclass(frozen=True)
class DhKeyPair:
    X: int = field(repr=False)
    Y: int

    @classmethod
    def from_secret(cls, group: DhGroup, X: int) -> DhKeyPair:
        if not 1 <= X < group.q:
            raise KeyExchangeError("secret exponent out of range")
        return cls(X, pow(group.eta, X, group.q))


@dataclass(frozen=True)
class SessionKey:
    K: int = field(repr=False)
    key: bytes = field(repr=False)
    epoch: int
    peers: tuple[bytes, bytes]

    def fingerprint(self) -> str:
        return hashlib.sha256(b"fp" + self.key).hexdigest()[:8]


def dh_generate(group: DhGroup, rng: random.Random) -> DhKeyPair:
    return DhKeyPair.from_secret(group, rng.randrange(1, group.q))


def check_public(Y: int, group: DhGroup) -> None:
    """Reject out-of-range and degenerate parameters {0, 1, q-1}."""
    if not 2 <= Y <= group.q - 2:
        raise KeyExchangeError(f"degenerate or out-of-range DH parameter {Y}")


def derive_key(K: int, ids: tuple[bytes, bytes], epoch: int, group: DhGroup) -> bytes:
    a, b = sorted(ids)
    h = hashlib.sha256()
    h.update(TAG_KDF)
    h.update(K.to_bytes(group.width, "big"))
    for ident in (a, b):
        h.update(len(ident).to_bytes(4, "big") + ident)
    h.update(epoch.to_bytes(4, "big"))
    return h.digest()


def dh_shared(own: DhKeyPair, peer_Y: int, group: DhGroup, own_id: bytes = b"",
              peer_id: bytes = b"", epoch: int = 0) -> SessionKey:
    check_public(peer_Y, group)
    K = pow(peer_Y, own.X, group.q)
    peers = tuple(sorted((own_id, peer_id)))
    return SessionKey(K, derive_key(K, peers, epoch, group), epoch, peers)


def keystream(key: SessionKey, nonce: bytes, length: int) -> bytes:
    if len(nonce) != NONCE_BYTES:
        raise KeyExchangeError(f"nonce must be {NONCE_BYTES} bytes")
    out = bytearray()
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(TAG_STREAM + key.key + nonce + counter.to_bytes(4, "big")).digest()
        counter += 1
    return bytes(out[:length])


def sym_encrypt(key: SessionKey, nonce: bytes, plaintext: bytes) -> bytes:
    ks = keystream(key, nonce, len(plaintext))
    return bytes(a ^ b for a, b in zip(plaintext, ks))


sym_decrypt = sym_encrypt


def seal_frame(key: SessionKey, nonce: bytes, plaintext: bytes) -> bytes:
    """Symmetric frame: nonce || ciphertext."""
    return nonce + sym_encrypt(key, nonce, plaintext)


def open_frame(key: SessionKey, frame: bytes) -> bytes:
    if len(frame) < NONCE_BYTES:
        raise KeyExchangeError("frame shorter than its nonce")
    return sym_decrypt(key, frame[:NONCE_BYTES], frame[NONCE_BYTES:])
