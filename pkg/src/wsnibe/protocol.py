"""Three-message negotiation between a cluster head and a node or base station.

    head  -> all : Broadcast(Id_A)
    node  -> head: Response = IBE_enc(Id_A, Y_B || Id_B)
    head  -> node: Reply    = IBE_enc(Id_B, Y_A || Id_A)

Both ends then hold K = eta^(X_A X_B) mod q. The head uses a fresh DH key pair
for every peer. States are mutated in place by their single owner.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum, IntEnum

from .ibe import Ciphertext, IBEError, PrivateKey, PublicParams, decrypt, encrypt
from .keyex import (
    DhGroup,
    DhKeyPair,
    KeyExchangeError,
    SessionKey,
    check_public,
    dh_generate,
    dh_shared,
)


class ProtocolError(ValueError):
    pass


class Role(Enum):
    HEAD = "head"
    NODE = "node"
    BASE_STATION = "base_station"


class Phase(Enum):
    IDLE = "idle"
    AWAITING_RESPONSE = "awaiting_response"
    AWAITING_REPLY = "awaiting_reply"
    ESTABLISHED = "established"


class Kind(IntEnum):
    BROADCAST = 1
    RESPONSE = 2
    REPLY = 3


@dataclass(frozen=True)
class NegotiationMessage:
    kind: Kind
    sender: bytes
    payload: bytes
    epoch: int

    def to_bytes(self) -> bytes:
        return (
            bytes([self.kind])
            + self.epoch.to_bytes(4, "big")
            + len(self.sender).to_bytes(4, "big")
            + self.sender
            + len(self.payload).to_bytes(4, "big")
            + self.payload
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> NegotiationMessage:
        try:
            kind = Kind(data[0])
            epoch = int.from_bytes(data[1:5], "big")
            slen = int.from_bytes(data[5:9], "big")
            sender = data[9 : 9 + slen]
            pos = 9 + slen
            plen = int.from_bytes(data[pos : pos + 4], "big")
            payload = data[pos + 4 : pos + 4 + plen]
        except (IndexError, ValueError) as exc:
            raise ProtocolError(f"unparseable message: {exc}") from exc
        if len(sender) != slen or len(payload) != plen or pos + 4 + plen != len(data):
            raise ProtocolError("message length fields are inconsistent")
        return cls(kind, sender, payload, epoch)


@dataclass
class NegotiationState:
    role: Role
    own_id: bytes
    group: DhGroup
    epoch: int = 0
    phase: Phase = Phase.IDLE
    keypair: DhKeyPair | None = field(default=None, repr=False)
    # node side: the head whose broadcast we answered
    head_id: bytes | None = None
    peers: dict[bytes, SessionKey] = field(default_factory=dict, repr=False)


def encode_payload(Y: int, ident: bytes, group: DhGroup, size: int) -> bytes:
    """4-byte length || Y || 4-byte length || Id, zero-padded to ``size`` bytes."""
    yb = Y.to_bytes(group.width, "big")
    body = len(yb).to_bytes(4, "big") + yb + len(ident).to_bytes(4, "big") + ident
    if len(body) > size:
        raise ProtocolError(f"payload of {len(body)} bytes exceeds the {size}-byte IBE block")
    return body + bytes(size - len(body))


def decode_payload(data: bytes, group: DhGroup) -> tuple[int, bytes]:
    """Inverse of encode_payload; any deviation from the exact layout is rejected."""
    ylen = int.from_bytes(data[:4], "big")
    if ylen != group.width or 8 + ylen > len(data):
        raise ProtocolError("malformed payload: bad Y length")
    Y = int.from_bytes(data[4 : 4 + ylen], "big")
    pos = 4 + ylen
    ilen = int.from_bytes(data[pos : pos + 4], "big")
    end = pos + 4 + ilen
    if end > len(data) or any(data[end:]):
        raise ProtocolError("malformed payload: bad Id length or padding")
    try:
        check_public(Y, group)
    except KeyExchangeError as exc:
        raise ProtocolError(f"malformed payload: {exc}") from exc
    return Y, data[pos + 4 : end]


def _open(msg: NegotiationMessage, sk: PrivateKey, params: PublicParams, group: DhGroup):
    try:
        ct = Ciphertext.from_bytes(msg.payload, params)
        plain = decrypt(sk, ct, params)
    except IBEError as exc:
        raise ProtocolError(f"undecryptable payload: {exc}") from exc
    return decode_payload(plain, group)


def head_broadcast(state: NegotiationState, epoch: int) -> NegotiationMessage:
    if state.role is not Role.HEAD:
        raise ProtocolError(f"{state.role.value} cannot broadcast")
    if epoch != state.epoch:
        state.peers.clear()
    state.epoch = epoch
    state.phase = Phase.AWAITING_RESPONSE
    return NegotiationMessage(Kind.BROADCAST, state.own_id, state.own_id, epoch)


def respond_to_broadcast(state: NegotiationState, msg: NegotiationMessage,
                         params: PublicParams, rng: random.Random) -> NegotiationMessage:
    if state.role is Role.HEAD:
        raise ProtocolError("a head does not answer broadcasts")
    if msg.kind is not Kind.BROADCAST or msg.payload != msg.sender or not msg.sender:
        raise ProtocolError("malformed broadcast")
    restart = state.phase is Phase.ESTABLISHED and msg.epoch > state.epoch
    if state.phase is not Phase.IDLE and not restart:
        raise ProtocolError(f"cannot answer a broadcast in phase {state.phase.value}")
    state.keypair = dh_generate(state.group, rng)
    state.head_id = msg.sender
    state.epoch = msg.epoch
    body = encode_payload(state.keypair.Y, state.own_id, state.group, params.msg_bytes)
    ct = encrypt(params, msg.sender, body, rng)
    state.phase = Phase.AWAITING_REPLY
    return NegotiationMessage(Kind.RESPONSE, state.own_id, ct.to_bytes(params.ctx.p), msg.epoch)


def head_handle_response(state: NegotiationState, msg: NegotiationMessage, sk: PrivateKey,
                         params: PublicParams, rng: random.Random
                         ) -> tuple[NegotiationMessage, SessionKey]:
    if state.role is not Role.HEAD or state.phase is not Phase.AWAITING_RESPONSE:
        raise ProtocolError("head is not awaiting responses")
    if msg.kind is not Kind.RESPONSE:
        raise ProtocolError(f"expected a response, got {msg.kind.name}")
    if msg.epoch != state.epoch:
        raise ProtocolError(f"stale response for epoch {msg.epoch}, head is at {state.epoch}")
    Y_B, id_B = _open(msg, sk, params, state.group)
    if id_B != msg.sender:
        raise ProtocolError("response sender does not match the encrypted identity")
    kp = dh_generate(state.group, rng)
    body = encode_payload(kp.Y, state.own_id, state.group, params.msg_bytes)
    ct = encrypt(params, id_B, body, rng)
    key = dh_shared(kp, Y_B, state.group, state.own_id, id_B, state.epoch)
    state.peers[id_B] = key
    reply = NegotiationMessage(Kind.REPLY, state.own_id, ct.to_bytes(params.ctx.p), state.epoch)
    return reply, key


def finalize_session(state: NegotiationState, msg: NegotiationMessage, sk: PrivateKey,
                     params: PublicParams) -> SessionKey:
    if state.phase is not Phase.AWAITING_REPLY:
        raise ProtocolError(f"no exchange awaiting a reply (phase {state.phase.value})")
    if msg.kind is not Kind.REPLY:
        raise ProtocolError(f"expected a reply, got {msg.kind.name}")
    if msg.sender != state.head_id or msg.epoch != state.epoch:
        raise ProtocolError("reply for an unknown exchange")
    Y_A, id_A = _open(msg, sk, params, state.group)
    if id_A != state.head_id:
        raise ProtocolError("reply identity does not match the head")
    key = dh_shared(state.keypair, Y_A, state.group, state.own_id, id_A, state.epoch)
    state.peers[id_A] = key
    state.phase = Phase.ESTABLISHED
    return key


def negotiate(head: NegotiationState, peer: NegotiationState, head_sk: PrivateKey,
              peer_sk: PrivateKey, params: PublicParams, epoch: int,
              rng: random.Random) -> tuple[SessionKey, list[bytes]]:
    """Run one full exchange over the wire format.

    Returns the agreed key and the three serialized messages.
    """
    if head.phase is not Phase.AWAITING_RESPONSE or head.epoch != epoch:
        bcast = head_broadcast(head, epoch)
    else:
        bcast = NegotiationMessage(Kind.BROADCAST, head.own_id, head.own_id, epoch)
    wire = [bcast.to_bytes()]
    resp = respond_to_broadcast(peer, NegotiationMessage.from_bytes(wire[0]), params, rng)
    wire.append(resp.to_bytes())
    reply, head_key = head_handle_response(
        head, NegotiationMessage.from_bytes(wire[1]), head_sk, params, rng)
    wire.append(reply.to_bytes())
    peer_key = finalize_session(peer, NegotiationMessage.from_bytes(wire[2]), peer_sk, params)
    if head_key.key != peer_key.key:
        raise ProtocolError("endpoints derived different session keys")
    return head_key, wire
