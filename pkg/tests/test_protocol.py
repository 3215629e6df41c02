import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from wsnibe.ibe import extract, setup
from wsnibe.keyex import DhGroup
from wsnibe.params import SIM34
from wsnibe.protocol import (
    Kind,
    NegotiationMessage,
    NegotiationState,
    Phase,
    ProtocolError,
    Role,
    decode_payload,
    encode_payload,
    finalize_session,
    head_broadcast,
    head_handle_response,
    negotiate,
    respond_to_broadcast,
)

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def world():
    params, msk = setup(SIM34.p, SIM34.q, 256, random.Random(11))
    group = DhGroup.for_prime(SIM34.q)
    keys = {i: extract(msk, i, params) for i in (b"H", b"N1", b"N2", b"BS")}
    return params, group, keys


def _pair(group, peer=b"N1", role=Role.NODE):
    return NegotiationState(Role.HEAD, b"H", group), NegotiationState(role, peer, group)


def test_golden_transcript():
    rng = random.Random(2024)
    params, msk = setup(SIM34.p, SIM34.q, 256, rng)
    group = DhGroup.for_prime(SIM34.q)
    head = NegotiationState(Role.HEAD, b"H01", group)
    node = NegotiationState(Role.NODE, b"N042", group)
    key, wire = negotiate(head, node, extract(msk, b"H01", params),
                          extract(msk, b"N042", params), params, 1, rng)
    lines = (GOLDEN / "transcript_sim34.txt").read_text().split()
    assert [w.hex() for w in wire] + [key.key.hex()] == lines


def test_agreement_node_and_base_station(world):
    params, group, keys = world
    rng = random.Random(1)
    for peer, role in ((b"N1", Role.NODE), (b"BS", Role.BASE_STATION)):
        head, node = _pair(group, peer, role)
        key, wire = negotiate(head, node, keys[b"H"], keys[peer], params, 1, rng)
        assert node.peers[b"H"].key == key.key
        assert head.peers[peer].key == key.key
        assert node.phase is Phase.ESTABLISHED
        assert [w[0] for w in wire] == [1, 2, 3]


def test_fresh_keypair_per_peer(world):
    params, group, keys = world
    rng = random.Random(2)
    head = NegotiationState(Role.HEAD, b"H", group)
    n1 = NegotiationState(Role.NODE, b"N1", group)
    n2 = NegotiationState(Role.NODE, b"N2", group)
    k1, w1 = negotiate(head, n1, keys[b"H"], keys[b"N1"], params, 1, rng)
    k2, w2 = negotiate(head, n2, keys[b"H"], keys[b"N2"], params, 1, rng)
    assert k1.key != k2.key
    assert w1[0] == w2[0]  # one broadcast serves the whole round
    assert set(head.peers) == {b"N1", b"N2"}


def test_message_codec():
    msg = NegotiationMessage(Kind.RESPONSE, b"N1", b"\x01\x02", 9)
    assert NegotiationMessage.from_bytes(msg.to_bytes()) == msg
    raw = msg.to_bytes()
    for bad in (raw[:-1], raw + b"\x00", b"\x07" + raw[1:], b""):
        with pytest.raises(ProtocolError):
            NegotiationMessage.from_bytes(bad)


def test_payload_codec():
    g = DhGroup.for_prime(1019)
    body = encode_payload(500, b"node", g, 32)
    assert len(body) == 32
    assert decode_payload(body, g) == (500, b"node")
    with pytest.raises(ProtocolError):
        decode_payload(body[:-1] + b"\x01", g)  # non-zero padding
    with pytest.raises(ProtocolError):
        decode_payload(encode_payload(1, b"node", g, 32), g)  # degenerate Y
    with pytest.raises(ProtocolError):
        decode_payload(b"\x00\x00\x00\x05" + bytes(28), g)
    with pytest.raises(ProtocolError):
        encode_payload(500, b"x" * 40, g, 32)


def test_out_of_order_rejected(world):
    params, group, keys = world
    rng = random.Random(3)
    head, node = _pair(group)
    bcast = head_broadcast(head, 1)
    # node cannot finalize before responding
    with pytest.raises(ProtocolError):
        finalize_session(node, NegotiationMessage(Kind.REPLY, b"H", b"", 1), keys[b"N1"], params)
    resp = respond_to_broadcast(node, bcast, params, rng)
    # a second broadcast in the same epoch is ignored as a protocol error
    with pytest.raises(ProtocolError):
        respond_to_broadcast(node, bcast, params, rng)
    # the head will not treat a broadcast as a response
    with pytest.raises(ProtocolError):
        head_handle_response(head, bcast, keys[b"H"], params, rng)
    # only heads broadcast, heads never respond
    with pytest.raises(ProtocolError):
        head_broadcast(node, 1)
    with pytest.raises(ProtocolError):
        respond_to_broadcast(head, bcast, params, rng)
    reply, _ = head_handle_response(head, resp, keys[b"H"], params, rng)
    finalize_session(node, reply, keys[b"N1"], params)
    # replaying the reply after completion fails
    with pytest.raises(ProtocolError):
        finalize_session(node, reply, keys[b"N1"], params)


def test_stale_epoch_rejected(world):
    params, group, keys = world
    rng = random.Random(4)
    head, node = _pair(group)
    resp = respond_to_broadcast(node, head_broadcast(head, 1), params, rng)
    head_broadcast(head, 2)
    with pytest.raises(ProtocolError):
        head_handle_response(head, resp, keys[b"H"], params, rng)


def test_established_node_restarts_on_newer_epoch(world):
    params, group, keys = world
    rng = random.Random(5)
    head, node = _pair(group)
    k1, _ = negotiate(head, node, keys[b"H"], keys[b"N1"], params, 1, rng)
    k2, _ = negotiate(head, node, keys[b"H"], keys[b"N1"], params, 2, rng)
    assert k1.key != k2.key and k2.epoch == 2
    head_broadcast(head, 2)
    with pytest.raises(ProtocolError):
        respond_to_broadcast(node, head_broadcast(head, 2), params, rng)


def test_impersonation_detected(world):
    params, group, keys = world
    rng = random.Random(6)
    head, node = _pair(group)
    resp = respond_to_broadcast(node, head_broadcast(head, 1), params, rng)
    forged = NegotiationMessage(Kind.RESPONSE, b"N2", resp.payload, resp.epoch)
    with pytest.raises(ProtocolError):
        head_handle_response(head, forged, keys[b"H"], params, rng)


def test_wrong_private_key_cannot_open(world):
    params, group, keys = world
    rng = random.Random(7)
    head, node = _pair(group)
    resp = respond_to_broadcast(node, head_broadcast(head, 1), params, rng)
    with pytest.raises(ProtocolError):
        head_handle_response(head, resp, keys[b"N2"], params, rng)


def test_reply_from_other_head_rejected(world):
    params, group, keys = world
    rng = random.Random(8)
    head, node = _pair(group)
    resp = respond_to_broadcast(node, head_broadcast(head, 1), params, rng)
    reply, _ = head_handle_response(head, resp, keys[b"H"], params, rng)
    spoofed = NegotiationMessage(Kind.REPLY, b"N2", reply.payload, reply.epoch)
    with pytest.raises(ProtocolError):
        finalize_session(node, spoofed, keys[b"N1"], params)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 2**31))
def test_agreement_property(seed, epoch):
    params, msk = setup(1019, 17, 256, random.Random(seed))
    group = DhGroup.for_prime(1019)
    rng = random.Random(seed + 1)
    head = NegotiationState(Role.HEAD, b"H", group)
    node = NegotiationState(Role.NODE, b"N", group)
    key, _ = negotiate(head, node, extract(msk, b"H", params), extract(msk, b"N", params),
                       params, epoch, rng)
    assert node.peers[b"H"].key == key.key and key.epoch == epoch
