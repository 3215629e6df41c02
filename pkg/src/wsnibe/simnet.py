"""Deterministic simulation of the hierarchical network lifecycle.

A run goes: ``init_network`` (deploy nodes holding the global parameters and
their factory keys), ``elect_cluster_heads``, ``run_initialization`` (each
head negotiates with the base station and its members, then becomes the PKG
of its sub-network), followed by scripted events: node addition, revocation,
head compromise with recovery, and periodic re-keying.

Every random draw comes from an rng derived from (seed, subnet, epoch, purpose),
so a sub-network's state depends only on its own events.
"""
from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .algebra import CurveContext, point_from_bytes, setup_curve
from .ibe import (
    IBEError,
    MasterKey,
    PrivateKey,
    PublicParams,
    extract,
    h1_map_to_point,
    keygen,
    seal,
    unseal,
)
from .keyex import DhGroup, KeyExchangeError, SessionKey, open_frame, seal_frame
from .pairing import modified_pairing
from .params import SIM34
from .protocol import NegotiationState, ProtocolError, Role, head_broadcast, negotiate

BS_ID = b"BS"
NEGOTIATION_ERRORS = (ProtocolError, KeyExchangeError, IBEError)


class SimulationError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


class NodeRole(Enum):
    BASE_STATION = "base_station"
    CLUSTER_HEAD = "cluster_head"
    SENSOR = "sensor"


@dataclass(frozen=True)
class SimConfig:
    node_count: int = 100
    subnet_count: int = 5
    comm_range: float = 1.5
    p: int = SIM34.p
    q: int = SIM34.q
    n: int = 256
    curve_seed: int = 0
    # separate DH prime for toy curves whose q is too small
    dh_prime: int | None = None

    def validate(self) -> None:
        if self.node_count < 1 or self.subnet_count < 1:
            raise ConfigError("node_count and subnet_count must be positive")
        if self.subnet_count >= self.node_count:
            raise ConfigError("need more nodes than sub-networks")
        if not self.comm_range > 0:
            raise ConfigError("communication range must be positive")


def derive_rng(seed: int, *labels) -> random.Random:
    digest = hashlib.sha256(repr((seed,) + labels).encode()).digest()
    return random.Random(int.from_bytes(digest, "big"))


def _hex(b: bytes) -> str:
    return b.hex()


@dataclass
class NodeRecord:
    id: bytes
    position: tuple[float, float]
    role: NodeRole
    factory_key: PrivateKey
    private_key: PrivateKey
    params: PublicParams
    subnet: int | None = None
    session_keys: dict[bytes, SessionKey] = field(default_factory=dict)
    compromised: bool = False
    revoked: bool = False
    master_key: MasterKey | None = None

    def snapshot(self) -> dict:
        p = self.params.ctx.p
        out = {
            "id": self.id.decode(),
            "position": list(self.position),
            "role": self.role.value,
            "subnet": self.subnet,
            "factory_key": _hex(self.factory_key.point.to_bytes(p)),
            "private_key": _hex(self.private_key.point.to_bytes(p)),
            "params": _hex(self.params.to_bytes()),
            "session_keys": {
                k.decode(): {"key": _hex(v.key), "epoch": v.epoch}
                for k, v in sorted(self.session_keys.items())
            },
            "compromised": self.compromised,
            "revoked": self.revoked,
        }
        if self.master_key is not None:
            out["master_key"] = format(self.master_key.s, "x")
        return out


@dataclass
class SubnetState:
    index: int
    head: bytes
    members: list[bytes]
    master_key: MasterKey | None = None
    params: PublicParams | None = None
    epoch: int = 0

    def snapshot(self) -> dict:
        return {
            "index": self.index,
            "head": self.head.decode(),
            "members": [m.decode() for m in self.members],
            "master_key": None if self.master_key is None else format(self.master_key.s, "x"),
            "params": None if self.params is None else _hex(self.params.to_bytes()),
            "epoch": self.epoch,
        }


@dataclass
class NetworkState:
    config: SimConfig
    seed: int
    params: PublicParams
    dh: DhGroup
    nodes: dict[bytes, NodeRecord]
    subnets: list[SubnetState] = field(default_factory=list)
    registry: set[bytes] = field(default_factory=set)
    revoked: list[bytes] = field(default_factory=list)
    log: list[str] = field(default_factory=list)
    wire: list[bytes] = field(default_factory=list)
    frame_counter: int = 0

    @property
    def ctx(self) -> CurveContext:
        return self.params.ctx

    @property
    def base_station(self) -> NodeRecord:
        return self.nodes[BS_ID]

    def subnet_of(self, ident: bytes) -> SubnetState:
        node = self.nodes[ident]
        if node.subnet is None:
            raise SimulationError(f"{ident!r} is not in a sub-network")
        return self.subnets[node.subnet]

    def snapshot(self) -> dict:
        return {
            "seed": self.seed,
            "nodes": [n.snapshot() for _, n in sorted(self.nodes.items())],
            "subnets": [s.snapshot() for s in self.subnets],
            "revoked": [r.decode() for r in self.revoked],
            "log": self.log,
        }

    def subnet_snapshot(self, index: int) -> str:
        """Canonical JSON of one sub-network: its state, head and members."""
        sub = self.subnets[index]
        ids = [sub.head] + sub.members
        return json.dumps(
            {"subnet": sub.snapshot(), "nodes": [self.nodes[i].snapshot() for i in ids]},
            sort_keys=True,
        )

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.snapshot(), sort_keys=True).encode()).hexdigest()


def _log(state: NetworkState, event: str, **fields) -> None:
    parts = [f"{len(state.log):05d}", event]
    parts += [f"{k}={v.decode() if isinstance(v, bytes) else v}" for k, v in fields.items()]
    state.log.append(" ".join(parts))


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def init_network(config: SimConfig, seed: int) -> NetworkState:
    """Deploy the base station and ``node_count`` sensors with global keys."""
    config.validate()
    ctx = setup_curve(config.p, config.q, config.curve_seed)
    params, msk = keygen(ctx, config.n, derive_rng(seed, "root-pkg"))
    dh = DhGroup.for_prime(config.dh_prime or config.q)
    bs_key = extract(msk, BS_ID, params)
    nodes = {
        BS_ID: NodeRecord(BS_ID, (0.5, 0.5), NodeRole.BASE_STATION, bs_key, bs_key, params,
                          master_key=msk)
    }
    rng = derive_rng(seed, "topology")
    width = max(3, len(str(config.node_count - 1)))
    for i in range(config.node_count):
        ident = f"N{i:0{width}d}".encode()
        key = extract(msk, ident, params)
        nodes[ident] = NodeRecord(ident, (rng.random(), rng.random()), NodeRole.SENSOR,
                                  key, key, params)
    state = NetworkState(config, seed, params, dh, nodes, registry=set(nodes))
    _log(state, "INIT", nodes=config.node_count, p=config.p, q=config.q, n=config.n,
         dh_q=dh.q, eta=dh.eta)
    return state


def grid_cells(N: int) -> list[tuple[float, float, float, float]]:
    """Split the unit square into N near-square cells, row by row.

    With r = floor(sqrt(N)) rows, the last N mod r rows get one extra column.
    """
    rows = math.isqrt(N)
    base, extra = divmod(N, rows)
    cells = []
    for r in range(rows):
        cols = base + (1 if r >= rows - extra else 0)
        for c in range(cols):
            cells.append((c / cols, r / rows, (c + 1) / cols, (r + 1) / rows))
    return cells


def _cell_index(pos, N: int) -> int:
    rows = math.isqrt(N)
    base, extra = divmod(N, rows)
    r = min(int(pos[1] * rows), rows - 1)
    start = sum(base + (1 if i >= rows - extra else 0) for i in range(r))
    cols = base + (1 if r >= rows - extra else 0)
    return start + min(int(pos[0] * cols), cols - 1)


def max_cell_diagonal(N: int) -> float:
    return max(math.hypot(x1 - x0, y1 - y0) for x0, y0, x1, y1 in grid_cells(N))


def elect_cluster_heads(state: NetworkState) -> dict[bytes, int]:
    """Pick one head per grid cell, then attach every sensor to its nearest head."""
    if state.subnets:
        raise SimulationError("cluster heads are already elected")
    sensors = [n for i, n in sorted(state.nodes.items()) if n.role is NodeRole.SENSOR]
    N = state.config.subnet_count
    while True:
        buckets: list[list[NodeRecord]] = [[] for _ in range(N)]
        for node in sensors:
            buckets[_cell_index(node.position, N)].append(node)
        if all(buckets):
            break
        _log(state, "REPARTITION", cells=N, to=N - 1, reason="empty-cell")
        N -= 1
    cells = grid_cells(N)
    heads = []
    for cell, bucket in zip(cells, buckets):
        centre = ((cell[0] + cell[2]) / 2, (cell[1] + cell[3]) / 2)
        heads.append(min(bucket, key=lambda n: (_dist(n.position, centre), n.id)))
    assignment = {}
    members: list[list[bytes]] = [[] for _ in heads]
    head_index = {h.id: i for i, h in enumerate(heads)}
    for node in sensors:
        idx = head_index.get(node.id)
        if idx is None:
            idx = min(range(len(heads)),
                      key=lambda i: (_dist(node.position, heads[i].position), i))
        assignment[node.id] = idx
        node.subnet = idx
        if node is not heads[idx]:
            members[idx].append(node.id)
    for i, head in enumerate(heads):
        head.role = NodeRole.CLUSTER_HEAD
        state.subnets.append(SubnetState(i, head.id, sorted(members[i])))
        _log(state, "ELECT", subnet=i, head=head.id, members=len(members[i]))
    return assignment


def connectivity(state: NetworkState) -> float:
    """Fraction of sensors within communication range of their head."""
    total = covered = 0
    for sub in state.subnets:
        head = state.nodes[sub.head]
        for m in sub.members:
            total += 1
            covered += _dist(state.nodes[m].position, head.position) <= state.config.comm_range
    return covered / total if total else 1.0


def _negotiate(state: NetworkState, sub: SubnetState, head_ns: NegotiationState, peer_id: bytes,
               params: PublicParams, epoch: int, rng: random.Random, tag: str) -> SessionKey:
    head = state.nodes[sub.head]
    peer = state.nodes[peer_id]
    use_factory = params is state.params
    role = Role.BASE_STATION if peer.role is NodeRole.BASE_STATION else Role.NODE
    peer_ns = NegotiationState(role, peer_id, state.dh)
    key, wire = negotiate(
        head_ns, peer_ns,
        head.factory_key if use_factory else head.private_key,
        peer.factory_key if use_factory else peer.private_key,
        params, epoch, rng,
    )
    state.wire.extend(wire[1:])
    head.session_keys[peer_id] = key
    peer.session_keys[head.id] = peer_ns.peers[head.id]
    _log(state, "NEGOTIATE", subnet=sub.index, epoch=epoch, round=tag, head=head.id,
         peer=peer_id, key=key.fingerprint())
    return key


def _start_round(state: NetworkState, sub: SubnetState, epoch: int) -> NegotiationState:
    head_ns = NegotiationState(Role.HEAD, sub.head, state.dh)
    state.wire.append(head_broadcast(head_ns, epoch).to_bytes())
    _log(state, "BROADCAST", subnet=sub.index, epoch=epoch, head=sub.head)
    return head_ns


def _verify_key(ctx: CurveContext, ident: bytes, K, P_pub) -> bool:
    return modified_pairing(K, ctx.P, ctx) == modified_pairing(h1_map_to_point(ident, ctx), P_pub, ctx)


def _new_pkg(state: NetworkState, sub: SubnetState, epoch: int) -> None:
    sub.params, sub.master_key = keygen(state.ctx, state.config.n,
                                        derive_rng(state.seed, "subnet", sub.index, epoch, "pkg"))
    head = state.nodes[sub.head]
    head.params = sub.params
    head.private_key = extract(sub.master_key, head.id, sub.params)


def _distribute(state: NetworkState, sub: SubnetState, member_id: bytes, epoch: int,
                rng: random.Random) -> None:
    """Head sends (P_pub_i, K_Id) to a member under their session key."""
    p = state.ctx.p
    head = state.nodes[sub.head]
    member = state.nodes[member_id]
    sk = extract(sub.master_key, member_id, sub.params)
    frame = seal_frame(head.session_keys[member_id], rng.randbytes(12),
                       sub.params.P_pub.to_bytes(p) + sk.point.to_bytes(p))
    state.wire.append(frame)
    plain = open_frame(member.session_keys[head.id], frame)
    width = state.ctx.point_bytes()
    P_pub = point_from_bytes(plain[:width], p)
    K = point_from_bytes(plain[width:], p)
    if not _verify_key(state.ctx, member_id, K, P_pub):
        raise SimulationError(f"{member_id!r} received a key that fails verification")
    member.params = PublicParams(state.ctx, P_pub, state.config.n)
    member.private_key = PrivateKey(K, member_id)
    _log(state, "KEY_INSTALL", subnet=sub.index, epoch=epoch, node=member_id)


def _establish(state: NetworkState, sub: SubnetState, epoch: int, tag: str) -> None:
    """Negotiate with the base station and every member, then hand out subnet keys."""
    rng = derive_rng(state.seed, "subnet", sub.index, epoch, tag)
    head_ns = _start_round(state, sub, epoch)
    for peer in [BS_ID] + sub.members:
        _negotiate(state, sub, head_ns, peer, state.params, epoch, rng, tag)
    _new_pkg(state, sub, epoch)
    for m in sub.members:
        _distribute(state, sub, m, epoch, rng)
    sub.epoch = epoch


def run_initialization(state: NetworkState) -> list[str]:
    if not state.subnets:
        raise SimulationError("elect cluster heads first")
    start = len(state.log)
    for sub in state.subnets:
        try:
            _establish(state, sub, 1, "init")
        except NEGOTIATION_ERRORS as exc:
            _log(state, "ABORT", subnet=sub.index, reason=type(exc).__name__)
            continue
        _log(state, "SUBNET_READY", subnet=sub.index, epoch=sub.epoch, members=len(sub.members))
    return state.log[start:]


def manufacture_node(state: NetworkState, ident, position=None) -> NodeRecord:
    """Base station registers a new Id and burns its factory key; not yet deployed."""
    ident = ident.encode() if isinstance(ident, str) else ident
    if ident in state.registry:
        raise SimulationError(f"{ident!r} is already registered")
    if position is None:
        rng = derive_rng(state.seed, "position", ident)
        position = (rng.random(), rng.random())
    msk = state.base_station.master_key
    key = extract(msk, ident, state.params)
    state.registry.add(ident)
    _log(state, "MANUFACTURE", node=ident)
    return NodeRecord(ident, tuple(position), NodeRole.SENSOR, key, key, state.params)


def add_node(state: NetworkState, node: NodeRecord, subnet: int) -> bool:
    """Admit ``node`` to a sub-network. Returns False (and logs) on rejection."""
    sub = state.subnets[subnet]
    if node.id in state.revoked:
        _log(state, "ADD_REJECTED", subnet=subnet, node=node.id, reason="revoked")
        return False
    if node.id not in state.registry:
        _log(state, "ADD_REJECTED", subnet=subnet, node=node.id, reason="unknown")
        return False
    if node.id in state.nodes:
        _log(state, "ADD_REJECTED", subnet=subnet, node=node.id, reason="duplicate")
        return False
    p = state.ctx.p
    rng = derive_rng(state.seed, "subnet", subnet, sub.epoch, "add", node.id)
    K = extract(sub.master_key, node.id, sub.params)
    cts = seal(state.params, node.id, sub.params.to_bytes() + K.point.to_bytes(p), rng)
    state.wire.extend(ct.to_bytes(p) for ct in cts)
    # newcomer side
    try:
        blob = unseal(node.factory_key, cts, state.params)
        width = state.ctx.point_bytes()
        params = PublicParams.from_bytes(blob[:-width])
        K_new = point_from_bytes(blob[-width:], p)
    except (IBEError, ValueError):
        _log(state, "ADD_REJECTED", subnet=subnet, node=node.id, reason="undecryptable")
        return False
    if not _verify_key(state.ctx, node.id, K_new, params.P_pub):
        raise SimulationError("newcomer received an invalid subnet key")
    node.params = params
    node.private_key = PrivateKey(K_new, node.id)
    node.subnet = subnet
    node.role = NodeRole.SENSOR
    state.nodes[node.id] = node
    sub.members = sorted(sub.members + [node.id])
    head_ns = NegotiationState(Role.HEAD, sub.head, state.dh)
    head_broadcast(head_ns, sub.epoch)
    _negotiate(state, sub, head_ns, node.id, sub.params, sub.epoch, rng, "add")
    _log(state, "ADD_ACCEPTED", subnet=subnet, epoch=sub.epoch, node=node.id)
    return True


def revoke_node(state: NetworkState, ident) -> list[str]:
    ident = ident.encode() if isinstance(ident, str) else ident
    node = state.nodes.get(ident)
    if node is None or node.role is not NodeRole.SENSOR or node.subnet is None or node.revoked:
        raise SimulationError(f"{ident!r} is not a current member")
    start = len(state.log)
    sub = state.subnets[node.subnet]
    state.nodes[sub.head].session_keys.pop(ident, None)
    sub.members.remove(ident)
    node.revoked = True
    state.revoked.append(ident)
    _log(state, "REVOKE", subnet=sub.index, node=ident, reported_to=BS_ID)
    return state.log[start:]


def compromise_and_recover(state: NetworkState, ident) -> list[str]:
    """Handle an injected detection of a compromised head.

    The nearest healthy member takes over and rebuilds the sub-network at the
    next epoch. Negotiation uses the global parameters because the old head
    knew the sub-network master key.
    """
    ident = ident.encode() if isinstance(ident, str) else ident
    old = state.nodes.get(ident)
    if old is None or old.role is not NodeRole.CLUSTER_HEAD:
        raise SimulationError(f"{ident!r} is not a cluster head")
    start = len(state.log)
    sub = state.subnets[old.subnet]
    old.compromised = True
    _log(state, "COMPROMISE_DETECTED", subnet=sub.index, node=ident)
    candidates = [m for m in sub.members
                  if not state.nodes[m].compromised and not state.nodes[m].revoked]
    if not candidates:
        raise SimulationError(f"subnet {sub.index} has no eligible replacement head")
    new_id = min(candidates, key=lambda m: (_dist(state.nodes[m].position, old.position), m))
    # the compromised node keeps whatever stale keys it holds
    old.role = NodeRole.SENSOR
    old.subnet = None
    state.revoked.append(ident)
    state.base_station.session_keys.pop(ident, None)
    for m in sub.members:
        state.nodes[m].session_keys.pop(ident, None)
    new = state.nodes[new_id]
    new.role = NodeRole.CLUSTER_HEAD
    sub.head = new_id
    sub.members = [m for m in sub.members if m != new_id]
    _log(state, "DESIGNATE", subnet=sub.index, head=new_id, replaces=ident)
    _establish(state, sub, sub.epoch + 1, "recover")
    _log(state, "RECOVERED", subnet=sub.index, epoch=sub.epoch, members=len(sub.members))
    return state.log[start:]


def periodic_rekey(state: NetworkState, subnet: int) -> list[str]:
    """Fresh s_i, keys pushed under current session keys, then renegotiation."""
    sub = state.subnets[subnet]
    start = len(state.log)
    epoch = sub.epoch + 1
    rng = derive_rng(state.seed, "subnet", subnet, epoch, "rekey")
    _new_pkg(state, sub, epoch)
    for m in sub.members:
        _distribute(state, sub, m, epoch, rng)
    head_ns = _start_round(state, sub, epoch)
    _negotiate(state, sub, head_ns, BS_ID, state.params, epoch, rng, "rekey")
    for m in sub.members:
        _negotiate(state, sub, head_ns, m, sub.params, epoch, rng, "rekey")
    sub.epoch = epoch
    _log(state, "REKEY", subnet=subnet, epoch=epoch, members=len(sub.members))
    return state.log[start:]


def send_frame(state: NetworkState, src, dst, plaintext: bytes) -> bytes:
    src = src.encode() if isinstance(src, str) else src
    dst = dst.encode() if isinstance(dst, str) else dst
    key = state.nodes[src].session_keys.get(dst)
    if key is None:
        raise SimulationError(f"{src!r} holds no session key for {dst!r}")
    state.frame_counter += 1
    nonce = hashlib.sha256(repr((state.seed, src, dst, state.frame_counter)).encode()).digest()[:12]
    return seal_frame(key, nonce, plaintext)


def receive_frame(state: NetworkState, dst, src, frame: bytes) -> bytes:
    src = src.encode() if isinstance(src, str) else src
    dst = dst.encode() if isinstance(dst, str) else dst
    key = state.nodes[dst].session_keys.get(src)
    if key is None:
        raise SimulationError(f"{dst!r} holds no session key for {src!r}")
    return open_frame(key, frame)


def negotiation_counts(state: NetworkState, round_tag: str = "init") -> dict[int, int]:
    """Completed negotiations per sub-network, counted from the event log."""
    counts: dict[int, int] = {}
    for line in state.log:
        parts = line.split()
        if parts[1] != "NEGOTIATE":
            continue
        fields = dict(f.split("=", 1) for f in parts[2:])
        if fields["round"] == round_tag:
            sub = int(fields["subnet"])
            counts[sub] = counts.get(sub, 0) + 1
    return counts


def initial_member_counts(state: NetworkState) -> dict[int, int]:
    out = {}
    for line in state.log:
        parts = line.split()
        if parts[1] == "SUBNET_READY":
            fields = dict(f.split("=", 1) for f in parts[2:])
            out[int(fields["subnet"])] = int(fields["members"])
    return out


# --- scenarios -------------------------------------------------------------

@dataclass
class Scenario:
    config: SimConfig
    seed: int
    events: list[dict]

    @classmethod
    def from_dict(cls, data: dict) -> Scenario:
        known = {"seed", "p", "q", "n", "node_count", "subnet_count", "range",
                 "curve_seed", "dh_prime", "events"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        defaults = SimConfig()
        cfg = SimConfig(
            node_count=int(data.get("node_count", defaults.node_count)),
            subnet_count=int(data.get("subnet_count", defaults.subnet_count)),
            comm_range=float(data.get("range", defaults.comm_range)),
            p=int(data.get("p", defaults.p)),
            q=int(data.get("q", defaults.q)),
            n=int(data.get("n", defaults.n)),
            curve_seed=int(data.get("curve_seed", 0)),
            dh_prime=data.get("dh_prime"),
        )
        cfg.validate()
        return cls(cfg, int(data.get("seed", 0)), list(data.get("events", [])))

    @classmethod
    def load(cls, path) -> Scenario:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data)


def _resolve_member(state: NetworkState, ev: dict) -> bytes:
    if "id" in ev:
        return ev["id"].encode()
    return state.subnets[int(ev["subnet"])].members[int(ev["member"])]


def apply_event(state: NetworkState, ev: dict) -> None:
    op = ev.get("op")
    if op == "add":
        ident = ev["id"].encode()
        subnet = int(ev["subnet"])
        if ident in state.nodes:
            # an adversary replaying an existing (e.g. revoked) identity
            add_node(state, state.nodes[ident], subnet)
        elif ev.get("forged"):
            fake = MasterKey(derive_rng(state.seed, "forger").randrange(1, state.ctx.q))
            key = extract(fake, ident, state.params)
            add_node(state, NodeRecord(ident, (0.5, 0.5), NodeRole.SENSOR, key, key,
                                       state.params), subnet)
        else:
            add_node(state, manufacture_node(state, ident, ev.get("position")), subnet)
    elif op == "revoke":
        revoke_node(state, _resolve_member(state, ev))
    elif op == "compromise":
        target = ev["id"].encode() if "id" in ev else state.subnets[int(ev["subnet"])].head
        compromise_and_recover(state, target)
    elif op == "rekey":
        periodic_rekey(state, int(ev["subnet"]))
    else:
        raise ConfigError(f"unknown event op {op!r}")


def run_scenario(scn: Scenario, seed: int | None = None) -> NetworkState:
    state = init_network(scn.config, scn.seed if seed is None else seed)
    elect_cluster_heads(state)
    run_initialization(state)
    for ev in scn.events:
        apply_event(state, ev)
    return state


def write_log(state: NetworkState, path) -> None:
    Path(path).write_text("\n".join(state.log) + "\n")
