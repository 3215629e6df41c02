"""Command-line entry point.

    wsnibe ibe-demo [--seed N] [--profile NAME]
    wsnibe negotiate-demo [--seed N] [--profile NAME]
    wsnibe simulate --scenario FILE [--seed N] [--out LOG]
    wsnibe metrics --m 1..50 [--n 1] [--scheme ...] [--scenario FILE] [--out CSV]

Exit codes: 1 usage, 2 config, 3 crypto failure, 4 simulation failure, 5 I/O.
"""
from __future__ import annotations

import argparse
import os
import random
import sys
from dataclasses import dataclass, field

from .algebra import AlgebraError
from .ibe import IBEError, decrypt, encrypt, extract, h1_map_to_point, setup
from .keyex import DhGroup, KeyExchangeError
from .metrics import SCHEMES, CrossCheckError, Scheme, emit_report
from .pairing import PairingError
from .params import PROFILES
from .protocol import (
    NegotiationMessage,
    NegotiationState,
    ProtocolError,
    Role,
    finalize_session,
    head_broadcast,
    head_handle_response,
    respond_to_broadcast,
)
from .simnet import ConfigError, Scenario, SimulationError, run_scenario

EXIT_USAGE, EXIT_CONFIG, EXIT_CRYPTO, EXIT_SIM, EXIT_IO = 1, 2, 3, 4, 5
COMMANDS = ("ibe-demo", "negotiate-demo", "simulate", "metrics")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_range(text: str) -> list[int]:
    """'1..50' (inclusive), '10', or '1,5,10'."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None


@dataclass
class Command:
    name: str
    seed: int = 0
    scenario: str | None = None
    out: str | None = None
    profile: str | None = None
    m: list[int] = field(default_factory=list)
    n: list[int] = field(default_factory=lambda: [1])
    schemes: list[Scheme] = field(default_factory=lambda: list(SCHEMES))


def _build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wsnibe", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    demo = sub.add_parser("ibe-demo", help="setup/extract/encrypt/decrypt transcript")
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--profile", choices=sorted(PROFILES), default="toy1019")
    neg = sub.add_parser("negotiate-demo", help="one head-node key negotiation")
    neg.add_argument("--seed", type=int, default=0)
    neg.add_argument("--profile", choices=sorted(PROFILES), default="sim34")
    sim = sub.add_parser("simulate", help="run a scenario file, write the event log")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out")
    met = sub.add_parser("metrics", help="overhead CSV for the three schemes")
    met.add_argument("--m", type=parse_range, required=True)
    met.add_argument("--n", type=parse_range, default=[1])
    met.add_argument("--scheme", action="append", choices=[s.value for s in SCHEMES])
    met.add_argument("--scenario", help="cross-check against a simulated run")
    met.add_argument("--seed", type=int, default=None)
    met.add_argument("--out")
    return ap


def parse_args(argv) -> Command:
    ns = _build_parser().parse_args(argv)
    cmd = Command(ns.command)
    cmd.seed = ns.seed
    for attr in ("scenario", "out", "profile"):
        setattr(cmd, attr, getattr(ns, attr, None))
    if ns.command == "metrics":
        cmd.m, cmd.n = ns.m, ns.n
        if ns.scheme:
            cmd.schemes = [Scheme(s) for s in ns.scheme]
    if cmd.scenario is not None:
        if not os.path.isfile(cmd.scenario):
            raise UsageError(f"scenario file not found: {cmd.scenario}")
    return cmd


def _ibe_demo(cmd: Command, out) -> None:
    prof = PROFILES[cmd.profile]
    rng = random.Random(cmd.seed)
    params, msk = setup(prof.p, prof.q, 256, rng)
    ident = b"node-017"
    message = b"hierarchical key management demo".ljust(32, b".")
    sk = extract(msk, ident, params)
    ct = encrypt(params, ident, message, rng)
    recovered = decrypt(sk, ct, params)
    p = prof.p
    print(f"profile  {prof.name} p={prof.p} q={prof.q} n={params.n}", file=out)
    print(f"P        {params.P.to_bytes(p).hex()}", file=out)
    print(f"P_pub    {params.P_pub.to_bytes(p).hex()}", file=out)
    print(f"id       {ident.decode()}", file=out)
    print(f"Q_id     {h1_map_to_point(ident, params.ctx).to_bytes(p).hex()}", file=out)
    print(f"K_id     {sk.point.to_bytes(p).hex()}", file=out)
    print(f"m        {message.hex()}", file=out)
    print(f"U        {ct.U.to_bytes(p).hex()}", file=out)
    print(f"V        {ct.V.hex()}", file=out)
    print(f"decrypt  {recovered.hex()}", file=out)
    print(f"match    {recovered == message}", file=out)
    if recovered != message:
        raise IBEError("roundtrip failed")


def _negotiate_demo(cmd: Command, out) -> None:
    prof = PROFILES[cmd.profile]
    rng = random.Random(cmd.seed)
    params, msk = setup(prof.p, prof.q, 256, rng)
    group = DhGroup.for_prime(prof.dh_prime or prof.q)
    head = NegotiationState(Role.HEAD, b"H01", group)
    node = NegotiationState(Role.NODE, b"N042", group)
    head_sk, node_sk = extract(msk, b"H01", params), extract(msk, b"N042", params)
    print(f"profile   {prof.name} p={prof.p} q={prof.q} dh_q={group.q} eta={group.eta}", file=out)
    m1 = head_broadcast(head, 1)
    print(f"1 broadcast {m1.to_bytes().hex()}", file=out)
    m2 = respond_to_broadcast(node, NegotiationMessage.from_bytes(m1.to_bytes()), params, rng)
    print(f"2 response  {m2.to_bytes().hex()}", file=out)
    m3, k_head = head_handle_response(head, NegotiationMessage.from_bytes(m2.to_bytes()),
                                      head_sk, params, rng)
    print(f"3 reply     {m3.to_bytes().hex()}", file=out)
    k_node = finalize_session(node, NegotiationMessage.from_bytes(m3.to_bytes()), node_sk, params)
    print(f"head key    {k_head.key.hex()}", file=out)
    print(f"node key    {k_node.key.hex()}", file=out)
    print(f"agree       {k_head.key == k_node.key}", file=out)


def _write(path, text: str, out) -> None:
    if path is None:
        out.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _simulate(cmd: Command, out) -> None:
    scn = Scenario.load(cmd.scenario)
    state = run_scenario(scn, cmd.seed)
    _write(cmd.out, "\n".join(state.log) + "\n", out)


def _metrics(cmd: Command, out) -> None:
    state = None
    if cmd.scenario:
        state = run_scenario(Scenario.load(cmd.scenario), cmd.seed)
    text = emit_report(cmd.m, cmd.n, cmd.schemes, simulation=state)
    _write(cmd.out, text, out)


def dispatch(cmd: Command, out=None) -> int:
    out = out or sys.stdout
    handlers = {"ibe-demo": _ibe_demo, "negotiate-demo": _negotiate_demo,
                "simulate": _simulate, "metrics": _metrics}
    try:
        seed = cmd.seed
        if seed is None:
            seed = Scenario.load(cmd.scenario).seed if cmd.scenario else 0
        print(f"seed={seed}", file=sys.stderr)
        handlers[cmd.name](cmd, out)
    except (ConfigError, AlgebraError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IBEError, PairingError, KeyExchangeError, ProtocolError) as exc:
        print(f"crypto failure: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except (SimulationError, CrossCheckError) as exc:
        print(f"simulation failure: {exc}", file=sys.stderr)
        return EXIT_SIM
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


def main(argv=None) -> int:
    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    return dispatch(cmd)


if __name__ == "__main__":
    sys.exit(main())
