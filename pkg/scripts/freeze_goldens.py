"""Regenerate the frozen files under tests/golden/.

Run once after an intentional format change, review the diff, commit.
"""
import random
import subprocess
import sys
from pathlib import Path

from wsnibe.ibe import extract, setup
from wsnibe.keyex import DhGroup
from wsnibe.params import SIM34
from wsnibe.protocol import NegotiationState, Role, negotiate
from wsnibe.simnet import Scenario, elect_cluster_heads, init_network, run_scenario

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"


def topology():
    scn = Scenario.load(ROOT / "scenarios" / "golden.json")
    state = init_network(scn.config, scn.seed)
    lines = [f"{i.decode()} {n.position[0]!r} {n.position[1]!r}" for i, n in sorted(state.nodes.items())]
    (GOLDEN / "topology_seed7.txt").write_text("\n".join(lines) + "\n")
    assignment = elect_cluster_heads(state)
    lines = [f"{i.decode()} {s}" for i, s in sorted(assignment.items())]
    (GOLDEN / "assignment_seed7.txt").write_text("\n".join(lines) + "\n")


def event_log():
    scn = Scenario.load(ROOT / "scenarios" / "golden.json")
    state = run_scenario(scn)
    (GOLDEN / "golden_events.log").write_text("\n".join(state.log) + "\n")


def transcript():
    rng = random.Random(2024)
    params, msk = setup(SIM34.p, SIM34.q, 256, rng)
    group = DhGroup.for_prime(SIM34.q)
    head = NegotiationState(Role.HEAD, b"H01", group)
    node = NegotiationState(Role.NODE, b"N042", group)
    key, wire = negotiate(head, node, extract(msk, b"H01", params), extract(msk, b"N042", params),
                          params, 1, rng)
    (GOLDEN / "transcript_sim34.txt").write_text("\n".join(w.hex() for w in wire + [key.key]) + "\n")


CLI_GOLDENS = {
    "ibe_demo_seed5.txt": ["ibe-demo", "--seed", "5"],
    "negotiate_demo_seed3.txt": ["negotiate-demo", "--seed", "3"],
    "metrics_m1_50.csv": ["metrics", "--m", "1..50", "--n", "1,5"],
}


def cli_outputs():
    for name, args in CLI_GOLDENS.items():
        out = subprocess.run([sys.executable, "-m", "wsnibe", *args],
                             capture_output=True, check=True).stdout
        (GOLDEN / name).write_bytes(out)


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    topology()
    event_log()
    transcript()
    cli_outputs()
    print("wrote", sorted(p.name for p in GOLDEN.iterdir()))
