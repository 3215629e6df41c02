"""Closed-form overhead model for the proposed scheme and the two flat baselines.

Counts are exact integers (M(M-1)/2 is always integral). Times and energies
are computed in exact rationals from the decimal constants and converted to
float at the end.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class Scheme(Enum):
    PROPOSED = "Proposed"
    IBEKAS = "IBEKAS"
    BNN_IBS_KS = "BNN-IBS-KS"


SCHEMES = tuple(Scheme)
PRIMITIVES = ("bilinear", "hash", "ecc_add", "ecc_mul", "xor", "exponent")


@dataclass(frozen=True)
class CostModel:
    """MICA2 per-operation costs: seconds and millijoules."""

    t_ecc_mul: Fraction = Fraction("0.81")
    e_ecc_mul: Fraction = Fraction("19.44")
    t_pairing: Fraction = Fraction("3.102")
    e_pairing: Fraction = Fraction("74.45")


MICA2 = CostModel()


def _pairs(M: int) -> int:
    return M * (M - 1) // 2


def _check(M: int, N: int = 1) -> None:
    if M < 1 or N < 1:
        raise ValueError("M and N must be at least 1")


def negotiation_counts(scheme: Scheme, M: int, N: int = 1) -> int:
    """Key agreements across N sub-networks of M nodes each."""
    _check(M, N)
    if scheme is Scheme.PROPOSED:
        return N * (M + 1)
    return N * _pairs(M)


def operation_counts(scheme: Scheme, M: int) -> dict[str, tuple[int, int]]:
    """Per-primitive (encryption, decryption) counts for one sub-network.

    For BNN-IBS-KS the two columns are (signature, validation).
    """
    _check(M)
    c = _pairs(M)
    if scheme is Scheme.PROPOSED:
        k = M + 1
        table = {"bilinear": (k, k), "hash": (2 * k, k), "ecc_add": (k, 0),
                 "ecc_mul": (0, 0), "xor": (k, k), "exponent": (k, 0)}
    elif scheme is Scheme.IBEKAS:
        table = {"bilinear": (c, c), "hash": (c, c), "ecc_add": (c, 0),
                 "ecc_mul": (0, 0), "xor": (c, c), "exponent": (c, 0)}
    else:
        table = {"bilinear": (0, 0), "hash": (c, 2 * c), "ecc_add": (c, 3 * c),
                 "ecc_mul": (0, 2 * c), "xor": (0, 0), "exponent": (0, 0)}
    return table


def time_energy_exact(scheme: Scheme, M: int, model: CostModel = MICA2,
                      per_negotiation: bool = False) -> tuple[Fraction, Fraction]:
    """Closed-form time and energy for one sub-network of M nodes.

    ``per_negotiation`` swaps the proposed scheme's factor M for its
    negotiation count M + 1.
    """
    _check(M)
    t_unit = model.t_ecc_mul + 2 * model.t_pairing
    e_unit = model.e_ecc_mul + 2 * model.e_pairing
    if scheme is Scheme.PROPOSED:
        k = M + 1 if per_negotiation else M
        return t_unit * k, e_unit * k
    if scheme is Scheme.IBEKAS:
        return t_unit * _pairs(M), e_unit * _pairs(M)
    k = 3 * _pairs(M) + 1
    return model.t_ecc_mul * k, model.e_ecc_mul * k


def time_energy(scheme: Scheme, M: int, model: CostModel = MICA2,
                per_negotiation: bool = False) -> tuple[float, float]:
    t, e = time_energy_exact(scheme, M, model, per_negotiation)
    return float(t), float(e)


@dataclass(frozen=True)
class OverheadReport:
    scheme: Scheme
    M: int
    N: int
    negotiations: int
    operations: dict
    time_s: float
    energy_mJ: float


def overhead_report(scheme: Scheme, M: int, N: int = 1, model: CostModel = MICA2) -> OverheadReport:
    t, e = time_energy_exact(scheme, M, model)
    return OverheadReport(scheme, M, N, negotiation_counts(scheme, M, N),
                          operation_counts(scheme, M), float(N * t), float(N * e))


def simulated_negotiations(state) -> dict[int, list[tuple[int, int]]]:
    """Map member count M -> [(counted, subnet index), ...] for a simnet run."""
    from .simnet import initial_member_counts, negotiation_counts as counted

    per_subnet = counted(state, "init")
    out: dict[int, list[tuple[int, int]]] = {}
    for idx, M in sorted(initial_member_counts(state).items()):
        out.setdefault(M, []).append((per_subnet.get(idx, 0), idx))
    return out


class CrossCheckError(AssertionError):
    pass


def emit_report(Ms, Ns, schemes=SCHEMES, sink=None, simulation=None,
                model: CostModel = MICA2) -> str:
    """CSV of negotiations, time and energy over the (scheme, M, N) grid.

    Rows follow scheme declaration order, then M, then N. Time and energy are
    totals over the N sub-networks. With a ``simulation`` (a simnet
    NetworkState), a ``sim_negotiations`` column gives the counted
    negotiations of the simulated sub-networks that have exactly M members;
    a mismatch against the closed form raises CrossCheckError.
    """
    Ms, Ns = sorted(set(Ms)), sorted(set(Ns))
    if not Ms or not Ns:
        raise ValueError("M and N ranges must be non-empty")
    order = {s: i for i, s in enumerate(SCHEMES)}
    schemes = sorted(set(schemes), key=order.__getitem__)
    sim = simulated_negotiations(simulation) if simulation is not None else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["scheme", "M", "N", "negotiations", "time_s", "energy_mJ"]
    if sim is not None:
        header.append("sim_negotiations")
    w.writerow(header)
    for scheme in schemes:
        for M in Ms:
            for N in Ns:
                rep = overhead_report(scheme, M, N, model)
                row = [scheme.value, M, N, rep.negotiations,
                       f"{rep.time_s:.6f}", f"{rep.energy_mJ:.6f}"]
                if sim is not None:
                    cell = ""
                    if scheme is Scheme.PROPOSED and M in sim:
                        counted = sum(c for c, _ in sim[M])
                        expected = negotiation_counts(scheme, M, len(sim[M]))
                        if counted != expected:
                            raise CrossCheckError(
                                f"M={M}: simulation counted {counted}, closed form {expected}")
                        cell = counted
                    row.append(cell)
                w.writerow(row)
    text = buf.getvalue()
    if sink is not None:
        sink.write(text)
    return text
