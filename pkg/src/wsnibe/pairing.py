"""Weil pairing on E[q] and the distorted symmetric pairing on the order-q subgroup.

The Weil pairing is computed as

    e_q(P, Q) = [f_P(Q + S) / f_P(S)] / [f_Q(P - S) / f_Q(-S)]

where f_T has divisor q(T) - q(O) and S is an auxiliary support point. Each
f_T is evaluated with Miller's double-and-add loop. S is drawn from a fixed
deterministic sequence; a zero or pole during evaluation moves on to the next
candidate, up to MAX_RETRIES.

The Miller loop works on raw (c0, c1) integer pairs; the public functions
take and return the algebra types.
"""
from __future__ import annotations

import random

from .algebra import (
    INFINITY,
    CurveContext,
    Fp2,
    Point,
    cube_root_of_unity,
    nonresidue,
    point_add,
    point_from_y,
    scalar_mul,
)

MAX_RETRIES = 8


class PairingError(ValueError):
    pass


class _Degenerate(Exception):
    pass


def _raw(pt: Point):
    c = pt.lift()
    return (c.x.a, c.x.b), (c.y.a, c.y.b)


def miller(T: Point, m: int, points: list[Point]) -> list[Fp2]:
    """Evaluate f_T, with divisor m(T) - m(O), at each of ``points``.

    Raises PairingError if T is not m-torsion and _Degenerate if a point hits a
    zero or pole of an intermediate line.
    """
    p = T.x.p
    raw = _miller_raw(_raw(T), m, [_raw(X) for X in points], p, nonresidue(p))
    return [Fp2(n[0], n[1], p) / Fp2(d[0], d[1], p) for n, d in raw]


def _miller_raw(T, m, xs, p, d):
    def mul(u, v):
        return ((u[0] * v[0] + d * u[1] * v[1]) % p, (u[0] * v[1] + u[1] * v[0]) % p)

    def inv(u):
        n = (u[0] * u[0] - d * u[1] * u[1]) % p
        if n == 0:
            raise _Degenerate
        ni = pow(n, -1, p)
        return (u[0] * ni % p, -u[1] * ni % p)

    (tx, ty) = T
    nums = [(1, 0)] * len(xs)
    dens = [(1, 0)] * len(xs)
    ax, ay = tx, ty
    at_infinity = False

    def step(ax, ay, rx, ry, doubling):
        """Fold g_{A,R} into every accumulator and return A + R."""
        if ax == rx and ((ay[0] + ry[0]) % p, (ay[1] + ry[1]) % p) == (0, 0):
            for i, (xx, _) in enumerate(xs):
                v = ((xx[0] - ax[0]) % p, (xx[1] - ax[1]) % p)
                if v == (0, 0):
                    raise _Degenerate
                nums[i] = mul(nums[i], v)
            return None
        if doubling:
            sq = mul(ax, ax)
            lam = mul((3 * sq[0] % p, 3 * sq[1] % p), inv((2 * ay[0] % p, 2 * ay[1] % p)))
        else:
            lam = mul(((ry[0] - ay[0]) % p, (ry[1] - ay[1]) % p),
                      inv(((rx[0] - ax[0]) % p, (rx[1] - ax[1]) % p)))
        lam2 = mul(lam, lam)
        for i, (xx, xy) in enumerate(xs):
            t = mul(lam, ((xx[0] - ax[0]) % p, (xx[1] - ax[1]) % p))
            num = ((xy[0] - ay[0] - t[0]) % p, (xy[1] - ay[1] - t[1]) % p)
            den = ((xx[0] + ax[0] + rx[0] - lam2[0]) % p, (xx[1] + ax[1] + rx[1] - lam2[1]) % p)
            if num == (0, 0) or den == (0, 0):
                raise _Degenerate
            nums[i] = mul(nums[i], num)
            dens[i] = mul(dens[i], den)
        x3 = ((lam2[0] - ax[0] - rx[0]) % p, (lam2[1] - ax[1] - rx[1]) % p)
        t = mul(lam, ((ax[0] - x3[0]) % p, (ax[1] - x3[1]) % p))
        y3 = ((t[0] - ay[0]) % p, (t[1] - ay[1]) % p)
        return x3, y3

    for bit in bin(m)[3:]:
        if at_infinity:
            raise PairingError("point is not m-torsion")
        for i in range(len(xs)):
            nums[i] = mul(nums[i], nums[i])
            dens[i] = mul(dens[i], dens[i])
        nxt = step(ax, ay, ax, ay, True)
        if nxt is None:
            at_infinity = True
            continue
        ax, ay = nxt
        if bit == "1":
            nxt = step(ax, ay, tx, ty, False)
            if nxt is None:
                at_infinity = True
            else:
                ax, ay = nxt
    if not at_infinity:
        raise PairingError("point is not m-torsion")
    return list(zip(nums, dens))


def _support_points(p: int, seed: int):
    # S = R1 + distortion(R2) with R1, R2 random GF(p) points; reaches a large
    # part of E(GF(p^2)) without square roots in GF(p^2)
    rng = random.Random(seed)
    while True:
        R1 = point_from_y(rng.randrange(p), p).lift()
        R2 = distortion(point_from_y(rng.randrange(p), p))
        yield point_add(R1, R2)


def _is_torsion(pt: Point, q: int) -> bool:
    return scalar_mul(q, pt).is_infinity


def weil_pairing(P1: Point, P2: Point, ctx: CurveContext, seed: int = 0,
                 check: bool = True) -> Fp2:
    """Order-q Weil pairing of two q-torsion points (GF(p) inputs are lifted)."""
    q, p = ctx.q, ctx.p
    P1, P2 = P1.lift(), P2.lift()
    if check:
        for pt in (P1, P2):
            if not pt.on_curve() or not _is_torsion(pt, q):
                raise PairingError("input is not q-torsion")
    if P1.is_infinity or P2.is_infinity:
        return Fp2.one(p)
    d = nonresidue(p)
    r1, r2 = _raw(P1), _raw(P2)
    supports = _support_points(p, seed)
    for _ in range(MAX_RETRIES):
        S = next(supports)
        eval_p = [point_add(P2, S), S]
        eval_q = [point_add(P1, -S), -S]
        if any(X.is_infinity for X in eval_p + eval_q):
            continue
        try:
            (n0, d0), (n1, d1) = _miller_raw(r1, q, [_raw(X) for X in eval_p], p, d)
            (m0, e0), (m1, e1) = _miller_raw(r2, q, [_raw(X) for X in eval_q], p, d)
        except _Degenerate:
            continue
        top = Fp2(*n0, p) * Fp2(*d1, p) * Fp2(*m1, p) * Fp2(*e0, p)
        bottom = Fp2(*d0, p) * Fp2(*n1, p) * Fp2(*m0, p) * Fp2(*e1, p)
        return top / bottom
    raise PairingError(f"degenerate support after {MAX_RETRIES} retries")


def distortion(P1: Point) -> Point:
    """(x, y) -> (zeta*x, y), mapping E(GF(p)) into E(GF(p^2)).

    Note the fixed points: (0, +-1) are 3-torsion and map to themselves, so the
    image is independent of P1 only when q > 3.
    """
    if P1.is_infinity:
        return INFINITY
    zeta = cube_root_of_unity(P1.x.p)
    return Point(zeta * P1.x.lift(), P1.y.lift(), check=False)


def modified_pairing(P1: Point, P2: Point, ctx: CurveContext, check: bool = True) -> Fp2:
    """Symmetric pairing e(P1, P2) = weil(P1, distortion(P2)) on the order-q subgroup.

    Bilinear for all q; non-degenerate for q > 3.
    """
    if check:
        for pt in (P1, P2):
            if not ctx.in_subgroup(pt):
                raise PairingError("input is not in the order-q subgroup")
    if P1.is_infinity or P2.is_infinity:
        return Fp2.one(ctx.p)
    return weil_pairing(P1, distortion(P2), ctx, check=False)
