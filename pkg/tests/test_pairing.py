import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import F2, three_torsion
from wsnibe.algebra import INFINITY, Fp2, Point, fp2_pow, point_from_y, scalar_mul, setup_curve
from wsnibe.pairing import (
    PairingError,
    distortion,
    miller,
    modified_pairing,
    weil_pairing,
)
from wsnibe.params import BF256, SIM34

CTX11 = setup_curve(11, 3)
CTX29 = setup_curve(29, 5)
CTX1019 = setup_curve(1019, 17)


def _lift(pt, p):
    if pt is None:
        return INFINITY
    (x, y) = pt
    return Point(Fp2(*x, p), Fp2(*y, p))


@pytest.fixture(scope="module")
def torsion11():
    f = F2(11)
    pts = [None] + three_torsion(f)
    assert len(pts) == 9
    return f, pts


def _oracle_value(f, P, Q):
    for S in f.points():
        v = f.weil3(P, Q, S)
        if v is not None:
            return v
    raise AssertionError("no usable support point")


def test_weil_matches_tangent_line_oracle(torsion11):
    f, pts = torsion11
    for P, Q in product(pts, repeat=2):
        got = weil_pairing(_lift(P, 11), _lift(Q, 11), CTX11)
        assert (got.a, got.b) == _oracle_value(f, P, Q)


def test_weil_alternating_exhaustive(torsion11):
    f, pts = torsion11
    table = {}
    for P, Q in product(pts, repeat=2):
        table[P, Q] = weil_pairing(_lift(P, 11), _lift(Q, 11), CTX11)
    for P in pts:
        assert table[P, P].is_one()
    for P, Q in product(pts, repeat=2):
        assert (table[P, Q] * table[Q, P]).is_one()
        assert fp2_pow(table[P, Q], 3).is_one()
    # bilinear in the first slot and non-degenerate on the full 3-torsion
    for P, R, Q in product(pts, pts, pts):
        assert table[f.padd(P, R), Q] == table[P, Q] * table[R, Q]
    values = {(v.a, v.b) for v in table.values()}
    assert len(values) == 3


def test_weil_support_independence(torsion11):
    f, pts = torsion11
    P, Q = _lift(pts[1], 11), _lift(pts[5], 11)
    vals = {weil_pairing(P, Q, CTX11, seed=s) for s in range(6)}
    assert len(vals) == 1


def test_q3_distortion_fixes_torsion():
    # over GF(11) the order-3 subgroup is {O, (0, 1), (0, 10)}; x = 0 is fixed
    # by (x, y) -> (zeta x, y), so the modified pairing is trivial at q = 3
    sub = [P for P in (point_from_y(y, 11) for y in range(11)) if CTX11.in_subgroup(P)]
    assert sorted(P.y.value for P in sub) == [1, 10]
    for P in sub:
        assert distortion(P) == P.lift()
        assert modified_pairing(P, P, CTX11).is_one()


@pytest.mark.parametrize("ctx", [CTX29, CTX1019], ids=["p29", "p1019"])
def test_modified_pairing_nondegenerate(ctx):
    g = modified_pairing(ctx.P, ctx.P, ctx)
    assert not g.is_one()
    assert fp2_pow(g, ctx.q).is_one()


@pytest.mark.parametrize("ctx", [CTX29, CTX1019], ids=["p29", "p1019"])
def test_distortion_leaves_subgroup(ctx):
    D = distortion(ctx.P)
    assert D.on_curve()
    assert scalar_mul(ctx.q, D).is_infinity
    assert D != ctx.P.lift()
    assert not weil_pairing(ctx.P, D, ctx).is_one()


@pytest.mark.parametrize("ctx", [CTX11, CTX29, CTX1019], ids=["p11", "p29", "p1019"])
def test_bilinearity_small(ctx):
    rng = random.Random(ctx.p)
    g = modified_pairing(ctx.P, ctx.P, ctx)
    for _ in range(25):
        a, b = rng.randrange(ctx.q), rng.randrange(ctx.q)
        lhs = modified_pairing(scalar_mul(a, ctx.P), scalar_mul(b, ctx.P), ctx)
        assert lhs == fp2_pow(g, a * b)


@pytest.mark.parametrize("ctx", [CTX29, CTX1019], ids=["p29", "p1019"])
def test_symmetry(ctx):
    A, B = scalar_mul(3, ctx.P), scalar_mul(7, ctx.P)
    assert modified_pairing(A, B, ctx) == modified_pairing(B, A, ctx)


def test_large_profile_pairing():
    for prof in (SIM34, BF256):
        ctx = setup_curve(prof.p, prof.q)
        g = modified_pairing(ctx.P, ctx.P, ctx)
        assert not g.is_one()
        assert modified_pairing(scalar_mul(5, ctx.P), ctx.P, ctx) == fp2_pow(g, 5)


def test_rejects_non_torsion():
    stray = point_from_y(2, 1019)
    assert not CTX1019.in_subgroup(stray)
    with pytest.raises(PairingError):
        modified_pairing(stray, CTX1019.P, CTX1019)
    with pytest.raises(PairingError):
        weil_pairing(stray, distortion(CTX1019.P), CTX1019)
    with pytest.raises(PairingError):
        miller(stray.lift(), 17, [distortion(CTX1019.P)])


def test_identity_inputs():
    assert modified_pairing(INFINITY, CTX1019.P, CTX1019).is_one()
    assert weil_pairing(CTX1019.P, INFINITY, CTX1019).is_one()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 16), st.integers(0, 16), st.integers(0, 16))
def test_bilinear_property_1019(a, b, c):
    P = CTX1019.P
    lhs = modified_pairing(scalar_mul(a, P), scalar_mul(b, P) + scalar_mul(c, P), CTX1019)
    rhs = modified_pairing(scalar_mul(a, P), scalar_mul(b, P), CTX1019) * \
        modified_pairing(scalar_mul(a, P), scalar_mul(c, P), CTX1019)
    assert lhs == rhs
