"""Chebyshev needle pieces: exact vanishing order plus smallness away from 0."""

import math
from decimal import Decimal, localcontext
from fractions import Fraction

import pytest

from uslab import precision
from uslab.needle import (
    BlockPiece,
    NeedleInfeasible,
    _assemble_piece,
    build_piece,
    cheb_eval_decimal,
    chebyshev_bump,
    dyadic_at_most,
    find_zone,
    mono_to_cheb01,
    poly_mul_cheb,
    solve_jet,
)


def _mono_eval(coeffs, t):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + Fraction(c)
    return acc


def test_dyadic_at_most():
    v = dyadic_at_most(Fraction(1, 3))
    assert v <= Fraction(1, 3)
    assert v > Fraction(1, 3) * Fraction(1, 2)
    # power of two denominators only
    assert v.denominator & (v.denominator - 1) == 0
    with pytest.raises(ValueError):
        dyadic_at_most(0)


def test_chebyshev_bump_normalization_and_smallness():
    zone = Fraction(1, 8)
    bump = chebyshev_bump(12, zone)
    # B(0) = 1 exactly
    assert Fraction(bump.mono_num[0], bump.norm) == 1
    # |B| <= tau on [zone, 1], tau small
    tau = 10.0**bump.tau_log10
    assert tau < 1.0
    for t in (zone, Fraction(1, 4), Fraction(1, 2), Fraction(1)):
        v = _mono_eval(bump.mono_num, t)
        assert abs(Fraction(v, bump.norm)) <= Fraction(101, 100) * Fraction(tau)


def test_chebyshev_bump_cheb_mono_consistency():
    bump = chebyshev_bump(7, Fraction(1, 4))
    ts = [Fraction(i, 16) for i in range(17)]
    mono_vals = [Fraction(_mono_eval(bump.mono_num, t), bump.norm) for t in ts]
    cheb_fr = [Fraction(c, bump.norm) for c in bump.cheb_num]
    cheb_vals = cheb_eval_decimal(cheb_fr, ts, 40)
    with localcontext() as ctx:
        ctx.prec = 50
        for mv, cv in zip(mono_vals, cheb_vals):
            assert abs(precision.to_decimal(mv) - cv) < Decimal(10) ** -30


def test_solve_jet_cancels_prescribed_orders():
    bump = chebyshev_bump(10, Fraction(1, 8))
    jets = {0: Fraction(3, 7), 2: Fraction(-1, 5), 4: Fraction(2, 9)}
    v = 5
    J = solve_jet(jets, bump, v)
    # residual jets of J*B match the prescription exactly
    for r in range(v):
        conv = sum(J[i] * bump.jet(r - i) for i in range(r + 1))
        assert conv == jets.get(r, Fraction(0))


def test_mono_to_cheb01_round_trip_values():
    coeffs = [Fraction(1, 3), Fraction(-2), Fraction(0), Fraction(5, 7)]
    cheb = mono_to_cheb01(coeffs)
    with localcontext() as ctx:
        ctx.prec = 50
        for t in (Fraction(0), Fraction(1, 3), Fraction(1, 2), Fraction(1)):
            direct = _mono_eval(coeffs, t)
            via = cheb_eval_decimal(cheb, [t], 40)[0]
            assert abs(precision.to_decimal(direct) - via) < Decimal(10) ** -30


def test_poly_mul_cheb_matches_monomial_product():
    f = [Fraction(1), Fraction(2)]
    g = [Fraction(3), Fraction(0), Fraction(-1)]
    fc, gc = mono_to_cheb01(f), mono_to_cheb01(g)
    prod_c = poly_mul_cheb(fc, gc)
    prod_m = [Fraction(3), Fraction(6), Fraction(-1), Fraction(-2)]
    with localcontext() as ctx:
        ctx.prec = 50
        for t in (Fraction(0), Fraction(2, 5), Fraction(1)):
            want = _mono_eval(prod_m, t)
            got = cheb_eval_decimal(prod_c, [t], 40)[0]
            assert abs(precision.to_decimal(want) - got) < Decimal(10) ** -30


def test_dyadic_assembly_matches_exact_reference():
    # same piece assembled with the exact triangular solve: mono tails agree
    # to far below eps and both wipe the sub-valuation jets
    taylor = {0: Fraction(1, 2), 1: Fraction(-1, 3), 3: Fraction(2, 7), 5: Fraction(1, 11)}
    v = 4
    eps = 1e-6
    bump = chebyshev_bump(40, Fraction(1, 16))
    jets = {r: c for r, c in taylor.items() if r < v}
    top = max(taylor)
    mono_E = [taylor.get(i, Fraction(0)) for i in range(top + 1)]
    piece = _assemble_piece(jets, mono_E, bump, v, eps, 512, 0.0)

    # vanishing order is exact by construction
    assert all(c == 0 for c in piece.mono[:v])

    J = solve_jet(jets, bump, v)
    for i in range(v, len(piece.mono)):
        e = mono_E[i] if i < len(mono_E) else Fraction(0)
        conv = sum(
            J[r] * bump.jet(i - r) for r in range(min(v, i + 1))
        )
        exact = e - conv
        assert abs(float(piece.mono[i] - exact)) < eps * 1e-6


def test_dyadic_assembly_cheb_agrees_with_mono():
    taylor = {0: Fraction(1), 2: Fraction(-3, 5)}
    v = 3
    bump = chebyshev_bump(25, Fraction(1, 8))
    mono_E = [taylor.get(i, Fraction(0)) for i in range(3)]
    piece = _assemble_piece(
        {r: c for r, c in taylor.items() if r < v}, mono_E, bump, v, 1e-8, 512, 0.0
    )
    ts = [Fraction(i, 8) for i in range(9)]
    mv = [_mono_eval(piece.mono, t) for t in ts]
    cv = cheb_eval_decimal(piece.cheb, ts, 60)
    with localcontext() as ctx:
        ctx.prec = 70
        for a, b in zip(mv, cv):
            assert abs(precision.to_decimal(a) - b) < Decimal(10) ** -40


def test_build_piece_enforces_vanishing_and_smallness():
    taylor = {0: Fraction(2, 3), 1: Fraction(1, 9)}
    v = 2
    eps = 1e-4
    piece = build_piece(taylor, v, Fraction(1, 10), eps, 4000)
    assert all(c == 0 for c in piece.mono[:v])
    # needle part small on [zone, 1]
    for t in [Fraction(k, 32) for k in range(4, 33)]:
        val = _mono_eval(piece.mono, t)
        # E vanished beyond degree 1 here, so |p| = |E - J B| <= |E| + eps;
        # check the defining bound |p(t) - E(t)| <= eps on the outer zone
        e = Fraction(2, 3) + Fraction(1, 9) * t
        assert abs(float(val - e)) <= eps * 1.01


def test_build_piece_taylor_only_path():
    # jets empty below the valuation: pure truncation, no needle
    taylor = {3: Fraction(1, 2), 5: Fraction(1, 3)}
    piece = build_piece(taylor, 3, Fraction(1, 10), 1e-9, 100)
    assert piece.m == 0
    assert piece.mono[3] == Fraction(1, 2)
    assert piece.mono[5] == Fraction(1, 3)


def test_build_piece_infeasible_raises_with_estimate():
    # an order-40 vanishing with a tiny zone forces degree far past the cap
    taylor = {0: Fraction(1)}
    with pytest.raises(NeedleInfeasible) as exc:
        build_piece(taylor, 40, Fraction(1, 10000), 1e-3, 100)
    assert exc.value.estimate > exc.value.cap
    assert exc.value.valuation == 40


def test_build_piece_values_check_escalates_m():
    taylor = {0: Fraction(1, 2)}
    seen = []

    def check(piece):
        seen.append(piece.m)
        # reject the first attempt to force one escalation
        return 1.0 if len(seen) == 1 else 0.0

    piece = build_piece(taylor, 1, Fraction(1, 8), 1e-3, 4000, values_check=check)
    assert len(seen) == 2
    assert seen[1] > seen[0]


def test_find_zone_scans_downward():
    def values(pts):
        # |f| = t: zone must end near eps
        return [float(t) for t in pts]

    z = find_zone(values, Fraction(1, 2), 1e-2)
    assert 0 < float(z) <= 1e-2 * 1.5
    assert z.denominator & (z.denominator - 1) == 0
