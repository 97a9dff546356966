"""Polynomial arithmetic, compact-set sampling, and norm estimation."""

import math
import random
from fractions import Fraction

import pytest

from uslab.poly import (
    EXACT,
    FLOAT,
    CompactSetSpec,
    ModeError,
    Polynomial,
    eval_poly,
    hardy2_norm_sq,
    sup_norm,
)


def test_eval_poly_examples():
    assert eval_poly(Polynomial((0, 0, 1), 0, EXACT), Fraction(3)) == 9
    assert eval_poly(Polynomial((), 0, EXACT), Fraction(5)) == 0
    assert eval_poly(Polynomial((1, 2), 0, FLOAT), 1j) == 1 + 2j


def test_eval_about_center():
    # p(z) = (z - 2)^2 stored centered at 2
    p = Polynomial((0, 0, 1), 2, EXACT)
    assert p.evaluate(Fraction(5)) == 9
    assert p.evaluate(Fraction(2)) == 0


def test_canonical_form_and_valuation():
    p = Polynomial((0, 3, 0, 0), 0, EXACT)
    assert p.degree == 1
    assert p.valuation == 1
    z = Polynomial((0, 0), 0, EXACT)
    assert z.is_zero and z.degree is None
    q = Polynomial((0, 0, 5, 7), 0, EXACT)
    assert q.valuation <= q.degree


def test_arithmetic_exact():
    p = Polynomial((1, 2, 1), 0, EXACT)  # (1+x)^2
    q = Polynomial((1, 1), 0, EXACT)
    assert (q * q).coefficients == p.coefficients
    assert (p - q * q).is_zero
    assert (p + q).coefficient(0) == 2
    d = p.derivative()
    assert d.coefficients == (2, 2)


def test_mode_mismatch_raises():
    p = Polynomial((1, 1), 0, EXACT)
    q = Polynomial((1.0, 1.0), 0, FLOAT)
    with pytest.raises(ModeError):
        _ = p + q


def test_recenter_preserves_values():
    p = Polynomial((Fraction(1, 3), Fraction(-2), Fraction(1, 7)), 1, EXACT)
    q = p.recenter(0)
    for x in (Fraction(-1), Fraction(0), Fraction(2, 3), Fraction(4)):
        assert p.evaluate(x) == q.evaluate(x)


def test_shifted_by_power():
    p = Polynomial((2, 3), 0, EXACT)
    q = p.shifted_by_power(2)
    assert q.coefficients == (0, 0, 2, 3)
    assert q.valuation == 2


def test_sup_norm_monomial_on_disc():
    for n, r in ((1, 0.5), (4, 0.5), (7, 2.0)):
        p = Polynomial((0.0,) * n + (1.0,), 0, FLOAT)
        K = CompactSetSpec.disc(0, r)
        assert abs(sup_norm(p, K) - r**n) < 1e-12 * max(1.0, r**n)


def test_sup_norm_constant():
    K = CompactSetSpec.interval(Fraction(-1), Fraction(1))
    assert sup_norm(Polynomial((Fraction(-7, 2),), 0, EXACT), K) == 3.5


def test_sup_norm_parabola_on_unit_interval():
    p = Polynomial((0, 1, -1), 0, EXACT)  # x(1-x), max 1/4 at x=1/2
    K = CompactSetSpec.interval(Fraction(0), Fraction(1))
    assert abs(sup_norm(p, K) - 0.25) < 1e-15


def test_sup_norm_subadditive_on_shared_grid():
    rng = random.Random(101)
    K = CompactSetSpec.interval(Fraction(-1), Fraction(1), density=64)
    for _ in range(25):
        p = Polynomial(
            tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(6)),
            0,
            EXACT,
        )
        q = Polynomial(
            tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for _ in range(4)),
            0,
            EXACT,
        )
        assert sup_norm(p + q, K) <= sup_norm(p, K) + sup_norm(q, K) + 1e-12


def test_sup_norm_monotone_in_radius():
    p = Polynomial((0.3, -1.0, 0.0, 2.0, -0.7), 0, FLOAT)
    vals = [sup_norm(p, CompactSetSpec.disc(0, r)) for r in (0.25, 0.5, 1.0, 1.5, 2.0)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_sup_norm_density_refinement_never_shrinks():
    # the sampled sup is a lower bound; refining the nested grid can only
    # reveal more
    p = Polynomial((0, 1, 0, -2, 0, 1), 0, EXACT)
    K = CompactSetSpec.interval(Fraction(-1), Fraction(1), density=32)
    base = sup_norm(p, K)
    fine = sup_norm(p, K, factor=2)
    assert fine >= base - 1e-12 * max(1.0, base)


def test_sup_norm_exact_reproducible():
    p = Polynomial((Fraction(1, 3), Fraction(2, 7), Fraction(-5, 11)), 0, EXACT)
    K = CompactSetSpec.interval(Fraction(-1), Fraction(1), density=64)
    assert sup_norm(p, K) == sup_norm(p, K)


def test_sup_norm_exact_disc_cancellation():
    # (z-3)^20 / 10^15 on the disc |z-3| <= 1/2: boundary monomial terms
    # tower 17 orders of magnitude over the true sup, sinking double
    # precision; the exact path must still resolve it
    n = 20
    scale = Fraction(1, 10**15)
    coeffs = tuple(
        scale * math.comb(n, k) * Fraction(-3) ** (n - k) for k in range(n + 1)
    )
    p = Polynomial(coeffs, 0, EXACT)
    K = CompactSetSpec.disc(3, Fraction(1, 2), density=64)
    want = float(Fraction(1, 2**n) * scale)
    got = sup_norm(p, K)
    assert abs(got - want) < 1e-6 * want


def test_hardy2_norm_examples():
    assert hardy2_norm_sq(Polynomial((1,), 0, EXACT), 2) == 1
    assert hardy2_norm_sq(Polynomial((0, 1), 0, EXACT), 2) == 4
    assert hardy2_norm_sq(Polynomial((1, 1), 0, EXACT), 1) == 2


def test_hardy2_norm_rejects_bad_s():
    with pytest.raises(ValueError):
        hardy2_norm_sq(Polynomial((1,), 0, EXACT), 0)


def test_compact_set_validation():
    with pytest.raises(ValueError):
        CompactSetSpec.interval(Fraction(1), Fraction(0))
    with pytest.raises(ValueError):
        CompactSetSpec.disc(0, -1)
    with pytest.raises(ValueError):
        CompactSetSpec("points", (), 16, 1)


def test_disc_sampling_on_boundary():
    K = CompactSetSpec.disc(1, 2, density=128)
    for z in K.sample_points():
        assert abs(abs(z - 1) - 2.0) < 1e-12


def test_interval_grid_nesting():
    K = CompactSetSpec.interval(Fraction(0), Fraction(1), density=16)
    base = K.sample_points()
    fine = K.sample_points(factor=2)
    for x in base:
        assert any(abs(x - y) < 1e-15 for y in fine)


def test_compact_set_round_trip():
    K = CompactSetSpec.disc(Fraction(3), Fraction(1, 4), density=256)
    K2 = CompactSetSpec.from_dict(K.to_dict())
    assert K2.shape == "disc" and K2.params == K.params and K2.density == 256
