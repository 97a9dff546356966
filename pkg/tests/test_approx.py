"""Approximation backends: interval fits, blend division, two-disc Hermite
interpolation, tail-decay rates, and the coefficient-damping inequality."""

import math
import random
from fractions import Fraction

import pytest

from uslab.approx import (
    approx_on_interval,
    bernstein_bound_check,
    blend_divide,
    bw_rate,
    choose_blend_eta,
    green_disc,
    hermite_two_disc,
)
from uslab.poly import EXACT, FLOAT, CompactSetSpec, Polynomial, sup_norm


# -- interval approximation --------------------------------------------------


def test_approx_reproduces_polynomial_exactly():
    I = CompactSetSpec.interval(Fraction(-1), Fraction(1), density=64)
    p = Polynomial((Fraction(1, 2), Fraction(0), Fraction(-3, 4)), 0, EXACT)
    res = approx_on_interval(p, I, 1e-12, 10, mode=EXACT)
    assert res.converged
    assert (res.polynomial - p).is_zero


def test_approx_sin_tight_tolerance():
    I = CompactSetSpec.interval(0, 1, density=128)
    res = approx_on_interval(math.sin, I, 1e-6, 40, mode=FLOAT)
    assert res.converged
    assert res.achieved_error <= 1e-6
    # independent spot check off the build grid
    x = 0.537
    assert abs(res.polynomial.evaluate(x) - math.sin(x)) < 1e-5


def test_approx_abs_moderate_tolerance():
    # |x| needs roughly degree 0.58/eps from Chebyshev interpolation, so
    # 5e-2 converges under the float degree cap while 1e-2 exhausts it and
    # must say so
    I = CompactSetSpec.interval(-1, 1, density=128)
    res = approx_on_interval(abs, I, 5e-2, 48, mode=FLOAT)
    assert res.converged
    assert res.achieved_error <= 5e-2
    tight = approx_on_interval(abs, I, 1e-2, 48, mode=FLOAT)
    assert not tight.converged
    assert "failure" in tight.detail
    assert tight.achieved_error < 0.02


def test_approx_reports_exhaustion_honestly():
    I = CompactSetSpec.interval(-1, 1, density=128)
    res = approx_on_interval(abs, I, 1e-9, 12, mode=FLOAT)
    assert not res.converged
    assert "failure" in res.detail
    assert res.achieved_error > 1e-9


def test_approx_verified_error_near_build_error():
    # discretization honesty: the 4x-grid error stays within 2x of the
    # build-grid error for smooth targets
    I = CompactSetSpec.interval(0, 1, density=128)
    res = approx_on_interval(math.sin, I, 1e-8, 40, mode=FLOAT)
    assert res.achieved_error <= 2.0 * max(res.build_error, 1e-15)


# -- blend division ----------------------------------------------------------


def test_blend_divide_cancels_monomial():
    g = blend_divide(Polynomial((0.0, 0.0, 1.0), 0, FLOAT), 2, 0.5)
    for x in (0.6, 0.75, 1.0):
        assert abs(g(x) - 1.0) < 1e-12


def test_blend_divide_continuous_at_eta():
    h = Polynomial((0.0, 1.0), 0, FLOAT)
    g = blend_divide(h, 1, 0.5)
    lo = g(0.5)  # blended branch at the knot
    hi = g(0.5 + 1e-12)
    assert abs(complex(lo) - complex(hi)) < 1e-9
    assert abs(complex(g(0.25)) - 0.25) < 1e-12  # (x/eta)*(h/eta) branch
    assert complex(g(0.0)) == 0.0


def test_blend_divide_validates_eta():
    h = Polynomial((0.0, 1.0), 0, FLOAT)
    with pytest.raises(ValueError):
        blend_divide(h, 1, 0.0)
    with pytest.raises(ValueError):
        blend_divide(h, 1, 1.5)


def test_choose_blend_eta_matches_smallness():
    I = CompactSetSpec.interval(0, 1, density=256)
    h = Polynomial((0.0, 1.0), 0, FLOAT)  # h(x) = x
    eps = 0.3
    eta = choose_blend_eta(h, eps, I, FLOAT)
    assert 0 < eta <= eps / 3 + 1e-9


# -- two-disc Hermite interpolant --------------------------------------------


def test_hermite_zero_target():
    z = Polynomial((), 0, EXACT)
    assert hermite_two_disc(z, Fraction(3), 5).is_zero


def test_hermite_reproduces_z_to_m():
    m = 4
    h = Polynomial((0,) * m + (1,), 0, EXACT)
    P = hermite_two_disc(h, Fraction(3), m)
    assert (P - h).is_zero


def test_hermite_valuation_and_jet_match():
    # P carries an m-fold zero at 0 and matches h to order m-1 at c
    h = Polynomial((Fraction(1), Fraction(2), Fraction(1, 3)), 0, EXACT)
    c = Fraction(3)
    m = 6
    P = hermite_two_disc(h, c, m)
    assert P.valuation >= m
    assert P.degree <= 2 * m - 1
    diff = (P - h).recenter(c)
    for j in range(m):
        assert diff.coefficient(j) == 0


def test_hermite_error_decays_geometrically():
    h = Polynomial((Fraction(1),), 0, EXACT)
    K = CompactSetSpec.disc(3, Fraction(1, 2), density=128)
    errs = []
    for m in range(5, 41, 5):
        P = hermite_two_disc(h, Fraction(3), m)
        diff = P - h
        errs.append(sup_norm(diff, K))
    # eventually decreasing
    assert all(b < a for a, b in zip(errs[2:], errs[3:]))
    # log-linear with negative slope over the tail
    logs = [math.log(e) for e in errs[-4:]]
    slopes = [b - a for a, b in zip(logs, logs[1:])]
    assert all(s < 0 for s in slopes)


def test_hermite_rejects_origin_center():
    with pytest.raises(ValueError):
        hermite_two_disc(Polynomial((1,), 0, EXACT), 0, 3)


# -- decay rate estimation ---------------------------------------------------


def test_bw_rate_polynomial_collapses():
    p = Polynomial((1.0, 2.0, 3.0), 0, FLOAT)
    samples, rate = bw_rate(p, 1.0, 40)
    assert rate == 0.0
    assert all(d == 0.0 for n, d in samples if n > 2)


def test_bw_rate_geometric_series():
    # 1/(z-2) = -sum z^k / 2^(k+1): tails on |z|=1 decay like 2^-n
    samples, rate = bw_rate(lambda k: -(0.5 ** (k + 1)), 1.0, 40)
    assert abs(rate - 0.5) < 0.05


def test_bw_rate_entire_function():
    coeff = lambda k: 0.0 if k > 170 else 1.0 / math.factorial(k)
    samples, rate = bw_rate(coeff, 1.0, 30)
    assert rate < 0.2


# -- Green function ----------------------------------------------------------


def test_green_disc_values():
    assert green_disc(1.0, 1.0) == 0.0
    assert abs(green_disc(1.0, math.e) - 1.0) < 1e-12
    assert green_disc(2.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        green_disc(0.0, 1.0)


def test_green_disc_continuous_at_boundary():
    R = 1.5
    inner = green_disc(R, R * (1 - 1e-9))
    outer = green_disc(R, R * (1 + 1e-9))
    assert abs(inner - outer) < 1e-8


def test_green_disc_mean_value_property():
    # harmonic outside the disc: average over a small circle equals the
    # center value
    R = 1.0
    center = 2.0 + 0.5j
    rad = 0.1
    samples = 256
    mean = 0.0
    for k in range(samples):
        z = center + rad * complex(math.cos(2 * math.pi * k / samples),
                                   math.sin(2 * math.pi * k / samples))
        mean += green_disc(R, z)
    mean /= samples
    assert abs(mean - green_disc(R, center)) < 1e-6


# -- coefficient-damping inequality ------------------------------------------


def test_bound_check_monomial_example():
    p = Polynomial((0.0,) * 7 + (1.0,), 0, FLOAT)
    lhs, rhs, holds = bernstein_bound_check(p, [1.0] * 8, 0.5, 1.0)
    assert holds
    assert abs(lhs - 2.0**-7) < 1e-12
    assert abs(rhs - 2.0) < 1e-12


def test_bound_check_zero_damping():
    p = Polynomial((1.0, 1.0, 1.0), 0, FLOAT)
    lhs, rhs, holds = bernstein_bound_check(p, [0.0, 0.0, 0.0], 0.5, 1.0)
    assert lhs == 0.0 and holds


def test_bound_check_validates_radii():
    p = Polynomial((1.0,), 0, FLOAT)
    with pytest.raises(ValueError):
        bernstein_bound_check(p, [1.0], 1.0, 0.5)


def test_bound_check_short_fuzz():
    rng = random.Random(2026)
    for _ in range(100):
        deg = rng.randint(0, 50)
        coeffs = tuple(
            complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(deg + 1)
        )
        p = Polynomial(coeffs, 0, FLOAT)
        alphas = [
            complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(deg + 1)
        ]
        R = rng.uniform(0.2, 2.0)
        r = rng.uniform(0.05, 0.95) * R
        lhs, rhs, holds = bernstein_bound_check(p, alphas, r, R, density=256)
        assert holds, (lhs, rhs)
        assert lhs <= rhs * (1 + 1e-9)
