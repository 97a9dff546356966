"""Double-indexed families, weighted partial sums, Bernstein conversions."""

import math
import random
from fractions import Fraction

import pytest

from uslab.bases import (
    BasisFamily,
    CoefficientSequence,
    HorizonError,
    IndexSequence,
    WeightTriangle,
    bernstein_to_monomial,
    derivative_family_sum,
    family_element,
    monomial_to_bernstein,
    partial_sum,
    partial_sum_values,
)
from uslab.poly import EXACT, FLOAT, CompactSetSpec, Polynomial, sup_norm


# -- weight triangles --------------------------------------------------------


def test_weight_kinds():
    w = WeightTriangle(kind="constant-one", horizon=10)
    assert w.weight(5, 3) == 1
    w2 = WeightTriangle(kind="phi-reciprocal", horizon=10, phi=lambda n: n + 1)
    assert w2.weight(4, 0) == Fraction(1, 5)
    assert w2.weight(0, 0) == 1  # row-0 convention
    w3 = WeightTriangle(kind="cesaro", horizon=10)
    assert w3.weight(3, 1) == Fraction(3, 4)


def test_weight_index_and_horizon_guards():
    w = WeightTriangle(kind="constant-one", horizon=5)
    with pytest.raises(ValueError):
        w.weight(2, 3)
    with pytest.raises(HorizonError):
        w.weight(6, 0)


def test_weight_zero_rejected():
    w = WeightTriangle(
        kind="custom-rule", horizon=5, rule=lambda n, k: n - k
    )
    with pytest.raises(ValueError):
        w.weight(3, 3)


def test_row_scalar_detection():
    assert WeightTriangle(kind="constant-one", horizon=20).is_row_scalar()
    assert WeightTriangle(
        kind="phi-reciprocal", horizon=20, phi=lambda n: 2**n
    ).is_row_scalar()
    assert not WeightTriangle(kind="cesaro", horizon=20).is_row_scalar()


def test_cauchy_witness_advisory():
    w = WeightTriangle(
        kind="phi-reciprocal", horizon=200, phi=lambda n: n
    )
    rep = w.cauchy_witness(0)
    assert rep["cauchy_ok"] in (True, False)
    assert rep["max_gap"] >= 0.0
    # constant weights are trivially Cauchy
    rep2 = WeightTriangle(kind="constant-one", horizon=100).cauchy_witness(3)
    assert rep2["cauchy_ok"] and rep2["max_gap"] == 0.0


# -- index sequences ---------------------------------------------------------


def test_index_sequence_rules():
    mu = IndexSequence("even")
    assert mu.contains(4) and not mu.contains(5)
    assert mu.next_at_least(5, 100) == 6
    mp = IndexSequence("primes")
    assert mp.next_at_least(8, 100) == 11
    me = IndexSequence("explicit", (1, 4, 9))
    assert me.next_at_least(5, 100) == 9
    with pytest.raises(HorizonError):
        me.next_at_least(10, 100)
    with pytest.raises(HorizonError):
        IndexSequence("all").next_at_least(101, 100)


def test_index_sequence_explicit_must_increase():
    with pytest.raises(ValueError):
        IndexSequence("explicit", (3, 3))


def test_index_sequence_round_trip():
    mu = IndexSequence("explicit", (2, 5, 7))
    assert IndexSequence.from_dict(mu.to_dict()) == mu


# -- family elements ---------------------------------------------------------


def test_family_element_bernstein():
    fam = BasisFamily("bernstein", 10, EXACT)
    p = family_element(fam, 2, 1)  # x(1-x)
    assert p.coefficients == (0, 1, -1)


def test_family_element_derivative_pair():
    fam = BasisFamily("derivative-pair", 10, EXACT, alpha=lambda n: 1)
    # row 2n = 4, k = 3: (3!/1!) z = 6z
    p = family_element(fam, 4, 3)
    assert p.coefficients == (0, 6)
    assert family_element(fam, 5, 2).is_zero  # odd rows vanish
    assert family_element(fam, 4, 1).is_zero  # k < n window


def test_family_element_weighted_monomial():
    w = WeightTriangle(kind="phi-reciprocal", horizon=10, phi=lambda n: n)
    fam = BasisFamily("weighted-monomial", 10, EXACT, weights=w)
    p = family_element(fam, 3, 2)  # z^2 / 3
    assert p.coefficients == (0, 0, Fraction(1, 3))


def test_family_element_guards():
    fam = BasisFamily("bernstein", 5, EXACT)
    with pytest.raises(ValueError):
        family_element(fam, 2, 3)
    with pytest.raises(HorizonError):
        family_element(fam, 6, 0)


# -- partial sums ------------------------------------------------------------


def test_partial_sum_monomial():
    fam = BasisFamily("monomial-shifted", 10, EXACT)
    a = CoefficientSequence(((0, 1), (1, 1), (2, 1)), (), EXACT)
    assert partial_sum(a, fam, 2).coefficients == (1, 1, 1)


def test_partial_sum_scalar_family_returns_constant_polynomial():
    fam = BasisFamily(
        "scalar-sequence",
        10,
        EXACT,
        value_rule=lambda n, k: Fraction(1) if n == 0 else Fraction(1, n),
    )
    a = CoefficientSequence(((0, 1), (1, 2), (2, 3)), (), EXACT)
    s = partial_sum(a, fam, 2)
    assert s.degree in (None, 0)
    assert s.coefficient(0) == 3  # (1+2+3)/2


def test_partial_sum_bernstein():
    fam = BasisFamily("bernstein", 10, EXACT)
    a = CoefficientSequence(((1, 1),), (), EXACT)
    assert partial_sum(a, fam, 1).coefficients == (0, 1)  # 0*(1-x) + 1*x


def test_partial_sum_linearity():
    rng = random.Random(7)
    fam = BasisFamily("bernstein", 30, EXACT)
    for _ in range(10):
        ea = tuple(
            (k, Fraction(rng.randint(1, 9), rng.randint(1, 9)))
            for k in sorted(rng.sample(range(12), 5))
        )
        eb = tuple(
            (k, Fraction(rng.randint(1, 9), rng.randint(1, 9)))
            for k in sorted(rng.sample(range(12), 5))
        )
        a = CoefficientSequence(ea, (), EXACT)
        b = CoefficientSequence(eb, (), EXACT)
        merged = {}
        for k, v in ea + eb:
            merged[k] = merged.get(k, Fraction(0)) + v
        ab = CoefficientSequence(
            tuple((k, v) for k, v in sorted(merged.items()) if v != 0), (), EXACT
        )
        n = 14
        lhs = partial_sum(ab, fam, n)
        rhs = partial_sum(a, fam, n) + partial_sum(b, fam, n)
        assert (lhs - rhs).is_zero


def test_partial_sum_values_matches_polynomial_eval():
    fam = BasisFamily("bernstein", 20, EXACT)
    a = CoefficientSequence(((1, Fraction(2, 3)), (3, Fraction(-1, 7))), (), EXACT)
    pts = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1)]
    vals = partial_sum_values(a, fam, 5, pts, 30)
    p = partial_sum(a, fam, 5)
    for x, v in zip(pts, vals):
        assert abs(float(v) - float(p.evaluate(x))) < 1e-20


def test_partial_sum_values_interval_endpoints():
    # x = 0 and x = 1 hit 0**0 unless exponent-zero factors are skipped
    fam = BasisFamily("bernstein", 10, EXACT)
    a = CoefficientSequence(((0, 1), (2, 1)), (), EXACT)
    vals = partial_sum_values(a, fam, 2, [Fraction(0), Fraction(1)], 25)
    assert float(vals[0]) == 1.0  # (1-x)^2 at 0
    assert float(vals[1]) == 1.0  # x^2 at 1


def test_horizon_enforced_on_partial_sum():
    fam = BasisFamily("bernstein", 5, EXACT)
    a = CoefficientSequence(((0, 1),), (), EXACT)
    with pytest.raises(HorizonError):
        partial_sum(a, fam, 6)


# -- coefficient sequences ---------------------------------------------------


def test_sequence_validation():
    with pytest.raises(ValueError):
        CoefficientSequence(((2, 1), (1, 1)), (), EXACT)
    with pytest.raises(ValueError):
        CoefficientSequence(((1, 0),), (), EXACT)
    with pytest.raises(ValueError):
        CoefficientSequence(((1, 1), (5, 1)), ((0, 3), (2, 6)), EXACT)


def test_sequence_block_extension():
    a = CoefficientSequence(((1, 1),), ((1, 1),), EXACT)
    b = a.extended(((3, Fraction(1, 2)),), (3, 3))
    assert b.support == (1, 3)
    assert b.blocks == ((1, 1), (3, 3))
    with pytest.raises(ValueError):
        b.extended(((2, 1),), (2, 2))  # valuation not above previous degree


def test_sequence_round_trip():
    a = CoefficientSequence(
        ((1, Fraction(1, 3)), (4, Fraction(-7, 2))), ((1, 1), (4, 4)), EXACT
    )
    b = CoefficientSequence.from_dict(a.to_dict())
    assert a == b


# -- bernstein conversions ---------------------------------------------------


def test_monomial_to_bernstein_examples():
    assert monomial_to_bernstein(Polynomial((1,), 0, EXACT), 1) == [1, 1]
    assert monomial_to_bernstein(Polynomial((0, 1), 0, EXACT), 2) == [0, 1, 1]


def test_partition_of_unity():
    # expanding 1 along the unnormalized basis yields the binomial row,
    # which is exactly the classical partition-of-unity statement
    # sum_k C(n,k) x^k (1-x)^(n-k) = 1
    one = Polynomial((1,), 0, EXACT)
    for n in (1, 5, 17, 30):
        assert monomial_to_bernstein(one, n) == [math.comb(n, k) for k in range(n + 1)]
        assert bernstein_to_monomial([math.comb(n, k) for k in range(n + 1)], n).coefficients == (1,)


def test_bernstein_round_trip_random():
    rng = random.Random(42)
    for _ in range(40):
        deg = rng.randint(0, 30)
        coeffs = [Fraction(rng.randint(-50, 50), rng.randint(1, 20)) for _ in range(deg + 1)]
        coeffs[-1] = coeffs[-1] or Fraction(1)
        p = Polynomial(tuple(coeffs), 0, EXACT)
        n = deg + rng.randint(0, 5)
        b = monomial_to_bernstein(p, n)
        q = bernstein_to_monomial(b, n)
        assert (p - q).is_zero


def test_bernstein_degree_guard():
    with pytest.raises(ValueError):
        monomial_to_bernstein(Polynomial((0, 0, 1), 0, EXACT), 1)


def test_bernstein_to_monomial_zero():
    assert bernstein_to_monomial([0, 0, 0], 2).is_zero
    assert bernstein_to_monomial([1, 1], 1).coefficients == (1,)


# -- family vanishing (finite check) ----------------------------------------


def test_bernstein_elements_vanish_on_inner_interval():
    # fixed k, growing row: x^k (1-x)^(n-k) dies off like (4/5)^n on the
    # interval; the expanded coefficients cancel brutally, so the exact
    # sup path must be used, never a float cast
    fam = BasisFamily("bernstein", 200, EXACT)
    K = CompactSetSpec.interval(Fraction(1, 5), Fraction(4, 5), density=64)
    k = 2
    sups = [sup_norm(family_element(fam, n, k), K) for n in (10, 25, 50, 100, 200)]
    assert all(b < a for a, b in zip(sups, sups[1:]))
    assert sups[-1] < 1e-15


def test_derivative_elements_vanish_past_window():
    # fixed k: row 2n carries k!/(k-n)! alpha_n z^(k-n) only for
    # n <= k <= 2n; past row 2k every element is identically zero
    fam = BasisFamily("derivative-pair", 400, EXACT, alpha=lambda n: 1)
    k = 6
    assert not family_element(fam, 12, k).is_zero
    assert not family_element(fam, 8, k).is_zero
    for row in (14, 16, 40, 80):
        assert family_element(fam, row, k).is_zero


# -- derivative family sum ---------------------------------------------------


def test_derivative_family_sum_paths_agree():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 8)
        support = sorted(rng.sample(range(n, 2 * n + 1), rng.randint(1, n + 1)))
        entries = tuple(
            (k, Fraction(rng.randint(-9, 9) or 1, rng.randint(1, 9))) for k in support
        )
        a = CoefficientSequence(entries, (), EXACT)
        alpha_n = Fraction(rng.randint(1, 5), rng.randint(1, 5))
        via_family, via_derivative = derivative_family_sum(a, n, alpha_n)
        assert (via_family - via_derivative).is_zero


def test_derivative_family_sum_reproduces_monomial():
    # f = z^(2n) with a_{2n} = 1: alpha_n S_n(f^(n)) = alpha_n (2n)!/n! z^n
    n = 3
    a = CoefficientSequence(((6, 1),), (), EXACT)
    via_family, _ = derivative_family_sum(a, n, Fraction(1, 2))
    want = Fraction(math.factorial(6), math.factorial(3)) * Fraction(1, 2)
    assert via_family.coefficients == (0, 0, 0, want)


def test_derivative_family_sum_rejects_zero_alpha():
    a = CoefficientSequence(((2, 1),), (), EXACT)
    with pytest.raises(ValueError):
        derivative_family_sum(a, 1, 0)
