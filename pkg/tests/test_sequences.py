"""Enumeration helpers: primes and the rational walk."""

from fractions import Fraction

from uslab.sequences import (
    first_primes,
    positive_rationals,
    primes_up_to,
    rational_enumeration,
)


def test_primes_up_to_small():
    assert primes_up_to(1) == []
    assert primes_up_to(2) == [2]
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_first_primes_counts():
    assert first_primes(0) == []
    assert first_primes(1) == [2]
    ps = first_primes(100)
    assert len(ps) == 100
    assert ps[-1] == 541
    assert all(a < b for a, b in zip(ps, ps[1:]))


def test_positive_rationals_distinct_and_positive():
    qs = positive_rationals(500)
    assert len(set(qs)) == 500
    assert all(q > 0 for q in qs)
    # Calkin-Wilf opening
    assert qs[:5] == [
        Fraction(1),
        Fraction(1, 2),
        Fraction(2),
        Fraction(1, 3),
        Fraction(3, 2),
    ]


def test_rational_enumeration_covers_signs():
    xs = rational_enumeration(201)
    assert xs[0] == 0
    assert len(set(xs)) == 201
    pos = [x for x in xs if x > 0]
    neg = [x for x in xs if x < 0]
    assert len(pos) == 100 and len(neg) == 100
    assert set(neg) == {-x for x in pos}


def test_rational_enumeration_edge_counts():
    assert rational_enumeration(0) == []
    assert rational_enumeration(1) == [Fraction(0)]
    assert len(rational_enumeration(2)) == 2
