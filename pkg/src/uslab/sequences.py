"""Integer and rational enumerations used by constructors and tests."""

from fractions import Fraction


def primes_up_to(limit):
    """All primes <= limit, by sieve of Eratosthenes."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    p = 2
    while p * p <= limit:
        if flags[p]:
            flags[p * p :: p] = bytearray(len(flags[p * p :: p]))
        p += 1
    return [i for i, f in enumerate(flags) if f]


def first_primes(count):
    """The first `count` primes."""
    if count <= 0:
        return []
    # over-allocate using the usual n log n bound, grow if short
    import math

    limit = 16
    if count >= 6:
        n = count
        limit = int(n * (math.log(n) + math.log(math.log(n)))) + 10
    while True:
        ps = primes_up_to(limit)
        if len(ps) >= count:
            return ps[:count]
        limit *= 2


def positive_rationals(count):
    """First `count` positive rationals in Calkin-Wilf order (each exactly once).

    q_1 = 1, q_{n+1} = 1 / (2*floor(q_n) - q_n + 1).
    """
    out = []
    q = Fraction(1)
    for _ in range(count):
        out.append(q)
        q = 1 / (2 * (q.numerator // q.denominator) - q + 1)
    return out


def rational_enumeration(count):
    """First `count` rationals: 0 first, then the Calkin-Wilf walk
    interleaved with its negatives, so every rational appears exactly once."""
    if count <= 0:
        return []
    out = [Fraction(0)]
    pos = positive_rationals((count + 1) // 2)
    for q in pos:
        if len(out) >= count:
            break
        out.append(q)
        if len(out) >= count:
            break
        out.append(-q)
    return out[:count]
