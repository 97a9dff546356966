"""High-precision evaluation helpers.

Exact data (rationals) is evaluated through decimal.Decimal at a working
precision derived from the coefficient magnitudes and the tolerance being
certified, so that catastrophic cancellation in large partial sums cannot
silently eat the error budget.  mpmath supplies reference values of the
transcendental targets.
"""

import math
from decimal import Decimal, localcontext
from fractions import Fraction

import mpmath

GUARD_DIGITS = 12


def required_digits(log10_scale, eps):
    """Working precision for sums whose terms reach ~10**log10_scale and whose
    result must be trusted to around eps."""
    if eps <= 0:
        eps = 1e-30
    need = log10_scale + math.log10(1.0 / eps) + GUARD_DIGITS
    return max(28, int(need) + 1)


def log10_fraction(fr):
    """log10(|fr|) for a Fraction/int without overflowing floats."""
    if fr == 0:
        return float("-inf")
    fr = Fraction(fr)
    num = abs(fr.numerator)
    den = fr.denominator
    ns = max(0, num.bit_length() - 53)
    ds = max(0, den.bit_length() - 53)
    return (
        math.log10(num >> ns)
        + ns * math.log10(2.0)
        - math.log10(den >> ds)
        - ds * math.log10(2.0)
    )


def to_decimal(value):
    """Convert int/Fraction/float/Decimal to Decimal in the *current* context."""
    if isinstance(value, Decimal):
        return +value
    if isinstance(value, int):
        if value.bit_length() > 2048:
            return _big_ratio_decimal(value, 1)
        return Decimal(value)
    if isinstance(value, float):
        return Decimal(value)
    if isinstance(value, Fraction):
        num, den = value.numerator, value.denominator
        if num.bit_length() > 2048 or den.bit_length() > 2048:
            return _big_ratio_decimal(num, den)
        return Decimal(num) / Decimal(den)
    raise TypeError("cannot convert %r to Decimal" % (value,))


def _big_ratio_decimal(num, den):
    # int -> Decimal is quadratic in digit count, so huge exact rationals are
    # first truncated to a mantissa comfortably past the context precision;
    # the discarded relative error is ~2^-(4*prec), far below context rounding.
    from decimal import getcontext

    if num == 0:
        return Decimal(0)
    keep = 4 * getcontext().prec + 32
    na = abs(num)
    ns = max(0, na.bit_length() - keep)
    ds = max(0, den.bit_length() - keep)
    q = Decimal(na >> ns) / Decimal(den >> ds)
    if num < 0:
        q = -q
    if ns != ds:
        q *= Decimal(2) ** (ns - ds)
    return +q


def horner_decimal(coeffs, x, digits):
    """Evaluate sum(coeffs[i] * x**i) by Horner at `digits` working precision.

    coeffs may be ints, Fractions, floats or Decimals; x likewise.
    """
    with localcontext() as ctx:
        ctx.prec = digits
        xd = to_decimal(x)
        acc = Decimal(0)
        for c in reversed(coeffs):
            acc = acc * xd + to_decimal(c)
        return +acc


def horner_many_decimal(coeffs, points, digits):
    """Horner evaluation at many points, converting coefficients once."""
    with localcontext() as ctx:
        ctx.prec = digits
        cs = [to_decimal(c) for c in coeffs]
        out = []
        for x in points:
            xd = to_decimal(x)
            acc = Decimal(0)
            for c in reversed(cs):
                acc = acc * xd + c
            out.append(+acc)
        return out


def clenshaw_decimal(cheb_coeffs, t, digits):
    """Evaluate a Chebyshev series sum(c_j T_j(t)) by Clenshaw, t in [-1, 1]."""
    with localcontext() as ctx:
        ctx.prec = digits
        td = to_decimal(t)
        two_t = td + td
        b1 = Decimal(0)
        b2 = Decimal(0)
        for c in reversed(cheb_coeffs[1:]):
            b1, b2 = two_t * b1 - b2 + to_decimal(c), b1
        return +(td * b1 - b2 + to_decimal(cheb_coeffs[0]) if cheb_coeffs else Decimal(0))


def clenshaw_many_decimal(cheb_coeffs, points, digits):
    with localcontext() as ctx:
        ctx.prec = digits
        cs = [to_decimal(c) for c in cheb_coeffs]
        out = []
        if not cs:
            return [Decimal(0) for _ in points]
        head, tail = cs[0], list(reversed(cs[1:]))
        for t in points:
            td = to_decimal(t)
            two_t = td + td
            b1 = Decimal(0)
            b2 = Decimal(0)
            for c in tail:
                b1, b2 = two_t * b1 - b2 + c, b1
            out.append(+(td * b1 - b2 + head))
        return out


def interval_grid_fractions(a, b, n):
    """n+1 equally spaced rational points of [a, b] (endpoints included)."""
    a = Fraction(a)
    b = Fraction(b)
    step = (b - a) / n
    return [a + i * step for i in range(n + 1)]


# ---------------------------------------------------------------------------
# named analytic targets
#
# Each entry: float evaluator, mpmath evaluator, exact Taylor coefficient at 0
# (None when no Taylor expansion is available or wanted), value at 0.
# ---------------------------------------------------------------------------

with mpmath.workdps(130):
    PI_FRACTION = Fraction(mpmath.nstr(+mpmath.pi, 110))


def _taylor_sin(k):
    if k % 2 == 0:
        return Fraction(0)
    return Fraction((-1) ** ((k - 1) // 2), math.factorial(k))


def _taylor_cos(k):
    if k % 2 == 1:
        return Fraction(0)
    return Fraction((-1) ** (k // 2), math.factorial(k))


def _taylor_expm1(k):
    if k == 0:
        return Fraction(0)
    return Fraction(1, math.factorial(k))


def _taylor_exp(k):
    return Fraction(1, math.factorial(k))


def _taylor_sinpi(k):
    # pi frozen to 110 digits; the perturbation of the target is far below
    # every tolerance this library certifies
    if k % 2 == 0:
        return Fraction(0)
    return Fraction((-1) ** ((k - 1) // 2), math.factorial(k)) * PI_FRACTION**k


def _taylor_sinh(k):
    if k % 2 == 0:
        return Fraction(0)
    return Fraction(1, math.factorial(k))


def _taylor_cosh_m1(k):
    if k % 2 == 1 or k == 0:
        return Fraction(0)
    return Fraction(1, math.factorial(k))


NAMED_FUNCTIONS = {
    "sin": {"float": math.sin, "mp": mpmath.sin, "taylor": _taylor_sin, "at0": 0},
    "cos": {"float": math.cos, "mp": mpmath.cos, "taylor": _taylor_cos, "at0": 1},
    "exp": {"float": math.exp, "mp": mpmath.exp, "taylor": _taylor_exp, "at0": 1},
    "expm1": {"float": math.expm1, "mp": mpmath.expm1, "taylor": _taylor_expm1, "at0": 0},
    "sinh": {"float": math.sinh, "mp": mpmath.sinh, "taylor": _taylor_sinh, "at0": 0},
    "coshm1": {
        "float": lambda x: math.cosh(x) - 1.0,
        "mp": lambda x: mpmath.cosh(x) - 1,
        "taylor": _taylor_cosh_m1,
        "at0": 0,
    },
    "sinpi": {
        "float": lambda x: math.sin(math.pi * x),
        "mp": lambda x: mpmath.sinpi(x),
        "taylor": _taylor_sinpi,
        "at0": 0,
    },
    "abs": {"float": abs, "mp": lambda x: mpmath.fabs(x), "taylor": None, "at0": 0},
    "one_over_x": {
        "float": lambda x: 1.0 / x,
        "mp": lambda x: 1 / mpmath.mpf(x),
        "taylor": None,
        "at0": None,
    },
}


def named_function_values_decimal(name, points, digits):
    """Reference values of a named function on rational/float points, as Decimals."""
    fn = NAMED_FUNCTIONS[name]["mp"]
    out = []
    with mpmath.workdps(digits + 10):
        for x in points:
            v = fn(mpmath.mpmathify(x))
            out.append(Decimal(mpmath.nstr(v, digits, strip_zeros=False)))
    return out


def named_function_taylor(name, k):
    rule = NAMED_FUNCTIONS[name]["taylor"]
    if rule is None:
        raise ValueError("function %r has no stored Taylor expansion" % name)
    return rule(k)
