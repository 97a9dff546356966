"""Weight triangles, basis families, coefficient sequences, index sequences.

The weighted partial sum this library materializes everywhere is

    S_n(a) = sum_{k <= n} a_k * x_{n,k}

where x_{n,k} is row n, column k of a basis family (possibly row-dependent,
as with Bernstein rows) and the a_k come from a sparse coefficient sequence.
"""

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

from . import precision
from .poly import EXACT, FLOAT, ModeError, Polynomial, coerce_scalar


class HorizonError(ValueError):
    """A requested index lies beyond the declared working horizon."""


# ---------------------------------------------------------------------------
# weight triangles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightTriangle:
    """Nonzero weights alpha_{n,k}, 0 <= k <= n <= horizon.

    kinds:
      constant-one     alpha = 1
      phi-reciprocal   alpha_{n,k} = 1/phi(n)   (row scalar; row 0 := 1)
      cesaro           alpha_{n,k} = (n-k+1)/(n+1)   (classical (C,1) averaging)
      explicit-table   rows listed outright
      custom-rule      alpha = rule(n, k)
    """

    kind: str
    horizon: int
    phi: object = None
    table: tuple = None
    rule: object = None
    label: str = None  # serialization hint naming phi / the rule

    def __post_init__(self):
        if self.kind not in (
            "constant-one",
            "phi-reciprocal",
            "cesaro",
            "explicit-table",
            "custom-rule",
        ):
            raise ValueError("unknown weight kind %r" % self.kind)
        if self.kind == "phi-reciprocal" and self.phi is None:
            raise ValueError("phi-reciprocal weights need phi")
        if self.kind == "explicit-table" and self.table is None:
            raise ValueError("explicit-table weights need the table")
        if self.kind == "custom-rule" and self.rule is None:
            raise ValueError("custom-rule weights need the rule")

    def weight(self, n, k):
        if not (0 <= k <= n):
            raise ValueError("weight index k=%d outside row n=%d" % (k, n))
        if n > self.horizon:
            raise HorizonError("row %d beyond horizon %d" % (n, self.horizon))
        w = self._raw(n, k)
        if w == 0:
            raise ValueError("weight alpha_{%d,%d} is zero" % (n, k))
        return w

    def _raw(self, n, k):
        if self.kind == "constant-one":
            return Fraction(1)
        if self.kind == "phi-reciprocal":
            if n == 0:
                return Fraction(1)  # row-0 convention: phi may vanish at 0
            v = self.phi(n)
            if isinstance(v, (int, Fraction)):
                return Fraction(1) / Fraction(v)
            return 1.0 / v
        if self.kind == "cesaro":
            return Fraction(n - k + 1, n + 1)
        if self.kind == "explicit-table":
            return self.table[n][k]
        return self.rule(n, k)

    def is_row_scalar(self):
        """True when alpha_{n,k} does not depend on k (known kinds only)."""
        if self.kind in ("constant-one", "phi-reciprocal"):
            return True
        if self.kind == "cesaro":
            return False
        probe_rows = [1, 2, 3, 5, 8, min(13, self.horizon)]
        for n in probe_rows:
            if n > self.horizon or n < 1:
                continue
            row0 = self._raw(n, 0)
            for k in range(1, n + 1):
                if self._raw(n, k) != row0:
                    return False
        return True

    def row_scalar(self, n):
        return self.weight(n, 0)

    def cauchy_witness(self, k, tail_fraction=4, tol=1e-6):
        """Advisory finite Cauchy check of n -> alpha_{n,k} at the horizon.

        Looks at the last quarter of rows; reports the largest successive gap.
        Never raises: this is metadata, not a gate.
        """
        lo = max(k, self.horizon - max(1, self.horizon // tail_fraction))
        prev = None
        worst = 0.0
        for n in range(lo, self.horizon + 1):
            w = self._raw(n, k)
            wf = float(w) if not isinstance(w, complex) else abs(w)
            if prev is not None:
                worst = max(worst, abs(wf - prev))
            prev = wf
        return {"k": k, "rows_checked": [lo, self.horizon], "max_gap": worst, "cauchy_ok": worst <= tol}

    def to_dict(self):
        out = {"kind": self.kind, "horizon": self.horizon}
        if self.label:
            out["label"] = self.label
        if self.kind == "explicit-table":
            out["table"] = [[_scalar_repr(v) for v in row] for row in self.table]
        return out


def _scalar_repr(v):
    if isinstance(v, Fraction):
        return "%d/%d" % (v.numerator, v.denominator)
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag else v.real
    return v


def _scalar_parse(v, mode):
    if isinstance(v, str):
        return coerce_scalar(Fraction(v), mode)
    if isinstance(v, list):
        return coerce_scalar(complex(v[0], v[1]), mode)
    return coerce_scalar(v, mode)


# ---------------------------------------------------------------------------
# index sequences (mu)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexSequence:
    """Strictly increasing admissible certifying indices."""

    rule: str = "all"
    explicit: tuple = ()

    def __post_init__(self):
        if self.rule not in ("all", "even", "primes", "explicit"):
            raise ValueError("unknown index rule %r" % self.rule)
        if self.rule == "explicit":
            xs = tuple(self.explicit)
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("explicit index sequence must increase strictly")
            object.__setattr__(self, "explicit", xs)

    def contains(self, n):
        if n < 0:
            return False
        if self.rule == "all":
            return True
        if self.rule == "even":
            return n % 2 == 0
        if self.rule == "primes":
            return n >= 2 and all(n % p for p in range(2, int(math.isqrt(n)) + 1))
        return n in self.explicit

    def next_at_least(self, n, cap):
        """Smallest member >= n and <= cap; HorizonError if there is none."""
        n = max(n, 0)
        if self.rule == "all":
            cand = n
        elif self.rule == "even":
            cand = n if n % 2 == 0 else n + 1
        elif self.rule == "primes":
            cand = max(n, 2)
            while cand <= cap and not self.contains(cand):
                cand += 1
        else:
            i = bisect_left(self.explicit, n)
            if i == len(self.explicit):
                raise HorizonError("no admissible index >= %d" % n)
            cand = self.explicit[i]
        if cand > cap:
            raise HorizonError("no admissible index in [%d, %d]" % (n, cap))
        return cand

    def members(self, lo, hi):
        return [n for n in range(max(lo, 0), hi + 1) if self.contains(n)]

    def last_members(self, count, cap):
        """The `count` largest members <= cap, ascending."""
        out = []
        n = cap
        while n >= 0 and len(out) < count:
            if self.contains(n):
                out.append(n)
            n -= 1
        if len(out) < count:
            raise HorizonError("fewer than %d admissible indices below %d" % (count, cap))
        return out[::-1]

    def to_dict(self):
        out = {"rule": self.rule}
        if self.rule == "explicit":
            out["values"] = list(self.explicit)
        return out

    @classmethod
    def from_dict(cls, d):
        return cls(d.get("rule", "all"), tuple(d.get("values", ())))


# ---------------------------------------------------------------------------
# basis families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisFamily:
    """Row-indexed basis x_{n,k}; see module docstring.

    kinds:
      monomial-shifted   x_{n,k} = (z - xi)^(k + power_offset)
      weighted-monomial  x_{n,k} = alpha_{n,k} (z - xi)^(k + power_offset)
      bernstein          x_{n,k} = x^k (1-x)^(n-k)
      binomial-bernstein x_{n,k} = C(n,k) x^k (1-x)^(n-k)
      scalar-sequence    x_{n,k} = value(n, k)  (constant polynomials)
      derivative-pair    x_{2n+1,k} = 0;  x_{2n,k} = k!/(k-n)! alpha_n z^(k-n)
                         for n <= k <= 2n, else 0
    """

    kind: str
    horizon: int
    mode: str = EXACT
    center: object = 0
    power_offset: int = 0
    weights: WeightTriangle = None
    value_rule: object = None
    alpha: object = None  # derivative-pair: callable n -> alpha_n

    def __post_init__(self):
        kinds = (
            "monomial-shifted",
            "weighted-monomial",
            "bernstein",
            "binomial-bernstein",
            "scalar-sequence",
            "derivative-pair",
        )
        if self.kind not in kinds:
            raise ValueError("unknown family kind %r" % self.kind)
        if self.kind == "weighted-monomial" and self.weights is None:
            raise ValueError("weighted-monomial needs a WeightTriangle")
        if self.kind == "scalar-sequence" and self.value_rule is None:
            raise ValueError("scalar-sequence needs value_rule(n, k)")
        if self.kind == "derivative-pair" and self.alpha is None:
            raise ValueError("derivative-pair needs alpha(n)")

    def element(self, n, k):
        return family_element(self, n, k)

    def to_dict(self):
        out = {"kind": self.kind, "horizon": self.horizon, "mode": self.mode}
        if self.kind in ("monomial-shifted", "weighted-monomial"):
            out["center"] = _scalar_repr(coerce_scalar(self.center, self.mode) if self.mode == EXACT else complex(self.center))
            out["power_offset"] = self.power_offset
        if self.kind == "weighted-monomial":
            out["weights"] = self.weights.to_dict()
        return out


def family_element(family, n, k):
    """The basis element x_{n,k} as a Polynomial (constant for scalar kinds)."""
    if n > family.horizon:
        raise HorizonError("row %d beyond horizon %d" % (n, family.horizon))
    if not (0 <= k <= n):
        raise ValueError("column k=%d outside row n=%d" % (k, n))
    mode = family.mode
    zero = Polynomial((), 0, mode)

    if family.kind == "monomial-shifted":
        coeffs = [0] * (k + family.power_offset) + [1]
        return Polynomial(tuple(coeffs), family.center, mode)

    if family.kind == "weighted-monomial":
        w = coerce_scalar(family.weights.weight(n, k), mode)
        coeffs = [0] * (k + family.power_offset) + [w]
        return Polynomial(tuple(coeffs), family.center, mode)

    if family.kind in ("bernstein", "binomial-bernstein"):
        # x^k (1-x)^(n-k) expanded about 0, exact binomials
        m = n - k
        coeffs = [0] * k + [(-1) ** j * math.comb(m, j) for j in range(m + 1)]
        if family.kind == "binomial-bernstein":
            c = math.comb(n, k)
            coeffs = [c * v for v in coeffs]
        return Polynomial(tuple(coeffs), 0, mode)

    if family.kind == "scalar-sequence":
        v = family.value_rule(n, k)
        return Polynomial((coerce_scalar(v, mode),), 0, mode) if v != 0 else zero

    # derivative-pair
    if n % 2 == 1:
        return zero
    half = n // 2
    if not (half <= k <= n):
        return zero
    a = coerce_scalar(family.alpha(half), mode)
    fall = math.perm(k, half)  # k!/(k-half)!
    coeffs = [0] * (k - half) + [a * fall]
    return Polynomial(tuple(coeffs), 0, mode)


# ---------------------------------------------------------------------------
# coefficient sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientSequence:
    """Sparse coefficient sequence with block bookkeeping.

    entries: ((k, a_k), ...) with strictly increasing k and nonzero a_k.
    blocks:  ((valuation, degree), ...) index ranges of the construction
             blocks; successive blocks must satisfy v_{j+1} > d_j.
    """

    entries: tuple
    blocks: tuple = ()
    mode: str = EXACT

    def __post_init__(self):
        ent = []
        last_k = -1
        for k, v in self.entries:
            k = int(k)
            v = coerce_scalar(v, self.mode)
            if k <= last_k:
                raise ValueError("entry indices must increase strictly")
            if v == 0:
                raise ValueError("stored coefficients must be nonzero (index %d)" % k)
            ent.append((k, v))
            last_k = k
        object.__setattr__(self, "entries", tuple(ent))
        blocks = tuple((int(v), int(d)) for v, d in self.blocks)
        for (v, d) in blocks:
            if v > d:
                raise ValueError("block valuation %d exceeds degree %d" % (v, d))
        for (v0, d0), (v1, d1) in zip(blocks, blocks[1:]):
            if v1 <= d0:
                raise ValueError(
                    "block separation violated: valuation %d not above degree %d" % (v1, d0)
                )
        object.__setattr__(self, "blocks", blocks)

    @property
    def support(self):
        return tuple(k for k, _ in self.entries)

    @property
    def max_index(self):
        return self.entries[-1][0] if self.entries else None

    def get(self, k):
        i = bisect_left(self.entries, (k,))
        if i < len(self.entries) and self.entries[i][0] == k:
            return self.entries[i][1]
        return coerce_scalar(0, self.mode)

    def as_dict(self):
        return dict(self.entries)

    def extended(self, new_entries, block):
        """New sequence with an extra block appended."""
        return CoefficientSequence(
            self.entries + tuple(new_entries), self.blocks + (block,), self.mode
        )

    def to_dict(self):
        return {
            "mode": self.mode,
            "entries": [[k, _scalar_repr(v)] for k, v in self.entries],
            "blocks": [list(b) for b in self.blocks],
        }

    @classmethod
    def from_dict(cls, d):
        mode = d.get("mode", EXACT)
        entries = tuple((int(k), _scalar_parse(v, mode)) for k, v in d.get("entries", ()))
        blocks = tuple((int(v), int(dd)) for v, dd in d.get("blocks", ()))
        return cls(entries, blocks, mode)


# ---------------------------------------------------------------------------
# partial sums
# ---------------------------------------------------------------------------


def partial_sum(a, family, n):
    """S_n(a) = sum_{k <= n} a_k x_{n,k} as a Polynomial."""
    if n > family.horizon:
        raise HorizonError("row %d beyond horizon %d" % (n, family.horizon))
    if a.mode != family.mode:
        raise ModeError("coefficient sequence and family are in different modes")
    mode = family.mode

    if family.kind == "scalar-sequence":
        total = coerce_scalar(0, mode)
        for k, v in a.entries:
            if k > n:
                break
            total += v * family.value_rule(n, k)
        return Polynomial((total,), 0, mode) if total != 0 else Polynomial((), 0, mode)

    if family.kind in ("monomial-shifted", "weighted-monomial"):
        top = n + family.power_offset
        coeffs = [coerce_scalar(0, mode)] * (top + 1)
        for k, v in a.entries:
            if k > n:
                break
            w = v
            if family.kind == "weighted-monomial":
                w = v * coerce_scalar(family.weights.weight(n, k), mode)
            coeffs[k + family.power_offset] += w
        return Polynomial(tuple(coeffs), family.center, mode)

    if family.kind in ("bernstein", "binomial-bernstein"):
        coeffs = [coerce_scalar(0, mode)] * (n + 1)
        for k, v in a.entries:
            if k > n:
                break
            m = n - k
            scale = math.comb(n, k) if family.kind == "binomial-bernstein" else 1
            for j in range(m + 1):
                coeffs[k + j] += v * ((-1) ** j * math.comb(m, j) * scale)
        return Polynomial(tuple(coeffs), 0, mode)

    # derivative-pair
    if n % 2 == 1:
        return Polynomial((), 0, mode)
    half = n // 2
    coeffs = [coerce_scalar(0, mode)] * (half + 1)
    av = coerce_scalar(family.alpha(half), mode)
    for k, v in a.entries:
        if k > n:
            break
        if half <= k <= n:
            coeffs[k - half] += v * av * math.perm(k, half)
    return Polynomial(tuple(coeffs), 0, mode)


def partial_sum_values(a, family, n, points, digits=None):
    """Values of S_n(a) at the given points without densifying into floats.

    Exact mode evaluates in Decimal at a precision derived from the largest
    stored coefficient, so huge exactly-cancelling coefficient blocks still
    produce trustworthy small values. Float mode evaluates directly.
    Returns Decimals (exact mode) or complex (float mode).
    """
    if a.mode != family.mode:
        raise ModeError("coefficient sequence and family are in different modes")
    if family.mode == FLOAT:
        p = partial_sum(a, family, n)
        return [p.evaluate(z) for z in points]

    if digits is None:
        digits = _sequence_digits(a)
        if family.kind == "binomial-bernstein":
            # the binomial factors add up to n*log10(2) digits of term growth
            digits += int(n * 0.302) + 4

    if family.kind in ("bernstein", "binomial-bernstein"):
        with localcontext() as ctx:
            ctx.prec = digits
            out = []
            ent = [(k, precision.to_decimal(v)) for k, v in a.entries if k <= n]
            for x in points:
                xd = precision.to_decimal(x)
                om = Decimal(1) - xd
                val = Decimal(0)
                for k, v in ent:
                    scale = math.comb(n, k) if family.kind == "binomial-bernstein" else 1
                    # Decimal rejects 0**0; exponent 0 means the factor is absent
                    t = v * scale
                    if k:
                        t *= xd**k
                    if n - k:
                        t *= om ** (n - k)
                    val += t
                out.append(+val)
            return out

    p = partial_sum(a, family, n)
    pts = [x - p.center for x in points]
    return precision.horner_many_decimal(p.coefficients, pts, digits)


def _sequence_digits(a, eps=1e-30):
    scale = 0.0
    for _, v in a.entries:
        scale = max(scale, precision.log10_fraction(v))
    return precision.required_digits(scale, eps)


# ---------------------------------------------------------------------------
# Bernstein conversions
# ---------------------------------------------------------------------------


def monomial_to_bernstein(p, n):
    """Coefficients b_k with p = sum b_k x^k (1-x)^(n-k), for deg(p) <= n.

    Uses x^i = sum_j C(n-i, j) x^(i+j) (1-x)^(n-i-j); exact for exact mode.
    """
    if not p.is_zero and p.degree > n:
        raise ValueError("degree %d exceeds Bernstein row %d" % (p.degree, n))
    if p.center != 0:
        p = p.recenter(0)
    b = [coerce_scalar(0, p.mode)] * (n + 1)
    for i, c in enumerate(p.coefficients):
        if c == 0:
            continue
        for j in range(n - i + 1):
            b[i + j] += c * math.comb(n - i, j)
    return b


def bernstein_to_monomial(b, n, mode=EXACT):
    """Polynomial sum b_k x^k (1-x)^(n-k); independent expansion of each term."""
    coeffs = [coerce_scalar(0, mode)] * (n + 1)
    for k, v in enumerate(b):
        if v == 0:
            continue
        v = coerce_scalar(v, mode)
        for j in range(n - k + 1):
            coeffs[k + j] += v * ((-1) ** j * math.comb(n - k, j))
    return Polynomial(tuple(coeffs), 0, mode)


# ---------------------------------------------------------------------------
# derivative-pair helper
# ---------------------------------------------------------------------------


def derivative_family_sum(a, n, alpha_n, mode=EXACT):
    """S_{2n} of a derivative-pair family, computed two independent ways.

    Way one sums coefficient-by-coefficient over the family elements; way two
    differentiates the plain power series n times and truncates to degree n.
    Returns (way_one, way_two) as Polynomials.
    """
    alpha_n = coerce_scalar(alpha_n, mode)
    if alpha_n == 0:
        raise ValueError("derivative family weight alpha_n must be nonzero")

    coeffs = [coerce_scalar(0, mode)] * (n + 1)
    for k, v in a.entries:
        if n <= k <= 2 * n:
            coeffs[k - n] += v * alpha_n * math.perm(k, n)
    way_one = Polynomial(tuple(coeffs), 0, mode)

    top = a.max_index if a.entries else 0
    dense = [coerce_scalar(0, mode)] * (top + 1)
    for k, v in a.entries:
        dense[k] = v
    f = Polynomial(tuple(dense), 0, mode)
    for _ in range(n):
        f = f.derivative()
    truncated = Polynomial(tuple(f.coefficients[: n + 1]), 0, mode)
    way_two = truncated.scale(alpha_n)
    return way_one, way_two
