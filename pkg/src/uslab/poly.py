"""Scalars, polynomials and compact sets.

Two numeric modes run through the whole library:

* ``"exact"``  -- real rational arithmetic (fractions.Fraction),
* ``"float"``  -- complex double arithmetic.

A Polynomial carries its coefficients about an expansion center together with
the mode they live in; mixing modes raises instead of silently coercing.
Compact sets are interval / closed disc / finite point set descriptors with a
sampling density; their sample grids refine by *nesting*, so increasing the
density (or the verification factor) can only reveal a larger sup, never hide
one.
"""

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import precision

EXACT = "exact"
FLOAT = "float"

DEFAULT_DENSITY = 512


class ModeError(TypeError):
    """Operands or arguments belong to different numeric modes."""


def coerce_scalar(value, mode):
    """Bring a number into the requested mode.

    Exact mode accepts ints, Fractions, strings and floats (floats convert by
    their exact binary value). Float mode accepts anything complex() takes.
    """
    if mode == EXACT:
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, str)):
            return Fraction(value)
        if isinstance(value, float):
            if value != value or value in (float("inf"), float("-inf")):
                raise ValueError("cannot coerce %r to a rational" % value)
            return Fraction(value)
        if isinstance(value, complex):
            raise ModeError("complex scalar in exact (real rational) mode")
        raise ModeError("cannot use %r in exact mode" % (value,))
    if mode == FLOAT:
        if isinstance(value, complex):
            return value
        if isinstance(value, (int, float)):
            return complex(value)
        if isinstance(value, Fraction):
            return complex(float(value))
        raise ModeError("cannot use %r in float mode" % (value,))
    raise ValueError("unknown mode %r" % mode)


def scalar_abs(value):
    if isinstance(value, complex):
        return abs(value)
    return abs(value)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial in one variable about an expansion center.

    Canonical form: no trailing zero coefficients; the zero polynomial has an
    empty coefficient tuple. coefficients[i] multiplies (z - center)**i.
    """

    coefficients: tuple
    center: object = 0
    mode: str = EXACT

    def __post_init__(self):
        coeffs = [coerce_scalar(c, self.mode) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))
        object.__setattr__(self, "center", coerce_scalar(self.center, self.mode))

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self):
        return not self.coefficients

    @property
    def degree(self):
        """Degree, or None for the zero polynomial."""
        return len(self.coefficients) - 1 if self.coefficients else None

    @property
    def valuation(self):
        """Order of vanishing at the center, or None for the zero polynomial."""
        for i, c in enumerate(self.coefficients):
            if c != 0:
                return i
        return None

    def coefficient(self, k):
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return coerce_scalar(0, self.mode)

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, z):
        z = coerce_scalar(z, self.mode)
        acc = coerce_scalar(0, self.mode)
        w = z - self.center
        for c in reversed(self.coefficients):
            acc = acc * w + c
        return acc

    # -- arithmetic (same center, same mode) --------------------------------

    def _check_compatible(self, other):
        if self.mode != other.mode:
            raise ModeError("mixed-mode polynomial arithmetic")
        if self.center != other.center:
            raise ValueError("polynomials have different centers")

    def __add__(self, other):
        self._check_compatible(other)
        n = max(len(self.coefficients), len(other.coefficients))
        return Polynomial(
            tuple(self.coefficient(i) + other.coefficient(i) for i in range(n)),
            self.center,
            self.mode,
        )

    def __sub__(self, other):
        self._check_compatible(other)
        n = max(len(self.coefficients), len(other.coefficients))
        return Polynomial(
            tuple(self.coefficient(i) - other.coefficient(i) for i in range(n)),
            self.center,
            self.mode,
        )

    def __mul__(self, other):
        self._check_compatible(other)
        if self.is_zero or other.is_zero:
            return Polynomial((), self.center, self.mode)
        a, b = self.coefficients, other.coefficients
        out = [coerce_scalar(0, self.mode)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return Polynomial(tuple(out), self.center, self.mode)

    def scale(self, c):
        c = coerce_scalar(c, self.mode)
        return Polynomial(tuple(a * c for a in self.coefficients), self.center, self.mode)

    def derivative(self):
        if len(self.coefficients) <= 1:
            return Polynomial((), self.center, self.mode)
        return Polynomial(
            tuple(i * self.coefficients[i] for i in range(1, len(self.coefficients))),
            self.center,
            self.mode,
        )

    def recenter(self, new_center):
        """Taylor shift: the same polynomial expressed about new_center.

        Exact in exact mode; in float mode the usual binomial shift.
        """
        new_center = coerce_scalar(new_center, self.mode)
        h = new_center - self.center
        if h == 0:
            return Polynomial(self.coefficients, new_center, self.mode)
        # synthetic division by (w - h), repeated
        work = list(self.coefficients)
        n = len(work)
        out = []
        for k in range(n):
            for i in range(n - 2, k - 1, -1):
                work[i] = work[i] + h * work[i + 1]
            out.append(work[k])
        return Polynomial(tuple(out), new_center, self.mode)

    def shifted_by_power(self, v):
        """Multiply by (z - center)**v."""
        if self.is_zero:
            return self
        zeros = (coerce_scalar(0, self.mode),) * v
        return Polynomial(zeros + self.coefficients, self.center, self.mode)


def eval_poly(p, z):
    """Horner evaluation of p at z (mode of z must match p's)."""
    return p.evaluate(z)


# ---------------------------------------------------------------------------
# compact sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompactSetSpec:
    """Interval [a, b], closed disc {|z - c| <= r}, or finite point set.

    density is the base number of sample cells; grids refine by integer
    factors so a refined grid always contains the base grid.
    """

    shape: str
    params: tuple
    density: int = DEFAULT_DENSITY
    min_density: int = field(default=DEFAULT_DENSITY, compare=False)

    def __post_init__(self):
        if self.shape not in ("interval", "disc", "points"):
            raise ValueError("unknown set shape %r" % self.shape)
        if self.shape == "interval":
            a, b = self.params
            if not (_as_real(a) < _as_real(b)):
                raise ValueError("interval needs a < b")
        elif self.shape == "disc":
            _, r = self.params
            if _as_real(r) < 0:
                raise ValueError("disc needs radius >= 0")
        else:
            if not self.params:
                raise ValueError("point set must be nonempty")
        if self.density < self.min_density:
            raise ValueError(
                "sampling density %d below configured minimum %d"
                % (self.density, self.min_density)
            )

    @classmethod
    def interval(cls, a, b, density=DEFAULT_DENSITY, min_density=None):
        if min_density is None:
            min_density = min(DEFAULT_DENSITY, density)
        return cls("interval", (a, b), density, min_density)

    @classmethod
    def disc(cls, center, radius, density=DEFAULT_DENSITY, min_density=None):
        if min_density is None:
            min_density = min(DEFAULT_DENSITY, density)
        return cls("disc", (center, radius), density, min_density)

    @classmethod
    def finite(cls, pts, density=DEFAULT_DENSITY):
        return cls("points", tuple(pts), density, 1)

    def sample_points(self, factor=1):
        """Float sample grid at `factor` times the base density (nested)."""
        n = self.density * factor
        if self.shape == "interval":
            a = float(_as_real(self.params[0]))
            b = float(_as_real(self.params[1]))
            return [a + (b - a) * i / n for i in range(n + 1)]
        if self.shape == "disc":
            c, r = self.params
            c = complex(c)
            r = float(_as_real(r))
            # boundary suffices for polynomial sup norms (maximum principle)
            return [c + r * cmath.exp(2j * cmath.pi * k / n) for k in range(n)]
        return [complex(p) for p in self.params]

    def sample_fractions(self, factor=1):
        """Exact rational sample grid; intervals with rational endpoints only."""
        if self.shape == "interval":
            a = Fraction(self.params[0])
            b = Fraction(self.params[1])
            n = self.density * factor
            step = (b - a) / n
            return [a + i * step for i in range(n + 1)]
        if self.shape == "points":
            return [Fraction(p) for p in self.params]
        raise ValueError("exact sampling is defined for intervals and point sets only")

    def to_dict(self):
        out = {"shape": self.shape, "density": self.density}
        if self.shape == "interval":
            out["params"] = [_num_repr(self.params[0]), _num_repr(self.params[1])]
        elif self.shape == "disc":
            c, r = self.params
            out["params"] = [_num_repr(c), _num_repr(r)]
        else:
            out["params"] = [_num_repr(p) for p in self.params]
        return out

    @classmethod
    def from_dict(cls, d):
        params = tuple(_num_parse(p) for p in d["params"])
        density = int(d.get("density", DEFAULT_DENSITY))
        return cls(d["shape"], params, density, min(DEFAULT_DENSITY, density))


def _as_real(v):
    if isinstance(v, complex):
        if v.imag != 0:
            raise ValueError("expected a real number")
        return v.real
    return v


def _num_repr(v):
    if isinstance(v, Fraction):
        return "%d/%d" % (v.numerator, v.denominator)
    if isinstance(v, complex):
        if v.imag == 0:
            return v.real
        return [v.real, v.imag]
    return v


def _num_parse(v):
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, list):
        return complex(v[0], v[1])
    return v


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def sup_norm(p, K, factor=1):
    """Sampled sup norm of a Polynomial on a CompactSetSpec, as a float.

    Discs are sampled on the boundary only (maximum principle). Exact-mode
    polynomials on intervals are evaluated in high-precision decimal when the
    coefficients are too large for doubles, so the reported sup survives the
    cancellation inside large partial sums.
    """
    if p.is_zero:
        return 0.0
    if p.mode == FLOAT:
        return max(abs(p.evaluate(z)) for z in K.sample_points(factor))

    # exact mode
    if K.shape in ("interval", "points"):
        pts = K.sample_fractions(factor)
        scale = max(precision.log10_fraction(c) for c in p.coefficients if c != 0)
        if scale < 200 and len(p.coefficients) <= 64:
            best = Fraction(0)
            for x in pts:
                v = abs(p.evaluate(x))
                if v > best:
                    best = v
            return float(best)
        digits = precision.required_digits(max(scale, 0.0), 1e-25)
        center = p.center
        vals = precision.horner_many_decimal(
            p.coefficients, [x - center for x in pts], digits
        )
        return float(max(abs(v) for v in vals))

    # disc with exact coefficients: evaluate at term-scale working precision;
    # the monomial terms can tower over the value they cancel down to
    pts = K.sample_points(factor)
    center = float(p.center)
    reach = max(abs(z - center) for z in pts)
    scale = max(precision.log10_fraction(c) for c in p.coefficients if c != 0)
    deg = len(p.coefficients) - 1
    need = scale + deg * math.log10(max(reach, 1.0)) + 30
    if need < 15:
        pf = Polynomial(tuple(float(c) for c in p.coefficients), center, FLOAT)
        return max(abs(pf.evaluate(z)) for z in pts)
    import mpmath

    with mpmath.workdps(max(30, int(need) + 1)):
        cs = []
        for c in p.coefficients:
            f = Fraction(c)
            cs.append(mpmath.mpf(f.numerator) / f.denominator)
        best = 0.0
        for z in pts:
            w = mpmath.mpc(z) - center
            acc = mpmath.mpc(0)
            for c in reversed(cs):
                acc = acc * w + c
            v = float(abs(acc))
            if v > best:
                best = v
        return best


def hardy2_norm_sq(p, s):
    """Squared weighted-l2 norm sum |a_k|^2 s^(2k); exact in exact mode.

    The polynomial must be centered at 0.
    """
    if p.center != 0:
        raise ValueError("hardy norm is defined for polynomials centered at 0")
    if not s > 0:
        raise ValueError("hardy norm radius must be positive")
    if p.mode == EXACT:
        s = coerce_scalar(s, EXACT)
        return sum((c * c) * s ** (2 * k) for k, c in enumerate(p.coefficients))
    s = abs(coerce_scalar(s, FLOAT))
    return float(sum(abs(c) ** 2 * s ** (2 * k) for k, c in enumerate(p.coefficients)))
