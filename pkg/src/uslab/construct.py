"""Constructors: build coefficient sequences block by block, with certificates.

Every constructor returns (CoefficientSequence, Certificate). A certificate
records, per target, the certifying row lambda, the achieved sup error on the
target's compact set (measured on a refined grid, 4x the build density), the
tolerance, and enough of the target/region description that an independent
party can recompute the claim from the raw coefficients alone.

Soundness rule used throughout: a later block's valuation exceeds not just
the previous block's degree but also the previous *certifying row*. Zero-
padding a row therefore consumes index room; otherwise later blocks would
change already-certified partial sums.
"""

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

from . import needle, precision
from .approx import approx_on_interval, hermite_two_disc
from .bases import (
    BasisFamily,
    CoefficientSequence,
    HorizonError,
    IndexSequence,
    WeightTriangle,
    monomial_to_bernstein,
    partial_sum,
    partial_sum_values,
)
from .poly import EXACT, FLOAT, CompactSetSpec, Polynomial, coerce_scalar, sup_norm

DEFAULT_DENSITY = 512
DEFAULT_HORIZON = 10_000


# ---------------------------------------------------------------------------
# targets and certificates
# ---------------------------------------------------------------------------


@dataclass
class TargetSpec:
    """One approximation task: hit `target` on `region` within eps.

    target may be a Polynomial, a registered function name (str), a plain
    number (constant target / prescribed scalar value), or a callable
    (float evaluation only; such targets cannot feed the exact machinery).
    small_region, when given, asks the constructor to also keep the new
    block's own contribution small there (restricted universality).
    """

    target: object
    region: CompactSetSpec = None
    eps: float = 1e-3
    target_id: str = None
    small_region: CompactSetSpec = None


class TargetAdapter:
    """Uniform access to a target's exact Taylor data and reference values."""

    def __init__(self, spec, mode, index):
        self.spec = spec
        self.mode = mode
        self.target_id = spec.target_id or ("target-%d" % index)
        t = spec.target
        if isinstance(t, Polynomial):
            self.kind = "polynomial"
            self.poly = t if t.center == 0 else t.recenter(0)
        elif isinstance(t, str):
            if t not in precision.NAMED_FUNCTIONS:
                raise ValueError("unknown named target %r" % t)
            self.kind = "named"
            self.name = t
        elif isinstance(t, (int, float, Fraction, complex)):
            self.kind = "polynomial"
            self.poly = Polynomial((t,), 0, mode)
        elif callable(t):
            self.kind = "callable"
            self.fn = t
        else:
            raise ValueError("unsupported target %r" % (t,))

    def taylor(self, k):
        if self.kind == "polynomial":
            c = self.poly.coefficient(k)
            return c if self.mode == EXACT else c
        if self.kind == "named":
            return precision.named_function_taylor(self.name, k)
        raise ValueError("target %s has no exact expansion" % self.target_id)

    def has_taylor(self):
        if self.kind == "polynomial":
            return True
        if self.kind == "named":
            return precision.NAMED_FUNCTIONS[self.name]["taylor"] is not None
        return False

    def at_zero(self):
        if self.kind == "polynomial":
            return self.poly.coefficient(0)
        if self.kind == "named":
            return precision.NAMED_FUNCTIONS[self.name]["at0"]
        return None

    def values_decimal(self, points, digits):
        if self.kind == "named":
            return precision.named_function_values_decimal(self.name, points, digits)
        if self.kind == "polynomial":
            if self.poly.mode == EXACT:
                return precision.horner_many_decimal(self.poly.coefficients, points, digits)
            return [Decimal(repr(float(self.poly.evaluate(float(x))))) for x in points]
        return [Decimal(repr(float(self.fn(float(x))))) for x in points]

    def eval_float(self, x):
        if self.kind == "polynomial":
            p = self.poly
            acc = 0j
            for c in reversed(p.coefficients):
                acc = acc * x + complex(c)
            return acc
        if self.kind == "named":
            return complex(precision.NAMED_FUNCTIONS[self.name]["float"](x))
        return complex(self.fn(x))

    def descriptor(self):
        if self.kind == "named":
            return {"type": "named", "name": self.name}
        if self.kind == "polynomial":
            return {
                "type": "polynomial",
                "mode": self.poly.mode,
                "coefficients": [_scalar_repr(c) for c in self.poly.coefficients],
            }
        return {"type": "callable", "repr": repr(self.fn)}


def _scalar_repr(v):
    if isinstance(v, Fraction):
        return "%d/%d" % (v.numerator, v.denominator)
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag else v.real
    return v


def target_from_descriptor(d, mode):
    if d["type"] == "named":
        return d["name"]
    if d["type"] == "polynomial":
        coeffs = []
        for c in d["coefficients"]:
            if isinstance(c, str):
                coeffs.append(Fraction(c))
            elif isinstance(c, list):
                coeffs.append(complex(c[0], c[1]))
            else:
                coeffs.append(c)
        return Polynomial(tuple(coeffs), 0, d.get("mode", mode))
    raise ValueError("cannot rebuild target of type %r" % d["type"])


@dataclass
class TargetRecord:
    target_id: str
    lam: int
    achieved_error: float
    epsilon: float
    sample_density: int
    succeeded: bool
    region: dict = None
    target: dict = None
    small: dict = None
    detail: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "target_id": self.target_id,
            "lam": self.lam,
            "achieved_error": self.achieved_error,
            "epsilon": self.epsilon,
            "sample_density": self.sample_density,
            "succeeded": self.succeeded,
            "region": self.region,
            "target": self.target,
            "small": self.small,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["target_id"],
            d["lam"],
            d["achieved_error"],
            d["epsilon"],
            d["sample_density"],
            d["succeeded"],
            d.get("region"),
            d.get("target"),
            d.get("small"),
            d.get("detail", {}),
        )


@dataclass
class Certificate:
    family: dict
    mu: dict
    mode: str
    horizon: int
    records: list
    block_boundaries: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def all_succeeded(self):
        return all(r.succeeded for r in self.records)

    def to_dict(self):
        return {
            "family": self.family,
            "mu": self.mu,
            "mode": self.mode,
            "horizon": self.horizon,
            "records": [r.to_dict() for r in self.records],
            "block_boundaries": [list(b) for b in self.block_boundaries],
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["family"],
            d["mu"],
            d["mode"],
            d["horizon"],
            [TargetRecord.from_dict(r) for r in d["records"]],
            [tuple(b) for b in d["block_boundaries"]],
            d.get("diagnostics", {}),
        )


# ---------------------------------------------------------------------------
# scalar-family constructors
# ---------------------------------------------------------------------------


def interpolating_universal(family, values, mu=None, horizon=DEFAULT_HORIZON):
    """Forward substitution: a_n = (q_n - sum_{k<n} a_k x_{n,k}) / x_{n,n}.

    family must be a scalar-sequence kind with x_{n,n} != 0 for every row.
    Returns a CoefficientSequence whose row-n weighted sum equals values[n]
    exactly (zeros are simply not stored).
    """
    if family.kind != "scalar-sequence":
        raise ValueError("interpolating solve needs a scalar-sequence family")
    mode = family.mode
    dense = []
    entries = []
    for n, q in enumerate(values):
        if n > family.horizon or n > horizon:
            raise HorizonError("row %d beyond horizon" % n)
        q = coerce_scalar(q, mode)
        acc = coerce_scalar(0, mode)
        for k, a in enumerate(dense):
            if a != 0:
                acc += a * family.value_rule(n, k)
        piv = family.value_rule(n, n)
        if piv == 0:
            raise ValueError("diagonal element x_{%d,%d} vanishes" % (n, n))
        a_n = (q - acc) / coerce_scalar(piv, mode)
        dense.append(a_n)
        if a_n != 0:
            entries.append((n, a_n))
    blocks = tuple((k, k) for k, _ in entries)
    return CoefficientSequence(tuple(entries), blocks, mode)


def cesaro_universal(values, horizon=DEFAULT_HORIZON):
    """Sequence whose running averages (a_0+...+a_n)/n hit values[n].

    Row 0 is the plain value a_0 (the 1/n scaling starts at row 1):
    a_0 = q_0, a_n = n q_n - sum_{j<n} a_j. Exact rational arithmetic.
    """
    entries = []
    total = Fraction(0)
    for n, q in enumerate(values):
        if n > horizon:
            raise HorizonError("row %d beyond horizon" % n)
        q = coerce_scalar(q, EXACT)
        a_n = q - total if n == 0 else n * q - total
        total += a_n
        if a_n != 0:
            entries.append((n, a_n))
    blocks = tuple((k, k) for k, _ in entries)
    return CoefficientSequence(tuple(entries), blocks, EXACT)


def riemann_scalar_family(horizon=DEFAULT_HORIZON):
    """Scalar family x_{n,k} = 1/(n+1): row n averages indices 0..n."""
    return BasisFamily(
        "scalar-sequence",
        horizon,
        EXACT,
        value_rule=lambda n, k: Fraction(1, n + 1),
    )


def riemann_target_solve(values, horizon=DEFAULT_HORIZON):
    """Coefficients whose prime-row averages hit the given values.

    Row p-1 of the averaging family sums indices 0..p-1 with weight 1/p,
    matching a Riemann-sum over the nodes j/p. One new index per prime.
    """
    from .sequences import first_primes

    primes = first_primes(len(values))
    if primes and primes[-1] - 1 > horizon:
        raise HorizonError("prime %d beyond horizon" % primes[-1])
    entries = []
    total = Fraction(0)
    for p, q in zip(primes, values):
        q = coerce_scalar(q, EXACT)
        a = p * q - total
        total += a
        if a != 0:
            entries.append((p - 1, a))
    blocks = tuple((k, k) for k, _ in entries)
    return CoefficientSequence(tuple(entries), blocks, EXACT), primes


@dataclass
class RiemannTable:
    """Values f(j/p) = a_j induced on reduced rationals by prime-row sums."""

    values: dict
    conflicts: list
    prime_rows: list

    def value(self, x):
        return self.values.get(Fraction(x), Fraction(0))

    def row_sum(self, n):
        """(1/n) sum_{j<n} f(j/n); certified only when every node is covered."""
        total = Fraction(0)
        certified = True
        for j in range(n):
            x = Fraction(j, n)
            if x in self.values:
                total += self.values[x]
            else:
                certified = False
        return total / n, certified


def riemann_universal(a, prime_rows):
    """Tabulate f(j/p) := a_j over the given prime rows, reporting conflicts.

    Keys are stored reduced; distinct primes can only collide at 0, where the
    assignment is a_0 every time, so a conflict signals inconsistent input
    (e.g. repeated rows with different coefficients upstream).
    """
    values = {}
    conflicts = []
    for p in prime_rows:
        for j in range(p):
            x = Fraction(j, p)
            v = a.get(j, Fraction(0))
            if x in values and values[x] != v:
                conflicts.append({"node": "%d/%d" % (j, p), "old": values[x], "new": v})
            else:
                values[x] = v
    return RiemannTable(values, conflicts, list(prime_rows))


# ---------------------------------------------------------------------------
# shared interval machinery
# ---------------------------------------------------------------------------


def _grid_fractions(halfwidth, density, factor, symmetric):
    n = density * factor
    if symmetric:
        step = 2 * Fraction(halfwidth) / n
        return [-Fraction(halfwidth) + i * step for i in range(n + 1)]
    step = Fraction(halfwidth) / n
    return [i * step for i in range(n + 1)]


def _analytic_depth(adapter, scale_log10, halfwidth, tiny):
    """Taylor depth D with remaining tail below `tiny` (crude, log-based)."""
    logc = math.log10(float(halfwidth)) if float(halfwidth) != 1.0 else 0.0
    k = 1
    quiet = 0
    while k < 400:
        tk = adapter.taylor(k)
        if tk != 0:
            term = precision.log10_fraction(tk) - scale_log10 + k * logc
            if term < math.log10(tiny) - 1:
                quiet += 1
                if quiet >= 2:
                    return k
            else:
                quiet = 0
        k += 1
    return k


def _zone_hint_from_taylor(taylor, threshold, hi=1.0):
    """Largest t (halving ladder) with sum |e_k| t^k <= threshold; float/log safe."""
    logs = []
    for k, v in taylor.items():
        if v != 0:
            logs.append((k, precision.log10_fraction(v)))
    if not logs:
        return Fraction(1, 2)
    t = float(hi)
    for _ in range(200):
        tot = 0.0
        lt = math.log10(t) if t > 0 else -300.0
        for k, lv in logs:
            e = lv + k * lt
            if e > -300:
                tot += 10.0**e
        if tot <= threshold:
            return Fraction(t)
        t /= 2.0
        if t < 1e-18:
            return Fraction(t)
    return Fraction(t)


# ---------------------------------------------------------------------------
# Fekete-style construction: weighted shifted monomials on [-c, c]
# ---------------------------------------------------------------------------


class _FeketeState:
    """Accumulated G(x) = sum a_k x^(k+1) with per-block fast eval forms.

    Parity convention: a block contributes E(u) + x * O(u) with u = (x/c)^2;
    the even/odd Chebyshev forms stored here are E and O in the u variable.
    """

    def __init__(self):
        self.gcoeffs = {}  # x-power -> Fraction
        self.forms = []  # (halfwidth, even_cheb, odd_cheb)

    def g_coefficient(self, xpow):
        return self.gcoeffs.get(xpow, Fraction(0))

    def degree(self):
        return max(self.gcoeffs) if self.gcoeffs else -1

    def add_block(self, halfwidth, even_piece, odd_piece, xcoeffs):
        for k, v in xcoeffs.items():
            if v:
                self.gcoeffs[k] = self.gcoeffs.get(k, Fraction(0)) + v
        self.forms.append(
            (
                Fraction(halfwidth),
                list(even_piece.cheb) if even_piece else None,
                list(odd_piece.cheb) if odd_piece else None,
            )
        )

    def values(self, xs, digits):
        """Decimal values of G at rational points, via the block forms."""
        out = [Decimal(0)] * len(xs)
        for c, even, odd in self.forms:
            ts = [(Fraction(x) / c) ** 2 for x in xs]
            uniq = sorted(set(ts))
            pos = {t: i for i, t in enumerate(uniq)}
            if even:
                ev = needle.cheb_eval_decimal(even, uniq, digits)
                for i, t in enumerate(ts):
                    out[i] += ev[pos[t]]
            if odd:
                ov = needle.cheb_eval_decimal(odd, uniq, digits)
                for i, (x, t) in enumerate(zip(xs, ts)):
                    out[i] += ov[pos[t]] * precision.to_decimal(Fraction(x))
        return out


def _form_digits(state, extra_log10, eps):
    scale = extra_log10
    for _, even, odd in state.forms:
        for form in (even, odd):
            if form:
                for c in form:
                    if c:
                        scale = max(scale, precision.log10_fraction(c))
    return precision.required_digits(max(scale, 0.0), eps * 1e-6)


def fekete_construct(
    targets,
    weights,
    mu=None,
    horizon=DEFAULT_HORIZON,
    density=DEFAULT_DENSITY,
):
    """Universal-series blocks for the weighted monomial family a_k x^(k+1)
    on symmetric intervals, with row-scalar weight triangles.

    Targets must vanish at 0 and have exact Taylor expansions (polynomial or
    named). Each block is built in parity-split form: even and odd parts get
    their own Chebyshev-bump needle with an exactly enforced valuation.
    Infeasible targets (the vanishing constraint forces degrees beyond the
    horizon) produce failed records carrying the degree estimates.
    """
    mu = mu or IndexSequence("all")
    if not weights.is_row_scalar():
        raise ValueError("this constructor handles row-scalar weight triangles only")
    adapters = [TargetAdapter(t, EXACT, i) for i, t in enumerate(targets)]
    for ad in adapters:
        if ad.spec.region is None or ad.spec.region.shape != "interval":
            raise ValueError("each target needs an interval region")
        a, b = ad.spec.region.params
        if Fraction(a) != -Fraction(b) or Fraction(b) <= 0:
            raise ValueError("regions must be symmetric intervals [-c, c]")
        if not ad.has_taylor():
            raise ValueError("target %s has no exact expansion" % ad.target_id)
        if ad.at_zero() != 0:
            raise ValueError("target %s does not vanish at 0" % ad.target_id)

    state = _FeketeState()
    entries = []
    blocks = []
    records = []
    lam_prev = -1
    d_prev = -1
    constant_scale = weights.kind == "constant-one"

    for ad in adapters:
        eps = float(ad.spec.eps)
        halfwidth = Fraction(ad.spec.region.params[1])
        vk = max(d_prev, lam_prev) + 1  # coefficient index space
        wx = vk + 1  # x-power valuation
        try:
            result = _fekete_block(
                ad, weights, mu, state, vk, wx, halfwidth, eps, horizon, density,
                lam_prev, constant_scale,
            )
        except needle.NeedleInfeasible as exc:
            records.append(
                _failed_interval_record(
                    ad, state, halfwidth, eps, density, exc, horizon, weights, lam_prev, vk
                )
            )
            continue
        except HorizonError as exc:
            rec = TargetRecord(
                ad.target_id, None, float("inf"), eps, density * 4, False,
                ad.spec.region.to_dict(), ad.descriptor(),
                detail={"reason": "horizon", "message": str(exc)},
            )
            records.append(rec)
            continue
        lam, scale, xcoeffs, even_piece, odd_piece, achieved, detail = result
        new_entries = sorted((xp - 1, cv) for xp, cv in xcoeffs.items() if cv != 0)
        entries.extend(new_entries)
        dk = new_entries[-1][0] if new_entries else vk
        blocks.append((vk, dk))
        state.add_block(halfwidth, even_piece, odd_piece, xcoeffs)
        records.append(
            TargetRecord(
                ad.target_id, lam, achieved, eps, density * 4, achieved <= eps,
                ad.spec.region.to_dict(), ad.descriptor(), detail=detail,
            )
        )
        lam_prev = lam
        d_prev = dk

    fam = BasisFamily(
        "weighted-monomial", horizon, EXACT, center=0, power_offset=1, weights=weights
    )
    seq = CoefficientSequence(tuple(entries), tuple(blocks), EXACT)
    cert = Certificate(
        fam.to_dict(), mu.to_dict(), EXACT, horizon, records, blocks
    )
    return seq, cert, fam


class _FeketeResidual:
    """Decimal residual values h(x)/scale - G(x) with per-grid caching."""

    def __init__(self, ad, state, scale, halfwidth, eps):
        self.ad = ad
        self.state = state
        self.scale = scale
        self.halfwidth = halfwidth
        self.digits = _form_digits(
            state, 20.0 + abs(precision.log10_fraction(scale)), eps
        )
        self._cache = {}

    def at(self, xs):
        key = tuple(xs)
        if key not in self._cache:
            hv = self.ad.values_decimal(xs, self.digits)
            gv = self.state.values(xs, self.digits)
            sd = precision.to_decimal(self.scale)
            self._cache[key] = [h / sd - g for h, g in zip(hv, gv)]
        return self._cache[key]

    def parity_values(self, xs_pos):
        """(even, odd) parts at positive points: r = E(u) + x O(u)."""
        rp = self.at(xs_pos)
        rn = self.at([-x for x in xs_pos])
        ev = [(a + b) / 2 for a, b in zip(rp, rn)]
        ov = [(a - b) / 2 for a, b in zip(rp, rn)]
        return ev, ov

    def zone_x(self, parity, budget):
        """Largest probed x with the parity component under budget near 0."""

        def probe(xs):
            ev, ov = self.parity_values(xs)
            if parity == 0:
                return [abs(float(v)) for v in ev]
            out = []
            for x, v in zip(xs, ov):
                out.append(abs(float(v / precision.to_decimal(x))))
            return out

        return needle.find_zone(probe, self.halfwidth, budget, Fraction(1, 1 << 44))


def _fekete_jets(ad, scale, state, parity, vt, c2):
    """Exact low-order u-jets of the parity component of the residual."""
    jets = {}
    for r in range(parity ^ 1, vt):
        k = 2 * r + parity
        v = ad.taylor(k) / scale - state.g_coefficient(k)
        if v != 0:
            jets[r] = v * c2**r
    return jets


def _fekete_block(
    ad, weights, mu, state, vk, wx, halfwidth, eps, horizon, density,
    lam_prev, constant_scale,
):
    room = horizon  # max admissible coefficient index
    c2 = halfwidth * halfwidth
    cf = float(halfwidth)

    def build_at(scale):
        """Build both parity pieces at a fixed residual scale. Returns
        (xcoeffs, even_piece, odd_piece, d_x)."""
        scale_log = precision.log10_fraction(scale)
        resid = _FeketeResidual(ad, state, scale, halfwidth, eps)
        depth = max(
            _analytic_depth(ad, scale_log, halfwidth, eps * 0.02), state.degree() + 1
        )
        rF = {}
        for k in range(depth + 1):
            v = ad.taylor(k) / scale - state.g_coefficient(k)
            if v != 0:
                rF[k] = v
        even_t = {}
        odd_t = {}
        for k, v in rF.items():
            if k % 2 == 0:
                even_t[k // 2] = v * c2 ** (k // 2)
            else:
                odd_t[(k - 1) // 2] = v * c2 ** ((k - 1) // 2)
        vE = (wx + 1) // 2
        vO = wx // 2
        epsF = eps / float(scale)
        budgets = {"even": 0.45 * epsF, "odd": 0.45 * epsF / cf}
        cap_t = room // 2

        grid = [x for x in _grid_fractions(halfwidth, density, 2, True) if x > 0]
        evals, ovals = resid.parity_values(grid)
        tgrid = [(x / halfwidth) ** 2 for x in grid]

        def make_checker(parity, target_vals):
            def checker(piece):
                digits_p = precision.required_digits(
                    max(piece.cheb_scale_log10(), 0.0) + 4.0, eps * 1e-6
                )
                digits_p = max(digits_p, resid.digits)
                pv = needle.cheb_eval_decimal(piece.cheb, tgrid, digits_p)
                worst = 0.0
                for x, want, got in zip(grid, target_vals, pv):
                    if parity == 1:
                        got = got * precision.to_decimal(x)
                    worst = max(worst, abs(float(want - got)))
                return worst

            return checker

        pieces = {}
        for tag, parity, tdict, vt in (
            ("even", 0, even_t, vE),
            ("odd", 1, odd_t, vO),
        ):
            if not tdict:
                pieces[tag] = None
                continue
            budget = budgets[tag]
            if any(tdict.get(r) for r in range(vt)):
                zx = resid.zone_x(parity, budget / 3.0)
                zone_hint = (Fraction(zx) / halfwidth) ** 2
            else:
                zone_hint = Fraction(1, 4)  # no needle engaged; unused
            target_vals = evals if parity == 0 else ovals
            pieces[tag] = needle.build_piece(
                tdict, vt, zone_hint, budget,
                cap_t, values_check=make_checker(parity, target_vals),
            )

        xcoeffs = {}
        if pieces["even"]:
            for i, v in enumerate(pieces["even"].mono):
                if v:
                    xcoeffs[2 * i] = v / c2**i
        if pieces["odd"]:
            for i, v in enumerate(pieces["odd"].mono):
                if v:
                    xcoeffs[2 * i + 1] = v / c2**i
        d_x = max(xcoeffs) if xcoeffs else wx
        return xcoeffs, pieces["even"], pieces["odd"], d_x

    if constant_scale:
        scale = Fraction(1)
        xcoeffs, pe, po, d_x = build_at(scale)
        dk = d_x - 1
        lam = mu.next_at_least(max(dk, lam_prev + 1), horizon)
    else:
        # residual scale depends on the certifying row; fixed-point the row
        # on degree estimates before paying for an exact build
        lam = mu.next_at_least(max(vk, lam_prev + 1), horizon)
        seen = set()
        for _ in range(14):
            scale = Fraction(weights.row_scalar(lam))
            est = _fekete_degree_estimate(ad, scale, state, vk, wx, halfwidth, eps)
            need = max(est - 1, vk)
            try:
                lam_new = mu.next_at_least(max(need, lam_prev + 1), horizon)
            except HorizonError:
                lam_new = None
            if lam_new is None or lam_new in seen:
                break
            seen.add(lam_new)
            if lam_new == lam:
                break
            lam = lam_new
        scale = Fraction(weights.row_scalar(lam))
        est = _fekete_degree_estimate(ad, scale, state, vk, wx, halfwidth, eps)
        if est - 1 > lam or est > horizon + 1:
            scan = _fekete_lam_scan(
                ad, weights, mu, state, vk, wx, halfwidth, eps, horizon, lam_prev
            )
            feasible = [row for row, e in scan if e - 1 <= row]
            if not feasible:
                exc = needle.NeedleInfeasible(est, horizon, 0.0, wx)
                exc.lam_scan = scan
                raise exc
            lam = feasible[0]
            scale = Fraction(weights.row_scalar(lam))
        xcoeffs, pe, po, d_x = build_at(scale)
        dk = d_x - 1
        if dk > lam:
            lam = mu.next_at_least(dk, horizon)
            scale_new = Fraction(weights.row_scalar(lam))
            if scale_new != scale:
                scale = scale_new
                xcoeffs, pe, po, d_x = build_at(scale)
                dk = d_x - 1
                if dk > lam:
                    lam = mu.next_at_least(dk, horizon)

    # final measurement on the refined (4x) grid, in partial-sum space
    grid4 = _grid_fractions(halfwidth, density, 4, True)
    piece_scale = max(
        pe.cheb_scale_log10() if pe else 0.0, po.cheb_scale_log10() if po else 0.0
    )
    digits = max(
        _form_digits(state, 20.0 + abs(precision.log10_fraction(scale)), eps),
        precision.required_digits(piece_scale + 4.0, eps * 1e-6),
    )
    hv = ad.values_decimal(grid4, digits)
    gv = state.values(grid4, digits)
    tmp = _FeketeState()
    tmp.add_block(halfwidth, pe, po, {})
    nv = tmp.values(grid4, digits)
    sd = precision.to_decimal(scale)
    achieved = max(abs(float(sd * (g + n) - h)) for g, n, h in zip(gv, nv, hv))
    detail = {
        "scale": _scalar_repr(scale),
        "valuation_index": vk,
        "m_even": pe.m if pe else 0,
        "m_odd": po.m if po else 0,
        "zone_even": float(pe.zone) if pe else None,
        "zone_odd": float(po.zone) if po else None,
    }
    return lam, scale, xcoeffs, pe, po, achieved, detail


def _fekete_degree_estimate(ad, scale, state, vk, wx, halfwidth, eps):
    """Cheap x-degree estimate for the next block: exact jets, value-probed
    zones, closed-form bump order. No large-degree algebra."""
    c2 = halfwidth * halfwidth
    epsF = eps / float(scale)
    resid = _FeketeResidual(ad, state, scale, halfwidth, eps)
    worst = wx + 1
    for parity in (0, 1):
        vt = (wx + 1) // 2 if parity == 0 else wx // 2
        if vt < 1:
            continue
        budget = 0.45 * epsF if parity == 0 else 0.45 * epsF / float(halfwidth)
        jets = {
            r: precision.log10_fraction(v)
            for r, v in _fekete_jets(ad, scale, state, parity, vt, c2).items()
        }
        if not jets:
            # plain truncated expansion; degree set by analytic depth
            depth = _analytic_depth(ad, precision.log10_fraction(scale), halfwidth, eps * 0.02)
            worst = max(worst, depth + 2)
            continue
        zx = resid.zone_x(parity, budget / 3.0)
        zone = (Fraction(zx) / halfwidth) ** 2
        zone = needle.dyadic_at_most(zone)
        m, _ = needle.estimate_bump_order(jets, vt, zone, budget)
        worst = max(worst, 2 * (m + vt) + parity)
    return worst


def _fekete_lam_scan(ad, weights, mu, state, vk, wx, halfwidth, eps, horizon, lam_prev):
    scan = []
    lam = max(vk, lam_prev + 1)
    while lam <= horizon:
        try:
            row = mu.next_at_least(lam, horizon)
        except HorizonError:
            break
        scale = Fraction(weights.row_scalar(row))
        est = _fekete_degree_estimate(ad, scale, state, vk, wx, halfwidth, eps)
        scan.append((row, est))
        lam = max(row + 1, int(row * 1.6) + 1)
    return scan


def _failed_interval_record(ad, state, halfwidth, eps, density, exc, horizon, weights, lam_prev, vk):
    # best-effort achieved error: the do-nothing residual at a plausible row
    try:
        lam = lam_prev + 1 if lam_prev >= 0 else vk
        scale = Fraction(weights.row_scalar(max(lam, 1))) if weights else Fraction(1)
        grid = _grid_fractions(halfwidth, density, 1, True)
        digits = _form_digits(state, 20, eps)
        hv = ad.values_decimal(grid, digits)
        gv = state.values(grid, digits)
        sd = precision.to_decimal(scale)
        resid = max(abs(float(sd * g - h)) for g, h in zip(gv, hv))
    except Exception:
        resid = float("inf")
    detail = {
        "reason": "needle-infeasible",
        "message": str(exc),
        "estimated_degree": exc.estimate,
        "degree_cap": exc.cap,
        "zone": exc.zone,
        "valuation": exc.valuation,
    }
    if hasattr(exc, "lam_scan"):
        detail["row_scan"] = [[int(r), int(e)] for r, e in exc.lam_scan]
    return TargetRecord(
        ad.target_id, None, resid, eps, density, False,
        ad.spec.region.to_dict(), ad.descriptor(), detail=detail,
    )

# ---------------------------------------------------------------------------
# Bernstein-basis construction on [0, 1]
# ---------------------------------------------------------------------------


def bernstein_construct(
    targets,
    mu=None,
    horizon=DEFAULT_HORIZON,
    density=DEFAULT_DENSITY,
    initial_blocks=None,
):
    """Blocks in the Bernstein family on [0,1]; the residual is row-dependent
    because old coefficients re-weight as x^k (1-x)^(n-k) at each new row n.

    initial_blocks, when given, is a list of (dense_coefficients, row) pairs
    placed verbatim before the solver runs (exact prescribed openings).
    """
    mu = mu or IndexSequence("all")
    family = BasisFamily("bernstein", horizon, EXACT)
    adapters = [TargetAdapter(t, EXACT, i) for i, t in enumerate(targets)]
    for ad in adapters:
        if ad.spec.region is None or ad.spec.region.shape != "interval":
            raise ValueError("each target needs an interval region")
        lo, hi = (Fraction(v) for v in ad.spec.region.params)
        if lo != 0 or hi != 1:
            raise ValueError("this constructor builds on [0,1] exactly")

    entries = []
    blocks = []
    records = []
    lam_prev = -1
    d_prev = -1

    if initial_blocks:
        for coeffs, row in initial_blocks:
            nz = [(k, Fraction(c)) for k, c in enumerate(coeffs) if Fraction(c) != 0]
            if not nz:
                continue
            if nz[0][0] <= max(d_prev, lam_prev):
                raise ValueError("prescribed block collides with earlier indices")
            row = mu.next_at_least(max(row, nz[-1][0], lam_prev + 1), horizon)
            entries.extend(nz)
            blocks.append((nz[0][0], nz[-1][0]))
            lam_prev = row
            d_prev = nz[-1][0]

    def seq_now():
        return CoefficientSequence(tuple(entries), tuple(blocks), EXACT)

    for ad in adapters:
        eps = float(ad.spec.eps)
        vk = max(d_prev, lam_prev) + 1
        grid = _grid_fractions(1, density, 2, False)
        hv_cache = {}

        def h_values(pts, digits):
            key = (len(pts), digits)
            if key not in hv_cache:
                hv_cache[key] = ad.values_decimal(pts, digits)
            return hv_cache[key]

        try:
            row = mu.next_at_least(max(vk + 2, lam_prev + 1), horizon)
            built = None
            depth = _analytic_depth(ad, 0.0, Fraction(1), eps * 0.02)
            for _ in range(10):
                old_poly = partial_sum(seq_now(), family, row) if entries else Polynomial((0,), 0, EXACT)
                # the reweighted old content is exact polynomial data of degree
                # ~row; the target's own expansion stops at its analytic depth
                old_deg = old_poly.degree or 0
                taylor = {}
                for k in range(max(depth, old_deg) + 1):
                    v = (ad.taylor(k) if k <= depth else Fraction(0)) - old_poly.coefficient(k)
                    if v != 0:
                        taylor[k] = v
                digits = precision.required_digits(
                    _sequence_scale(entries) + 6, eps * 1e-6
                )
                rv = None

                def checker(piece, row=row, digits=digits):
                    nonlocal rv
                    if rv is None:
                        hv = h_values(grid, digits)
                        if entries:
                            sv = partial_sum_values(seq_now(), family, row, grid, digits)
                        else:
                            sv = [Decimal(0)] * len(grid)
                        rv = [a - b for a, b in zip(hv, sv)]
                    dp = max(digits, precision.required_digits(
                        max(piece.cheb_scale_log10(), 0.0) + 4.0, eps * 1e-6))
                    pv = needle.cheb_eval_decimal(piece.cheb, grid, dp)
                    return max(abs(float(a - b)) for a, b in zip(rv, pv))

                def zprobe(ps, row=row, digits=digits):
                    hv = ad.values_decimal(ps, digits)
                    if entries:
                        sv = partial_sum_values(seq_now(), family, row, ps, digits)
                    else:
                        sv = [Decimal(0)] * len(ps)
                    return [abs(float(a - b)) for a, b in zip(hv, sv)]

                if any(taylor.get(r) for r in range(vk)):
                    zone = needle.find_zone(
                        zprobe, Fraction(1, 2), eps * 0.2, Fraction(1, 1 << 44)
                    )
                else:
                    zone = Fraction(1, 4)  # no needle engaged; unused
                piece = needle.build_piece(
                    taylor, vk, zone, eps * 0.6, horizon, values_check=checker
                )
                if piece.degree <= row:
                    built = (piece, row)
                    break
                # overshoot: the needle order drifts up with the row (the old
                # content's low-order jets scale like row**valuation)
                row = mu.next_at_least(max(piece.degree + piece.degree // 4 + 8, row + 1), horizon)
            if built is None:
                raise needle.NeedleInfeasible(piece.degree, horizon, float(zone), vk)
            piece, row = built
        except needle.NeedleInfeasible as exc:
            records.append(
                _failed_bernstein_record(ad, seq_now(), family, eps, density, exc, lam_prev)
            )
            continue
        except HorizonError as exc:
            records.append(
                TargetRecord(
                    ad.target_id, None, float("inf"), eps, density * 4, False,
                    ad.spec.region.to_dict(), ad.descriptor(),
                    detail={"reason": "horizon", "message": str(exc)},
                )
            )
            continue

        gpoly = Polynomial(tuple(piece.mono), 0, EXACT)
        bern = monomial_to_bernstein(gpoly, row)
        new_entries = [(k, c) for k, c in enumerate(bern) if c != 0]
        dk = None  # stays None when the residual was already on target
        if new_entries:
            assert new_entries[0][0] >= vk
            entries.extend(new_entries)
            dk = new_entries[-1][0]
            blocks.append((new_entries[0][0], dk))

        grid4 = _grid_fractions(1, density, 4, False)
        digits = precision.required_digits(_sequence_scale(entries) + 6, eps * 1e-6)
        hv = ad.values_decimal(grid4, digits)
        sv = partial_sum_values(seq_now(), family, row, grid4, digits)
        achieved = max(abs(float(a - b)) for a, b in zip(hv, sv))
        records.append(
            TargetRecord(
                ad.target_id, row, achieved, eps, density * 4, achieved <= eps,
                ad.spec.region.to_dict(), ad.descriptor(),
                detail={
                    "valuation_index": vk,
                    "m": piece.m,
                    "zone": float(piece.zone),
                    "block_degree": dk,
                },
            )
        )
        lam_prev = row
        if dk is not None:
            d_prev = dk

    seq = seq_now()
    cert = Certificate(family.to_dict(), mu.to_dict(), EXACT, horizon, records, blocks)
    return seq, cert, family


def _sequence_scale(entries):
    worst = 0.0
    for _, v in entries:
        if v:
            worst = max(worst, precision.log10_fraction(v))
    return worst


def _failed_bernstein_record(ad, seq, family, eps, density, exc, lam_prev):
    try:
        grid = _grid_fractions(1, density, 4, False)
        digits = precision.required_digits(_sequence_scale(seq.entries) + 6, eps * 1e-6)
        hv = ad.values_decimal(grid, digits)
        row = max([lam_prev, 1] + ([seq.max_index] if seq.entries else []))
        sv = (
            partial_sum_values(seq, family, row, grid, digits)
            if seq.entries
            else [Decimal(0)] * len(grid)
        )
        resid = max(abs(float(a - b)) for a, b in zip(hv, sv))
    except Exception:
        resid = float("inf")
    return TargetRecord(
        ad.target_id, None, resid, eps, density * 4, False,
        ad.spec.region.to_dict(), ad.descriptor(),
        detail={
            "reason": "needle-infeasible",
            "message": str(exc),
            "estimated_degree": exc.estimate,
            "degree_cap": exc.cap,
            "zone": exc.zone,
            "valuation": exc.valuation,
        },
    )


# ---------------------------------------------------------------------------
# binomial-Bernstein construction (smallness on an inner interval)
# ---------------------------------------------------------------------------


def binomial_bernstein_construct(
    targets,
    mu=None,
    horizon=DEFAULT_HORIZON,
    density=DEFAULT_DENSITY,
    divide_one_minus_x=True,
):
    """Blocks in the binomial-scaled Bernstein family, certified on inner
    intervals L strictly inside (0,1). Away from the endpoints the valuation
    constraint is harmless: fit residual / (x^v (1-x)) by a Chebyshev-node
    least-degree polynomial, freeze it exactly, and expand at the row.

    divide_one_minus_x=False drops the (1-x) factor from the carrier.
    """
    mu = mu or IndexSequence("all")
    family = BasisFamily("binomial-bernstein", horizon, EXACT)
    adapters = [TargetAdapter(t, EXACT, i) for i, t in enumerate(targets)]
    for ad in adapters:
        if ad.spec.region is None or ad.spec.region.shape != "interval":
            raise ValueError("each target needs an interval region")
        lo, hi = (Fraction(v) for v in ad.spec.region.params)
        if not (0 < lo < hi < 1):
            raise ValueError("regions must sit strictly inside (0,1)")

    entries = []
    blocks = []
    records = []
    lam_prev = -1
    d_prev = -1

    def seq_now():
        return CoefficientSequence(tuple(entries), tuple(blocks), EXACT)

    for ad in adapters:
        eps = float(ad.spec.eps)
        vk = max(d_prev, lam_prev) + 1
        region = ad.spec.region
        lo, hi = (Fraction(v) for v in region.params)
        row = mu.next_at_least(max(vk + 4, lam_prev + 1), horizon)
        ok = None
        try:
            for _ in range(6):
                seq = seq_now()

                def residual_float(x, row=row):
                    sx = 0.0
                    if seq.entries:
                        pts = [Fraction(x).limit_denominator(10**12)]
                        digits = precision.required_digits(
                            _sequence_scale(entries) + row * 0.31 + 6, eps * 1e-6
                        )
                        sx = float(
                            partial_sum_values(seq, family, row, pts, digits)[0]
                        )
                    return float(ad.eval_float(x).real) - sx

                if divide_one_minus_x:
                    carrier = lambda x: x**vk * (1.0 - x)
                else:
                    carrier = lambda x: x**vk
                carrier_sup = max(
                    abs(carrier(float(lo) + (float(hi) - float(lo)) * i / 64))
                    for i in range(65)
                )
                fit = approx_on_interval(
                    lambda x: residual_float(x) / carrier(x),
                    region,
                    eps * 0.5 / max(carrier_sup, 1e-12),
                    max_degree=64,
                    mode=FLOAT,
                )
                if not fit.converged:
                    raise needle.NeedleInfeasible(fit.degree, 64, 0.0, vk)
                coeffs = [Fraction(float(c.real)) for c in fit.polynomial.coefficients]
                gexact = Polynomial(tuple(coeffs), Fraction(fit.polynomial.center.real
                    if isinstance(fit.polynomial.center, complex) else fit.polynomial.center), EXACT)
                gexact = gexact.recenter(0)
                if divide_one_minus_x:
                    carrier_poly = Polynomial((Fraction(1), Fraction(-1)), 0, EXACT).shifted_by_power(vk)
                else:
                    carrier_poly = Polynomial((Fraction(1),), 0, EXACT).shifted_by_power(vk)
                gpoly = gexact * carrier_poly
                dk = gpoly.degree
                if dk is None or gpoly.valuation < vk:
                    raise ValueError("carrier product lost its valuation")
                if dk <= row:
                    ok = (gpoly, row)
                    break
                row = mu.next_at_least(dk, horizon)
            if ok is None:
                raise needle.NeedleInfeasible(dk, row, 0.0, vk)
            gpoly, row = ok
        except needle.NeedleInfeasible as exc:
            records.append(
                TargetRecord(
                    ad.target_id, None, float("inf"), eps, density * 4, False,
                    region.to_dict(), ad.descriptor(),
                    detail={"reason": "fit-failed", "message": str(exc)},
                )
            )
            continue
        except HorizonError as exc:
            records.append(
                TargetRecord(
                    ad.target_id, None, float("inf"), eps, density * 4, False,
                    region.to_dict(), ad.descriptor(),
                    detail={"reason": "horizon", "message": str(exc)},
                )
            )
            continue

        bern = monomial_to_bernstein(gpoly, row)
        new_entries = []
        for k, c in enumerate(bern):
            if c != 0:
                new_entries.append((k, c / math.comb(row, k)))
        dk = None
        if new_entries:
            entries.extend(new_entries)
            dk = new_entries[-1][0]
            blocks.append((new_entries[0][0], dk))

        pts = [lo + (hi - lo) * Fraction(i, density * 4) for i in range(density * 4 + 1)]
        digits = precision.required_digits(
            _sequence_scale(entries) + row * 0.31 + 6, eps * 1e-6
        )
        hv = ad.values_decimal(pts, digits)
        sv = partial_sum_values(seq_now(), family, row, pts, digits)
        achieved = max(abs(float(a - b)) for a, b in zip(hv, sv))
        records.append(
            TargetRecord(
                ad.target_id, row, achieved, eps, density * 4, achieved <= eps,
                region.to_dict(), ad.descriptor(),
                detail={
                    "valuation_index": vk,
                    "block_degree": dk,
                    "fit_degree": gpoly.degree - vk,
                    "carrier": "x^v(1-x)" if divide_one_minus_x else "x^v",
                },
            )
        )
        lam_prev = row
        d_prev = dk

    seq = seq_now()
    cert = Certificate(family.to_dict(), mu.to_dict(), EXACT, horizon, records, blocks)
    return seq, cert, family

# ---------------------------------------------------------------------------
# greedy driver: one target at a time, smallest admissible new indices
# ---------------------------------------------------------------------------


def greedy_universal(
    family,
    targets,
    mu=None,
    horizon=None,
    density=DEFAULT_DENSITY,
):
    """Generic block-greedy driver over an arbitrary family.

    Supported routes, chosen per target:
      * scalar-sequence family + numeric target: solve one coefficient exactly
        at the next admissible row (error 0).
      * bernstein / binomial-bernstein / monomial-shifted family + interval
        region bounded away from the family's base point: divide-and-fit.
    Anything else produces a failed record with an explanatory reason, never
    an exception: partial progress is still a valid certificate.
    """
    mu = mu or IndexSequence("all")
    horizon = horizon or family.horizon
    mode = family.mode
    entries = []
    blocks = []
    records = []
    lam_prev = -1
    d_prev = -1

    def seq_now():
        return CoefficientSequence(tuple(entries), tuple(blocks), mode)

    for i, spec in enumerate(targets):
        ad = TargetAdapter(spec, mode, i)
        eps = float(spec.eps)
        vk = max(d_prev, lam_prev) + 1
        if family.kind == "scalar-sequence" and spec.region is None:
            try:
                lam = mu.next_at_least(max(vk, lam_prev + 1), horizon)
            except HorizonError as exc:
                records.append(TargetRecord(
                    ad.target_id, None, float("inf"), eps, 1, False, None,
                    ad.descriptor(), detail={"reason": "horizon", "message": str(exc)}))
                continue
            k_new = lam  # diagonal-most admissible index at this row
            piv = family.value_rule(lam, k_new)
            if piv == 0:
                records.append(TargetRecord(
                    ad.target_id, lam, float("inf"), eps, 1, False, None,
                    ad.descriptor(),
                    detail={"reason": "zero-element", "message":
                            "family element vanishes at row %d index %d" % (lam, k_new)}))
                continue
            want = coerce_scalar(spec.target, mode)
            acc = coerce_scalar(0, mode)
            for k, a in entries:
                if k <= lam:
                    acc += a * coerce_scalar(family.value_rule(lam, k), mode)
            a_new = (want - acc) / coerce_scalar(piv, mode)
            if a_new == 0:
                # already on target; burn the index with nothing to store
                records.append(TargetRecord(
                    ad.target_id, lam, 0.0, eps, 1, True, None, ad.descriptor(),
                    detail={"route": "scalar-exact", "index": None}))
                lam_prev = lam
                continue
            entries.append((k_new, a_new))
            blocks.append((k_new, k_new))
            records.append(TargetRecord(
                ad.target_id, lam, 0.0, eps, 1, True, None, ad.descriptor(),
                detail={"route": "scalar-exact", "index": k_new}))
            lam_prev = lam
            d_prev = k_new
            continue

        if (
            spec.region is not None
            and spec.region.shape == "interval"
            and family.kind in ("bernstein", "binomial-bernstein", "monomial-shifted")
        ):
            rec, new_entries, lam, dk = _greedy_interval_block(
                family, ad, mu, horizon, density, vk, lam_prev, entries, blocks, mode
            )
            records.append(rec)
            if rec.succeeded:
                entries.extend(new_entries)
                if new_entries:
                    blocks.append((new_entries[0][0], dk))
                    d_prev = dk
                lam_prev = lam
            continue

        records.append(TargetRecord(
            ad.target_id, None, float("inf"), eps, density * 4, False,
            spec.region.to_dict() if spec.region else None, ad.descriptor(),
            detail={"reason": "unsupported",
                    "message": "no route for family %r with this target/region"
                    % family.kind}))

    seq = seq_now()
    cert = Certificate(family.to_dict(), mu.to_dict(), mode, horizon, records, blocks)
    return seq, cert


def _greedy_interval_block(family, ad, mu, horizon, density, vk, lam_prev, entries, blocks, mode):
    eps = float(ad.spec.eps)
    region = ad.spec.region
    lo, hi = (float(v) for v in region.params)

    def fail(reason, achieved=float("inf"), **extra):
        detail = {"reason": reason}
        detail.update(extra)
        return (
            TargetRecord(
                ad.target_id, None, achieved, eps, density * 4, False,
                region.to_dict(), ad.descriptor(), detail=detail,
            ),
            [], None, None,
        )

    if family.kind == "monomial-shifted":
        base = float(family.center)
        vpow = vk + family.power_offset
    else:
        base = 0.0
        vpow = vk
        if not (0 <= lo and hi <= 1):
            return fail("unsupported", message="bernstein regions must sit inside [0,1]")
    if vpow > 0 and lo <= base <= hi:
        return fail(
            "unsupported",
            message="region touches the vanishing point; use a dedicated "
                    "constructor for forced valuations",
        )

    row_dependent = family.kind in ("bernstein", "binomial-bernstein")
    row = mu.next_at_least(max(vk + 2, lam_prev + 1), horizon)
    result = None
    for _ in range(6):
        seq = CoefficientSequence(tuple(entries), tuple(blocks), mode)
        if seq.entries:
            spoly = partial_sum(seq, family, row)
        else:
            spoly = Polynomial((coerce_scalar(0, mode),), 0, mode)

        def residual_float(x):
            sx = complex(spoly.evaluate(coerce_scalar(x, FLOAT))) if mode == FLOAT \
                else complex(float(spoly.evaluate(Fraction(x).limit_denominator(10**12))))
            return complex(ad.eval_float(x)) - sx

        if vpow > 0:
            csup = max(abs((lo + (hi - lo) * i / 64) - base) ** vpow for i in range(65))
            fit_fn = lambda x: (residual_float(x) / (x - base) ** vpow).real
        else:
            csup = 1.0
            fit_fn = lambda x: residual_float(x).real
        fit = approx_on_interval(
            fit_fn, region, eps * 0.5 / max(csup, 1e-12), max_degree=64, mode=FLOAT
        )
        if not fit.converged:
            return fail(
                "fit-failed",
                achieved=fit.achieved_error * csup,
                fit_degree=fit.degree,
                fit_error=fit.achieved_error,
            )
        # freeze float coefficients exactly, then restore the carrier power
        coeffs = tuple(Fraction(float(c.real)) for c in fit.polynomial.coefficients)
        ctr = fit.polynomial.center
        ctr = Fraction(float(ctr.real if isinstance(ctr, complex) else ctr))
        g = Polynomial(coeffs, ctr, EXACT)
        if vpow > 0:
            g = g.recenter(Fraction(base)).shifted_by_power(vpow)
            # coefficients now sit in powers of (x - base)
        else:
            g = g.recenter(Fraction(base))
        dk_pow = g.degree if g.degree is not None else vpow
        dk = dk_pow - (family.power_offset if family.kind == "monomial-shifted" else 0)
        if not row_dependent:
            row = mu.next_at_least(max(dk, lam_prev + 1), horizon)
            result = (g, row, dk)
            break
        if dk <= row:
            result = (g, row, dk)
            break
        row = mu.next_at_least(dk, horizon)
    if result is None:
        return fail("row-iteration-diverged")
    g, row, dk = result

    if family.kind == "monomial-shifted":
        new_entries = []
        for p, c in enumerate(g.coefficients):
            k = p - family.power_offset
            if c != 0:
                if k < 0:
                    return fail(
                        "power-offset",
                        message="fit needs powers below the family floor",
                    )
                new_entries.append((k, c if mode == EXACT else complex(float(c))))
    else:
        g0 = g.recenter(0) if g.center != 0 else g
        bern = monomial_to_bernstein(g0, row)
        new_entries = []
        for k, c in enumerate(bern):
            if c != 0:
                if family.kind == "binomial-bernstein":
                    c = c / math.comb(row, k)
                new_entries.append((k, c if mode == EXACT else complex(float(c))))
    if not new_entries:
        return fail("empty-block", message="fit produced the zero polynomial")
    dk = new_entries[-1][0]

    trial_entries = list(entries) + new_entries
    trial_blocks = list(blocks) + [(new_entries[0][0], dk)]
    trial = CoefficientSequence(tuple(trial_entries), tuple(trial_blocks), mode)
    lo_f, hi_f = (Fraction(v) for v in region.params)
    pts = [lo_f + (hi_f - lo_f) * Fraction(i, density * 4) for i in range(density * 4 + 1)]
    if mode == EXACT:
        digits = precision.required_digits(
            _sequence_scale(trial_entries)
            + (row * 0.31 if family.kind == "binomial-bernstein" else 0) + 6,
            eps * 1e-6,
        )
        hv = ad.values_decimal(pts, digits)
        sv = partial_sum_values(trial, family, row, pts, digits)
        achieved = max(abs(float(a - b)) for a, b in zip(hv, sv))
    else:
        s = partial_sum(trial, family, row)
        achieved = max(
            abs(ad.eval_float(float(x)) - s.evaluate(complex(float(x)))) for x in pts
        )
    rec = TargetRecord(
        ad.target_id, row, achieved, eps, density * 4, achieved <= eps,
        region.to_dict(), ad.descriptor(),
        detail={"route": "divide-fit", "valuation_index": vk, "block_degree": dk},
    )
    return rec, new_entries, row, dk


def _float_to_exact_poly(p):
    return Polynomial(tuple(Fraction(float(c.real)) for c in p.coefficients), 0, EXACT)

# ---------------------------------------------------------------------------
# two-disc Taylor construction (float mode, row-scalar weights)
# ---------------------------------------------------------------------------


def taylor_universal_disc(
    targets,
    weights,
    mu=None,
    horizon=DEFAULT_HORIZON,
    density=DEFAULT_DENSITY,
    probe_rows=400,
):
    """Blocks matching targets on off-center discs while staying small near 0.

    Each block is a Hermite-style interpolant: it agrees with the residual to
    high order at the target disc's center and carries a forced zero of order
    m at the origin. The block order m is raised until both the target-disc
    error and the origin-disc smallness clear their tolerances; the attempted
    (m, sup_K, sup_L) triples are kept in the record as a trade-off curve.

    A weight triangle that fails the boundedness/vanishing gate cannot
    support this scheme at all; in that case every target is marked failed
    and the gate verdict is attached to the certificate.
    """
    from .diagnostics import check_condition_cmu

    mu = mu or IndexSequence("all")
    if not weights.is_row_scalar():
        raise ValueError("this constructor handles row-scalar weight triangles only")
    fam = BasisFamily(
        "weighted-monomial", horizon, FLOAT, center=0, power_offset=0, weights=weights
    )
    adapters = [TargetAdapter(t, FLOAT, i) for i, t in enumerate(targets)]
    verdict = check_condition_cmu(weights, mu, min(horizon, probe_rows))
    diagnostics = {"weight_gate": verdict.to_dict()}

    records = []
    entries = []
    blocks = []
    if verdict.verdict == "fail-at-horizon":
        for ad in adapters:
            records.append(TargetRecord(
                ad.target_id, None, float("inf"), float(ad.spec.eps), density * 4,
                False,
                ad.spec.region.to_dict() if ad.spec.region else None,
                ad.descriptor(),
                detail={"reason": "weight-gate",
                        "message": "weight triangle cannot stay bounded on "
                                   "certifying rows while vanishing elsewhere"}))
        seq = CoefficientSequence((), (), FLOAT)
        cert = Certificate(fam.to_dict(), mu.to_dict(), FLOAT, horizon, records,
                           [], diagnostics)
        return seq, cert, fam

    G = Polynomial((0j,), 0, FLOAT)
    lam_prev = -1
    d_prev = -1
    for ad in adapters:
        eps = float(ad.spec.eps)
        region = ad.spec.region
        if region is None or region.shape != "disc":
            raise ValueError("each target needs a disc region")
        center, radius = region.params
        if center == 0:
            raise ValueError("target discs must avoid the origin (off-center scheme)")
        small = ad.spec.small_region
        if ad.kind == "callable":
            records.append(TargetRecord(
                ad.target_id, None, float("inf"), eps, density * 4, False,
                region.to_dict(), ad.descriptor(),
                detail={"reason": "unsupported",
                        "message": "disc targets must be polynomials or named"}))
            continue
        hpoly = ad.poly if ad.kind == "polynomial" else None
        if hpoly is None:
            # expand the named function far enough for the ambient geometry
            depth = 40
            coeffs = [complex(float(precision.named_function_taylor(ad.name, k)))
                      for k in range(depth)]
            hpoly = Polynomial(tuple(coeffs), 0, FLOAT)
        hpoly = Polynomial(tuple(complex(c) for c in hpoly.coefficients), 0, FLOAT)

        m = max(d_prev, lam_prev) + 1
        m = max(m, 1)
        curve = []
        won = None
        mcap = horizon // 2
        while m <= mcap:
            try:
                lam = mu.next_at_least(max(2 * m - 1, lam_prev + 1), horizon)
            except HorizonError:
                break
            scale = complex(weights.row_scalar(lam))
            residual = hpoly.scale(1.0 / scale) - G
            P = hermite_two_disc(residual, complex(center), m)
            approx = (G + P).scale(scale) - hpoly
            supK = sup_norm(approx, region)
            supL = sup_norm(P.scale(scale), small) if small is not None else 0.0
            curve.append([m, supK, supL])
            if supK <= eps and supL <= eps:
                won = (P, lam, supK, supL)
                break
            m += 1 if m < 60 else max(2, m // 16)
        if won is None:
            records.append(TargetRecord(
                ad.target_id, None,
                curve[-1][1] if curve else float("inf"), eps, density * 4, False,
                region.to_dict(), ad.descriptor(),
                small={"region": small.to_dict(), "sup": curve[-1][2]} if small is not None and curve else None,
                detail={"reason": "order-exhausted", "trade_off": curve[-40:]}))
            continue
        P, lam, supK, supL = won
        new_entries = [(k, c) for k, c in enumerate(P.coefficients) if c != 0]
        assert new_entries and new_entries[0][0] > max(d_prev, lam_prev)
        entries.extend(new_entries)
        dk = new_entries[-1][0]
        blocks.append((new_entries[0][0], dk))
        G = G + P
        achieved = sup_norm((G.scale(complex(weights.row_scalar(lam))) - hpoly), region, factor=4)
        small_field = None
        if small is not None:
            small_field = {
                "region": small.to_dict(),
                "sup": sup_norm(P.scale(complex(weights.row_scalar(lam))), small, factor=4),
                "epsilon": eps,
            }
        records.append(TargetRecord(
            ad.target_id, lam, achieved, eps, region.density * 4, achieved <= eps,
            region.to_dict(), ad.descriptor(), small=small_field,
            detail={"order": P.valuation, "block_degree": dk,
                    "block": [new_entries[0][0], dk],
                    "trade_off": curve[-12:]}))
        lam_prev = lam
        d_prev = dk

    seq = CoefficientSequence(tuple(entries), tuple(blocks), FLOAT)
    cert = Certificate(fam.to_dict(), mu.to_dict(), FLOAT, horizon, records,
                       blocks, diagnostics)
    return seq, cert, fam


# ---------------------------------------------------------------------------
# derivative-pair construction
# ---------------------------------------------------------------------------


def derivative_universal_construct(
    targets,
    alpha,
    mu=None,
    horizon=DEFAULT_HORIZON,
    density=DEFAULT_DENSITY,
    alpha_descriptor=None,
):
    """Blocks for the derivative-pair family: row 2n applies n derivatives.

    Each polynomial target h of degree d occupies indices n..n+d; at row 2n
    the family reproduces h exactly (the factorial weights cancel), so the
    on-disc error is zero by construction and the real work is keeping the
    block's raw power series small on its smallness disc. n is raised until
    the closed-form bound (d+1)(1+r^d) max|b| r^n / (|alpha_n| n!) or the
    measured sup clears the tolerance. Window disjointness n > 2 n_prev
    keeps earlier certified rows untouched.
    """
    from .diagnostics import series_R_of_alpha

    mu = mu or IndexSequence("all")
    fam = BasisFamily("derivative-pair", horizon, EXACT, alpha=alpha)
    if alpha_descriptor is None:
        alpha_descriptor = {"type": "callable", "repr": repr(alpha)}
    radius_est, _ = series_R_of_alpha(alpha, 160)

    entries = []
    blocks = []
    records = []
    lam_prev = -1
    n_prev = 0
    for i, spec in enumerate(targets):
        ad = TargetAdapter(spec, EXACT, i)
        eps = float(spec.eps)
        if ad.kind != "polynomial" or ad.poly.mode != EXACT:
            records.append(TargetRecord(
                ad.target_id, None, float("inf"), eps, density * 4, False,
                spec.region.to_dict() if spec.region else None, ad.descriptor(),
                detail={"reason": "unsupported",
                        "message": "derivative targets must be exact polynomials"}))
            continue
        small = spec.small_region
        if small is None or small.shape != "disc" or small.params[0] != 0:
            records.append(TargetRecord(
                ad.target_id, None, float("inf"), eps, density * 4, False,
                spec.region.to_dict() if spec.region else None, ad.descriptor(),
                detail={"reason": "unsupported",
                        "message": "need a smallness disc centered at 0"}))
            continue
        r = float(small.params[1])
        b = ad.poly.coefficients
        if not b:
            records.append(TargetRecord(
                ad.target_id, None, 0.0, eps, density * 4, True,
                spec.region.to_dict() if spec.region else None, ad.descriptor(),
                small={"region": small.to_dict(), "sup": 0.0},
                detail={"reason": "zero-target", "identity": "trivial"}))
            continue
        d = len(b) - 1
        maxb = max(abs(float(c)) for c in b)

        n = max(2 * n_prev + 1, d, 1)
        found = None
        scans = []
        while 2 * n + 1 <= horizon:
            row = 2 * n
            if not mu.contains(row):
                n += 1
                continue
            an = alpha(n)
            if an == 0:
                n += 1
                continue
            log_bound = (
                math.log(d + 1) + math.log1p(r**d) + math.log(max(maxb, 1e-300))
                + n * math.log(max(r, 1e-300)) - math.lgamma(n + 1)
                - _log_abs(an)
            )
            bound = math.exp(log_bound) if log_bound < 700 else float("inf")
            scans.append([n, bound])
            if bound <= eps:
                found = (n, row, an, bound)
                break
            # the bound can be pessimistic; check the real sup cheaply
            if bound <= eps * 1e6:
                qv = _derivative_block_sup(b, n, an, r, density)
                if qv <= eps:
                    found = (n, row, an, qv)
                    break
            n += 1
        if found is None:
            reason = "radius-violation" if r >= radius_est * 0.999 else "order-exhausted"
            records.append(TargetRecord(
                ad.target_id, None, float("inf"), eps, density * 4, False,
                spec.region.to_dict() if spec.region else None, ad.descriptor(),
                small={"region": small.to_dict(), "radius_estimate": radius_est},
                detail={"reason": reason, "scan": scans[-20:],
                        "message": "smallness radius %.4g vs series radius "
                                   "estimate %.4g" % (r, radius_est)}))
            continue
        n, row, an, bound = found

        new_entries = []
        an_frac = Fraction(an)
        for idx, c in enumerate(b):
            if c != 0:
                val = Fraction(c) * Fraction(math.factorial(idx), math.factorial(idx + n)) / an_frac
                new_entries.append((idx + n, val))
        entries.extend(new_entries)
        dk = new_entries[-1][0]
        blocks.append((new_entries[0][0], dk))
        seq = CoefficientSequence(tuple(entries), tuple(blocks), EXACT)
        got = partial_sum(seq, fam, row)
        exact_hit = got - ad.poly
        achieved = 0.0 if exact_hit.degree is None else float("inf")
        direct = _derivative_block_sup(b, n, an, r, density * 4)
        records.append(TargetRecord(
            ad.target_id, row, achieved, eps, density * 4,
            achieved == 0.0 and min(bound, direct) <= eps,
            spec.region.to_dict() if spec.region else None, ad.descriptor(),
            small={"region": small.to_dict(), "sup": direct, "bound": bound,
                   "epsilon": eps},
            detail={"order": n, "block_degree": dk,
                    "block": [new_entries[0][0], dk], "identity": "exact"}))
        lam_prev = row
        n_prev = n

    seq = CoefficientSequence(tuple(entries), tuple(blocks), EXACT)
    famd = fam.to_dict()
    famd["alpha"] = alpha_descriptor
    cert = Certificate(famd, mu.to_dict(), EXACT, horizon, records, blocks)
    return seq, cert, fam


def _log_abs(v):
    # log|v| for scalars whose float image may overflow or underflow
    if isinstance(v, Fraction):
        return math.log(abs(v.numerator)) - math.log(v.denominator)
    if isinstance(v, int):
        return math.log(abs(v))
    return math.log(float(abs(v)))


def _derivative_block_sup(b, n, an, r, density):
    """sup over |z| = r of the raw block power series, by log-safe terms."""
    total = 0.0
    for idx, c in enumerate(b):
        if c == 0:
            continue
        lg = (
            _log_abs(c) + math.lgamma(idx + 1) - math.lgamma(idx + n + 1)
            - _log_abs(an) + (idx + n) * math.log(max(r, 1e-300))
        )
        total += math.exp(lg) if lg < 700 else float("inf")
    return total
