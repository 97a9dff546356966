"""Vanishing-constraint interval blocks built from Chebyshev bumps.

A block that must vanish to high order at 0 yet match an analytic residual
on [0, 1] is assembled as

    p(t) = E(t) - J(t) * B(t)

where E is the residual's (exact, rational) truncated Taylor expansion,
B(t) = T_m(mu(t)) / T_m(mu(0)) is a bump equal to 1 at 0 and exponentially
small on the outer zone [zone, 1] (mu maps [zone, 1] onto [-1, 1]), and the
jet polynomial J (degree < required valuation) is solved exactly so that the
low-order Taylor coefficients of J*B equal those of E. The subtraction then
cancels every coefficient below the required valuation *exactly*, while
changing the values on [zone, 1] by at most sup|J| * tau, tau = 1/T_m(mu(0)).

All coefficient algebra is integer arithmetic over denominators tracked by
hand; nothing here trusts floating point.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from . import precision


def dyadic_at_most(x, sig_bits=10):
    """Largest dyadic rational p/2^e <= x with p < 2^sig_bits, e <= 60."""
    if x <= 0:
        raise ValueError("zone must be positive")
    x = Fraction(x)
    e = 0
    while (x.numerator << e) // x.denominator < (1 << (sig_bits - 1)) and e < 60:
        e += 1
    p = (x.numerator << e) // x.denominator
    if p == 0:
        p, e = 1, 60
    fr = Fraction(p, 1 << e)
    return fr


@dataclass
class ChebBump:
    """B(t) = T_m(mu(t))/T_m(mu(0)) on [0, 1] with outer zone [zone, 1]."""

    m: int
    zone: Fraction
    mono_num: list  # integer monomial coefficients, denominator `norm`
    cheb_num: list  # integer Chebyshev (T_j(2t-1)) coefficients, denominator `norm`
    norm: int  # T_m(mu(0)) * D^m, a positive integer
    tau_log10: float

    def jet(self, r):
        """Taylor coefficient [t^r] B as a Fraction."""
        if r >= len(self.mono_num):
            return Fraction(0)
        return Fraction(self.mono_num[r], self.norm)


def chebyshev_bump(m, zone):
    """Construct the bump for integer m >= 1 and dyadic zone in (0, 1)."""
    zone = Fraction(zone)
    p, q = zone.numerator, zone.denominator
    D = q - p
    if m < 1 or not (0 < zone < 1):
        raise ValueError("need m >= 1 and zone in (0, 1)")

    # Monomial: T_j(mu(t)) = M_j(t) / D^j, mu(t) = (2q t - (q+p)) / D
    m_prev = [1]
    m_cur = [-(q + p), 2 * q]
    # Chebyshev in nu = 2t - 1: mu = (q nu - p)/D
    c_prev = [1]
    c_cur = [-p, q]
    D2 = D * D
    for _ in range(m - 1):
        # monomial step: M_{j+1} = (4q t - 2(q+p)) M_j - D^2 M_{j-1}
        nxt = [0] * (len(m_cur) + 1)
        for i, v in enumerate(m_cur):
            nxt[i] -= 2 * (q + p) * v
            nxt[i + 1] += 4 * q * v
        for i, v in enumerate(m_prev):
            nxt[i] -= D2 * v
        m_prev, m_cur = m_cur, nxt
        # chebyshev step
        nc = [0] * (len(c_cur) + 1)
        for i, v in enumerate(c_cur):
            nc[i] -= 2 * p * v
            if i == 0:
                nc[1] += 2 * q * v
            else:
                nc[i - 1] += q * v
                nc[i + 1] += q * v
        for i, v in enumerate(c_prev):
            nc[i] -= D2 * v
        c_prev, c_cur = c_cur, nc

    mono, cheb = m_cur, c_cur
    norm = mono[0]
    if norm < 0:
        mono = [-v for v in mono]
        cheb = [-v for v in cheb]
        norm = -norm
    # tau = D^m / |T_m(mu(0))| * D^-m ... value bound on the outer zone:
    tau_log10 = m * math.log10(D) - (precision.log10_fraction(Fraction(norm)))
    return ChebBump(m, zone, mono, cheb, norm, tau_log10)


def solve_jet(target_jets, bump, valuation):
    """J (coefficients J_0 .. J_{v-1}) with jets(J*B) matching target_jets at
    orders 0..valuation-1. Exact triangular solve; uses B(0) = 1."""
    J = [Fraction(0)] * valuation  # index r holds J_r
    for r in range(valuation):
        acc = target_jets.get(r, Fraction(0))
        for i in range(r):
            if J[i]:
                acc -= J[i] * bump.jet(r - i)
        J[r] = acc
    return J


def poly_mul_cheb(f_cheb, g_cheb):
    """Product of two Chebyshev series (same variable), exact."""
    n, k = len(f_cheb), len(g_cheb)
    out = [Fraction(0)] * (n + k - 1)
    for i, fi in enumerate(f_cheb):
        if fi == 0:
            continue
        for j, gj in enumerate(g_cheb):
            if gj == 0:
                continue
            v = Fraction(fi) * gj / 2
            out[i + j] += v
            out[abs(i - j)] += v
    return out


def mono_to_cheb01(coeffs):
    """Monomial coefficients in t on [0,1] -> Chebyshev T_j(2t-1) coefficients."""
    out = [Fraction(0)]
    for c in reversed([Fraction(v) for v in coeffs]):
        out = _cheb_mul_t(out)
        out[0] += c
    return out


def _cheb_mul_t(f):
    """Multiply a T_j(2t-1) series by t; t = (nu+1)/2."""
    out = [Fraction(0)] * (len(f) + 1)
    for i, v in enumerate(f):
        if v == 0:
            continue
        out[i] += v / 2
        if i == 0:
            out[1] += v / 2
        else:
            out[i - 1] += v / 4
            out[i + 1] += v / 4
    return out


def cheb_eval_decimal(cheb_coeffs, ts, digits):
    """Clenshaw values of a Chebyshev-in-(2t-1) series at rational points t."""
    nus = [2 * Fraction(t) - 1 for t in ts]
    return precision.clenshaw_many_decimal(cheb_coeffs, nus, digits)


@dataclass
class BlockPiece:
    """One parity piece of a block: polynomial in t with exact forms."""

    mono: list  # Fractions, [t^i]
    cheb: list  # Fractions, T_j(2t-1) basis
    m: int
    zone: Fraction
    tau_log10: float
    jet_scale_log10: float

    @property
    def degree(self):
        d = len(self.mono) - 1
        while d >= 0 and self.mono[d] == 0:
            d -= 1
        return d

    def cheb_scale_log10(self):
        s = 0.0
        for c in self.cheb:
            if c:
                s = max(s, precision.log10_fraction(c))
        return s


def estimate_bump_order(jet_log10s, valuation, zone, eps_out):
    """Fixed-point estimate of the Chebyshev order m needed so that
    sup|J*B| <= eps_out on [zone, 1], given log10 magnitudes of the target
    jets at orders 1..valuation-1. Also returns log10 of the expected jet
    coefficient scale. Returns (m, scale_log10)."""
    zone = float(zone)
    if not jet_log10s:
        return 0, 0.0
    sq = math.sqrt(zone)
    ln10 = math.log(10.0)
    m = max(valuation + 1, int(math.log(3.0 / eps_out) / (2.0 * sq)) + 1)
    scale = 0.0
    for _ in range(60):
        b1_log = math.log10(max(m, 2)) - 0.5 * math.log10(zone)
        scale = max(
            e + (valuation - 1 - r) * b1_log - math.lgamma(valuation - r) / ln10
            for r, e in jet_log10s.items()
        )
        target = (scale + math.log10(3.0 / eps_out)) * ln10 / (2.0 * sq)
        new_m = max(valuation + 1, int(target) + 1)
        if abs(new_m - m) <= max(2, m // 50):
            m = max(m, new_m)
            break
        m = new_m
    # order forced by the vanishing constraint alone (incomplete polynomials:
    # t^v-heavy polynomials bounded on [0,1] are tiny on [0, (v/N)^2])
    m_floor = int(valuation / math.sqrt(2.0 * zone) - valuation) + 1
    return max(m, m_floor, 1), scale


def _assemble_piece(jets, mono_E, bump, valuation, eps_out, kbits, scale_log):
    """Exact forms of p = E - J*B with J solved over 2**kbits dyadics.

    An exact triangular jet solve gives J denominators near norm**valuation,
    so every later reduction gcds operands valuation-times larger than the
    inherent coefficient size (and the final entries would serialize at that
    bloat). A dyadic J keeps every denominator at 2**kbits * norm. The
    sub-valuation coefficients of E - J*B are then not exactly zero but tiny;
    they are dropped outright, which perturbs the polynomial by their exactly
    computed sum. kbits grows until that perturbation is far below eps_out.
    """
    norm = bump.norm
    for _ in range(8):
        half = 1 << (kbits - 1)
        BN = [(bi << kbits) // norm for bi in bump.mono_num[:valuation]]
        BN += [0] * (valuation - len(BN))
        JN = [0] * valuation
        for r in range(valuation):
            e = jets.get(r)
            acc = (e.numerator << kbits) // e.denominator if e is not None else 0
            s = 0
            for i in range(r):
                if JN[i]:
                    s += JN[i] * BN[r - i]
            JN[r] = acc - ((s + half) >> kbits)
        den_m = norm << kbits
        need = max(len(mono_E), valuation + len(bump.mono_num))
        acc = [0] * need
        for r, jn in enumerate(JN):
            if jn == 0:
                continue
            for i, bi in enumerate(bump.mono_num):
                if bi:
                    acc[r + i] += jn * bi
        # exactly computed sub-valuation leftovers; dropped below
        deltas = []
        dmax = float("-inf")
        for r in range(valuation):
            e = mono_E[r] if r < len(mono_E) else Fraction(0)
            d = e - Fraction(acc[r], den_m)
            deltas.append(d)
            if d:
                dmax = max(dmax, precision.log10_fraction(d))
        if dmax <= math.log10(eps_out / 64.0) - math.log10(max(valuation, 1)):
            break
        kbits = 2 * kbits + 256
    else:
        raise AssertionError("dyadic jet solve failed to converge")

    mono = [Fraction(0)] * valuation
    for i in range(valuation, need):
        e = mono_E[i] if i < len(mono_E) else None
        if acc[i]:
            v = Fraction(acc[i], den_m)
            mono.append(e - v if e is not None else -v)
        else:
            mono.append(e if e is not None else Fraction(0))

    cheb_J = mono_to_cheb01([Fraction(jn, 1 << kbits) for jn in JN])
    shift = kbits + 2 * len(cheb_J)
    JCN = [int(c * (1 << shift)) for c in cheb_J]
    out = [0] * (len(cheb_J) + len(bump.cheb_num) - 1)
    for i, jc in enumerate(JCN):
        if jc == 0:
            continue
        for j, cb in enumerate(bump.cheb_num):
            if cb:
                v = jc * cb
                out[i + j] += v
                out[abs(i - j)] += v
    den_c = norm << (shift + 1)
    cheb_E = mono_to_cheb01(mono_E)
    cheb_D = mono_to_cheb01(deltas)
    cheb = []
    for k in range(max(len(cheb_E), len(out))):
        c = cheb_E[k] if k < len(cheb_E) else Fraction(0)
        o = out[k] if k < len(out) else 0
        if o:
            c = c - Fraction(o, den_c)
        if k < len(cheb_D) and cheb_D[k]:
            c = c - cheb_D[k]
        cheb.append(c)
    return BlockPiece(mono, cheb, bump.m, bump.zone, bump.tau_log10, scale_log)


def build_piece(taylor, valuation, zone_hint, eps_out, max_degree, values_check=None):
    """Build p(t) = E(t) - J(t)B(t) with [t^r] p = 0 for r < valuation.

    taylor: dict r -> Fraction, the residual piece's Taylor coefficients
            (must be complete up to its own degree; treated as exact).
    zone_hint: outer zone start (will be made dyadic).
    eps_out: bound the needle part must respect on [zone, 1].
    values_check: optional callable(piece) -> float returning the verified
            sup error; when given, m is bumped geometrically until it passes.

    Returns a BlockPiece, or raises NeedleInfeasible with the degree estimate.
    """
    jets = {r: taylor.get(r, Fraction(0)) for r in range(valuation)}
    jets = {r: v for r, v in jets.items() if v != 0}
    top = max(taylor) if taylor else 0
    mono_E = [taylor.get(i, Fraction(0)) for i in range(top + 1)]

    if not jets:
        # residual already vanishes to the required order; Taylor suffices
        mono = list(mono_E)
        piece = BlockPiece(mono, mono_to_cheb01(mono), 0, Fraction(0), float("-inf"), 0.0)
        if values_check is not None:
            err = values_check(piece)
            if err > eps_out:
                raise NeedleInfeasible(piece.degree, max_degree, 0.0, valuation)
        return piece

    jet_logs = {r: precision.log10_fraction(v) for r, v in jets.items()}
    zone = dyadic_at_most(zone_hint)
    m, scale_log = estimate_bump_order(jet_logs, valuation, zone, eps_out)
    est_degree = m + valuation
    if est_degree > max_degree:
        raise NeedleInfeasible(est_degree, max_degree, float(zone), valuation)

    kbits = 320 + max(0, int(3.4 * (scale_log + math.log10(3.0 / eps_out))))
    attempts = 0
    while True:
        bump = chebyshev_bump(m, zone)
        piece = _assemble_piece(jets, mono_E, bump, valuation, eps_out, kbits, scale_log)
        if values_check is None:
            return piece
        err = values_check(piece)
        if err <= eps_out:
            return piece
        attempts += 1
        if attempts > 10:
            raise NeedleInfeasible(m + valuation, max_degree, float(zone), valuation)
        m = m + max(8, m // 5)
        if m + valuation > max_degree:
            raise NeedleInfeasible(m + valuation, max_degree, float(zone), valuation)


class NeedleInfeasible(Exception):
    """The vanishing constraint forces a degree beyond the allowed cap."""

    def __init__(self, estimate, cap, zone, valuation):
        self.estimate = int(estimate)
        self.cap = int(cap)
        self.zone = zone
        self.valuation = valuation
        super().__init__(
            "vanishing order %d with zone %.3g needs degree ~%d, cap %d"
            % (valuation, zone, estimate, cap)
        )


def find_zone(values_fn, hi, eps_small, lo_floor=None):
    """Largest t* (dyadic, <= hi) with |values| <= eps_small on (0, t*].

    values_fn(points) -> list of float magnitudes; points are Fractions.
    Scans a geometric ladder downward; deterministic.
    """
    hi = Fraction(hi)
    if lo_floor is None:
        lo_floor = Fraction(1, 1 << 60)
    t = hi
    while t > lo_floor:
        probe = [t * Fraction(i, 8) for i in range(1, 9)]
        vals = values_fn(probe)
        if max(vals) <= eps_small:
            return t
        t = t / 2
    return lo_floor
