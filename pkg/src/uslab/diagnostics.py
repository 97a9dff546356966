"""Finite-horizon verdicts, exact identities, radius estimates, gap windows,
and independent re-checking of emitted certificates.

Every asymptotic condition here is undecidable from finitely many rows, so
verdict-producing checks return a three-way answer (pass-at-horizon,
fail-at-horizon, inconclusive) together with the witness data that produced
it. Limsups are estimated by running maxima over the top half of the sampled
range, liminfs by running minima; a configurable margin (default 0.05)
separates "close to 1" from "bounded away".
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import precision
from .bases import (
    CoefficientSequence,
    HorizonError,
    IndexSequence,
    WeightTriangle,
    partial_sum,
    partial_sum_values,
)
from .poly import EXACT, FLOAT, CompactSetSpec, Polynomial, sup_norm

DEFAULT_MARGIN = 0.05
DEFAULT_A_GRID = (1.5, 1.1, 1.01)
MIN_TOP_SAMPLES = 5
# the root test's finite-horizon estimate for genuinely infinite radii grows
# without bound in the horizon, so any fixed cap is eventually cleared; 10
# separates the bounded closed-form families (R <= 2 here) from that regime
RADIUS_CAP = 10.0


@dataclass
class ConditionVerdict:
    """Outcome of one finite-horizon check, with its evidence attached."""

    condition: str
    horizon: int
    verdict: str  # pass-at-horizon | fail-at-horizon | inconclusive
    witness: dict
    margin: float = DEFAULT_MARGIN
    a_grid: tuple = ()

    def to_dict(self):
        return {
            "condition": self.condition,
            "horizon": self.horizon,
            "verdict": self.verdict,
            "margin": self.margin,
            "a_grid": list(self.a_grid),
            "witness": self.witness,
        }


def _abs_root(v, n):
    """|v|^(1/n) computed through logs; exact inputs stay overflow-free."""
    if v == 0:
        return 0.0
    if isinstance(v, Fraction):
        return 10.0 ** (precision.log10_fraction(v) / n)
    if isinstance(v, int):
        return 10.0 ** (math.log10(abs(v)) / n)
    a = abs(v)
    if a == 0 or a == float("inf"):
        return float(a)
    return math.exp(math.log(a) / n)


def _mu_rows(mu, horizon, start=1):
    return [n for n in range(start, horizon + 1) if mu.contains(n)]


def _extremum_verdict(stats, rows, horizon, margin, min_samples, kind):
    """Shared top-half protocol. kind: 'max' estimates a limsup and passes
    when the running max reaches 1 - margin; 'min-eq-1' estimates a liminf
    and passes when the running min lands within margin of 1."""
    half = horizon // 2
    top = [(n, s) for n, s in zip(rows, stats) if n > half]
    if len(top) < min_samples:
        return "inconclusive", {"top_half_count": len(top)}
    if kind == "max":
        run = max(s for _, s in top)
        verdict = "pass-at-horizon" if run >= 1.0 - margin else "fail-at-horizon"
        key = "top_half_running_max"
    else:
        run = min(s for _, s in top)
        verdict = (
            "pass-at-horizon" if abs(run - 1.0) <= margin else "fail-at-horizon"
        )
        key = "top_half_running_min"
    return verdict, {key: run, "top_half_count": len(top)}


def check_condition_cmu(
    alpha,
    mu,
    horizon,
    a_grid=DEFAULT_A_GRID,
    margin=DEFAULT_MARGIN,
    min_samples=MIN_TOP_SAMPLES,
):
    """Row statistic m_n = min_k |alpha_{n,k}|^{1/n} over n in mu.

    The verdict follows the margin protocol on the top-half running max of
    m_n (this is what the closed-form families decide at practical horizons).
    The A-grid counts, for each A > 1, how many top-half rows satisfy
    |alpha_{n,k}| >= A^{-n} for all k -- equivalently m_n >= 1/A -- and is
    attached as supporting evidence.
    """
    if horizon > alpha.horizon:
        raise HorizonError(
            "horizon %d beyond weight horizon %d" % (horizon, alpha.horizon)
        )
    rows = _mu_rows(mu, horizon)
    row_scalar = alpha.is_row_scalar()
    stats = []
    for n in rows:
        if row_scalar:
            m = _abs_root(alpha.weight(n, 0), n)
        else:
            m = min(_abs_root(alpha.weight(n, k), n) for k in range(n + 1))
        stats.append(m)
    verdict, summary = _extremum_verdict(
        stats, rows, horizon, margin, min_samples, "max"
    )
    half = horizon // 2
    evidence = {}
    for A in a_grid:
        count = sum(1 for n, s in zip(rows, stats) if n > half and s >= 1.0 / A)
        evidence[str(A)] = {"count": count, "sustained": count >= min_samples}
    witness = {
        "indices": rows,
        "statistic": stats,
        "a_grid_evidence": evidence,
    }
    witness.update(summary)
    return ConditionVerdict(
        "cmu", horizon, verdict, witness, margin, tuple(a_grid)
    )


def check_necessary(
    alpha, mu, horizon, margin=DEFAULT_MARGIN, min_samples=MIN_TOP_SAMPLES
):
    """Row statistic M_n = max_k |alpha_{n,k}|^{1/n}; verdict on limsup >= 1."""
    if horizon > alpha.horizon:
        raise HorizonError(
            "horizon %d beyond weight horizon %d" % (horizon, alpha.horizon)
        )
    rows = _mu_rows(mu, horizon)
    row_scalar = alpha.is_row_scalar()
    stats = []
    for n in rows:
        if row_scalar:
            m = _abs_root(alpha.weight(n, 0), n)
        else:
            m = max(_abs_root(alpha.weight(n, k), n) for k in range(n + 1))
        stats.append(m)
    verdict, summary = _extremum_verdict(
        stats, rows, horizon, margin, min_samples, "max"
    )
    witness = {"indices": rows, "statistic": stats}
    witness.update(summary)
    return ConditionVerdict("necessary-limsup", horizon, verdict, witness, margin)


def phi_criterion(
    phi, mu, horizon, margin=DEFAULT_MARGIN, min_samples=MIN_TOP_SAMPLES
):
    """liminf_{n in mu} |phi(n)|^{1/n} = 1, tested by the top-half running min."""
    rows = _mu_rows(mu, horizon)
    stats = []
    for n in rows:
        v = phi(n)
        if v == 0:
            raise ValueError("phi(%d) = 0" % n)
        stats.append(_abs_root(v, n))
    verdict, summary = _extremum_verdict(
        stats, rows, horizon, margin, min_samples, "min-eq-1"
    )
    witness = {"indices": rows, "statistic": stats}
    witness.update(summary)
    return ConditionVerdict("phi-liminf", horizon, verdict, witness, margin)


def lemma52_identity(n, delta):
    """Both sides of the degree-n factorial/binomial identity, exactly.

    lhs = sum_{l=n}^{2n} delta^(l-n) * l!/(l-n)!
    rhs = n! * sum_{k=0}^{n} C(2n+1, k) delta^k (1-delta)^(n-k)
    Returns (lhs, rhs, equal). Exact-rational only; delta must lie in (0,1).
    """
    delta = Fraction(delta)
    if not (0 < delta < 1):
        raise ValueError("delta must lie strictly between 0 and 1")
    if n < 0:
        raise ValueError("n must be a natural number")
    lhs = sum(delta ** (l - n) * math.perm(l, n) for l in range(n, 2 * n + 1))
    one_minus = 1 - delta
    rhs = math.factorial(n) * sum(
        math.comb(2 * n + 1, k) * delta**k * one_minus ** (n - k)
        for k in range(n + 1)
    )
    return lhs, rhs, lhs == rhs


def radius_root_test(a, horizon):
    """Limsup estimator 1/R0 ~ running max of |a_n|^{1/n} (top half).

    Needs at least 10 nonzero indices at or below the horizon; returns a dict
    with the estimate and the full root sequence for inspection.
    """
    idx = [(k, v) for k, v in a.entries if 1 <= k <= horizon and v != 0]
    if len(idx) < 10:
        raise ValueError(
            "need at least 10 nontrivial indices, have %d" % len(idx)
        )
    roots = [(k, _abs_root(v, k)) for k, v in idx]
    tail = roots[len(roots) // 2 :]
    estimate = max(r for _, r in tail)
    return {
        "estimate": estimate,
        "indices": [k for k, _ in roots],
        "roots": [r for _, r in roots],
        "tail_start": tail[0][0],
    }


def series_R_of_alpha(alpha, horizon, cap=RADIUS_CAP):
    """Root-test radius of sum_n z^n / (n! |alpha_n|).

    alpha: callable n -> scalar (nonzero). Returns (R, witness) where R is a
    float or +inf once the estimate clears `cap`.
    """
    ln10 = math.log(10.0)
    roots = []
    for n in range(1, horizon + 1):
        an = alpha(n)
        if an == 0:
            raise ValueError("alpha(%d) = 0" % n)
        if isinstance(an, Fraction):
            la = precision.log10_fraction(an)
        else:
            la = math.log10(abs(an))
        # log10 of 1/(n! |alpha_n|)
        lt = -(math.lgamma(n + 1) / ln10) - la
        roots.append(10.0 ** (lt / n))
    tail = roots[horizon // 2 :]
    lim = max(tail)
    R = float("inf") if lim == 0.0 else 1.0 / lim
    if R > cap:
        R = float("inf")
    return R, {"roots_tail": tail[-10:], "limsup_estimate": lim}


def ostrowski_gap_detect(a, n_list, shrink=None):
    """Window maxima of |a_j|^{1/j} over [eps_k n_k, n_k].

    n_list: increasing ints (or an IndexSequence paired with a horizon is the
    caller's job to expand). shrink: callable k -> eps_k in (0, 1]; defaults
    to 1/log(k+2), clamped to 1. Reports each window and whether the maxima
    decrease toward 0 across the list.
    """
    ns = list(n_list)
    if not ns:
        raise ValueError("need at least one window index")
    if shrink is None:
        shrink = lambda k: min(1.0, 1.0 / math.log(k + 2))
    coeff = dict(a.entries)
    windows = []
    maxima = []
    for k, nk in enumerate(ns):
        ek = float(shrink(k))
        if not (0 < ek <= 1):
            raise ValueError("shrink factor %g outside (0, 1]" % ek)
        lo = max(1, math.ceil(ek * nk))
        if lo > nk:
            raise ValueError("empty window at n_%d = %d" % (k, nk))
        wmax = 0.0
        for j in range(lo, nk + 1):
            v = coeff.get(j)
            if v:
                wmax = max(wmax, _abs_root(v, j))
        windows.append({"k": k, "n": nk, "window": [lo, nk], "max_root": wmax})
        maxima.append(wmax)
    nonincreasing = all(b <= a_ + 1e-12 for a_, b in zip(maxima, maxima[1:]))
    gap_evidence = maxima[-1] == 0.0 or (
        nonincreasing and maxima[-1] < maxima[0]
    )
    return {
        "windows": windows,
        "nonincreasing": nonincreasing,
        "final_max": maxima[-1],
        "gap_evidence": gap_evidence,
    }


# ---------------------------------------------------------------------------
# certificate verification
# ---------------------------------------------------------------------------

_STRUCT_KEYS = ("kind", "mode", "horizon", "center", "power_offset")


def _family_matches(fam, cert_family):
    fd = fam.to_dict()
    for key in _STRUCT_KEYS:
        if fd.get(key) != cert_family.get(key):
            return False, key
    return True, None


def _confirmed(recomputed, claimed):
    # strict doubling rule: a claim is confirmed when the finer-grid value
    # stays under twice the recorded one (plus absolute slack for exact hits)
    return recomputed < 2.0 * claimed or recomputed <= claimed + 2.0**-40


def _verify_grid_fractions(region, cells):
    a, b = (Fraction(v) for v in region.params)
    step = (b - a) / cells
    return [a + i * step for i in range(cells + 1)]


def _region_sup_exact(a, fam, lam, region, cells, adapter, digits):
    pts = _verify_grid_fractions(region, cells)
    sv = partial_sum_values(a, fam, lam, pts, digits)
    hv = adapter.values_decimal(pts, digits)
    return max(abs(float(s - h)) for s, h in zip(sv, hv))


def _region_sup_float(a, fam, lam, region, factor, adapter):
    p = partial_sum(a, fam, lam)
    worst = 0.0
    for z in region.sample_points(factor):
        worst = max(worst, abs(p.evaluate(z) - adapter.eval_float(z)))
    return worst


def _block_poly(a, bounds, mode):
    lo, hi = bounds
    top = -1
    coeffs = {}
    for k, v in a.entries:
        if lo <= k <= hi and v != 0:
            coeffs[k] = v
            top = max(top, k)
    dense = [coeffs.get(k, 0) for k in range(top + 1)]
    return Polynomial(tuple(dense), 0, mode)


def verify_certificate(a, fam, cert):
    """Independently recheck every claim in `cert` against (a, fam).

    Each successful record's sup norm is recomputed at 4x the certificate's
    recorded sample density on the same nested grid family; a record is
    confirmed when the finer value stays below twice the claim (or within an
    absolute 2^-40 slack for exact-hit claims). Records that already declare
    failure carry no claim and are reported as skipped. Raises ValueError on
    a family or horizon mismatch.
    """
    from .construct import TargetAdapter, TargetSpec, target_from_descriptor

    ok, key = _family_matches(fam, cert.family)
    if not ok:
        raise ValueError("certificate/family mismatch on %r" % key)
    if cert.horizon > fam.horizon:
        raise ValueError("certificate horizon beyond family horizon")

    out = []
    all_ok = True
    for rec in cert.records:
        row = {
            "target_id": rec.target_id,
            "claimed": rec.achieved_error,
            "epsilon": rec.epsilon,
        }
        if rec.lam is None:
            row["status"] = "skipped-unproven"
            if rec.detail and "reason" in rec.detail:
                row["reason"] = rec.detail["reason"]
            out.append(row)
            continue

        tgt = target_from_descriptor(rec.target, cert.mode)
        spec = TargetSpec(tgt, None, rec.epsilon, rec.target_id)
        adapter = TargetAdapter(spec, cert.mode, 0)
        statuses = []

        if fam.kind == "scalar-sequence":
            s = partial_sum(a, fam, rec.lam)
            got = s.coefficient(0)
            want = adapter.at_zero()
            recomputed = abs(float(got - want))
        elif fam.kind == "derivative-pair":
            s = partial_sum(a, fam, rec.lam)
            diff = s - adapter.poly
            recomputed = 0.0 if diff.degree is None else float("inf")
        else:
            region = CompactSetSpec.from_dict(rec.region)
            cells = rec.sample_density * 4
            if cert.mode == EXACT and region.shape == "interval":
                digits = _verify_digits(a, fam, rec)
                recomputed = _region_sup_exact(
                    a, fam, rec.lam, region, cells, adapter, digits
                )
            else:
                factor = max(1, cells // region.density)
                recomputed = _region_sup_float(
                    a, fam, rec.lam, region, factor, adapter
                )
        row["recomputed"] = recomputed
        statuses.append(_confirmed(recomputed, rec.achieved_error))

        if rec.small and "sup" in rec.small and rec.detail and "block" in rec.detail:
            sreg = CompactSetSpec.from_dict(rec.small["region"])
            q = _block_poly(a, rec.detail["block"], cert.mode)
            if fam.kind == "weighted-monomial":
                w = fam.weights.row_scalar(rec.lam)
                q = q.scale(coerce_mode_scalar(w, cert.mode))
                q = q.shifted_by_power(fam.power_offset)
            sf = max(1, (rec.sample_density * 4) // max(sreg.density, 1))
            small_re = sup_norm(_float_poly(q), sreg, factor=sf)
            row["small_recomputed"] = small_re
            row["small_claimed"] = rec.small["sup"]
            statuses.append(_confirmed(small_re, rec.small["sup"]))

        confirmed = all(statuses)
        row["status"] = "confirmed" if confirmed else "violated"
        all_ok = all_ok and confirmed
        out.append(row)

    return {
        "family": cert.family,
        "mode": cert.mode,
        "horizon": cert.horizon,
        "checked": len(out),
        "records": out,
        "all_confirmed": all_ok,
    }


def _verify_digits(a, fam, rec):
    scale = 0.0
    for _, v in a.entries:
        if v:
            scale = max(scale, precision.log10_fraction(v))
    if fam.kind == "binomial-bernstein":
        scale += rec.lam * 0.302
    eps_ref = max(rec.epsilon, 1e-12)
    return precision.required_digits(scale + 6.0, eps_ref * 1e-8)


def _float_poly(p):
    if p.mode == FLOAT:
        return p
    return Polynomial(
        tuple(float(c) for c in p.coefficients), float(p.center), FLOAT
    )


def coerce_mode_scalar(v, mode):
    if mode == EXACT:
        return Fraction(v)
    return complex(v)
