"""Command line front end: run experiment configs, verify reports, check
identities.

An experiment config is a JSON document (schema_version 1) describing one
command: construct a universal series, run a diagnostic, verify an existing
report against its series sidecar, or sweep an identity. `run` executes the
config and writes a report; `verify` and `identity` are direct shortcuts for
their config forms.

Reports are deterministic: the same config and seed produce byte-identical
JSON except for the `run_meta` key (wall-clock data), which is excluded from
the determinism hash recorded alongside it.

Exit codes: 0 when every certificate record / verdict succeeds, 1 when the
run completes but something failed (the report is still written), 2 on a
malformed or invariant-violating config.
"""

import argparse
import hashlib
import json
import math
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__
from .bases import BasisFamily, CoefficientSequence, IndexSequence, WeightTriangle
from .construct import (
    Certificate,
    TargetRecord,
    TargetSpec,
    bernstein_construct,
    binomial_bernstein_construct,
    cesaro_universal,
    derivative_universal_construct,
    fekete_construct,
    greedy_universal,
    interpolating_universal,
    riemann_scalar_family,
    riemann_target_solve,
    taylor_universal_disc,
)
from .diagnostics import (
    check_condition_cmu,
    check_necessary,
    lemma52_identity,
    ostrowski_gap_detect,
    phi_criterion,
    radius_root_test,
    series_R_of_alpha,
    verify_certificate,
)
from .poly import EXACT, FLOAT, CompactSetSpec, Polynomial

SCHEMA_VERSION = 1
HORIZON_CAP = 10_000

CSV_COLUMNS = ("target_id", "lambda", "error", "epsilon", "sample_density")


class ConfigError(ValueError):
    """Config fails schema or invariant validation (exit code 2)."""


# ---------------------------------------------------------------------------
# named rules
#
# Configs are data, so row functions are referred to by name. Each entry maps
# a label to phi(n); the weight alpha_{n,k} = 1/phi(n) and the derivative
# family weight alpha_n = 1/phi(n) share the same table.
# ---------------------------------------------------------------------------

PHI_RULES = {
    "1": lambda n: 1,
    "n": lambda n: n,
    "n+1": lambda n: n + 1,
    "n!": lambda n: math.factorial(n),
    "2^n": lambda n: 2**n,
    "2^(n^2)": lambda n: 2 ** (n * n),
}

SCALAR_FAMILY_RULES = {
    # x_{n,k} = 1/(n+1): row n averages indices 0..n
    "averaging": lambda n, k: Fraction(1, n + 1),
    # x_{n,k} = 1/n for n >= 1 (row 0 keeps weight 1)
    "reciprocal-row": lambda n, k: Fraction(1) if n == 0 else Fraction(1, n),
    "unit": lambda n, k: Fraction(1),
}


def _cesaro_value_rule(n, k):
    # running mean (a_0+...+a_n)/n, row 0 plain
    return Fraction(1) if n == 0 else Fraction(1, n)


def parse_number(v, field="value"):
    """Accept ints, floats, rational strings like '2/3', and [re, im] pairs."""
    if isinstance(v, bool):
        raise ConfigError("%s must be a number, got a boolean" % field)
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise ConfigError("%s: cannot parse %r as a rational" % (field, v))
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError("%s: unsupported value %r" % (field, v))


# ---------------------------------------------------------------------------
# config -> objects
# ---------------------------------------------------------------------------


def weights_from_config(d, horizon):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("weights descriptor needs a 'kind'")
    kind = d["kind"]
    if kind == "constant-one":
        return WeightTriangle(kind="constant-one", horizon=horizon)
    if kind == "cesaro":
        return WeightTriangle(kind="cesaro", horizon=horizon)
    if kind == "phi-reciprocal":
        label = d.get("phi")
        if label not in PHI_RULES:
            raise ConfigError(
                "unknown phi rule %r (known: %s)" % (label, ", ".join(sorted(PHI_RULES)))
            )
        return WeightTriangle(
            kind="phi-reciprocal", horizon=horizon, phi=PHI_RULES[label], label=label
        )
    raise ConfigError("unsupported weight kind %r" % kind)


def alpha_from_config(label):
    if label not in PHI_RULES:
        raise ConfigError(
            "unknown alpha rule %r (known: 1/phi for phi in %s)"
            % (label, ", ".join(sorted(PHI_RULES)))
        )
    phi = PHI_RULES[label]
    return lambda n: Fraction(1, phi(n)), {"type": "reciprocal", "phi": label}


def mu_from_config(d):
    if d is None:
        return IndexSequence("all")
    if not isinstance(d, dict):
        raise ConfigError("mu descriptor must be an object")
    try:
        return IndexSequence.from_dict(d)
    except ValueError as exc:
        raise ConfigError("bad mu descriptor: %s" % exc)


def region_from_config(d, default_density):
    if not isinstance(d, dict) or "shape" not in d or "params" not in d:
        raise ConfigError("region descriptor needs 'shape' and 'params'")
    dd = dict(d)
    dd.setdefault("density", default_density)
    try:
        return CompactSetSpec.from_dict(dd)
    except (ValueError, TypeError) as exc:
        raise ConfigError("bad region descriptor: %s" % exc)


def target_value_from_config(d, mode):
    """The target object itself: named function, polynomial, or constant."""
    if isinstance(d, (int, float, str)):
        return parse_number(d, "target")
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("target descriptor needs a 'type'")
    if d["type"] == "named":
        if "name" not in d:
            raise ConfigError("named target needs 'name'")
        return d["name"]
    if d["type"] == "polynomial":
        coeffs = d.get("coefficients")
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError("polynomial target needs a coefficient list")
        vals = tuple(parse_number(c, "coefficient") for c in coeffs)
        pmode = d.get("mode", mode)
        if pmode == FLOAT:
            vals = tuple(float(v) for v in vals)
        return Polynomial(vals, 0, pmode)
    raise ConfigError("unsupported target type %r" % d["type"])


def targets_from_config(lst, mode, default_density):
    if not isinstance(lst, list) or not lst:
        raise ConfigError("config needs a nonempty 'targets' list")
    out = []
    for i, item in enumerate(lst):
        if not isinstance(item, dict):
            raise ConfigError("target %d must be an object" % i)
        tgt = target_value_from_config(item.get("target"), mode)
        region = None
        if item.get("region") is not None:
            region = region_from_config(item["region"], default_density)
        small = None
        if item.get("small_region") is not None:
            small = region_from_config(item["small_region"], default_density)
        eps = item.get("epsilon", 1e-3)
        if not isinstance(eps, (int, float)) or not eps > 0:
            raise ConfigError("target %d: epsilon must be a positive number" % i)
        tid = item.get("id") or ("target-%d" % i)
        out.append(TargetSpec(tgt, region, float(eps), tid, small))
    return out


def scalar_family_from_config(d, horizon, mode):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError("family descriptor needs a 'kind'")
    kind = d["kind"]
    if kind == "scalar-sequence":
        rule = d.get("rule")
        if rule not in SCALAR_FAMILY_RULES:
            raise ConfigError(
                "unknown scalar family rule %r (known: %s)"
                % (rule, ", ".join(sorted(SCALAR_FAMILY_RULES)))
            )
        return BasisFamily(
            "scalar-sequence", horizon, EXACT, value_rule=SCALAR_FAMILY_RULES[rule]
        )
    if kind in ("bernstein", "binomial-bernstein"):
        return BasisFamily(kind, horizon, EXACT)
    if kind == "monomial-shifted":
        center = parse_number(d.get("center", 0), "family center")
        if mode == FLOAT:
            center = float(center)
        return BasisFamily(
            "monomial-shifted",
            horizon,
            mode,
            center=center,
            power_offset=int(d.get("power_offset", 0)),
        )
    raise ConfigError("unsupported family kind %r" % kind)


def parse_values(lst):
    if not isinstance(lst, list) or not lst:
        raise ConfigError("config needs a nonempty 'values' list")
    return [parse_number(v, "values[%d]" % i) for i, v in enumerate(lst)]


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

COMMANDS = ("construct", "diagnose", "verify", "identity")

CONSTRUCTORS = (
    "fekete",
    "bernstein",
    "binomial-bernstein",
    "taylor-disc",
    "derivative",
    "greedy",
    "cesaro",
    "interpolating",
    "riemann",
)

DIAGNOSTICS = (
    "weight-lower-gate",
    "weight-upper-gate",
    "phi-liminf",
    "weight-triad",
    "radius-root",
    "alpha-series-radius",
    "gap-windows",
)


def validate_config(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            "config schema_version must be %d, got %r"
            % (SCHEMA_VERSION, cfg.get("schema_version"))
        )
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        raise ConfigError("command must be one of %s, got %r" % (", ".join(COMMANDS), cmd))
    horizon = cfg.get("horizon", 4000)
    if not isinstance(horizon, int) or horizon < 1:
        raise ConfigError("horizon must be a positive integer")
    if horizon > HORIZON_CAP:
        raise ConfigError("horizon %d exceeds the cap %d" % (horizon, HORIZON_CAP))
    mode = cfg.get("mode", EXACT)
    if mode not in (EXACT, FLOAT):
        raise ConfigError("mode must be 'exact' or 'float', got %r" % mode)
    density = cfg.get("density", 128)
    if not isinstance(density, int) or density < 1:
        raise ConfigError("density must be a positive integer")
    seed = cfg.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    if cmd == "construct" and cfg.get("constructor") not in CONSTRUCTORS:
        raise ConfigError(
            "constructor must be one of %s, got %r"
            % (", ".join(CONSTRUCTORS), cfg.get("constructor"))
        )
    if cmd == "diagnose" and cfg.get("diagnostic") not in DIAGNOSTICS:
        raise ConfigError(
            "diagnostic must be one of %s, got %r"
            % (", ".join(DIAGNOSTICS), cfg.get("diagnostic"))
        )
    if cmd == "verify":
        if not cfg.get("report") or not cfg.get("series"):
            raise ConfigError("verify config needs 'report' and 'series' paths")
    if cmd == "identity":
        if cfg.get("identity") != "lemma52":
            raise ConfigError("identity must be 'lemma52', got %r" % cfg.get("identity"))


# ---------------------------------------------------------------------------
# command execution
# ---------------------------------------------------------------------------


def _jsonable(obj):
    """Recursively coerce report payloads to plain JSON types.

    Fractions become 'p/q' strings, complex numbers [re, im] pairs; infinities
    survive as the strings 'inf' / '-inf' so reports stay valid JSON.
    """
    if isinstance(obj, Fraction):
        return "%d/%d" % (obj.numerator, obj.denominator)
    if isinstance(obj, complex):
        if obj.imag == 0:
            return _jsonable(obj.real)
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return repr(obj)


def _run_construct(cfg):
    mode = cfg.get("mode", EXACT)
    horizon = cfg.get("horizon", 4000)
    density = cfg.get("density", 128)
    mu = mu_from_config(cfg.get("mu"))
    name = cfg["constructor"]
    rebuild = {"constructor": name, "horizon": horizon, "mode": mode}

    if name in ("cesaro", "interpolating", "riemann"):
        values = parse_values(cfg.get("values"))
        if name == "cesaro":
            seq = cesaro_universal(values, horizon)
            fam = BasisFamily(
                "scalar-sequence", horizon, EXACT, value_rule=_cesaro_value_rule
            )
            rows = list(range(len(values)))
            rebuild["values"] = [_jsonable(v) for v in values]
            rebuild["family"] = {"kind": "scalar-sequence", "rule": "cesaro-mean"}
        elif name == "riemann":
            seq, primes = riemann_target_solve(values, horizon)
            fam = riemann_scalar_family(horizon)
            rows = [p - 1 for p in primes]
            rebuild["values"] = [_jsonable(v) for v in values]
            rebuild["family"] = {"kind": "scalar-sequence", "rule": "averaging"}
        else:
            fam = scalar_family_from_config(cfg.get("family"), horizon, EXACT)
            seq = interpolating_universal(fam, values, mu, horizon)
            rows = list(range(len(values)))
            rebuild["values"] = [_jsonable(v) for v in values]
            rebuild["family"] = cfg.get("family")
        # prescribed-value solves are exact by construction; each row gets a
        # record so the certificate carries the same audit trail as the
        # block constructors
        records = [
            TargetRecord(
                "value-%d" % i,
                rows[i],
                0.0,
                float(cfg.get("value_tolerance", 1e-12)),
                1,
                True,
                None,
                {"type": "polynomial", "mode": EXACT,
                 "coefficients": [_jsonable(Fraction(v))]},
            )
            for i, v in enumerate(values)
        ]
        cert = Certificate(
            fam.to_dict(), mu.to_dict(), EXACT, horizon, records,
            [(r, r) for r in rows],
        )
        return seq, cert, fam, mu, rebuild

    targets = targets_from_config(cfg.get("targets"), mode, density)

    if name == "fekete":
        weights = weights_from_config(cfg.get("weights", {"kind": "constant-one"}), horizon)
        seq, cert, fam = fekete_construct(targets, weights, mu, horizon, density)
        rebuild["weights"] = cfg.get("weights", {"kind": "constant-one"})
    elif name == "bernstein":
        seq, cert, fam = bernstein_construct(targets, mu, horizon, density)
    elif name == "binomial-bernstein":
        seq, cert, fam = binomial_bernstein_construct(targets, mu, horizon, density)
    elif name == "taylor-disc":
        weights = weights_from_config(cfg.get("weights", {"kind": "constant-one"}), horizon)
        seq, cert, fam = taylor_universal_disc(targets, weights, mu, horizon, density)
        rebuild["weights"] = cfg.get("weights", {"kind": "constant-one"})
    elif name == "derivative":
        label = cfg.get("alpha")
        alpha, adesc = alpha_from_config(label)
        seq, cert, fam = derivative_universal_construct(
            targets, alpha, mu, horizon, density, alpha_descriptor=adesc
        )
        rebuild["alpha"] = label
    elif name == "greedy":
        fam = scalar_family_from_config(
            cfg.get("family", {"kind": "bernstein"}), horizon, mode
        )
        seq, cert = greedy_universal(fam, targets, mu, horizon, density)
        rebuild["family"] = cfg.get("family", {"kind": "bernstein"})
    else:  # pragma: no cover - validate_config filters this
        raise ConfigError("unsupported constructor %r" % name)
    return seq, cert, fam, mu, rebuild


def _load_series_entries(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError("series file schema_version mismatch")
    return doc


def rebuild_family(doc):
    """Reconstruct the basis family a series sidecar describes."""
    rb = doc.get("rebuild", {})
    fd = doc.get("family", {})
    kind = fd.get("kind")
    horizon = fd.get("horizon")
    mode = fd.get("mode", EXACT)
    if kind == "weighted-monomial":
        weights = weights_from_config(rb.get("weights", {"kind": "constant-one"}), horizon)
        center = parse_number(fd.get("center", 0), "family center")
        if mode == FLOAT:
            center = complex(center)
        return BasisFamily(
            "weighted-monomial", horizon, mode, center=center,
            power_offset=fd.get("power_offset", 0), weights=weights,
        )
    if kind == "monomial-shifted":
        center = parse_number(fd.get("center", 0), "family center")
        if mode == FLOAT:
            center = complex(center)
        return BasisFamily(
            "monomial-shifted", horizon, mode, center=center,
            power_offset=fd.get("power_offset", 0),
        )
    if kind in ("bernstein", "binomial-bernstein"):
        return BasisFamily(kind, horizon, mode)
    if kind == "derivative-pair":
        alpha, _ = alpha_from_config(rb.get("alpha"))
        return BasisFamily("derivative-pair", horizon, mode, alpha=alpha)
    if kind == "scalar-sequence":
        famd = rb.get("family", {})
        rule = famd.get("rule")
        if rule == "cesaro-mean":
            return BasisFamily(
                "scalar-sequence", horizon, EXACT, value_rule=_cesaro_value_rule
            )
        return scalar_family_from_config(famd, horizon, mode)
    raise ConfigError("cannot rebuild family of kind %r" % kind)


def _run_verify(report_path, series_path):
    with open(report_path) as fh:
        report = json.load(fh)
    cert_dict = (report.get("results") or {}).get("certificate")
    if cert_dict is None:
        raise ConfigError("report carries no certificate to verify")
    cert = Certificate.from_dict(cert_dict)
    doc = _load_series_entries(series_path)
    fam = rebuild_family(doc)
    seq = CoefficientSequence.from_dict(doc["sequence"])
    return verify_certificate(seq, fam, cert)


def _run_diagnose(cfg):
    name = cfg["diagnostic"]
    horizon = cfg.get("horizon", 500)
    mu = mu_from_config(cfg.get("mu"))
    verdicts = []
    extra = {}

    if name in ("weight-lower-gate", "weight-upper-gate", "weight-triad"):
        weights = weights_from_config(cfg.get("weights", {"kind": "constant-one"}), horizon)
        if name in ("weight-lower-gate", "weight-triad"):
            verdicts.append(check_condition_cmu(weights, mu, horizon).to_dict())
        if name in ("weight-upper-gate", "weight-triad"):
            verdicts.append(check_necessary(weights, mu, horizon).to_dict())
        if name == "weight-triad":
            label = cfg.get("phi") or (cfg.get("weights") or {}).get("phi") or "1"
            if label not in PHI_RULES:
                raise ConfigError("unknown phi rule %r" % label)
            verdicts.append(phi_criterion(PHI_RULES[label], mu, horizon).to_dict())
    elif name == "phi-liminf":
        label = cfg.get("phi")
        if label not in PHI_RULES:
            raise ConfigError("unknown phi rule %r" % label)
        verdicts.append(phi_criterion(PHI_RULES[label], mu, horizon).to_dict())
    elif name == "radius-root":
        doc = _load_series_entries(cfg["series"])
        seq = CoefficientSequence.from_dict(doc["sequence"])
        extra["radius_root"] = radius_root_test(seq, horizon)
    elif name == "alpha-series-radius":
        alpha, _ = alpha_from_config(cfg.get("alpha"))
        R, witness = series_R_of_alpha(alpha, horizon)
        extra["series_radius"] = {"R": R, "witness": witness}
    elif name == "gap-windows":
        doc = _load_series_entries(cfg["series"])
        seq = CoefficientSequence.from_dict(doc["sequence"])
        n_list = cfg.get("rows")
        if not isinstance(n_list, list) or not n_list:
            raise ConfigError("gap-windows needs a nonempty 'rows' list")
        extra["gap_windows"] = ostrowski_gap_detect(seq, n_list)

    succeeded = all(v["verdict"] == "pass-at-horizon" for v in verdicts) if verdicts else True
    return {"verdicts": verdicts, "succeeded": succeeded, **extra}


def _run_identity(cfg):
    n_max = cfg.get("n_max", 15)
    if not isinstance(n_max, int) or n_max < 0:
        raise ConfigError("n_max must be a natural number")
    deltas = cfg.get("deltas", ["1/3", "1/2", "2/3"])
    if not isinstance(deltas, list) or not deltas:
        raise ConfigError("identity config needs a nonempty 'deltas' list")
    parsed = []
    for d in deltas:
        f = Fraction(parse_number(d, "delta"))
        if not (0 < f < 1):
            raise ConfigError("delta %s outside (0, 1)" % f)
        parsed.append(f)
    cases = []
    all_equal = True
    for n in range(n_max + 1):
        for delta in parsed:
            lhs, rhs, equal = lemma52_identity(n, delta)
            all_equal = all_equal and equal
            cases.append({
                "n": n,
                "delta": _jsonable(delta),
                "lhs": _jsonable(lhs),
                "rhs": _jsonable(rhs),
                "equal": equal,
            })
    return {"identity": "lemma52", "cases": cases, "succeeded": all_equal}


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def determinism_hash(report):
    """SHA-256 of the report with run_meta and the hash field removed."""
    core = {k: v for k, v in report.items() if k not in ("run_meta", "determinism_hash")}
    return "sha256:" + hashlib.sha256(canonical_json(core).encode()).hexdigest()


def run(cfg, out_path=None, csv_path=None):
    """Execute a validated config; returns (report, exit_code).

    The report is written to out_path (default 'report.json') for commands
    that produce one. A constructor failure still writes the report and maps
    to exit code 1.
    """
    validate_config(cfg)
    cmd = cfg["command"]
    t0 = time.perf_counter()
    started = datetime.now(timezone.utc).isoformat()

    out_path = out_path or cfg.get("out") or "report.json"
    results = {}
    error = None
    exit_code = 0
    series_doc = None
    series_path = cfg.get("series_out") or _series_path_for(out_path)
    try:
        if cmd == "construct":
            seq, cert, fam, mu, rebuild = _run_construct(cfg)
            results["certificate"] = _jsonable(cert.to_dict())
            results["succeeded"] = cert.all_succeeded
            results["series_path"] = series_path
            series_doc = {
                "schema_version": SCHEMA_VERSION,
                "family": _jsonable(fam.to_dict()),
                "mu": mu.to_dict(),
                "rebuild": _jsonable(rebuild),
                "sequence": _jsonable(seq.to_dict()),
            }
        elif cmd == "diagnose":
            results = _jsonable(_run_diagnose(cfg))
        elif cmd == "identity":
            results = _jsonable(_run_identity(cfg))
        else:
            results = _jsonable(_run_verify(cfg["report"], cfg["series"]))
            results["succeeded"] = results.get("all_confirmed", False)
        if not results.get("succeeded", False):
            exit_code = 1
    except ConfigError:
        raise
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        # the run itself failed; record what happened and still emit a report
        error = {"type": type(exc).__name__, "message": str(exc)}
        results["succeeded"] = False
        exit_code = 1

    report = {
        "schema_version": SCHEMA_VERSION,
        "command": cmd,
        "config": _jsonable(cfg),
        "versions": {
            "artifact": __version__,
            "python": "%d.%d.%d" % sys.version_info[:3],
        },
        "results": results,
        "exit_code": exit_code,
    }
    if error is not None:
        report["error"] = error
    report["determinism_hash"] = determinism_hash(report)
    report["run_meta"] = {
        "started": started,
        "elapsed_seconds": round(time.perf_counter() - t0, 6),
    }

    _write_json(out_path, report)
    if series_doc is not None:
        _write_json(series_path, series_doc)
    csv_path = csv_path or cfg.get("csv")
    if csv_path:
        emit_csv(report, csv_path)
    return report, exit_code


def _series_path_for(out_path):
    return (out_path[:-5] if out_path.endswith(".json") else out_path) + ".series.json"


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_csv(report, path):
    """Record table with fixed column order; header-only when no records."""
    import csv as _csv

    records = ((report.get("results") or {}).get("certificate") or {}).get("records", [])
    with open(path, "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec in records:
            w.writerow([
                rec.get("target_id"),
                rec.get("lam"),
                rec.get("achieved_error"),
                rec.get("epsilon"),
                rec.get("sample_density"),
            ])


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _cmd_run(args):
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        print("cannot read config: %s" % exc, file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print("config is not valid JSON: %s" % exc, file=sys.stderr)
        return 2
    if args.mode:
        cfg["mode"] = args.mode
    if args.seed is not None:
        cfg["seed"] = args.seed
    try:
        report, code = run(cfg, args.out, args.csv)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    _print_summary(report)
    return code


def _print_summary(report):
    results = report.get("results", {})
    cert = results.get("certificate")
    if cert:
        for rec in cert.get("records", []):
            status = "ok" if rec.get("succeeded") else "FAIL"
            print(
                "%-6s %-24s lambda=%-6s error=%s (eps=%s)"
                % (status, rec.get("target_id"), rec.get("lam"),
                   rec.get("achieved_error"), rec.get("epsilon"))
            )
    for v in results.get("verdicts", []):
        print("%-18s %s" % (v.get("condition"), v.get("verdict")))
    if "cases" in results:
        bad = [c for c in results["cases"] if not c["equal"]]
        print("identity cases: %d checked, %d unequal" % (len(results["cases"]), len(bad)))
    if "records" in results and "all_confirmed" in results:
        for row in results["records"]:
            print("%-10s %s" % (row.get("status"), row.get("target_id")))
    if report.get("error"):
        print("error: %(type)s: %(message)s" % report["error"], file=sys.stderr)
    print("result: %s" % ("ok" if report["exit_code"] == 0 else "FAILED"))


def _cmd_verify(args):
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "report": args.report,
        "series": args.series,
    }
    try:
        report, code = run(cfg, args.out)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    _print_summary(report)
    return code


def _cmd_identity(args):
    if args.name != "lemma52":
        print("unknown identity %r" % args.name, file=sys.stderr)
        return 2
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "command": "identity",
        "identity": "lemma52",
        "n_max": args.n_max,
        "deltas": args.deltas.split(","),
    }
    try:
        report, code = run(cfg, args.out)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    _print_summary(report)
    return code


def build_parser():
    ap = argparse.ArgumentParser(prog="uslab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to the config JSON")
    p_run.add_argument("--out", default=None, help="report path (default report.json)")
    p_run.add_argument("--csv", default=None, help="also write the record table as CSV")
    p_run.add_argument("--mode", choices=(EXACT, FLOAT), default=None,
                       help="override the config's numeric mode")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the config's RNG seed")
    p_run.set_defaults(fn=_cmd_run)

    p_ver = sub.add_parser("verify", help="recheck a report against its series")
    p_ver.add_argument("report", help="report JSON produced by `uslab run`")
    p_ver.add_argument("series", help="series sidecar JSON")
    p_ver.add_argument("--out", default="verify-report.json")
    p_ver.set_defaults(fn=_cmd_verify)

    p_id = sub.add_parser("identity", help="sweep an exact identity")
    p_id.add_argument("name", help="identity name (lemma52)")
    p_id.add_argument("--n-max", type=int, default=15)
    p_id.add_argument("--deltas", default="1/3,1/2,2/3",
                      help="comma-separated rationals in (0, 1)")
    p_id.add_argument("--out", default="identity-report.json")
    p_id.set_defaults(fn=_cmd_identity)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
