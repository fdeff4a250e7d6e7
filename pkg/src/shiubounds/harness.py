"""CLI orchestration: verification scans, the two applications, CSV
reports, and the frozen-constant regression protocol.

Subcommands
-----------
verify           --theorem shiu|main|mnthm2-c1|mnthm2-c2
dfold            divisor powers tau_d(n)^R against the displayed core
smooth-interval  short-interval smooth counts against the lower-bound core
classes          per-class partition sums with coverage checks
tables           --what rho|psi|primes dumps
freeze           run the documented oracle suite and write the constants file

Function selector grammar (--f and the `functions` config key)
---------------------------------------------------------------
    selector := name [":" key "=" value {"," key "=" value}]
    one
    tau (tau_d):            d; an R key switches to the power variant
    tau_pow (tau_d_power_R): d, R
    smooth (smooth_indicator): Q  (omitted Q uses q_value, else x**q_pow)
    smooth_tau (smooth_tau_d_power_R): d, R, Q
    synthetic (synthetic_large): c, beta (beta defaults to the run's beta)

Config files are `key = value` lines with # comments; CLI flags win.
`functions` entries are ';'-separated because selectors contain commas.
All o(1) factors in reported cores are evaluated at their limit value; the
CSV meta header repeats this convention.

Exit codes: 0 success, 1 invariant/coverage failure, 2 frozen-constant
regression, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional

from . import bounds, dickman
from .arith import factor_interval_cached, greatest_prime_factor
from .errors import ConfigurationError, ContractViolationError, DomainError
from .logsum import NEG_INF, log_sum_exp, safe_exp
from .multfunc import EvalContext, MultiplicativeFunction, builtin, evaluate_log

DEFAULT_X_GRID = (10**4, 10**5, 10**6, 10**7, 10**8)
DEFAULT_K_LIST = (1, 3, 4, 7)

# Reference scale for the standalone Rankin-tail freeze grid.
RANKIN_REF_X = 10**6
RANKIN_Z_GRID = (16.0, 100.0, 1000.0)
RANKIN_R_GRID = (1.0, 2.0, 3.0)
RANKIN_TRUNCATION = 20000
ROUGH_Z_GRID = (3.0, 10.0, 30.0)
ROUGH_K_LIST = (1, 3)

O1_CONVENTION = "o1_convention=o(1) factors in cores evaluated at their limit value"

THEOREM_CHOICES = {
    "shiu": "Shiu",
    "main": "Main",
    "mnthm2-c1": "MnThm2-C1",
    "mnthm2-c2": "MnThm2-C2",
}


@dataclass
class RunConfig:
    x_grid: tuple = DEFAULT_X_GRID
    y_pow: float = 0.6
    k_list: tuple = DEFAULT_K_LIST
    a_mode: str = "all"
    functions: tuple = ("one",)
    alpha: float = 0.25
    kappa: float = 0.25
    beta: float = 0.001
    eps: float = 0.1
    eps0: float = 0.1
    q_pow: float = 1.0 / 3.0
    q_value: Optional[float] = None
    out: str = "-"
    constants: Optional[str] = None
    freeze: bool = False
    # dfold
    d: int = 2
    r: float = 1.0
    paper_r: bool = False
    smooth: bool = False
    # smooth-interval
    regime: str = "sound"
    b_const: float = 1.0
    h_value: Optional[float] = None
    c3_margin: float = 0.01
    y_cap: int = 10**7
    # classes
    z_override: Optional[float] = None
    # tables
    what: str = "rho"
    u_max: float = 5.0
    u_step: float = 0.25
    limit: int = 100
    q_grid: tuple = (10, 100)


_TUPLE_INT_FIELDS = {"x_grid", "k_list", "q_grid"}
_TUPLE_STR_FIELDS = {"functions"}
_BOOL_FIELDS = {"freeze", "paper_r", "smooth"}
_OPT_FLOAT_FIELDS = {"q_value", "h_value", "z_override"}
_OPT_STR_FIELDS = {"constants"}
_INT_FIELDS = {"d", "limit", "y_cap"}
_STR_FIELDS = {"a_mode", "out", "regime", "what"}


def _parse_config_value(key: str, raw: str):
    raw = raw.strip()
    if key in _TUPLE_INT_FIELDS:
        return tuple(int(float(part)) for part in raw.split(",") if part.strip())
    if key in _TUPLE_STR_FIELDS:
        return tuple(part.strip() for part in raw.split(";") if part.strip())
    if key in _BOOL_FIELDS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"config key {key} expects a boolean, got {raw!r}")
    if key in _OPT_FLOAT_FIELDS:
        return None if raw.lower() in ("", "none") else float(raw)
    if key in _OPT_STR_FIELDS:
        return None if raw.lower() in ("", "none") else raw
    if key in _INT_FIELDS:
        return int(float(raw))
    if key in _STR_FIELDS:
        return raw
    return float(raw)


def load_config_file(path: str) -> dict:
    known = {f.name for f in fields(RunConfig)}
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigurationError(f"{path}:{lineno}: expected key = value")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigurationError(f"{path}:{lineno}: unknown config key {key!r}")
            out[key] = _parse_config_value(key, raw)
    return out


def _resolve_q(cfg: RunConfig, x: int, explicit: Optional[float] = None) -> float:
    if explicit is not None:
        return float(explicit)
    if cfg.q_value is not None:
        return float(cfg.q_value)
    return float(x) ** cfg.q_pow


_SELECTOR_ALIASES = {
    "one": "one",
    "tau": "tau_d",
    "tau_d": "tau_d",
    "tau_pow": "tau_d_power_R",
    "tau_d_power_r": "tau_d_power_R",
    "smooth": "smooth_indicator",
    "smooth_indicator": "smooth_indicator",
    "smooth_tau": "smooth_tau_d_power_R",
    "smooth_tau_d_power_r": "smooth_tau_d_power_R",
    "synthetic": "synthetic_large",
    "synthetic_large": "synthetic_large",
}


def parse_function(selector: str, x: int, cfg: RunConfig) -> MultiplicativeFunction:
    """Build the function named by a selector string for grid cell x."""
    name, _, param_str = selector.partition(":")
    name = name.strip().lower()
    if name not in _SELECTOR_ALIASES:
        raise ConfigurationError(f"unknown function selector {selector!r}")
    canonical = _SELECTOR_ALIASES[name]
    params = {}
    if param_str.strip():
        for piece in param_str.split(","):
            if "=" not in piece:
                raise ConfigurationError(f"bad selector parameter {piece!r} in {selector!r}")
            key, _, val = piece.partition("=")
            params[key.strip().lower()] = float(val)

    if canonical == "one":
        f = builtin("one")
    elif canonical in ("tau_d", "tau_d_power_R"):
        d = int(params.pop("d", 2))
        r = params.pop("r", None)
        if canonical == "tau_d_power_R" and r is None:
            r = 1.0
        _reject_extra(selector, params)
        if r is None:
            f = builtin("tau_d", d=d)
        else:
            f = builtin("tau_d_power_R", d=d, r=r)
    elif canonical == "smooth_indicator":
        q = _resolve_q(cfg, x, params.pop("q", None))
        _reject_extra(selector, params)
        f = builtin("smooth_indicator", q=q)
    elif canonical == "smooth_tau_d_power_R":
        d = int(params.pop("d", 2))
        r = params.pop("r", 1.0)
        q = _resolve_q(cfg, x, params.pop("q", None))
        _reject_extra(selector, params)
        f = builtin("smooth_tau_d_power_R", d=d, r=r, q=q)
    else:
        c = params.pop("c", 1.0)
        beta = params.pop("beta", cfg.beta)
        _reject_extra(selector, params)
        f = builtin("synthetic_large", c=c, beta=beta)
    return replace(f, selector=selector)


def _reject_extra(selector, params):
    if params:
        raise ConfigurationError(f"selector {selector!r} has unknown keys {sorted(params)}")


def residues_for(k: int, a_mode: str) -> list[int]:
    if a_mode == "all":
        return [a for a in range(k) if math.gcd(a, k) == 1]
    try:
        explicit = [int(part) for part in a_mode.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"bad a_mode {a_mode!r}") from exc
    return [a for a in explicit if 0 <= a < k]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: str, meta: list[str], columns: list[str], rows: list[dict]) -> str:
    """Render rows deterministically; '-' writes to stdout.  Returns the text."""
    buf = io.StringIO()
    for line in meta:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in columns])
    text = buf.getvalue()
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _flags_str(*flag_groups) -> str:
    merged = sorted({flag for group in flag_groups for flag in group})
    return ";".join(merged)


def _grid_cells(cfg: RunConfig):
    for x in cfg.x_grid:
        y = round(float(x) ** cfg.y_pow)
        for k in cfg.k_list:
            for a in residues_for(k, cfg.a_mode):
                yield x, y, k, a


VERIFY_COLUMNS = [
    "theorem", "f", "x", "y", "k", "a", "q", "u", "status",
    "lhs_log", "lhs", "rhs_core_log", "rhs_core", "ratio", "ratio_log",
    "rhs_core_sum_log", "ratio_sum", "prime_sum", "flags",
]


def run_verify(theorem: str, cfg: RunConfig):
    """One row per (f, x, k, a); smooth theorems carry both prime-factor
    readings.  Infeasible cells become skip rows with reason codes."""
    if theorem not in THEOREM_CHOICES:
        raise ConfigurationError(f"unknown theorem {theorem!r}; choose from {sorted(THEOREM_CHOICES)}")
    tag = THEOREM_CHOICES[theorem]
    smooth_theorem = tag.startswith("MnThm2")
    rows = []
    entries = {}
    n_skip = 0
    for fsel in cfg.functions:
        for x, y, k, a in _grid_cells(cfg):
            base = {"theorem": tag, "f": fsel, "x": x, "y": y, "k": k, "a": a}
            problem = bounds.interval_spec_problem(x, y, k, a, cfg.alpha, cfg.kappa)
            if problem is None and x < 16:
                problem = "x_below_context_floor"
            if problem:
                rows.append({**base, "status": f"skip:{problem}"})
                n_skip += 1
                continue
            f = parse_function(fsel, x, cfg)
            if smooth_theorem and f.params.q is None:
                rows.append({**base, "status": "skip:function_not_smooth_supported"})
                n_skip += 1
                continue
            spec = bounds.IntervalSpec(x=x, y=y, k=k, a=a, alpha=cfg.alpha, kappa=cfg.kappa)
            ctx = bounds.derive_context(spec, beta=f.params.beta, q=f.params.q)
            lhs = bounds.lhs_sum(f, spec)
            flags: tuple = ctx.flags
            row = {**base, "status": "ok", "u": ctx.u, "lhs_log": lhs, "lhs": safe_exp(lhs)}
            key = f"{tag}|{fsel}|x={x}|k={k}|a={a}"
            if tag == "Shiu":
                rhs = bounds.rhs_shiu(f, spec)
            elif tag == "Main":
                rhs, warns = bounds.rhs_main(f, spec, eps0=cfg.eps0)
                flags = flags + warns
            else:
                cores = bounds.rhs_smooth(
                    f, spec, ctx, variant="C1" if tag.endswith("C1") else "C2", eps=cfg.eps
                )
                flags = flags + cores.warnings
                rhs = cores.exp_reading_log
                row["q"] = ctx.q
                row["rhs_core_sum_log"] = cores.sum_reading_log
                row["ratio_sum"] = safe_exp(lhs - cores.sum_reading_log)
                row["prime_sum"] = cores.prime_sum_value
                entries[key + "|sum"] = safe_exp(lhs - cores.sum_reading_log)
            row["rhs_core_log"] = rhs
            row["rhs_core"] = safe_exp(rhs)
            row["ratio"] = safe_exp(lhs - rhs)
            row["ratio_log"] = lhs - rhs
            row["flags"] = _flags_str(flags)
            rows.append(row)
            entries[key + ("|exp" if smooth_theorem else "")] = row["ratio"]
    rows.sort(key=lambda r: (r["theorem"], r["f"], r["x"], r["k"], r["a"]))
    meta = [
        O1_CONVENTION,
        f"theorem={tag}",
        f"grid=x:{','.join(map(str, cfg.x_grid))} y_pow:{cfg.y_pow} k:{','.join(map(str, cfg.k_list))}",
        f"alpha={cfg.alpha} kappa={cfg.kappa} eps={cfg.eps} eps0={cfg.eps0}",
        f"skipped={n_skip}",
    ]
    return rows, entries, meta


DFOLD_COLUMNS = [
    "theorem", "x", "y", "k", "a", "d", "R", "q", "u", "status",
    "lhs_log", "rhs_core_log", "ratio", "ratio_log", "flags",
]


def run_dfold(cfg: RunConfig):
    """Divisor-power rows: lhs accumulates R*log(tau_d(n)) in log domain;
    the core is x (log x)^eps/phi(k) * ((phi(k)/k) log x)^(d^R - 1)."""
    d = cfg.d
    if d < 2:
        raise ConfigurationError(f"dfold needs d >= 2, got {d}")
    tau = builtin("tau_d", d=d)
    rows = []
    for x, y, k, a in _grid_cells(cfg):
        base = {"theorem": "dfold", "x": x, "y": y, "k": k, "a": a, "d": d}
        problem = bounds.interval_spec_problem(x, y, k, a, cfg.alpha, cfg.kappa)
        if problem is None and x < 16:
            problem = "x_below_context_floor"
        if problem:
            rows.append({**base, "status": f"skip:{problem}"})
            continue
        flags = []
        r_val, r_flags = _resolve_dfold_r(cfg, x)
        flags.extend(r_flags)
        spec = bounds.IntervalSpec(x=x, y=y, k=k, a=a, alpha=cfg.alpha, kappa=cfg.kappa)
        ectx = EvalContext(float(x))
        interval = factor_interval_cached(x, y)
        tau_logs = []
        smooth_tau_logs = []
        q = _resolve_q(cfg, x)
        for n in spec.residues():
            fac = interval[n - x]
            lv = evaluate_log(tau, fac, ectx)
            tau_logs.append(r_val * lv)
            if cfg.smooth and greatest_prime_factor(fac) <= q:
                smooth_tau_logs.append(r_val * lv)
        lhs = log_sum_exp(tau_logs)
        rhs, of = _dfold_core(x, k, d, r_val, cfg.eps)
        flags.extend(of)
        rows.append({
            **base, "status": "ok", "R": r_val,
            "lhs_log": lhs, "rhs_core_log": rhs,
            "ratio": safe_exp(lhs - rhs), "ratio_log": lhs - rhs,
            "flags": _flags_str(flags),
        })
        if cfg.smooth:
            u = math.log(x) / math.log(q)
            _, c2 = bounds.constants_c1_c2(cfg.alpha, cfg.kappa)
            rhs_smooth = rhs + c2 * dickman.default_table().log_rho(u)
            lhs_smooth = log_sum_exp(smooth_tau_logs)
            rows.append({
                **base, "theorem": "dfold-smooth", "status": "ok", "R": r_val,
                "q": q, "u": u,
                "lhs_log": lhs_smooth, "rhs_core_log": rhs_smooth,
                "ratio": safe_exp(lhs_smooth - rhs_smooth),
                "ratio_log": lhs_smooth - rhs_smooth,
                "flags": _flags_str(flags),
            })
    rows.sort(key=lambda r: (r["theorem"], r["x"], r["k"], r["a"]))
    meta = [O1_CONVENTION, f"d={d} paper_R={cfg.paper_r} smooth={cfg.smooth} eps={cfg.eps}"]
    return rows, {}, meta


def _resolve_dfold_r(cfg: RunConfig, x: int):
    """R = log log log x / log log log log x in paper mode, guarded: any
    nonpositive deep log flips the cell to the explicit R with a flag."""
    if not cfg.paper_r:
        return cfg.r, []
    lll = math.log(math.log(math.log(x)))
    if lll <= 0:
        return cfg.r, ["deep_log_degenerate", "explicit_R_fallback"]
    llll = math.log(lll)
    if llll <= 0:
        return cfg.r, ["deep_log_degenerate", "explicit_R_fallback"]
    return lll / llll, []


def _dfold_core(x: int, k: int, d: int, r_val: float, eps: float):
    from .arith import euler_phi

    lx = math.log(x)
    llx = math.log(lx)
    phi_k = euler_phi(k)
    flags = []
    exponent_log = r_val * math.log(d)
    if exponent_log > 700.0:
        flags.append("dR_overflow")
        d_pow = math.inf
    else:
        d_pow = math.exp(exponent_log)
    core = math.log(x) + eps * llx - math.log(phi_k) + (d_pow - 1.0) * (math.log(phi_k / k) + llx)
    return core, flags


SMOOTH_COLUMNS = [
    "x", "q", "u", "y", "regime", "rh_assumed", "status", "smooth_count",
    "exponent", "lower_core_log", "lower_core", "count_over_core",
    "zrho_core_log", "tau_d", "tau_sum_log", "zrho_ratio_log",
    "holder_R", "holder_slack", "holder_ok", "hildebrand_violation", "flags",
]


def run_smooth_interval(cfg: RunConfig):
    """Short-interval smooth counts against the lower-bound core.

    The sound-style regime sets y = B u sqrt(x)/rho(u/2) and records that
    its hypotheses are conditional (rh_assumed); the goudout-style regime
    sets y = h sqrt(x).  Hypothesis failures are flags, never silent."""
    if cfg.regime not in ("sound", "goudout"):
        raise ConfigurationError(f"regime must be sound or goudout, got {cfg.regime!r}")
    table = dickman.default_table()
    _, c2 = bounds.constants_c1_c2(cfg.alpha, cfg.kappa)
    c3 = 1.0 - c2 + cfg.c3_margin
    rows = []
    for x in cfg.x_grid:
        q = _resolve_q(cfg, x)
        lx = math.log(x)
        llx = math.log(lx)
        u = lx / math.log(q)
        flags = []
        base = {"x": x, "q": q, "u": u, "regime": cfg.regime,
                "rh_assumed": cfg.regime == "sound", "tau_d": 3 if cfg.regime == "sound" else 2}
        if cfg.regime == "sound":
            y = round(cfg.b_const * u * math.sqrt(x) / table.rho(u / 2.0))
            if q < math.exp(5.0 * math.sqrt(lx * llx)):
                flags.append("q_hypothesis_unmet")
        else:
            h_min = table.rho(u) ** (-3.0 - cfg.eps)
            h = cfg.h_value if cfg.h_value is not None else h_min
            if not h_min <= h <= math.sqrt(x):
                flags.append("h_outside_hypothesis")
            if q < math.exp(lx ** (1.0 / 6.0 - cfg.eps)):
                flags.append("q_hypothesis_unmet")
            y = round(h * math.sqrt(x))
        if u < llx**2:
            flags.append("regime_unmet")
        if y < 1 or y > cfg.y_cap:
            rows.append({**base, "y": y, "status": "skip:y_outside_desk_cap"})
            continue
        if y > x:
            flags.append("y_exceeds_x")

        count, record = dickman.psi_short_interval(x, y, int(q))
        expo = 1.0
        lll = math.log(llx) if llx > 0 else NEG_INF
        llll = math.log(lll) if lll > 0 else NEG_INF
        if llll > 0:
            expo = 1.0 + c3 * llll / lll
        else:
            flags.append("deep_log_degenerate")
        lower_log = math.log(y) + expo * table.log_rho(u)
        zrho_log = math.log(y) + 2.0 * table.log_rho(u / 2.0)

        d = base["tau_d"]
        tau = builtin("tau_d", d=d)
        ectx = EvalContext(float(x))
        interval = factor_interval_cached(x, y)
        tau_logs = []
        for fac in interval:
            if greatest_prime_factor(fac) <= q:
                tau_logs.append(evaluate_log(tau, fac, ectx))
        tau_sum_log = log_sum_exp(tau_logs)
        holder_r, r_flags = _resolve_dfold_r(replace(cfg, paper_r=True, r=2.0), x)
        flags.extend(r_flags)
        if count == 0:
            slack = 0.0
        else:
            pow_log = log_sum_exp(holder_r * lv for lv in tau_logs)
            slack = tau_sum_log - ((1.0 - 1.0 / holder_r) * math.log(count)
                                   + pow_log / holder_r)
        rows.append({
            **base, "y": y, "status": "ok", "smooth_count": count,
            "exponent": expo, "lower_core_log": lower_log,
            "lower_core": safe_exp(lower_log),
            "count_over_core": safe_exp((math.log(count) if count else NEG_INF) - lower_log),
            "zrho_core_log": zrho_log, "tau_sum_log": tau_sum_log,
            "zrho_ratio_log": tau_sum_log - zrho_log,
            "holder_R": holder_r, "holder_slack": slack,
            "holder_ok": slack <= 1e-12,
            "hildebrand_violation": record.violation,
            "flags": _flags_str(flags),
        })
    rows.sort(key=lambda r: (r["x"], r["q"]))
    meta = [
        O1_CONVENTION,
        f"regime={cfg.regime} B={cfg.b_const} h={cfg.h_value} c3=1-C2+{cfg.c3_margin}",
        "theorem_tag=smooththm",
    ]
    return rows, {}, meta


CLASSES_COLUMNS = [
    "x", "y", "k", "a", "f", "status", "z", "sqrt_z", "class3_threshold",
    "r0", "r1", "r2", "count", "lhs_log", "sum_I_log", "sum_II_log",
    "sum_III_log", "sum_IV_log", "coverage", "partition_gap", "regime_flag", "flags",
]


def run_classes(cfg: RunConfig):
    """Per-cell class partition sums.  A coverage or partition mismatch is
    a bug in the artifact, not a math failure, and raises."""
    rows = []
    for fsel in cfg.functions:
        for x, y, k, a in _grid_cells(cfg):
            base = {"x": x, "y": y, "k": k, "a": a, "f": fsel}
            problem = bounds.interval_spec_problem(x, y, k, a, cfg.alpha, cfg.kappa)
            if problem is None and x < 16:
                problem = "x_below_context_floor"
            if problem:
                rows.append({**base, "status": f"skip:{problem}"})
                continue
            f = parse_function(fsel, x, cfg)
            spec = bounds.IntervalSpec(x=x, y=y, k=k, a=a, alpha=cfg.alpha, kappa=cfg.kappa)
            ctx = bounds.derive_context(spec, beta=f.params.beta, q=f.params.q)
            if cfg.z_override is not None:
                ctx = bounds.context_with_z(ctx, cfg.z_override)
            sums = bounds.class_sums(f, spec, ctx)
            n_residues = len(spec.residues())
            if sums.coverage != n_residues:
                raise ContractViolationError(
                    f"coverage {sums.coverage} != residue count {n_residues} at x={x},k={k},a={a}"
                )
            gap = sums.partition_gap()
            if not gap <= 1e-9:
                raise ContractViolationError(
                    f"class partition gap {gap} at x={x},k={k},a={a},f={fsel}"
                )
            lx = math.log(x)
            llx = math.log(lx)
            rows.append({
                **base, "status": "ok", "z": ctx.z, "sqrt_z": math.sqrt(ctx.z),
                "class3_threshold": (lx * llx) ** 5,
                "r0": ctx.r0, "r1": ctx.r1, "r2": ctx.r2,
                "count": n_residues, "lhs_log": sums.lhs_log,
                "sum_I_log": sums.totals_log["I"], "sum_II_log": sums.totals_log["II"],
                "sum_III_log": sums.totals_log["III"], "sum_IV_log": sums.totals_log["IV"],
                "coverage": sums.coverage, "partition_gap": gap,
                "regime_flag": (lx * llx) ** 5 > math.sqrt(ctx.z),
                "flags": _flags_str(ctx.flags),
            })
    rows.sort(key=lambda r: (r["x"], r["k"], r["a"], r["f"]))
    meta = [O1_CONVENTION, f"z_override={cfg.z_override}"]
    return rows, {}, meta


def run_tables(cfg: RunConfig):
    table = dickman.default_table()
    if cfg.what == "rho":
        if cfg.u_max > table.u_max:
            raise ConfigurationError(f"u_max {cfg.u_max} beyond table range {table.u_max}")
        steps = int(round(cfg.u_max / cfg.u_step))
        rows = []
        for i in range(steps + 1):
            u = i * cfg.u_step
            rows.append({"u": u, "rho": table.rho(u), "log_rho": table.log_rho(u)})
        return rows, ["table=rho"], ["u", "rho", "log_rho"]
    if cfg.what == "psi":
        rows = []
        for x in cfg.x_grid:
            for q in cfg.q_grid:
                rows.append({
                    "x": x, "q": q,
                    "exact": dickman.psi_exact(x, q),
                    "estimate": dickman.psi_estimate(x, q, table),
                    "flags": "xrho_reference_only",
                })
        rows.sort(key=lambda r: (r["x"], r["q"]))
        return rows, ["table=psi"], ["x", "q", "exact", "estimate", "flags"]
    if cfg.what == "primes":
        from .arith import sieve_primes

        rows = [{"p": p} for p in sieve_primes(cfg.limit)]
        return rows, [f"table=primes limit={cfg.limit}"], ["p"]
    raise ConfigurationError(f"unknown table {cfg.what!r}; choose rho, psi or primes")


def rankin_freeze_rows(cfg: RunConfig):
    """Standalone Rankin-tail grid at a fixed reference scale."""
    x = RANKIN_REF_X
    y = round(float(x) ** cfg.y_pow)
    spec = bounds.IntervalSpec(x=x, y=y, k=1, a=0, alpha=cfg.alpha, kappa=cfg.kappa)
    rows = []
    entries = {}
    for fsel in ("one", "tau:d=2"):
        f = parse_function(fsel, x, cfg)
        ctx = bounds.derive_context(spec, beta=f.params.beta)
        for z in RANKIN_Z_GRID:
            for r in RANKIN_R_GRID:
                tail = bounds.rankin_tail(f, z, r, 1, ctx, RANKIN_TRUNCATION)
                key = f"rankin|{fsel}|z={z:g}|r={r:g}"
                ratio_main = tail.lhs_truncated / safe_exp(tail.rhs_core_main_log)
                ratio_shiu = tail.lhs_truncated / safe_exp(tail.rhs_core_shiu_log)
                entries[key + "|main"] = ratio_main
                entries[key + "|shiu"] = ratio_shiu
                rows.append({
                    "f": fsel, "z": z, "r": r, "N": RANKIN_TRUNCATION,
                    "lhs": tail.lhs_truncated, "terms": tail.terms_used,
                    "rhs_main_log": tail.rhs_core_main_log,
                    "rhs_shiu_log": tail.rhs_core_shiu_log,
                    "ratio_main": ratio_main, "ratio_shiu": ratio_shiu,
                    "tail_bound": tail.tail_bound,
                    "flags": _flags_str(tail.flags),
                })
    rows.sort(key=lambda r: (r["f"], r["z"], r["r"]))
    return rows, entries


def rough_freeze_rows(cfg: RunConfig):
    """Rough-count grid for the y/(phi(k) log z) + z^2 core."""
    rows = []
    entries = {}
    for x in cfg.x_grid:
        y = round(float(x) ** cfg.y_pow)
        for z in ROUGH_Z_GRID:
            for k in ROUGH_K_LIST:
                a = 0 if k == 1 else 1
                count, core = bounds.phi_rough(x, y, z, k, a)
                key = f"rough|x={x}|z={z:g}|k={k}|a={a}"
                entries[key] = count / core
                rows.append({
                    "x": x, "y": y, "z": z, "k": k, "a": a,
                    "count": count, "core": core, "ratio": count / core,
                })
    rows.sort(key=lambda r: (r["x"], r["z"], r["k"]))
    return rows, entries


FREEZE_SUITE = (
    ("shiu", ("one", "tau:d=2", "tau:d=3", "tau:d=2,R=2")),
    ("main", ("synthetic:c=1,beta=0.001",)),
    ("mnthm2-c1", ("smooth",)),
    ("mnthm2-c2", ("smooth_tau:d=2,R=1",)),
)


def run_freeze_suite(cfg: RunConfig) -> dict:
    """The documented oracle run: all four theorems on the default grid,
    plus the Rankin and rough grids.  Returns every ratio keyed for the
    constants file."""
    entries: dict[str, float] = {}
    for theorem, funcs in FREEZE_SUITE:
        sub = replace(cfg, functions=funcs)
        _, sub_entries, _ = run_verify(theorem, sub)
        entries.update(sub_entries)
    _, rankin_entries = rankin_freeze_rows(cfg)
    entries.update(rankin_entries)
    _, rough_entries = rough_freeze_rows(cfg)
    entries.update(rough_entries)
    return entries


def load_constants(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "entries" not in data:
        raise ConfigurationError(f"{path} is not a constants file")
    return data["entries"]


def save_constants(path: str, entries: dict) -> None:
    payload = {"format": "shiubounds-frozen-constants-v1", "entries": entries}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def compare_to_frozen(computed: dict, frozen: dict, rel_tol: float = 0.01) -> list[str]:
    """Two-sided 1% comparison on the intersection of keys."""
    problems = []
    for key in sorted(set(computed) & set(frozen)):
        have, want = computed[key], frozen[key]
        if want == 0.0:
            if abs(have) > 1e-12:
                problems.append(f"{key}: frozen 0 but got {have!r}")
        elif not math.isfinite(want) or not math.isfinite(have):
            if repr(have) != repr(want):
                problems.append(f"{key}: frozen {want!r} but got {have!r}")
        elif abs(have / want - 1.0) > rel_tol:
            problems.append(f"{key}: frozen {want!r} but got {have!r}")
    return problems


class FrozenRegression(Exception):
    def __init__(self, problems):
        super().__init__(f"{len(problems)} frozen-constant regressions")
        self.problems = problems


def _check_or_merge_frozen(cfg: RunConfig, entries: dict) -> None:
    if not entries or cfg.constants is None:
        return
    import os

    if cfg.freeze:
        merged = {}
        if os.path.exists(cfg.constants):
            merged.update(load_constants(cfg.constants))
        merged.update(entries)
        save_constants(cfg.constants, merged)
        return
    if os.path.exists(cfg.constants):
        problems = compare_to_frozen(entries, load_constants(cfg.constants))
        if problems:
            raise FrozenRegression(problems)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiubounds",
        description="Desk-scale verification scans for short-interval multiplicative sums",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value config file; flags win")
        p.add_argument("--x-grid", dest="x_grid", help="comma list of x values")
        p.add_argument("--y-pow", dest="y_pow", type=float, help="y = round(x**y_pow)")
        p.add_argument("--k", dest="k_list", help="comma list of moduli")
        p.add_argument("--a", dest="a_mode", help="'all' or comma list of residues")
        p.add_argument("--f", dest="functions", action="append",
                       help="function selector; repeatable")
        p.add_argument("--alpha", type=float)
        p.add_argument("--kappa", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--eps0", type=float)
        p.add_argument("--Q-pow", dest="q_pow", type=float)
        p.add_argument("--Q", dest="q_value", type=float)
        p.add_argument("--out", help="CSV path, '-' for stdout")
        p.add_argument("--constants", help="frozen-constants JSON path")
        p.add_argument("--freeze", action="store_true", default=None,
                       help="write/merge this run's ratios into the constants file")

    p_verify = sub.add_parser("verify", help="theorem RHS scans")
    p_verify.add_argument("--theorem", required=True, choices=sorted(THEOREM_CHOICES))
    add_common(p_verify)

    p_dfold = sub.add_parser("dfold", help="divisor-power application")
    add_common(p_dfold)
    p_dfold.add_argument("--d", type=int)
    p_dfold.add_argument("--R", dest="r", type=float)
    p_dfold.add_argument("--paper-R", dest="paper_r", action="store_true", default=None)
    p_dfold.add_argument("--smooth", action="store_true", default=None,
                         help="also emit smooth-restricted rows")

    p_smooth = sub.add_parser("smooth-interval", help="short-interval smooth counts")
    add_common(p_smooth)
    p_smooth.add_argument("--regime", choices=("sound", "goudout"))
    p_smooth.add_argument("--B", dest="b_const", type=float)
    p_smooth.add_argument("--h", dest="h_value", type=float)
    p_smooth.add_argument("--c3-margin", dest="c3_margin", type=float)
    p_smooth.add_argument("--y-cap", dest="y_cap", type=int)

    p_classes = sub.add_parser("classes", help="class partition sums")
    add_common(p_classes)
    p_classes.add_argument("--z-override", dest="z_override", type=float)

    p_tables = sub.add_parser("tables", help="dump rho/psi/prime tables")
    add_common(p_tables)
    p_tables.add_argument("--what", choices=("rho", "psi", "primes"))
    p_tables.add_argument("--u-max", dest="u_max", type=float)
    p_tables.add_argument("--u-step", dest="u_step", type=float)
    p_tables.add_argument("--limit", type=int)
    p_tables.add_argument("--Q-grid", dest="q_grid", help="comma list of Q for psi tables")

    p_freeze = sub.add_parser("freeze", help="run the documented oracle suite")
    add_common(p_freeze)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            setattr(cfg, key, value)
    for field in fields(RunConfig):
        value = getattr(args, field.name, None)
        if value is None:
            continue
        if field.name in _TUPLE_INT_FIELDS | _TUPLE_STR_FIELDS and isinstance(value, str):
            value = _parse_config_value(field.name, value)
        if field.name == "functions" and isinstance(value, list):
            value = tuple(value)
        setattr(cfg, field.name, value)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 3 if exc.code not in (0, None) else 0
    try:
        cfg = config_from_args(args)
        if args.command == "verify":
            rows, entries, meta = run_verify(args.theorem, cfg)
            write_csv(cfg.out, meta, VERIFY_COLUMNS, rows)
            _check_or_merge_frozen(cfg, entries)
        elif args.command == "dfold":
            rows, entries, meta = run_dfold(cfg)
            write_csv(cfg.out, meta, DFOLD_COLUMNS, rows)
        elif args.command == "smooth-interval":
            rows, entries, meta = run_smooth_interval(cfg)
            write_csv(cfg.out, meta, SMOOTH_COLUMNS, rows)
        elif args.command == "classes":
            rows, entries, meta = run_classes(cfg)
            write_csv(cfg.out, meta, CLASSES_COLUMNS, rows)
        elif args.command == "tables":
            rows, meta, columns = run_tables(cfg)
            write_csv(cfg.out, meta, columns, rows)
        elif args.command == "freeze":
            entries = run_freeze_suite(cfg)
            target = cfg.constants or "frozen_constants.json"
            if cfg.freeze or not _exists(target):
                save_constants(target, entries)
                sys.stderr.write(f"froze {len(entries)} ratios -> {target}\n")
            else:
                problems = compare_to_frozen(entries, load_constants(target))
                if problems:
                    raise FrozenRegression(problems)
                sys.stderr.write(f"all {len(entries)} ratios within 1% of {target}\n")
        else:  # pragma: no cover - argparse enforces choices
            raise ConfigurationError(f"unknown command {args.command!r}")
    except ConfigurationError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 3
    except FrozenRegression as exc:
        for problem in exc.problems:
            sys.stderr.write(f"regression: {problem}\n")
        return 2
    except (ContractViolationError,) as exc:
        sys.stderr.write(f"invariant failure: {exc}\n")
        return 1
    except DomainError as exc:
        sys.stderr.write(f"domain error: {exc}\n")
        return 3
    return 0


def _exists(path: str) -> bool:
    import os

    return os.path.exists(path)


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
