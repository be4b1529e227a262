"""Batch front-end: JSON run configuration in, CSV + JSON summary out.

The configuration is a flat JSON object whose ``command`` field selects one
of the entry points below; every numeric field is validated before any
solve starts.  Each run writes ``<prefix>.csv`` (one row per solve unit,
17-significant-digit values) and ``<prefix>.summary.json`` (aggregates,
diagnostics, a config echo, the package version, and the wall time), so a
summary file doubles as an exact experiment record.

Exit codes: 0 success, 2 configuration/validation error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .cell_problems import (
    DEFAULT_LAMBDA_LADDER,
    bulk_cell_value,
    surface_cell_value,
)
from .errors import (
    ConfigurationError,
    InvalidInputError,
    SolverError,
    UnsupportedConfigurationError,
)
from .fidelity import (
    FidelityProblem,
    at_fidelity_minimize,
    fidelity_data_preset,
    load_data_csv,
    ms1d_dp_oracle,
)
from .grid import build_box_grid
from .homogenize import (
    RandomFieldSpec,
    f_hom_estimate,
    g_hom_estimate,
    mc_estimate,
    stationarity_check,
    subadditivity_check,
)
from .integrands import (
    BulkIntegrand,
    Homogeneous,
    PsiFunction,
    SurfaceIntegrand,
    integrand_from_json,
    validate_classes,
)
from .solvers import SolveOptions, profile_1d_value

__all__ = ["run", "main", "COMMANDS"]

COMMANDS = (
    "cell-bulk",
    "cell-surface",
    "homogenize-bulk",
    "homogenize-surface",
    "stochastic",
    "fidelity",
    "profile1d",
    "validate",
)

_FMT = "%.17g"


def _require(config: dict, *names):
    for name in names:
        if name not in config:
            raise ConfigurationError(f"missing field: {name}")


def _num(value) -> str:
    return _FMT % float(value)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _num(cell) for cell in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _solve_options(config: dict) -> SolveOptions:
    opts = config.get("opts", {})
    if not isinstance(opts, dict):
        raise ConfigurationError("field 'opts' must be an object")
    known = {f.name for f in SolveOptions.__dataclass_fields__.values()}
    unknown = set(opts) - known
    if unknown:
        raise ConfigurationError(f"unknown solver options: {sorted(unknown)}")
    return SolveOptions(**opts)


def _integrand(config: dict, key: str, role: str):
    doc = dict(config[key])
    doc.setdefault("role", role)
    return integrand_from_json(doc)


def _cmd_cell_bulk(config, opts):
    _require(config, "f", "xi", "rho", "h")
    f = _integrand(config, "f", "bulk")
    xi = config["xi"]
    x = config.get("x", [0.0] * len(np.atleast_2d(xi)[0]))
    res = bulk_cell_value(f, xi, x, float(config["rho"]), float(config["h"]), opts=opts)
    header = ["rho", "h", "value", "normalised", "outer_iterations", "converged"]
    rows = [(res.rho, float(config["h"]), res.value, res.normalised,
             res.diagnostics.outer_iterations, str(int(res.diagnostics.converged)))]
    summary = {"normalised": res.normalised, "value": res.value,
               "converged": bool(res.diagnostics.converged)}
    return header, rows, summary


def _cmd_cell_surface(config, opts):
    _require(config, "g", "nu", "rho", "eps", "h")
    g = _integrand(config, "g", "surface")
    f = _integrand(config, "f", "bulk") if "f" in config else None
    nu = config["nu"]
    x = config.get("x", [0.0] * len(nu))
    ladder = tuple(config.get("lambda_ladder", DEFAULT_LAMBDA_LADDER))
    res = surface_cell_value(
        g, f, PsiFunction(q=float(config.get("psi_q", 2.0))), nu, x,
        float(config["rho"]), float(config["eps"]), float(config["h"]),
        mode=config.get("mode", "dirichlet"), lam_ladder=ladder, opts=opts,
        zeta=config.get("zeta", 1.0),
    )
    header = ["lambda", "value", "normalised", "residual", "iterations", "converged"]
    rows = [(r.lam, r.value, r.value / res.rho ** (len(nu) - 1), r.residual,
             r.iterations, str(int(r.converged))) for r in res.ladder]
    summary = {"normalised": res.normalised, "extrapolated": res.extrapolated,
               "converged": bool(res.diagnostics.converged)}
    return header, rows, summary


def _hom_rows(est):
    header = ["r", "normalised"]
    rows = [(r, v) for r, v in zip(est.scales, est.values)]
    summary = {
        "limit": est.limit,
        "rate_constant": est.rate_constant,
        "fit_residual": est.residual,
        "tail_min": est.tail_min,
        "tail_max": est.tail_max,
        "failed_scales": [[r, msg] for r, msg in est.failed],
    }
    return header, rows, summary


def _cmd_homogenize_bulk(config, opts):
    _require(config, "f", "xi", "r_list")
    f = _integrand(config, "f", "bulk")
    xi = config["xi"]
    x = config.get("x", [0.0] * len(np.atleast_2d(xi)[0]))
    est = f_hom_estimate(f, xi, x, config["r_list"],
                         h_rule=int(config.get("h_rule", 8)), opts=opts)
    return _hom_rows(est)


def _cmd_homogenize_surface(config, opts):
    _require(config, "g", "nu", "r_list")
    g = _integrand(config, "g", "surface")
    nu = config["nu"]
    x = config.get("x", [0.0] * len(nu))
    ladder = tuple(config.get("lambda_ladder", DEFAULT_LAMBDA_LADDER))
    est = g_hom_estimate(g, nu, x, config["r_list"],
                         h_rule=int(config.get("h_rule", 8)),
                         lam_ladder=ladder, opts=opts,
                         mode=config.get("mode", "dirichlet"))
    return _hom_rows(est)


def _cmd_stochastic(config, opts):
    _require(config, "kind", "values", "probabilities", "param", "r", "sample_count")
    spec = RandomFieldSpec(
        tuple(config["values"]), tuple(config["probabilities"]),
        master_seed=int(config.get("master_seed", 0)),
        p=float(config.get("p", 2.0)),
    )
    check = config.get("check", "mc")
    h_rule = int(config.get("h_rule", 8))
    r = float(config["r"])
    count = int(config["sample_count"])
    if check == "mc":
        rep = mc_estimate(config["kind"], spec, config["param"], r, count,
                          opts=opts, shift=config.get("shift"), h_rule=h_rule)
        header = ["seed", "value", "converged"]
        rows = [(str(s), v, str(int(c)))
                for s, v, c in zip(rep.seeds, rep.values, rep.converged)]
        summary = {"mean": rep.mean, "variance": rep.variance, "stderr": rep.stderr,
                   "failed": rep.failed, "scale": rep.scale}
        return header, rows, summary
    if check == "stationarity":
        _require(config, "shifts")
        rep = stationarity_check(spec, config["kind"], config["param"], r,
                                 config["shifts"], count, opts=opts, h_rule=h_rule)
        header = ["shift", "mean", "stderr", "deviation", "threshold"]
        rows = [
            ("(%s)" % " ".join(str(c) for c in z), m.mean, m.stderr, d, t)
            for z, m, d, t in zip(rep.shifts, rep.reports, rep.deviations, rep.thresholds)
        ]
        summary = {"flag": rep.flag,
                   "means": [m.mean for m in rep.reports],
                   "deviations": rep.deviations, "thresholds": rep.thresholds}
        return header, rows, summary
    if check == "subadditivity":
        _require(config, "nu", "interval", "partition")
        rep = subadditivity_check(
            spec, int(config.get("seed", 1)), config["nu"],
            config["interval"], config["partition"],
            half_height=float(config.get("half_height", 2.0)),
            h_rule=h_rule, opts=opts,
        )
        header = ["part", "mu"]
        rows = [("whole", rep.mu_whole)] + [
            (f"part{i}", mu) for i, mu in enumerate(rep.mu_parts)
        ]
        summary = {"mu_whole": rep.mu_whole, "mu_sum": rep.mu_sum,
                   "slack": rep.slack, "bound": rep.bound, "bound_ok": rep.bound_ok}
        return header, rows, summary
    raise ConfigurationError(
        f"unknown stochastic check '{check}'; valid: mc, stationarity, subadditivity"
    )


def _cmd_fidelity(config, opts):
    _require(config, "eps_list")
    eps_list = tuple(float(e) for e in config["eps_list"])
    if "data_csv" in config:
        data = load_data_csv(config["data_csv"])
    else:
        _require(config, "preset", "count")
        data = fidelity_data_preset(config["preset"], int(config["count"]))
    if data.ndim != 1:
        raise ConfigurationError("fidelity command handles 1D data only")
    h = 1.0 / (data.size - 1)
    grid, _ = build_box_grid((0.5,), (1.0,), (1.0,), h)
    f = _integrand(config, "f", "bulk") if "f" in config else BulkIntegrand(Homogeneous(1.0))
    g = _integrand(config, "g", "surface") if "g" in config else SurfaceIntegrand(Homogeneous(1.0))
    problem = FidelityProblem(grid, data, q=float(config.get("q", 2.0)),
                              eps_list=eps_list, f=f, g=g, opts=opts)
    results = at_fidelity_minimize(problem)
    header = ["eps", "value", "v_deviation", "converged"]
    rows = [(r.eps, r.value, r.v_deviation, str(int(r.converged))) for r in results]
    summary = {"values": [r.value for r in results],
               "v_deviations": [r.v_deviation for r in results]}
    if f.p == 2.0 and g.p == 2.0 and problem.q == 2.0 and data.size <= 2000:
        c_p = 2.0
        alpha = f.coefficient(np.zeros((1, 1)))[0]
        beta = g.coefficient(np.zeros((1, 1)))[0] * c_p
        oracle, jumps, _ = ms1d_dp_oracle(data, alpha=float(alpha), beta=float(beta))
        summary["oracle"] = oracle
        summary["oracle_jumps"] = jumps
    return header, rows, summary


def _cmd_profile1d(config, opts):
    _require(config, "p", "L", "N")
    value = profile_1d_value(float(config["p"]), float(config["L"]), int(config["N"]))
    header = ["p", "L", "N", "value"]
    rows = [(float(config["p"]), float(config["L"]), float(config["N"]), value)]
    return header, rows, {"value": value}


def _cmd_validate(config, opts):
    _require(config, "integrand")
    role = config["integrand"].get("role", "bulk")
    integrand = _integrand(config, "integrand", role)
    report = validate_classes(
        integrand,
        sample_count=int(config.get("sample_count", 200)),
        seed=int(config.get("seed", 0)),
        n=int(config.get("n", 2)),
        m=int(config.get("m", 1)),
    )
    header = ["check", "passed", "worst_margin"]
    rows = [(c.name, str(int(c.passed)), c.worst_margin) for c in report.checks]
    summary = {"all_passed": report.all_passed,
               "checks": {c.name: bool(c.passed) for c in report.checks}}
    return header, rows, summary


_DISPATCH = {
    "cell-bulk": _cmd_cell_bulk,
    "cell-surface": _cmd_cell_surface,
    "homogenize-bulk": _cmd_homogenize_bulk,
    "homogenize-surface": _cmd_homogenize_surface,
    "stochastic": _cmd_stochastic,
    "fidelity": _cmd_fidelity,
    "profile1d": _cmd_profile1d,
    "validate": _cmd_validate,
}


def run(config: dict, out_prefix: str = "run", jobs: int = 1, verbose: bool = False) -> int:
    """Validate, dispatch, and write <prefix>.csv + <prefix>.summary.json."""
    t0 = time.perf_counter()
    try:
        if not isinstance(config, dict):
            raise ConfigurationError("configuration must be a JSON object")
        command = config.get("command")
        if command not in _DISPATCH:
            raise ConfigurationError(
                f"unknown command '{command}'; valid commands: {', '.join(COMMANDS)}"
            )
        if jobs < 1:
            raise ConfigurationError(f"--jobs must be >= 1, got {jobs}")
        opts = _solve_options(config)
        header, rows, summary = _DISPATCH[command](config, opts)
    except (ConfigurationError, InvalidInputError, UnsupportedConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    csv_path = f"{out_prefix}.csv"
    summary_path = f"{out_prefix}.summary.json"
    _write_csv(csv_path, header, rows)
    document = {
        "command": config["command"],
        "summary": summary,
        "config": config,
        "version": __version__,
        "wall_time": time.perf_counter() - t0,
    }
    with open(summary_path, "w") as fh:
        json.dump(document, fh, indent=2, default=float)
        fh.write("\n")
    if verbose:
        print(f"wrote {csv_path} and {summary_path}")
        print(json.dumps(summary, indent=2, default=float))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pfhom",
        description="Phase-field cell problems, homogenised integrand estimates, "
                    "and fidelity checks driven by a JSON run configuration.",
    )
    parser.add_argument("config", help="path to the JSON run configuration")
    parser.add_argument("--out", default=None, help="output path prefix")
    parser.add_argument("--jobs", type=int, default=1,
                        help="max parallel solve units (runs are sequential today; "
                             "kept for forward compatibility, ordering is deterministic)")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read configuration: {exc}", file=sys.stderr)
        return 2
    prefix = args.out
    if prefix is None:
        prefix = config.get("out", "run") if isinstance(config, dict) else "run"
    return run(config, out_prefix=prefix, jobs=args.jobs, verbose=args.verbose)


if __name__ == "__main__":
    sys.exit(main())
