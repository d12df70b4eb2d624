"""Experiment runner: one command per process, deterministic artifacts.

Every command reads one JSON config (plus dotted-path --set overrides),
writes a JSON report embedding the config hash and truncation parameters,
and CSV series where there is a curve to plot.  Exit codes: 0 success,
2 usage/config error, 3 numeric failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (build_data_field, build_operator, build_spectrum,
                     build_function, load_config, resolve_alpha)
from .diophantine import check_condition_A
from .engine import (OperatorSpec, build_counterexample, gh_experiment,
                     verdict, verify_counterexample)
from .errors import (ConfigError, FieldSolveError, GHLabError, NumericsError,
                     PrecisionError, ResonanceError)
from .modes import solve_field
from .regularity import (condition_star, condition_star_star,
                         synthesis_membership)
from .reporting import config_hash, write_csv, write_json
from .spectral import counting_function, verify_growth
from .torus import TWO_PI

USAGE_ERROR, NUMERIC_ERROR, VERIFICATION_ERROR = 2, 3, 4


def _report_skeleton(command: str, config: dict) -> dict:
    return {
        "command": command,
        "config_hash": config_hash(config),
        "truncations": config["truncations"],
        "results": {},
    }


def _mode_csv_rows(field, n_samples: int = 128):
    rows = []
    ts = np.arange(n_samples) * (TWO_PI / n_samples)
    for j, u in enumerate(field.modes, start=1):
        vals = u.values_on_grid(n_samples)
        for t, v in zip(ts, vals):
            rows.append((j, float(t), float(v.real), float(v.imag)))
    return rows


def cmd_spectrum(config, out_dir):
    seq = build_spectrum(config["spectrum"])
    report = _report_skeleton("spectrum", config)
    results = {
        "J": len(seq),
        "kernel_dim": seq.kernel_dim,
        "first": list(seq.values[:10]),
        "last": float(seq.values[-1]),
        "growth": list(seq.growth.as_tuple()) if seq.growth else None,
        "counting_at_midpoint": counting_function(seq, float(seq.values[-1]) / 2.0),
    }
    if seq.growth:
        gr = verify_growth(seq, *seq.growth.as_tuple())
        results["growth_verified"] = bool(gr.ok)
        results["growth_violations"] = gr.violations[:10]
    report["results"] = results
    write_json(out_dir / "spectrum.json", report)
    if "csv" in config["outputs"]["formats"]:
        write_csv(out_dir / "spectrum.csv", ["j", "lambda_j"], seq.to_csv_rows())
    return 0


def cmd_solve(config, out_dir):
    seq = build_spectrum(config["spectrum"])
    op = build_operator(config["operator"], seq)
    J = min(config["truncations"]["J"], len(seq))
    f_field = build_data_field(config["data"], seq, J)
    numeric = config["numeric"]
    sol = solve_field(op, f_field, panels=numeric["panels"],
                      formula="auto" if numeric["formula"] == "divisor" else numeric["formula"],
                      resonance_tol=numeric["resonance_tol"], n_out=numeric["n_out"])
    report = _report_skeleton("solve", config)
    report["results"] = {
        "J": J,
        "divisor_magnitudes": list(sol.divisor_magnitudes),
        "residual_sups": list(sol.residual_sups),
        "max_residual": float(np.max(sol.residual_sups)),
        "formulas": [s.formula_used for s in sol.solutions],
        "resonant": [s.resonant for s in sol.solutions],
    }
    write_json(out_dir / "solve.json", report)
    if "csv" in config["outputs"]["formats"]:
        write_csv(out_dir / "modes.csv", ["j", "t", "re_u", "im_u"],
                  _mode_csv_rows(sol.field))
    return 0


def cmd_verdict(config, out_dir):
    seq = build_spectrum(config["spectrum"])
    op = build_operator(config["operator"], seq)
    dio = None
    if op.is_constant and complex(op.coefficient).imag == 0.0:
        section = config["diophantine"]
        dio = {"epsilons": tuple(section["epsilons"])}
        if "J" in section:
            dio["J"] = min(section["J"], len(seq))
    v = verdict(op, dio_params=dio, n_grid=config["numeric"]["n_grid"])
    report = _report_skeleton("verdict", config)
    report["results"] = v.to_jsonable()
    write_json(out_dir / "verdict.json", report)
    return 0


def cmd_diophantine(config, out_dir):
    seq = build_spectrum(config["spectrum"])
    section = config["diophantine"]
    digits = config["numeric"]["precision_digits"]
    alpha, label, probes = resolve_alpha(section, digits)
    rep = check_condition_A(alpha, seq, J=section.get("J"),
                            epsilons=tuple(section["epsilons"]), probes=probes,
                            precision_digits=digits, alpha_label=label)
    report = _report_skeleton("diophantine", config)
    report["results"] = rep.to_jsonable()
    write_json(out_dir / "diophantine.json", report)
    if "csv" in config["outputs"]["formats"]:
        write_csv(out_dir / "gaps.csv", ["j", "gap"], rep.to_csv_rows())
    return 0


def cmd_classify(config, out_dir):
    seq = build_spectrum(config["spectrum"])
    tr = config["truncations"]
    J = min(tr["J"], len(seq))
    field = build_data_field(config["data"], seq, J)
    star = [condition_star(field, M, tr["gamma_max"]) for M in range(tr["M_max"] + 1)]
    star_star = [condition_star_star(field, M, tr["gamma_max"])
                 for M in range(tr["M_max"] + 1)]
    synth = synthesis_membership(field, Mprime_max=tr["Mprime_max"])
    report = _report_skeleton("classify", config)
    report["results"] = {
        "sum_condition": [
            {"M": f.M, "passed": f.passed, "sigma": f.sigma, "C": f.C,
             "failure": f.failure} for f in star],
        "pointwise_condition": [
            {"M": f.M, "passed": f.passed, "sigma": f.sigma, "C": f.C,
             "failure": f.failure,
             "first_violation": list(f.first_violation) if f.first_violation else None}
            for f in star_star],
        "synthesis": {"member": synth.member, "slope": synth.slope,
                      "Mprime_max": synth.Mprime_max},
    }
    write_json(out_dir / "classify.json", report)
    if "csv" in config["outputs"]["formats"]:
        lam = field.tilde_values()
        sups = [u.sup_norm(config["numeric"]["n_grid"]) for u in field.modes]
        best = next((f for f in reversed(star_star) if f.passed), None)
        rows = []
        for j, (s, lv) in enumerate(zip(sups, lam), start=1):
            bound = (best.C * lv ** (-best.M)) if best else float("nan")
            rows.append((j, s, bound))
        write_csv(out_dir / "decay.csv", ["j", "sup_norm", "fitted_bound"], rows)
    return 0


def cmd_counterexample(config, out_dir):
    seq = build_spectrum(config["spectrum"])
    op = build_operator(config["operator"], seq)
    tr = config["truncations"]
    J = min(tr["J"], len(seq))
    witness = build_counterexample(op, J, n_grid=config["numeric"]["n_grid"])
    rep = verify_counterexample(witness, op,
                                residual_tol=config["numeric"]["residual_tol"])
    report = _report_skeleton("counterexample", config)
    report["results"] = {
        "t_star": witness.t_star,
        "c_star": witness.sign_analysis.c_star,
        "verification": rep.to_jsonable(),
    }
    write_json(out_dir / "counterexample.json", report)
    if "csv" in config["outputs"]["formats"]:
        write_csv(out_dir / "witness_u.csv", ["j", "t", "re_u", "im_u"],
                  _mode_csv_rows(witness.u_field))
        write_csv(out_dir / "witness_f.csv", ["j", "t", "re_f", "im_f"],
                  _mode_csv_rows(witness.f_field))
    return 0 if rep.all_ok else VERIFICATION_ERROR


def cmd_ghx(config, out_dir):
    seq = build_spectrum(config["spectrum"])
    op = build_operator(config["operator"], seq)
    tr = config["truncations"]
    J = min(tr["J"], len(seq))
    field = build_data_field(config["data"], seq, J)
    rep = gh_experiment(op, field, M_max=tr["M_max"], gamma_max=tr["gamma_max"],
                        panels=config["numeric"]["panels"])
    report = _report_skeleton("ghx", config)
    report["results"] = rep.to_jsonable()
    report["results"]["passed_up_to_M"] = rep.passed_up_to()
    write_json(out_dir / "ghx.json", report)
    return 0


COMMANDS = {
    "spectrum": cmd_spectrum,
    "solve": cmd_solve,
    "verdict": cmd_verdict,
    "diophantine": cmd_diophantine,
    "classify": cmd_classify,
    "counterexample": cmd_counterexample,
    "ghx": cmd_ghx,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghlab",
        description="Spectral diagnostics for time-periodic evolution operators.")
    parser.add_argument("--version", action="version", version=f"ghlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config path")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="dotted-path config override (JSON-parsed value)")
        p.add_argument("--precision", type=int, default=None, metavar="DIGITS",
                       help="working precision for gap scans")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.set, args.precision)
    except ConfigError as exc:
        print(f"ghlab: config error: {exc}", file=sys.stderr)
        return USAGE_ERROR

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](config, out_dir)
    except ConfigError as exc:
        print(f"ghlab: config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (NumericsError, ResonanceError, FieldSolveError, PrecisionError) as exc:
        write_json(out_dir / "error.json",
                   {"command": args.command, "error": type(exc).__name__,
                    "message": str(exc)})
        print(f"ghlab: numeric failure: {exc}", file=sys.stderr)
        return NUMERIC_ERROR
    except GHLabError as exc:
        write_json(out_dir / "error.json",
                   {"command": args.command, "error": type(exc).__name__,
                    "message": str(exc)})
        print(f"ghlab: {exc}", file=sys.stderr)
        return VERIFICATION_ERROR


if __name__ == "__main__":
    sys.exit(main())
