"""Command-line front end: config-driven experiments, bound calculators, and
schedule inspection.

Subcommands: run, bounds, schedule, audit, ratefit.  Exit codes: 0 all checks
pass, 1 bound-check failure, 2 config/flag error, 3 admissibility failure in
strict mode, 4 divergence.  The SGDM_SCHED_OUT environment variable overrides
the default output root (./runs).
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, optim, schedules, theory
from ._fmt import dumps17

EXIT_OK = 0
EXIT_BOUND_FAIL = 1
EXIT_CONFIG = 2
EXIT_ADMISSIBILITY = 3
EXIT_DIVERGENCE = 4


class ConfigError(ValueError):
    """Malformed config file: unknown keys, missing fields, or bad values."""


_PROBLEM_FIELDS = {
    "family": str,
    "d": int,
    "n": int,
    "seed": int,
    "sigma_sq": float,
    "spread": float,
    "scale": float,
    "amp": float,
    "box_radius": float,
}
_OPTIMIZER_FIELDS = {"alg": str, "beta": float, "theta0_seed": int}
_SCHEDULE_FIELDS = {
    "regime": str,
    "kind": str,
    "lambda_max": float,
    "lambda_min": float,
    "p": float,
    "gamma": float,
    "lambda0": float,
    "warmup_phases": int,
    "batch": int,
    "T": int,
    "b0": int,
    "delta": float,
    "epochs_per_phase": "int_list",
    "dataset_size": int,
}
_HARNESS_FIELDS = {
    "seeds": "seeds",
    "record_every": int,
    "validation_mode": str,
    "budget": float,
}
_SECTIONS = {
    "problem": _PROBLEM_FIELDS,
    "optimizer": _OPTIMIZER_FIELDS,
    "schedule": _SCHEDULE_FIELDS,
    "harness": _HARNESS_FIELDS,
}


def _parse_value(section: str, key: str, raw: str, kind):
    raw = raw.strip()
    try:
        if kind is str:
            return raw
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "int_list":
            return tuple(int(p) for p in raw.split(",") if p.strip())
        if kind == "seeds":
            if "," in raw:
                return tuple(int(p) for p in raw.split(",") if p.strip())
            return tuple(range(int(raw)))  # a bare count means seeds 0..count-1
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None
    raise AssertionError(f"unhandled field kind {kind!r}")


def load_config(path: str | Path) -> harness.ExperimentConfig:
    """Parse and range-check an experiment config (INI with four sections)."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    # keep key case as written so unknown-key messages are readable
    cp.optionxform = str
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    values: dict[str, dict] = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        fields = _SECTIONS[section]
        values[section] = {}
        for key, raw in cp.items(section):
            if key not in fields:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[section][key] = _parse_value(section, key, raw, fields[key])
    for required in ("optimizer", "schedule"):
        if required not in values:
            raise ConfigError(f"missing required section [{required}]")
    for key in ("alg", "beta"):
        if key not in values["optimizer"]:
            raise ConfigError(f"missing required key {key!r} in [optimizer]")
    if "regime" not in values["schedule"]:
        raise ConfigError("missing required key 'regime' in [schedule]")

    opt = values["optimizer"]
    har = values.get("harness", {})
    try:
        problem = harness.ProblemSpec(**values.get("problem", {}))
        schedule = harness.ScheduleSpec(**values["schedule"])
        return harness.ExperimentConfig(
            problem=problem,
            alg=opt["alg"],
            beta=opt["beta"],
            schedule=schedule,
            seeds=har.get("seeds", tuple(range(64))),
            record_every=har.get("record_every", 1),
            validation_mode=har.get("validation_mode", "strict"),
            budget=har.get("budget", 1e10),
            theta0_seed=opt.get("theta0_seed", 0),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def _out_root(arg_out: str | None) -> Path:
    return Path(arg_out or os.environ.get("SGDM_SCHED_OUT") or "runs")


def _apply_overrides(config: harness.ExperimentConfig, args) -> harness.ExperimentConfig:
    from dataclasses import replace

    if getattr(args, "seeds", None) is not None:
        config = replace(config, seeds=tuple(range(args.seeds)))
    if getattr(args, "waive_admissibility", False):
        config = replace(config, validation_mode="waived")
    elif getattr(args, "strict", False):
        config = replace(config, validation_mode="strict")
    return config


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        config = _apply_overrides(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_root = _out_root(args.out)
    try:
        report = harness.run_experiment(config, out_dir=out_root, threads=args.threads)
    except schedules.MomentumTooLarge as exc:
        print(f"admissibility: FAIL ({exc})", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except schedules.InadmissibleSchedule as exc:
        print(f"admissibility: FAIL ({exc})", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except harness.ExperimentDivergence as exc:
        print(f"divergence: FAIL ({exc})", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (schedules.ScheduleError, harness.BudgetExceeded, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for name, check in report.checks.items():
        verdict = "PASS" if check["pass"] else "FAIL"
        detail = ""
        if "margin" in check:
            detail = f" (statistic={check['statistic']:.6g}, rhs={check['rhs']:.6g})"
        elif name == "admissible":
            if check["waived"]:
                verdict = "WAIVED"
            if check["lr_bound"] is not None:
                detail = f" (lr_max={check['lr_max']:.6g}, bound={check['lr_bound']:.6g})"
            else:
                detail = " (no admissible rate: c >= 1/beta^2)"
        elif name == "no_divergence" and check["seeds"]:
            detail = f" (seeds {check['seeds']})"
        print(f"{name}: {verdict}{detail}")
    print(f"artifacts: {Path(out_root) / report.config_hash}")
    failed = [
        name
        for name, check in report.checks.items()
        if not check["pass"] and not (name == "admissible" and check["waived"])
    ]
    return EXIT_OK if not failed else EXIT_BOUND_FAIL


def _schedule_spec_from_flags(args, regime: str | None = None) -> harness.ScheduleSpec:
    """Map CLI flags to a ScheduleSpec; `regime` comes from --regime for
    `bounds` (cor3.x names) or is inferred from flags for `schedule`."""
    kind = args.kind
    if args.dataset_size is None and (args.b0 is not None or kind.endswith("cosine")):
        raise ConfigError(
            "--dataset-size is required for phase plans and cosine kinds "
            "(it fixes the steps-per-epoch bookkeeping)"
        )
    if regime is None:
        if args.b0 is not None:
            if kind == "exp_growth":
                regime = "joint-growth"
            elif kind in ("warmup_constant", "warmup_cosine"):
                regime = "warmup"
                kind = kind.removeprefix("warmup_")
            else:
                regime = "increasing-bs"
        else:
            regime = "constant-bs"
    lambda_max = args.lr if args.lr is not None else args.lr_max
    return harness.ScheduleSpec(
        regime=regime,
        kind=kind,
        lambda_max=lambda_max if lambda_max is not None else 0.1,
        lambda_min=args.lr_min,
        p=args.p,
        gamma=args.gamma,
        lambda0=args.lr0,
        warmup_phases=args.warmup_phases,
        batch=args.batch,
        T=args.T,
        b0=args.b0,
        delta=args.delta,
        epochs_per_phase=tuple(int(x) for x in args.epochs_per_phase.split(","))
        if args.epochs_per_phase
        else None,
        dataset_size=args.dataset_size,
    )


_BOUNDS_REGIME_TO_SPEC = {
    "cor3.1": "constant-bs",
    "cor3.2": "increasing-bs",
    "cor3.3": "joint-growth",
    "cor3.4": "warmup",
}


def cmd_bounds(args) -> int:
    try:
        prefix = args.regime.split("-")[0]
        if prefix not in _BOUNDS_REGIME_TO_SPEC:
            raise ConfigError(f"unknown regime {args.regime!r}; expected one of {theory.REGIMES}")
        spec_regime = _BOUNDS_REGIME_TO_SPEC[prefix]
        kind = args.regime[len(prefix) + 1 :] if "-" in args.regime else args.kind
        if spec_regime == "joint-growth":
            kind = "exp_growth"
        ns = argparse.Namespace(**vars(args))
        ns.kind = kind
        spec = _schedule_spec_from_flags(ns, regime=spec_regime)
        n_for_epochs = args.dataset_size if args.dataset_size is not None else (
            args.batch if spec_regime == "constant-bs" and args.batch else 1
        )
        table, _, regime, regime_params = spec.build(n_for_epochs)
        constants = theory.TheoremConstants(
            L=args.L,
            beta=args.beta,
            c=table.growth_constant_c,
            f0_minus_fstar=args.f0_gap,
            sigma_sq=args.sigma_sq,
            alg=args.alg,
        )
        if regime != args.regime:
            raise ConfigError(
                f"regime {args.regime!r} is inconsistent with the schedule flags (built {regime!r})"
            )
        report = theory.build_report(constants, table, regime, regime_params)
    except (ConfigError, schedules.ScheduleError, ValueError) as exc:
        print(f"flag error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(report.to_json())
    return EXIT_OK


def cmd_schedule(args) -> int:
    try:
        spec = _schedule_spec_from_flags(args)
        n_default = args.dataset_size if args.dataset_size is not None else (args.batch or 1)
        table, _, _, _ = spec.build(n_default)
    except (ConfigError, schedules.ScheduleError, ValueError) as exc:
        print(f"flag error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(schedules.table_to_csv(table))
    return EXIT_OK


def cmd_audit(args) -> int:
    try:
        config = load_config(args.config)
        config = _apply_overrides(config, args)
        if config.alg != "nshb":
            raise ConfigError("the Lyapunov descent audit needs alg = nshb")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = harness.lyapunov_descent_audit(config, threads=args.threads)
    except (schedules.MomentumTooLarge, schedules.InadmissibleSchedule) as exc:
        print(f"admissibility: FAIL ({exc})", file=sys.stderr)
        return EXIT_ADMISSIBILITY
    except harness.ExperimentDivergence as exc:
        print(f"divergence: FAIL ({exc})", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ValueError, schedules.ScheduleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = _out_root(args.out) / config.config_hash
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "audit.csv").write_text(report.to_csv())
    n_bad = int(np.sum(~report.ok))
    print(
        f"lyapunov_descent: {'PASS' if report.all_ok else 'FAIL'} "
        f"({report.t.shape[0] - n_bad}/{report.t.shape[0]} audited steps within 3 standard errors)"
    )
    print(f"artifacts: {out_dir / 'audit.csv'}")
    return EXIT_OK if report.all_ok else EXIT_BOUND_FAIL


def cmd_ratefit(args) -> int:
    try:
        xs, ys = [], []
        for path in args.reports:
            with open(path) as fh:
                doc = json.load(fh)
            emp = doc["empirical"]
            if args.x == "T":
                xs.append(doc["totals"]["T"])
            elif args.x == "M":
                if doc["totals"]["M"] is None:
                    raise ConfigError(f"{path} has no phase count M")
                xs.append(doc["totals"]["M"])
            else:
                xs.append(doc["totals"]["samples"])
            ys.append(emp["min_mean_grad_norm"])
        fit = harness.rate_fit(xs, ys, mode=args.mode)
    except (ConfigError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"ratefit error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = {
        "mode": fit.mode,
        "x": args.x,
        "n_points": fit.n_points,
        "slope": fit.slope,
        "stderr": fit.stderr,
        "ci95": [fit.ci_low, fit.ci_high],
    }
    if fit.mode == "per-phase":
        out["decay_factor"] = fit.decay_factor
    sys.stdout.write(dumps17(out))
    return EXIT_OK


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output root (default $SGDM_SCHED_OUT or ./runs)")
    p.add_argument("--seeds", type=int, default=None, help="override: use seeds 0..k-1")
    p.add_argument("--threads", type=int, default=1, help="concurrent seed runs")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--strict", action="store_true", help="require admissibility (default)")
    g.add_argument(
        "--waive-admissibility",
        action="store_true",
        help="run even when the schedule fails the admissible-LR check",
    )


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--kind",
        default="constant",
        choices=sorted(schedules.ALL_KINDS),
        help="learning-rate shape",
    )
    p.add_argument("--lr", type=float, default=None, help="alias for --lr-max")
    p.add_argument("--lr-max", type=float, default=None)
    p.add_argument("--lr-min", type=float, default=0.0)
    p.add_argument("--p", type=float, default=1.0, help="polynomial power")
    p.add_argument("--gamma", type=float, default=None, help="per-phase LR growth factor")
    p.add_argument("--lr0", type=float, default=None, help="initial LR for growth kinds")
    p.add_argument("--warmup-phases", type=int, default=None, help="last growing phase index")
    p.add_argument("--batch", type=int, default=None, help="constant batch size")
    p.add_argument("--T", type=int, default=None, help="total steps (constant-batch regimes)")
    p.add_argument("--dataset-size", type=int, default=None, help="n for epoch bookkeeping")
    p.add_argument("--b0", type=int, default=None, help="initial batch size of a phase plan")
    p.add_argument("--delta", type=float, default=None, help="per-phase batch growth factor")
    p.add_argument(
        "--epochs-per-phase",
        default=None,
        help="comma-separated epochs per phase, e.g. 2,2,2",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgdm-sched",
        description="Momentum-SGD scheduling laboratory: runs, bounds, schedules, audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config-driven experiment and check its bounds")
    p_run.add_argument("config", help="experiment config file (INI)")
    _add_common_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_bounds = sub.add_parser("bounds", help="print the theory report JSON for parameters")
    p_bounds.add_argument("--regime", required=True, help="e.g. cor3.1-constant, cor3.3")
    p_bounds.add_argument("--alg", required=True, choices=optim.ALGS)
    p_bounds.add_argument("--beta", type=float, required=True)
    p_bounds.add_argument("--L", type=float, required=True)
    p_bounds.add_argument("--sigma-sq", type=float, required=True)
    p_bounds.add_argument("--f0-gap", type=float, required=True)
    _add_schedule_flags(p_bounds)
    p_bounds.set_defaults(func=cmd_bounds)

    p_sched = sub.add_parser("schedule", help="print a schedule table as CSV (t,lr,batch)")
    _add_schedule_flags(p_sched)
    p_sched.set_defaults(func=cmd_schedule)

    p_audit = sub.add_parser("audit", help="per-step Lyapunov descent audit (nshb)")
    p_audit.add_argument("config", help="experiment config file (INI)")
    _add_common_run_flags(p_audit)
    p_audit.set_defaults(func=cmd_audit)

    p_fit = sub.add_parser("ratefit", help="fit a decay rate over report.json budget points")
    p_fit.add_argument("reports", nargs="+", help="report.json files (>= 4)")
    p_fit.add_argument("--mode", choices=("loglog", "per-phase"), default="loglog")
    p_fit.add_argument("--x", choices=("T", "M", "samples"), default="T")
    p_fit.set_defaults(func=cmd_ratefit)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
