"""Command-line interface: fit, path, debias, simulate, select.

Exit codes: 0 on success, 1 on usage or validation errors, 2 on numerical
failures.
"""

import argparse
import math
import os
import sys

from .exceptions import ComputationError, InferenceError, ValidationError
from .inference import debias as run_debias
from .io import (
    fit_result_to_payload,
    make_artifact,
    read_dataset,
    write_artifact,
)
from .selection import DEFAULT_P_CAP, exhaustive_aic
from .simulate import SimConfig, run_simulation
from .solver import FitConfig, fit, solution_path

__all__ = ["cli_dispatch", "main"]

_THREADS_ENV = "BETALASSO_THREADS"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{message}\n{self.format_usage()}")


def _build_parser():
    parser = _Parser(prog="betalasso", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p):
        p.add_argument("data", help="delimited text file with a header row")
        p.add_argument("--response", default="y", help="response column name or index")
        p.add_argument("--delimiter", default=None)
        p.add_argument("--standardize", action="store_true",
                       help="center and scale predictors to unit variance")
        p.add_argument("--drop-missing", action="store_true",
                       help="drop rows with missing cells instead of rejecting")

    def add_fit_flags(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--lambda", dest="lam", type=float, default=None,
                           help="penalty level")
        group.add_argument("--lambda-rule", dest="lambda_rule", type=float, default=None,
                           help="c in lambda = c * sqrt(log(p)/n)")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--max-iter", type=int, default=10_000)
        p.add_argument("--phi-every", type=int, default=5,
                       help="scale update period in accepted steps")
        p.add_argument("--init", choices=("beta", "logistic"), default="logistic")

    p_fit = sub.add_parser("fit", help="penalized fit at one penalty level")
    add_data_flags(p_fit)
    add_fit_flags(p_fit)
    p_fit.add_argument("--out", default=None, help="artifact output file")

    p_path = sub.add_parser("path", help="warm-started fits on a penalty grid")
    add_data_flags(p_path)
    p_path.add_argument("--n-lambda", type=int, default=50)
    p_path.add_argument("--lambda-min", type=float, default=1e-4,
                        help="absolute lower end of the grid")
    p_path.add_argument("--lambda-min-frac", type=float, default=None,
                        help="lower end as a fraction of the data-driven maximum")
    p_path.add_argument("--lambda-max-frac", type=float, default=0.95)
    p_path.add_argument("--tol", type=float, default=1e-8)
    p_path.add_argument("--max-iter", type=int, default=10_000)
    p_path.add_argument("--phi-every", type=int, default=5)
    p_path.add_argument("--init", choices=("beta", "logistic"), default="logistic")
    p_path.add_argument("--out", default=None)

    p_db = sub.add_parser("debias", help="fit then debias with confidence intervals")
    add_data_flags(p_db)
    add_fit_flags(p_db)
    group0 = p_db.add_mutually_exclusive_group()
    group0.add_argument("--lambda0", dest="lambda0", type=float, default=None)
    group0.add_argument("--lambda0-rule", dest="lambda0_rule", type=float, default=0.01,
                        help="c0 in lambda0 = c0 * sqrt(log(p)/n)")
    p_db.add_argument("--alpha", type=float, default=0.05)
    p_db.add_argument("--out", default=None)

    p_sim = sub.add_parser("simulate", help="Monte Carlo study at one configuration")
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--p", type=int, required=True)
    p_sim.add_argument("--s", type=int, required=True)
    p_sim.add_argument("--phi", type=float, default=4.0)
    p_sim.add_argument("--reps", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--ci", action="store_true", help="debias and record coverage")
    p_sim.add_argument("--lambda-rule", dest="lambda_rule", type=float, default=0.2)
    p_sim.add_argument("--lambda0-rule", dest="lambda0_rule", type=float, default=0.01)
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--workers", type=int,
                       default=int(os.environ.get(_THREADS_ENV, "1")))
    p_sim.add_argument("--out", default=None)
    p_sim.add_argument("--table", default=None,
                       help="write a per-replication CSV for plotting")

    p_sel = sub.add_parser("select", help="exhaustive AIC subset search")
    add_data_flags(p_sel)
    p_sel.add_argument("--max-p", type=int, default=DEFAULT_P_CAP,
                       help="refuse enumeration beyond this many features")
    p_sel.add_argument("--tol", type=float, default=1e-9)
    p_sel.add_argument("--out", default=None)
    return parser


def _load(args):
    return read_dataset(
        args.data,
        response_column=_maybe_int(args.response),
        delimiter=args.delimiter,
        standardize=args.standardize,
        drop_missing=args.drop_missing,
    )


def _maybe_int(value):
    try:
        return int(value)
    except (TypeError, ValueError):
        return value


def _resolve_lambda(args, dataset):
    if args.lam is not None:
        return float(args.lam), None
    rule = args.lambda_rule if args.lambda_rule is not None else 0.2
    return rule * math.sqrt(math.log(dataset.p) / dataset.n), rule


def _fit_config(args, lam):
    return FitConfig(
        lam=lam,
        tol=args.tol,
        max_iter=args.max_iter,
        phi_update_every=args.phi_every,
        init_strategy=args.init,
    )


def _standardization_payload(dataset, params):
    if dataset.center is None:
        return None
    beta_orig = params.beta / dataset.scale
    return {
        "center": dataset.center,
        "scale": dataset.scale,
        "beta_original_scale": beta_orig,
        "beta0_original_scale": params.beta0 - float(beta_orig @ dataset.center),
    }


def _cmd_fit(args):
    dataset = _load(args)
    lam, rule = _resolve_lambda(args, dataset)
    result = fit(dataset, _fit_config(args, lam))
    print(
        f"fit: lambda={lam:.6g} active={result.active_set.size} "
        f"iterations={result.iterations} converged={result.converged} "
        f"kkt={result.kkt_residual:.3g} phi={result.params.phi:.6g}"
    )
    payload = fit_result_to_payload(result)
    payload["lambda_rule"] = rule
    payload["feature_names"] = dataset.feature_names
    payload["standardization"] = _standardization_payload(dataset, result.params)
    if args.out:
        write_artifact(make_artifact("fit", payload, config=vars(args)), args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_path(args):
    dataset = _load(args)
    base = FitConfig(lam=0.0, tol=args.tol, max_iter=args.max_iter,
                     phi_update_every=args.phi_every, init_strategy=args.init)
    points = solution_path(
        dataset,
        n_lambda=args.n_lambda,
        lambda_min=args.lambda_min,
        lambda_min_fraction=args.lambda_min_frac,
        lambda_max_fraction=args.lambda_max_frac,
        config=base,
    )
    print(f"path: {len(points)} penalty values, "
          f"lambda in [{points[-1][0]:.6g}, {points[0][0]:.6g}]")
    for lam, res in points[:: max(1, len(points) // 10)]:
        print(f"  lambda={lam:.6g} active={res.active_set.size} kkt={res.kkt_residual:.2g}")
    payload = {
        "lambda_grid": [lam for lam, _ in points],
        "coefficients": [res.params.beta for _, res in points],
        "intercepts": [res.params.beta0 for _, res in points],
        "phis": [res.params.phi for _, res in points],
        "active_sizes": [int(res.active_set.size) for _, res in points],
        "converged": [bool(res.converged) for _, res in points],
        "feature_names": dataset.feature_names,
    }
    if args.out:
        write_artifact(make_artifact("path", payload, config=vars(args)), args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_debias(args):
    dataset = _load(args)
    lam, rule = _resolve_lambda(args, dataset)
    result = fit(dataset, _fit_config(args, lam))
    lam0 = (
        args.lambda0
        if args.lambda0 is not None
        else args.lambda0_rule * math.sqrt(math.log(dataset.p) / dataset.n)
    )
    dres = run_debias(result, dataset, lambda0=lam0, alpha=args.alpha)
    print(
        f"debias: lambda={lam:.6g} lambda0={dres.lambda0:.6g} "
        f"violation={dres.omega_constraint_violation:.3g} alpha={args.alpha}"
    )
    names = ("intercept",) + (dataset.feature_names or tuple(f"x{j}" for j in range(dataset.p)))
    for j, name in enumerate(names):
        lo, hi = dres.intervals[j]
        print(f"  {name}: {dres.debiased[j]: .5f} [{lo: .5f}, {hi: .5f}]")
    payload = {
        "fit": fit_result_to_payload(result),
        "lambda_rule": rule,
        "debiased": dres.debiased,
        "std_errors": dres.std_errors,
        "intervals": dres.intervals,
        "omega_constraint_violation": dres.omega_constraint_violation,
        "lambda0": dres.lambda0,
        "alpha": dres.alpha,
        "feature_names": dataset.feature_names,
    }
    if args.out:
        write_artifact(make_artifact("debias", payload, config=vars(args)), args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_simulate(args):
    config = SimConfig(
        n=args.n, p=args.p, s_star=args.s, phi_star=args.phi,
        reps=args.reps, seed=args.seed, lambda_rule=args.lambda_rule,
        lambda0_rule=args.lambda0_rule, alpha=args.alpha, run_ci=args.ci,
    )
    report = run_simulation(config, n_workers=max(1, args.workers))
    print(f"simulate: n={args.n} p={args.p} s={args.s} reps={args.reps} "
          f"failed={report.n_failed}")
    for name, (mean, se) in sorted(report.aggregates.items()):
        print(f"  {name}: {mean:.4f} (se {se:.4f})")
    payload = {
        "config": {
            "n": config.n, "p": config.p, "s_star": config.s_star,
            "phi_star": config.phi_star, "reps": config.reps, "seed": config.seed,
            "lambda_rule": config.lambda_rule, "lambda0_rule": config.lambda0_rule,
            "alpha": config.alpha, "run_ci": config.run_ci,
            "beta0_star": config.beta0_star, "tol": config.tol,
        },
        "aggregates": {k: {"mean": v[0], "se": v[1]} for k, v in report.aggregates.items()},
        "n_failed": report.n_failed,
        "per_rep": [
            {
                "rep": r.rep, "l1_error": r.l1_error, "tpr": r.tpr, "fpr": r.fpr,
                "coverage": r.coverage, "coverage_support": r.coverage_support,
                "iterations": r.iterations, "failed": r.failed, "error": r.error,
            }
            for r in report.per_rep
        ],
    }
    if args.out:
        write_artifact(make_artifact("sim", payload, config=payload["config"],
                                     seed=args.seed), args.out)
        print(f"wrote {args.out}")
    if args.table:
        with open(args.table, "w", encoding="utf-8") as fh:
            fh.write("rep,l1_error,tpr,fpr,coverage,iterations\n")
            for r in report.per_rep:
                fh.write(f"{r.rep},{r.l1_error!r},{r.tpr!r},{r.fpr!r},"
                         f"{r.coverage!r},{r.iterations}\n")
        print(f"wrote {args.table}")
    return 0


def _cmd_select(args):
    dataset = _load(args)
    best = exhaustive_aic(dataset, p_cap=args.max_p,
                          config=FitConfig(lam=0.0, tol=args.tol))
    names = dataset.feature_names or tuple(f"x{j}" for j in range(dataset.p))
    chosen = [names[j] for j in best.subset]
    print(f"select: AIC={best.aic:.4f} loglik={best.loglik:.4f} subset={chosen}")
    payload = {
        "subset": list(best.subset),
        "subset_names": chosen,
        "aic": best.aic,
        "loglik": best.loglik,
        "params": {"beta0": best.params.beta0, "beta": best.params.beta,
                   "phi": best.params.phi},
    }
    if args.out:
        write_artifact(make_artifact("select", payload, config=vars(args)), args.out)
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "path": _cmd_path,
    "debias": _cmd_debias,
    "simulate": _cmd_simulate,
    "select": _cmd_select,
}


def cli_dispatch(argv) -> int:
    """Parse and run; returns the process exit code instead of raising."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ComputationError, InferenceError) as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help
        return 0 if exc.code in (0, None) else 1


def main():
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
