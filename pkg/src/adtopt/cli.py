"""Command-line front end.  All tables are written as CSV.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import contextlib
import csv
import sys
import warnings

import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .criterion import build_criterion, efficiency
from .design import Design
from .failure_time import marginal_cdfs, marginal_quantiles, quantile, system_cdf
from .mc_validate import SimConfig, empirical_avar_check
from .optimizer import multiplicative_optimize, optimality_certificate
from .sweep import optimal_design, resolve_design, run_sweep, sweep_values

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class NumericalFailure(RuntimeError):
    pass


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".10g")
    return str(v)


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def write_csv(path, header, rows):
    with _output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(row[h]) if h in row else "" for h in header])


def read_design_csv(path):
    try:
        with open(path, encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        return Design.merged([float(r["x"]) for r in rows], [float(r["weight"]) for r in rows])
    except (OSError, KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: cannot read design table: {exc}") from None


def _optimize(cfg, grid_step=None):
    opt = cfg.optimizer
    step = grid_step or opt.grid_step
    if opt.method == "two-point":
        return optimal_design(cfg.scenario, "two-point", weight_step=opt.weight_step), True
    res = multiplicative_optimize(cfg.scenario, step, opt.max_iter, opt.tol)
    return res.design, res.converged


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_design(args):
    cfg = load_config(args.config)
    design, converged = _optimize(cfg, args.grid_step)
    if not converged:
        raise NumericalFailure("multiplicative algorithm did not converge within max_iter")
    crit = build_criterion(cfg.scenario)
    cert = optimality_certificate(cfg.scenario, design, args.grid_step or cfg.optimizer.grid_step,
                                  criterion=crit)
    value = crit.value(design)
    header = ["x", "weight", "criterion", "certificate_excess", "certified"]
    counts = None
    if args.n is not None:
        header.append("n_units")
        counts = design.apportion(args.n)
    rows = []
    for i, (x, w) in enumerate(zip(design.points, design.weights)):
        row = {"x": x, "weight": w, "criterion": value,
               "certificate_excess": cert.max_excess, "certified": cert.passed}
        if counts is not None:
            row["n_units"] = int(counts[i])
        rows.append(row)
    write_csv(args.out, header, rows)


def cmd_quantile(args):
    cfg = load_config(args.config)
    sc = cfg.scenario
    alphas = args.alphas if args.alphas else [sc.alpha]
    n_comp = len(marginal_cdfs(sc, 1.0))
    header = ["alpha", "t_alpha", "F_T"] + [f"t_alpha_{i + 1}" for i in range(n_comp)]
    rows = []
    for a in alphas:
        t = quantile(sc, a)
        row = {"alpha": a, "t_alpha": t, "F_T": system_cdf(sc, t)}
        for i, tm in enumerate(marginal_quantiles(sc, a)):
            row[f"t_alpha_{i + 1}"] = tm
        rows.append(row)
    write_csv(args.out, header, rows)
    if args.trace_out:
        ts = sweep_values(args.t_step, args.t_max, args.t_step)
        th = ["t", "F_T"] + [f"F_T{i + 1}" for i in range(n_comp)]
        trace = []
        for t in ts:
            row = {"t": t, "F_T": system_cdf(sc, t)}
            for i, f in enumerate(marginal_cdfs(sc, t)):
                row[f"F_T{i + 1}"] = f
            trace.append(row)
        write_csv(args.trace_out, th, trace)


def cmd_sweep(args):
    cfg = load_config(args.config)
    sw = cfg.sweep
    param = args.param or sw.get("param")
    start = args.start if args.start is not None else sw.get("from")
    stop = args.stop if args.stop is not None else sw.get("to")
    step = args.step if args.step is not None else sw.get("step")
    if param is None or start is None or stop is None or step is None:
        raise ConfigError(f"{cfg.source}: sweep needs param, from, to and step")
    method = args.method or sw.get("method", "two-point")
    opt = cfg.optimizer
    kw = {"grid_step": args.grid_step or opt.grid_step, "tol": opt.tol,
          "max_iter": opt.max_iter, "weight_step": opt.weight_step}
    try:
        values = sweep_values(start, stop, step)
        rows = run_sweep(cfg.scenario, param, values, method, sw.get("compare"),
                         workers=args.workers, **kw)
    except KeyError as exc:
        raise ConfigError(f"{cfg.source}: {exc.args[0]}") from None
    header = list(rows[0]) if rows else [param]
    write_csv(args.out, header, rows)


def cmd_efficiency(args):
    cfg = load_config(args.config)
    if args.design:
        design = read_design_csv(args.design)
    elif cfg.fixed_design is not None:
        design = resolve_design(cfg.fixed_design, None)
    else:
        raise ConfigError(f"{cfg.source}: give --design or a fixed_design entry")
    best, converged = _optimize(cfg, args.grid_step)
    if not converged:
        raise NumericalFailure("multiplicative algorithm did not converge within max_iter")
    crit = build_criterion(cfg.scenario)
    eff = efficiency(cfg.scenario, design, best, criterion=crit)
    write_csv(args.out, ["criterion", "optimal_criterion", "efficiency"],
              [{"criterion": crit.value(design), "optimal_criterion": crit.value(best),
                "efficiency": eff}])


def cmd_validate(args):
    cfg = load_config(args.config)
    sim = cfg.simulation
    n = args.n_units or sim.get("n_units", 200)
    reps = args.replications or sim.get("replications", 1000)
    seed = args.seed if args.seed is not None else sim.get("seed", 0)
    refs = args.designs.split(",") if args.designs else sim.get("designs", ["optimal"])
    best, _ = _optimize(cfg)
    rows = []
    first_var = None
    for ref in refs:
        label = ref if isinstance(ref, str) else "custom"
        design = resolve_design(ref, best)
        if isinstance(design, str):
            raise ConfigError(f"{cfg.source}: unknown design {ref!r}")
        rep = empirical_avar_check(cfg.scenario, SimConfig(n, reps, seed, design), args.workers)
        if first_var is None:
            first_var = rep.empirical_var
        rows.append({
            "design": label, "n_units": rep.n_units, "replications": rep.replications,
            "seed": rep.seed, "mean_estimate": rep.mean_estimate,
            "empirical_var": rep.empirical_var, "predicted_var": rep.predicted_var,
            "ratio": rep.ratio, "empirical_efficiency": first_var / rep.empirical_var,
            "failed_fits": rep.failed_fits,
        })
    header = ["design", "n_units", "replications", "seed", "mean_estimate", "empirical_var",
              "predicted_var", "ratio", "empirical_efficiency", "failed_fits"]
    write_csv(args.out, header, rows)


# ---------------------------------------------------------------------------

def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def build_parser():
    p = argparse.ArgumentParser(prog="adtopt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="PATH", help="CSV output (default: stdout)")
        sp.add_argument("--grid-step", type=float, metavar="F")

    sp = sub.add_parser("design", help="locally c-optimal design")
    common(sp)
    sp.add_argument("--n", type=int, help="apportion the design to N units")
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("quantile", help="failure-time quantiles")
    common(sp)
    sp.add_argument("--alphas", type=_float_list, metavar="LIST")
    sp.add_argument("--trace-out", metavar="PATH", help="also write a CDF trace")
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--t-step", type=float, default=0.05)
    sp.set_defaults(func=cmd_quantile)

    sp = sub.add_parser("sweep", help="one-parameter sensitivity sweep")
    common(sp)
    sp.add_argument("--param", metavar="NAME")
    sp.add_argument("--from", dest="start", type=float, metavar="F")
    sp.add_argument("--to", dest="stop", type=float, metavar="F")
    sp.add_argument("--step", type=float, metavar="F")
    sp.add_argument("--method", choices=["multiplicative", "two-point"])
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("efficiency", help="efficiency of a fixed design")
    common(sp)
    sp.add_argument("--design", metavar="PATH", help="design CSV as written by 'design'")
    sp.set_defaults(func=cmd_efficiency)

    sp = sub.add_parser("validate", help="Monte Carlo check of the asymptotic variance")
    common(sp)
    sp.add_argument("--seed", type=int, metavar="N")
    sp.add_argument("--n-units", type=int)
    sp.add_argument("--replications", type=int)
    sp.add_argument("--designs", metavar="LIST", help="e.g. optimal,uniform2,uniform3")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
