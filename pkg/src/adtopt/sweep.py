"""One-parameter sensitivity sweeps around a nominal scenario."""
import dataclasses
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .criterion import build_criterion, efficiency
from .design import uniform
from .failure_time import Family, gradient_constants
from .optimizer import multiplicative_optimize, two_point_search

# name -> (family restriction or None, component attribute, field)
_PARAMS = {
    "x_u": (None, None, "x_u"),
    "alpha": (None, None, "alpha"),
    "beta0": (None, "gamma1", "beta0"),
    "beta1": (None, "gamma1", "beta1"),
    "beta10": (None, "gamma1", "beta0"),
    "beta11": (None, "gamma1", "beta1"),
    "nu1": (None, "gamma1", "nu"),
    "z10": (None, "gamma1", "z0"),
    "nu2": (Family.GAMMA_GAMMA, "gamma2", "nu"),
    "z20": (Family.GAMMA_GAMMA, "gamma2", "z0"),
    "beta22": (Family.GAMMA_LMEM, "lmem", "beta22"),
    "beta23": (Family.GAMMA_LMEM, "lmem", "beta23"),
    "sigma0": (Family.GAMMA_LMEM, "lmem", "sigma0_sq"),
    "sigma_eps": (Family.GAMMA_LMEM, "lmem", "sigma_eps_sq"),
    "y20": (Family.GAMMA_LMEM, "lmem", "y20"),
}


def _lookup(family, name):
    # beta20/beta21 belong to the second gamma process or to the LMEM
    if name in ("beta20", "beta21"):
        if family is Family.GAMMA_GAMMA:
            return "gamma2", "beta0" if name == "beta20" else "beta1"
        if family is Family.GAMMA_LMEM:
            return "lmem", name
    elif name in _PARAMS:
        fam, comp, fld = _PARAMS[name]
        if fam is None or fam is family:
            return comp, fld
    raise KeyError(f"parameter {name!r} cannot be swept for family {family.value!r}")


def sweepable(family):
    names = [n for n in _PARAMS if _PARAMS[n][0] in (None, family)]
    if family is not Family.GAMMA:
        names += ["beta20", "beta21"]
    return sorted(names)


def set_param(scenario, name, value):
    comp, fld = _lookup(scenario.family, name)
    if fld in ("sigma0_sq", "sigma_eps_sq"):
        value = value * value
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if comp is None:
            return dataclasses.replace(scenario, **{fld: value})
        part = dataclasses.replace(getattr(scenario, comp), **{fld: value})
        return dataclasses.replace(scenario, **{comp: part})


def sweep_values(start, stop, step):
    n = int(round((stop - start) / step))
    if n < 0:
        raise ValueError("sweep range is empty")
    return start + step * np.arange(n + 1)


def optimal_design(scenario, method="two-point", grid_step=0.01, tol=1e-6, max_iter=20_000,
                   weight_step=0.01, criterion=None):
    if method == "two-point":
        return two_point_search(scenario, weight_step, criterion=criterion)
    if method == "multiplicative":
        return multiplicative_optimize(scenario, grid_step, max_iter, tol, criterion=criterion).design
    raise ValueError(f"unknown method {method!r}")


def resolve_design(ref, nominal_optimal):
    if ref == "nominal" or ref == "optimal":
        return nominal_optimal
    if ref == "uniform2":
        return uniform(2)
    if ref == "uniform3":
        return uniform(3)
    return ref


def sweep_row(scenario, param, value, method="two-point", compare=None, **opt):
    """Optimal weight, criterion, quantile, constants and efficiencies at one value."""
    sc = set_param(scenario, param, value)
    gc = gradient_constants(sc)
    crit = build_criterion(sc, constants=gc)
    best = optimal_design(sc, method, criterion=crit, **opt)
    row = {
        param: float(value),
        "w_star": best.weight_at(0.0),
        "criterion": crit.value(best),
        "t_alpha": gc.t_alpha,
    }
    for name, d in (compare or {}).items():
        row[f"eff_{name}"] = efficiency(sc, d, best, criterion=crit)
    if sc.family is not Family.GAMMA:
        row["c1"] = gc.c1
        row["c2"] = gc.c2
    return row


def run_sweep(scenario, param, values, method="two-point", compare=None, workers=1, **opt):
    """Rows for every value, ordered by value regardless of evaluation order."""
    _lookup(scenario.family, param)
    compare = dict(compare or {})
    if any(isinstance(v, str) for v in compare.values()):
        nominal = optimal_design(scenario, method, **opt)
        compare = {k: resolve_design(v, nominal) for k, v in compare.items()}

    def one(v):
        return sweep_row(scenario, param, v, method, compare, **opt)

    values = sorted(float(v) for v in values)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, values))
    return [one(v) for v in values]
