"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the lines are printed
even under output capture) or as a script: ``python3 tests/test_acceptance.py``.
"""
import dataclasses
import subprocess
import sys
import time
import warnings

import numpy as np
import pytest

from adtopt import (
    SimConfig,
    bundled_config_path,
    build_criterion,
    efficiency,
    empirical_avar_check,
    gradient_constants,
    load_config,
    quantile,
    two_point,
    uniform,
)
from adtopt.failure_time import (
    gamma_quantile_closed_form,
    lmem_cdf_T,
    lmem_location_gradient,
    lmem_variance_gradient,
    marginal_cdfs,
    marginal_quantiles,
    system_cdf,
)
from adtopt.lmem_model import time_profile_var, variance_info
from adtopt.optimizer import (
    elfving_weight,
    multiplicative_optimize,
    optimality_certificate,
    two_point_search,
)
from adtopt.specfun import dq_dshape, reg_gamma_p, reg_gamma_q
from adtopt.sweep import set_param, sweep_values

CONFIGS = {name: bundled_config_path(name) for name in ("univariate", "gamma_gamma", "gamma_lmem")}


def _cfg(name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return load_config(CONFIGS[name])


class Checks:
    """Collects named sub-checks of one criterion."""

    def __init__(self):
        self.items = []

    def near(self, label, value, target, tol):
        self.items.append((f"{label}={value:.6g} (want {target:g}±{tol:g})",
                           abs(value - target) <= tol))

    def rel(self, label, value, target, rtol):
        self.items.append((f"{label}={value:.6g} (want {target:.6g} rel {rtol:g})",
                           abs(value - target) <= rtol * abs(target)))

    def true(self, label, ok):
        self.items.append((label, bool(ok)))

    @property
    def ok(self):
        return all(ok for _, ok in self.items)

    def summary(self):
        return "; ".join(("" if ok else "FAILED ") + lab for lab, ok in self.items)


@pytest.fixture
def report(capsys):
    def emit(number, title, checks):
        line = f"criterion {number:>2} [{'PASS' if checks.ok else 'FAIL'}] {title}: {checks.summary()}"
        with capsys.disabled():
            print("\n" + line)
        assert checks.ok, line
    return emit


def test_criterion_01_univariate_design(report):
    sc = _cfg("univariate").scenario
    c = Checks()
    t0 = time.perf_counter()
    res = multiplicative_optimize(sc, grid_step=0.01)
    elapsed = time.perf_counter() - t0
    w = res.design.weight_at(0.0)
    c.true(f"support={res.design.points}", res.design.points == (0.0, 1.0))
    c.near("w*", w, 0.79, 0.005)
    c.near("|w* - elfving|", abs(w - elfving_weight(sc.gamma1, sc.schedule, sc.x_u)), 0.0, 1e-3)
    c.true(f"runtime={elapsed:.3f}s (<1s)", elapsed < 1.0)
    report(1, "univariate optimal design", c)


def test_criterion_02_univariate_median(report):
    sc = _cfg("univariate").scenario
    c = Checks()
    c.near("t0.5 root", quantile(sc), 5.39, 0.01)
    c.near("t0.5 closed form", gamma_quantile_closed_form(sc.gamma1, sc.x_u, 0.5), 5.39, 0.01)
    report(2, "univariate median", c)


def test_criterion_03_efficiencies(report):
    sc = _cfg("univariate").scenario
    opt = two_point(elfving_weight(sc.gamma1, sc.schedule, sc.x_u))
    c = Checks()
    c.near("eff(uniform2)", efficiency(sc, uniform(2), opt), 0.75, 0.01)
    c.near("eff(uniform3)", efficiency(sc, uniform(3), opt), 0.55, 0.01)
    report(3, "efficiencies", c)


def test_criterion_04_asymptote(report):
    sc = _cfg("univariate").scenario
    c = Checks()
    c.near("w*(x_u=-1e6)", elfving_weight(sc.gamma1, sc.schedule, -1e6), 0.516, 0.002)
    c.near("w*(x_u->0-)", elfving_weight(sc.gamma1, sc.schedule, -1e-12), 1.0, 1e-6)
    report(4, "asymptotes of the optimal weight", c)


def test_criterion_05_gamma_gamma(report):
    sc = _cfg("gamma_gamma").scenario
    c = Checks()
    c.near("w*", multiplicative_optimize(sc, 0.01).design.weight_at(0.0), 0.78, 0.005)
    c.near("t0.5", quantile(sc), 3.93, 0.01)
    report(5, "bivariate gamma-gamma", c)


def test_criterion_06_gamma_lmem(report):
    sc = _cfg("gamma_lmem").scenario
    c = Checks()
    c.near("w*", multiplicative_optimize(sc, 0.01).design.weight_at(0.0), 0.78, 0.005)
    c.near("t0.5", quantile(sc), 4.99, 0.01)
    c.near("LMEM marginal median", marginal_quantiles(sc)[1], 5.32, 0.01)
    report(6, "gamma+LMEM", c)


def test_criterion_07_misspecification(report):
    cfg = _cfg("gamma_lmem")
    sc = cfg.scenario
    crit0 = build_criterion(sc)
    nominal = two_point_search(sc, criterion=crit0)
    c = Checks()

    # crossing of t0.5 = 1 on the configured grid, refined by linear interpolation
    sw = cfg.sweep
    b = sweep_values(sw["from"], sw["to"], sw["step"])
    t = np.array([quantile(set_param(sc, "beta10", v)) for v in b])
    i = int(np.argmax(t < 1.0))
    crossed = i > 0 and np.all(t[i:] < 1.0)
    cross = b[i - 1] + (1.0 - t[i - 1]) * (b[i] - b[i - 1]) / (t[i] - t[i - 1]) if crossed else np.nan
    c.near("beta10 at t0.5=1", cross, 1.92, 0.02)

    def eff_at(v):
        s = set_param(sc, "beta10", v)
        crit = build_criterion(s)
        return efficiency(s, nominal, two_point_search(s, criterion=crit), criterion=crit)
    c.near("eff(beta10=1.92)", eff_at(1.92), 0.9936, 0.002)
    low = min(eff_at(v) for v in sweep_values(0.35, 0.50, 0.01))
    c.true(f"min eff on [0.35,0.50]={low:.6f} (want >=0.999)", low >= 0.999)
    report(7, "misspecification sweep", c)


def _fd(f, x, h):
    return (f(x + h) - f(x - h)) / (2 * h)


def test_criterion_08_gradients(report):
    c = Checks()
    t0 = time.perf_counter()
    for name in CONFIGS:
        sc = _cfg(name).scenario
        gc = gradient_constants(sc)
        ta = gc.t_alpha
        comps = ["gamma1"] + (["gamma2"] if sc.gamma2 is not None else [])
        for which, const in zip(comps, (gc.c1, gc.c2)):
            g = getattr(sc, which)

            def F(b0, which=which, g=g):
                return system_cdf(dataclasses.replace(sc, **{which: dataclasses.replace(g, beta0=b0)}), ta)
            c.rel(f"{name}:{which} c", const, _fd(F, g.beta0, 1e-6), 1e-4)
        if sc.lmem is not None:
            p = sc.lmem
            surv1 = 1.0 - marginal_cdfs(sc, ta)[0]
            loc = lmem_location_gradient(p, sc.x_u, ta)
            for k, field in enumerate(["beta20", "beta21", "beta22", "beta23"]):
                def G(v, field=field):
                    return lmem_cdf_T(dataclasses.replace(p, **{field: v}), sc.x_u, ta)
                c.rel(f"{name}:dF2/d{field}", loc[k], _fd(G, getattr(p, field), 1e-6), 1e-4)

            def S(b20):
                return system_cdf(dataclasses.replace(sc, lmem=dataclasses.replace(p, beta20=b20)), ta)
            c.rel(f"{name}:c2", gc.c2 / np.sqrt(time_profile_var(sc.schedule, p, ta)),
                  _fd(S, p.beta20, 1e-6), 1e-4)

            def V(s0):
                return system_cdf(dataclasses.replace(sc, lmem=dataclasses.replace(p, sigma0_sq=s0)), ta)
            dvar = surv1 * lmem_variance_gradient(p, sc.x_u, ta)
            c.rel(f"{name}:dF/dsigma0^2", dvar[0], _fd(V, p.sigma0_sq, 1e-9), 1e-4)
            cv = np.array([_fd(V, p.sigma0_sq, 1e-9), 0.0])
            c.rel(f"{name}:c_var^2", gc.c_var_sq,
                  cv @ np.linalg.solve(variance_info(p, sc.schedule.k), cv), 1e-4)
    worst = 0.0
    h = 1e-5
    for s in np.linspace(0.2, 20, 12):
        for z in np.linspace(0.1, 20, 12):
            if reg_gamma_q(s, z) < 0.5:
                fd = _fd(lambda a: reg_gamma_q(a, z), s, h)
            else:
                fd = -_fd(lambda a: reg_gamma_p(a, z), s, h)
            if fd != 0.0:
                worst = max(worst, abs(dq_dshape(s, z) - fd) / abs(fd))
    c.true(f"dq_dshape worst rel err={worst:.2e} (want <=1e-4)", worst <= 1e-4)
    elapsed = time.perf_counter() - t0
    c.true(f"runtime={elapsed:.2f}s (<10s)", elapsed < 10.0)
    report(8, "gradient property suite", c)


def test_criterion_09_certificates(report):
    c = Checks()
    for name in CONFIGS:
        sc = _cfg(name).scenario
        cert = optimality_certificate(sc, multiplicative_optimize(sc, 0.01).design, 0.01)
        c.true(f"{name} excess={cert.max_excess:.1e}", cert.passed and cert.max_excess <= 1e-4)
    sc = _cfg("univariate").scenario
    bad = optimality_certificate(sc, uniform(3), 0.01)
    c.true(f"uniform3 rejected (excess={bad.max_excess:.3g})", not bad.passed)
    report(9, "optimality certificates", c)


@pytest.mark.slow
def test_criterion_10_monte_carlo(report):
    cfg = _cfg("univariate")
    sc, sim = cfg.scenario, cfg.simulation
    n, reps, seed = sim["n_units"], sim["replications"], sim["seed"]
    opt = two_point(elfving_weight(sc.gamma1, sc.schedule, sc.x_u))
    c = Checks()
    t0 = time.perf_counter()
    r_opt = empirical_avar_check(sc, SimConfig(n, reps, seed, opt))
    r_u2 = empirical_avar_check(sc, SimConfig(n, reps, seed, uniform(2)))
    elapsed = time.perf_counter() - t0
    c.true(f"n={n}, R={reps}, seed={seed}", n == 200 and reps == 2000)
    c.true(f"variance ratio={r_opt.ratio:.4f} (want in [0.85,1.15])", 0.85 <= r_opt.ratio <= 1.15)
    c.near("empirical eff(uniform2)", r_opt.empirical_var / r_u2.empirical_var, 0.75, 0.05)
    c.true(f"failed fits={r_opt.failed_fits + r_u2.failed_fits}", r_opt.failed_fits + r_u2.failed_fits == 0)
    c.true(f"runtime={elapsed:.1f}s (<300s)", elapsed < 300)
    report(10, "Monte Carlo validation", c)


def _cli_commands(tmp):
    uni, gg, gl = CONFIGS["univariate"], CONFIGS["gamma_gamma"], CONFIGS["gamma_lmem"]
    design_csv = tmp / "design_in.csv"
    subprocess.run([sys.executable, "-m", "adtopt", "design", "--config", uni,
                    "--out", str(design_csv)], check=True)
    return {
        "design": ["design", "--config", gl, "--n", "200"],
        "quantile": ["quantile", "--config", gl, "--alphas", "0.1,0.5,0.9",
                     "--trace-out", "{tmp}/trace.csv"],
        "sweep": ["sweep", "--config", uni, "--workers", "{workers}"],
        "efficiency": ["efficiency", "--config", uni, "--design", str(design_csv)],
        "validate": ["validate", "--config", gg, "--n-units", "60", "--replications", "40",
                     "--seed", "7", "--workers", "{workers}"],
    }


def test_criterion_11_determinism(report, tmp_path):
    c = Checks()
    for cmd, args in _cli_commands(tmp_path).items():
        blobs = []
        for run, workers in enumerate((1, 4)):
            d = tmp_path / f"{cmd}{run}"
            d.mkdir()
            full = [a.format(tmp=d, workers=workers) for a in args] + ["--out", str(d / "out.csv")]
            subprocess.run([sys.executable, "-m", "adtopt"] + full, check=True)
            blobs.append(b"".join(p.read_bytes() for p in sorted(d.iterdir())))
        c.true(f"{cmd} identical", blobs[0] == blobs[1] and len(blobs[0]) > 0)
    report(11, "CLI determinism", c)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
