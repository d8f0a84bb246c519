"""Single gamma-process failure mode: optimal stress allocation and what it buys."""
import numpy as np

from adtopt import (bundled_config_path, efficiency, elfving_weight, load_config,
                    multiplicative_optimize, optimality_certificate, quantile, uniform)

sc = load_config(bundled_config_path("univariate")).scenario
g = sc.gamma1

# median failure time at the use condition
print("t_0.5 =", round(quantile(sc), 4))

# grid search over [0, 1] vs the two-point closed form
res = multiplicative_optimize(sc, grid_step=0.01)
print("multiplicative:", res.design, "after", res.iterations, "iterations")
print("closed form w* =", round(elfving_weight(g, sc.schedule, sc.x_u), 6))

cert = optimality_certificate(sc, res.design)
print("certificate passed:", cert.passed, " max excess", cert.max_excess)

# how much worse the naive designs are
for m in (2, 3):
    print(f"efficiency of uniform {m}-point design: {efficiency(sc, uniform(m), res.design):.4f}")

# w* as the use condition moves away from the test region
for xu in [-0.05, -0.4, -1.0, -3.0, -10.0, -1e6]:
    print(f"x_u = {xu:>9}: w* = {elfving_weight(g, sc.schedule, xu):.4f}")

# integer allocation for 50 test units
print("units per level:", dict(zip(res.design.points, res.design.apportion(50).tolist())))
