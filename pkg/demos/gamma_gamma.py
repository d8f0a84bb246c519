"""Two independent gamma-process failure modes in series."""
from adtopt import (bundled_config_path, elfving_weight, gradient_constants, load_config,
                    marginal_quantiles, multiplicative_optimize, quantile)
from adtopt.failure_time import marginal_cdfs, system_cdf

sc = load_config(bundled_config_path("gamma_gamma")).scenario

t = quantile(sc)
print("system median t_0.5 =", round(t, 4))
print("marginal medians     =", [round(m, 4) for m in marginal_quantiles(sc)])

# the series system fails no later than either mode
for s in (2.0, 4.0, 6.0):
    print(f"F_T({s}) = {system_cdf(sc, s):.4f}  marginals {[round(f, 4) for f in marginal_cdfs(sc, s)]}")

gc = gradient_constants(sc)
print("weights of the two c-criteria: c1 = %.4f, c2 = %.4f" % (gc.c1, gc.c2))

w = multiplicative_optimize(sc, 0.01).design.weight_at(0.0)
w1 = elfving_weight(sc.gamma1, sc.schedule, sc.x_u)
w2 = elfving_weight(sc.gamma2, sc.schedule, sc.x_u)
# a compromise: w* lies between the single-mode optima
print(f"w* = {w:.4f}   single-mode optima {w1:.4f}, {w2:.4f}")
