"""Does the asymptotic variance predict what maximum likelihood actually delivers?"""
from adtopt import (SimConfig, bundled_config_path, elfving_weight, empirical_avar_check,
                    load_config, two_point, uniform)

sc = load_config(bundled_config_path("univariate")).scenario
opt = two_point(elfving_weight(sc.gamma1, sc.schedule, sc.x_u))

reports = {}
for name, design in [("optimal", opt), ("uniform2", uniform(2)), ("uniform3", uniform(3))]:
    rep = empirical_avar_check(sc, SimConfig(200, 1000, 2024, design), workers=4)
    reports[name] = rep
    print(f"{name:9s} mean t_0.5 {rep.mean_estimate:.3f}  var {rep.empirical_var:.5f}  "
          f"predicted {rep.predicted_var:.5f}  ratio {rep.ratio:.3f}")

# empirical efficiencies, to set beside 0.75 and 0.55 from the criterion
for name in ("uniform2", "uniform3"):
    print(f"empirical efficiency of {name}: "
          f"{reports['optimal'].empirical_var / reports[name].empirical_var:.3f}")
