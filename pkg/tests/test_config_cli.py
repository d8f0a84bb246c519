import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from adtopt import bundled_config_path, load_config, parse_config
from adtopt.cli import main
from adtopt.config import ConfigError, scenario_to_dict

UNI = bundled_config_path("univariate")
GG = bundled_config_path("gamma_gamma")
GL = bundled_config_path("gamma_lmem")


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bundled_configs_load():
    for p in (UNI, GG, GL):
        cfg = load_config(p)
        assert cfg.scenario.x_u == -0.4
    lm = load_config(GL).scenario.lmem
    assert lm.sigma0_sq == pytest.approx(0.0064)
    assert lm.sigma_eps_sq == pytest.approx(0.0081)


def test_scenario_roundtrip():
    for p in (UNI, GG, GL):
        sc = load_config(p).scenario
        again = parse_config(json.dumps(scenario_to_dict(sc))).scenario
        assert again == sc


@pytest.mark.parametrize("text, line, fragment", [
    ('{"family": "gamma", "x_u": -0.4, "times": [1],\n "gamma1": {"beta0": 0, "beta1": 1, "nu": 1, "z0": 1},\n "colour": 3}', 3, "colour"),
    ('{"family": "gamma", "x_u": -0.4, "times": [1],\n "gamma1": {"beta0": 0, "beta1": 1,\n  "nu": -1, "z0": 1}}', 3, "nu"),
    ('{"family": "weibull", "x_u": -0.4}', 1, "family"),
    ('{"family": "gamma",\n "x_u": -0.4,,}', 2, "invalid JSON"),
])
def test_config_errors_are_line_anchored(text, line, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, "cfg.json")
    msg = str(exc.value)
    assert msg.startswith(f"cfg.json:{line}:")
    assert fragment in msg


def test_scenario_invariants_rechecked():
    text = json.dumps({"family": "gamma+gamma", "x_u": -0.4, "times": [1.0],
                       "gamma1": {"beta0": 0, "beta1": 1, "nu": 1, "z0": 1}})
    with pytest.raises(ConfigError):
        parse_config(text)


@pytest.mark.parametrize("path, w", [(UNI, 0.79), (GG, 0.78), (GL, 0.78)],
                         ids=["univariate", "gamma_gamma", "gamma_lmem"])
def test_design_command(capsys, path, w):
    code, out, _ = run(["design", "--config", path, "--n", "200"], capsys)
    assert code == 0
    r = rows(out)
    assert [float(x["x"]) for x in r] == [0.0, 1.0]
    assert float(r[0]["weight"]) == pytest.approx(w, abs=0.005)
    assert float(r[1]["weight"]) == pytest.approx(1 - w, abs=0.005)
    assert all(x["certified"] == "true" for x in r)
    assert sum(int(x["n_units"]) for x in r) == 200


def test_csv_format(capsys, tmp_path):
    out = tmp_path / "d.csv"
    assert main(["design", "--config", UNI, "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    first = raw.decode().splitlines()[1].split(",")
    assert first[1] == format(float(first[1]), ".10g")


def test_config_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"family": "gamma",\n "x_u": "low"}')
    code, _, err = run(["design", "--config", str(bad)], capsys)
    assert code == 2
    assert f"{bad}:2:" in err
    code, _, err = run(["quantile", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 2


def test_numerical_failure_exit_code(capsys, tmp_path):
    cfg = json.loads(open(UNI).read())
    cfg["optimizer"]["max_iter"] = 3
    p = tmp_path / "short.json"
    p.write_text(json.dumps(cfg))
    code, _, err = run(["design", "--config", str(p)], capsys)
    assert code == 3
    assert "converge" in err


def test_unknown_sweep_parameter(capsys):
    code, _, err = run(["sweep", "--config", UNI, "--param", "beta99", "--from", "0",
                        "--to", "1", "--step", "0.5"], capsys)
    assert code == 2
    assert "beta99" in err


def test_quantile_command(capsys):
    code, out, _ = run(["quantile", "--config", UNI, "--alphas", "0.5"], capsys)
    assert code == 0
    assert float(rows(out)[0]["t_alpha"]) == pytest.approx(5.39, abs=0.01)


def test_quantile_gamma_lmem(capsys):
    code, out, _ = run(["quantile", "--config", GL, "--alphas", "0.5"], capsys)
    r = rows(out)[0]
    assert float(r["t_alpha_1"]) == pytest.approx(5.39, abs=0.01)
    assert float(r["t_alpha_2"]) == pytest.approx(5.32, abs=0.01)
    assert float(r["t_alpha"]) == pytest.approx(4.99, abs=0.01)


def test_quantile_symmetric_series_below_marginal(capsys, tmp_path):
    cfg = json.loads(open(UNI).read())
    cfg["family"] = "gamma+gamma"
    cfg["gamma2"] = cfg["gamma1"]
    p = tmp_path / "sym.json"
    p.write_text(json.dumps(cfg))
    code, out, _ = run(["quantile", "--config", str(p)], capsys)
    r = rows(out)[0]
    assert float(r["t_alpha"]) < float(r["t_alpha_1"]) == float(r["t_alpha_2"])


def test_quantile_trace(capsys, tmp_path):
    trace = tmp_path / "trace.csv"
    code, _, _ = run(["quantile", "--config", GL, "--trace-out", str(trace),
                      "--t-max", "10", "--t-step", "0.5"], capsys)
    assert code == 0
    r = rows(trace.read_text())
    assert len(r) == 20
    F = np.array([float(x["F_T"]) for x in r])
    assert np.all(np.diff(F) >= 0)
    for x in r:
        assert float(x["F_T"]) >= max(float(x["F_T1"]), float(x["F_T2"])) - 1e-12


def test_sweep_x_u_monotone(capsys):
    code, out, _ = run(["sweep", "--config", UNI], capsys)
    r = rows(out)
    xu = np.array([float(x["x_u"]) for x in r])
    w = np.array([float(x["w_star"]) for x in r])
    assert xu[0] == pytest.approx(-3.0) and xu[-1] == pytest.approx(-0.05)
    # w* falls as x_u moves away from the test region
    assert np.all(np.diff(w) > 0)
    assert {"eff_uniform2", "eff_uniform3", "t_alpha", "criterion"} <= set(r[0])


@pytest.fixture(scope="module")
def beta10_sweep():
    buf = io.StringIO()
    old, sys.stdout = sys.stdout, buf
    try:
        assert main(["sweep", "--config", GL, "--workers", "4"]) == 0
    finally:
        sys.stdout = old
    return rows(buf.getvalue())


def test_sweep_beta10_crossing(beta10_sweep):
    b = np.array([float(x["beta10"]) for x in beta10_sweep])
    t = np.array([float(x["t_alpha"]) for x in beta10_sweep])
    i = int(np.argmax(t < 1.0))
    assert i > 0 and np.all(t[i:] < 1.0) and np.all(t[:i] >= 1.0)
    cross = b[i - 1] + (1.0 - t[i - 1]) * (b[i] - b[i - 1]) / (t[i] - t[i - 1])
    assert cross == pytest.approx(1.92, abs=0.02)
    assert {"c1", "c2", "eff_nominal"} <= set(beta10_sweep[0])


def test_sweep_beta10_transition(beta10_sweep):
    b = np.array([float(x["beta10"]) for x in beta10_sweep])
    w = np.array([float(x["w_star"]) for x in beta10_sweep])

    def rate(lo, hi):
        i, j = np.argmin(abs(b - lo)), np.argmin(abs(b - hi))
        return abs(w[j] - w[i]) / (hi - lo)
    mid = rate(0.35, 0.50)
    assert mid > 1.5 * rate(0.6, 2.0)
    assert mid > 10 * rate(-1.0, 0.0)


def test_efficiency_roundtrip(capsys, tmp_path):
    for path in (UNI, GG, GL):
        d = tmp_path / "design.csv"
        assert main(["design", "--config", path, "--out", str(d)]) == 0
        code, out, _ = run(["efficiency", "--config", path, "--design", str(d)], capsys)
        assert code == 0
        assert float(rows(out)[0]["efficiency"]) == pytest.approx(1.0, abs=1e-6)


def test_efficiency_of_fixed_design(capsys, tmp_path):
    cfg = json.loads(open(UNI).read())
    cfg["fixed_design"] = {"points": [0, 1], "weights": [0.5, 0.5]}
    p = tmp_path / "fixed.json"
    p.write_text(json.dumps(cfg))
    code, out, _ = run(["efficiency", "--config", str(p)], capsys)
    assert float(rows(out)[0]["efficiency"]) == pytest.approx(0.75, abs=0.01)


def test_validate_small_run_deterministic(tmp_path):
    outs = []
    for k in range(2):
        p = tmp_path / f"v{k}.csv"
        cmd = [sys.executable, "-m", "adtopt", "validate", "--config", GG, "--n-units", "40",
               "--replications", "20", "--seed", "5", "--workers", str(1 + 2 * k), "--out", str(p)]
        subprocess.run(cmd, check=True)
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    r = rows(outs[0].decode())[0]
    assert {"empirical_var", "predicted_var", "ratio", "replications", "seed"} <= set(r)


@pytest.mark.slow
def test_validate_three_point_efficiency(capsys):
    code, out, _ = run(["validate", "--config", UNI, "--seed", "12345", "--n-units", "200",
                        "--replications", "2000", "--designs", "optimal,uniform3"], capsys)
    assert code == 0
    r = rows(out)
    assert 0.85 <= float(r[0]["ratio"]) <= 1.15
    assert float(r[1]["empirical_efficiency"]) == pytest.approx(0.55, abs=0.07)
