import json
import subprocess
import sys

import numpy as np
import pytest

from carnot_ineq import __version__
from carnot_ineq.cli import COMMANDS, main
from carnot_ineq.config import DEFAULTS, resolve_config
from carnot_ineq.errors import ConfigError


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(tmp_path, capsys, command, cfg, *extra, out="out"):
    code = main([command, write_cfg(tmp_path, cfg), "--out", str(tmp_path / out), *extra])
    stdout = json.loads(capsys.readouterr().out)
    return code, stdout


def report(stdout):
    path = next(p for p in stdout["files"] if p.endswith(".json"))
    with open(path) as fh:
        return json.load(fh)


SMALL = ["--samples", "10000"]


def test_validate_group_ok(tmp_path, capsys):
    code, out = run(tmp_path, capsys, "validate-group", {"group": {"preset": "heisenberg"}})
    assert code == 0
    rep = report(out)
    assert rep["status"] == "ok" and rep["result"]["htype"] is True and rep["result"]["Q"] == 4
    assert rep["version"] == __version__ and rep["config"]["group"] == {"preset": "heisenberg"}


@pytest.mark.parametrize(
    "lambdas,reason",
    [
        ([[[0, 1], [1, 0]]], "SkewViolation"),
        ([[[0, 1], [-1, 0]], [[0, 2], [-2, 0]]], "DependentMatrices"),
    ],
)
def test_validate_group_failures(tmp_path, capsys, lambdas, reason):
    code, out = run(tmp_path, capsys, "validate-group", {"group": {"lambdas": lambdas, "a": 1.0}})
    assert code == 2
    assert out["status"] == "error" and out["reason"] == reason
    files = list((tmp_path / "out").glob("validate-group-*.json"))
    assert len(files) == 1 and json.loads(files[0].read_text())["reason"] == reason


def test_config_errors(tmp_path, capsys):
    code, out = run(tmp_path, capsys, "validate-group", {"group": {"preset": "heisenberg"}, "bogus": 1})
    assert code == 2 and out["reason"] == "ConfigError"
    code, out = run(tmp_path, capsys, "poincare", {"sampler": {"count": 10000, "extra": True}})
    assert code == 2 and out["reason"] == "ConfigError"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["nogo", str(bad), "--out", str(tmp_path)]) == 2
    capsys.readouterr()
    assert main(["nogo", str(tmp_path / "missing.json")]) == 2
    capsys.readouterr()
    assert main(["nogo", write_cfg(tmp_path, {}), "--seed", "-1", "--out", str(tmp_path)]) == 2
    capsys.readouterr()
    with pytest.raises(ConfigError):
        resolve_config({"profile": {"kind": "power", "k": 0.5}})


def test_norm_constants(tmp_path, capsys):
    cfg = {"group": {"preset": "heisenberg", "a": 16.0}}
    code, out = run(tmp_path, capsys, "norm-constants", cfg, "--samples", "20000")
    assert code == 0 and out["warnings"] == []
    res = report(out)["result"]
    assert abs(res["a_hat"] - 1) <= 1e-9 and abs(res["c_hat"] - 1) <= 1e-9 and abs(res["b_hat"] - 3) <= 1e-6
    assert res["residual_max"] <= 1e-12 and res["sample_count"] == 20000


def test_bit_identical_reports(tmp_path, capsys):
    cfg = {"group": {"preset": "random", "n": 4, "m": 2, "seed": 1, "nondegenerate": True}}
    _, a = run(tmp_path, capsys, "norm-constants", cfg, "--samples", "5000", "--seed", "3", out="a")
    _, b = run(tmp_path, capsys, "norm-constants", cfg, "--samples", "5000", "--seed", "3", out="b")
    ra, rb = report(a), report(b)
    assert ra == rb and ra["config"]["sampler"]["seed"] == 3
    pa, pb = a["files"][0], b["files"][0]
    assert open(pa, "rb").read() == open(pb, "rb").read()


def test_poincare_power4(tmp_path, capsys):
    cfg = {"profile": {"kind": "power", "k": 4}, "q": 2}
    code, out = run(tmp_path, capsys, "poincare", cfg, *SMALL)
    assert code == 0 and out["warnings"] == []
    res = report(out)["result"]
    cond = res["conditions"]
    assert cond["theorem1_ok"] and cond["eta_unbounded"]
    assert np.isfinite(res["inequality"]["c_fit"]) and res["inequality"]["feasible"]
    assert res["inequality"]["functions"] == 19


def test_ubound_power2_warns(tmp_path, capsys):
    cfg = {"profile": {"kind": "power", "k": 2}, "q": 2, "catalog": {"resamples": 20}}
    code, out = run(tmp_path, capsys, "ubound", cfg, *SMALL)
    assert code == 0
    assert "eta_unbounded=false" in out["warnings"]
    assert report(out)["result"]["conditions"]["eta_unbounded"] is False


def test_logsobolev_alpha_power(tmp_path, capsys):
    cfg = {"profile": {"kind": "alpha_power", "p": 4, "alpha": 1}, "beta": 0.25, "q": 2, "catalog": {"resamples": 20}}
    code, out = run(tmp_path, capsys, "logsobolev", cfg, *SMALL)
    assert code == 0 and out["warnings"] == []
    cond = report(out)["result"]["conditions"]
    assert cond["theorem11_ok"] and cond["t11_g_power_bound"]
    cfg["beta"] = 0.3
    code, out = run(tmp_path, capsys, "logsobolev", cfg, *SMALL)
    assert code == 0 and "t11_g_power_bound=false" in out["warnings"]


def test_csv_format(tmp_path, capsys):
    cfg = {"catalog": {"resamples": 10, "quadratics": 2}}
    code, out = run(tmp_path, capsys, "poincare", cfg, *SMALL, "--format", "csv")
    assert code == 0
    files = out["files"]
    assert len(files) == 2 and files[1].endswith("-rows.csv")
    assert open(files[1]).readline().strip() == "name,lhs,energy,mass"
    rep = report(out)
    assert rep["tables"]["rows"] == {"file_suffix": "-rows.csv", "header": "name,lhs,energy,mass"}
    assert not list((tmp_path / "out").glob(".*.tmp"))


def test_nogo_examples(tmp_path, capsys):
    grid = list(np.geomspace(4, 32, 8))
    cfg = {"nogo": {"p": 2, "alpha": 1, "beta": 1, "q": 1.5, "t_grid": grid, "sample_count": 50000}}
    code, out = run(tmp_path, capsys, "nogo", cfg, "--format", "csv")
    assert code == 0
    res = report(out)["result"]
    assert abs(res["fitted_slope"] - 1.25) <= 0.3 and res["in_failure_regime"] and res["plateau_ok"]
    assert open(out["files"][1]).readline().strip() == "t,mass,entropy,energy,ratio"
    cfg["nogo"].update(p=4, beta=0.25, q=2)
    code, out = run(tmp_path, capsys, "nogo", cfg)
    res = report(out)["result"]
    assert code == 0 and res["fitted_slope"] < 0 and not res["in_failure_regime"]
    for q, flag in ((3.9, True), (4.1, False)):
        c = {"nogo": {"p": 2, "beta": 1, "q": q, "t_grid": [10.0, 100.0], "sample_count": 2000}}
        code, out = run(tmp_path, capsys, "nogo", c)
        assert code == 0 and report(out)["result"]["in_failure_regime"] is flag


def test_nogo_runtime_failure(tmp_path, capsys):
    c = {"nogo": {"t_grid": [4.0, 40.0], "sample_count": 100}}
    code, out = run(tmp_path, capsys, "nogo", c)
    assert code == 3 and out["reason"] == "EmptySupportSample"
    code, out = run(tmp_path, capsys, "nogo", {"nogo": {"t_grid": [1.0, 10.0]}})
    assert code == 2 and out["reason"] == "InvalidParameter"


def test_sampler_failure_exit_code(tmp_path, capsys):
    code, out = run(tmp_path, capsys, "poincare", {"sampler": {"step0": 1e8}}, *SMALL)
    assert code == 3 and out["reason"] == "AdaptationFailed"


def test_overrides_and_defaults():
    cfg = resolve_config({"sampler": {"count": 20000}}, seed=7, samples=30000, command="poincare")
    assert cfg["sampler"] == dict(DEFAULTS["sampler"], count=30000, seed=7)
    cfg = resolve_config({}, samples=3000, command="nogo")
    assert cfg["nogo"]["sample_count"] == 3000 and cfg["sampler"]["count"] == DEFAULTS["sampler"]["count"]
    cfg = resolve_config({}, samples=4000, command="norm-constants")
    assert cfg["norm_constants"]["sample_count"] == 4000


def test_console_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, {"group": {"preset": "heisenberg", "d": 2}})
    out = subprocess.run(
        [sys.executable, "-m", "carnot_ineq.cli", "validate-group", cfg, "--out", str(tmp_path / "o")],
        capture_output=True, text=True,
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["status"] == "ok"
    assert set(COMMANDS) == {"validate-group", "norm-constants", "poincare", "ubound", "logsobolev", "nogo"}
