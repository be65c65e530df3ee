import io
import json
import subprocess
import sys

import numpy as np
import pytest

from lcspec import cli
from lcspec.odecore import GridSolution

POWER04 = {"family": "power_law", "beta": 0.0, "gamma": 4.0, "alpha": 0.0, "x0": 1.0}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "power04.json"
    p.write_text(json.dumps(POWER04))
    return p


def run(args, capsys):
    code = cli.main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify(cfg_path, capsys):
    code, out, _ = run(["classify", "--config", cfg_path], capsys)
    assert code == 0
    assert json.loads(out)["verdict"] == "limit_circle_confirmed"


def test_eigs(cfg_path, capsys):
    code, out, _ = run(["eigs", "--config", cfg_path, "--omega", "1+0i", "--interval", "0,10"], capsys)
    assert code == 0
    rep = json.loads(out)
    lams = [e["lambda"] for e in rep["eigenvalues"]]
    assert len(lams) >= 3 and lams == sorted(lams)
    assert all(e["phase_residual"] <= 1e-8 for e in rep["eigenvalues"])


def test_eigs_multiple_omega(cfg_path, capsys):
    code, out, _ = run(
        ["eigs", "--config", cfg_path, "--omega", "1+0i", "--omega", "0+1i", "--interval", "0,5"], capsys
    )
    assert code == 0
    assert len(json.loads(out)["reports"]) == 2


def test_eigs_from_t(cfg_path, capsys):
    code, out, _ = run(["eigs", "--config", cfg_path, "--t", "inf", "--interval", "0,5"], capsys)
    assert code == 0
    assert abs(complex(*json.loads(out)["omega"].values())) == pytest.approx(1.0)


def test_verify(cfg_path, capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, _, err = run(["verify", "--config", cfg_path, "--out", out_path], capsys)
    assert code == 0
    report = json.loads(out_path.read_text())
    assert [c["tag"] for c in report["checks"]] == list(cli.VERIFY_TAGS)
    assert report["passed"]
    for tag in cli.VERIFY_TAGS:
        assert tag in err


def test_verify_failure_exit_code(cfg_path, capsys, monkeypatch):
    def fake_suite(cfg):
        return [{"tag": "Wro", "passed": False, "value": 1.0, "threshold": 1e-6, "detail": ""}]

    monkeypatch.setattr(cli, "verify_suite", fake_suite)
    code, _, _ = run(["verify", "--config", cfg_path], capsys)
    assert code == cli.EXIT_VERIFY


def test_connect_csv(cfg_path, capsys):
    code, out, _ = run(["connect", "--config", cfg_path, "--z", "0+1i", "--z", "2"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split(",")[0] == "re_z" and len(lines) == 3
    assert float(lines[1].split(",")[-1]) <= 1e-6


def test_resolve_writes_sidecar(cfg_path, capsys, tmp_path):
    out_path = tmp_path / "u.csv"
    code, _, err = run(
        ["resolve", "--config", cfg_path, "--z", "0+1i", "--omega", "-1", "--h-builtin", "gaussian(2,0.5)",
         "--out", out_path], capsys,
    )
    assert code == 0
    side = json.loads((tmp_path / "u.csv.json").read_text())
    assert side["residual"] <= 1e-6
    sol = GridSolution.from_csv(out_path.read_text())
    assert len(sol) > 100
    assert "residual" in err


def test_transform_json(cfg_path, capsys):
    code, out, _ = run(["transform", "--config", cfg_path, "--z", "1+1i", "--format", "json"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["header"][-1] == "im_F" and data["rows"][0][-1] > 0


def test_jost_csv(cfg_path, capsys):
    code, out, _ = run(["jost", "--config", cfg_path, "--z", "1"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "x,re_u,im_u,re_pu,im_pu"


def test_run_config_with_field_block(tmp_path, capsys):
    p = tmp_path / "run.json"
    p.write_text(json.dumps({
        "field": POWER04, "tolerances": {"ode_tol": 1e-10}, "grids": {"z": ["0+1i"], "omega": ["-1"]},
    }))
    code, out, _ = run(["connect", "--config", p], capsys)
    assert code == 0 and len(out.splitlines()) == 2


@pytest.mark.parametrize(
    "content, extra",
    [
        ("{broken", []),
        (json.dumps({"family": "nope"}), []),
        (json.dumps(POWER04), ["--omega", "2+0i"]),
        (json.dumps(POWER04), ["--interval", "5,1"]),
        (json.dumps({"field": POWER04, "X_inf": 0.5}), []),
        (json.dumps({"field": POWER04, "tolerances": {"ode_tol": -1}}), []),
        (json.dumps(POWER04), ["--h-builtin", "triangle(1)"]),
    ],
)
def test_config_errors(tmp_path, capsys, content, extra):
    p = tmp_path / "c.json"
    p.write_text(content)
    cmd = "resolve" if "--h-builtin" in extra else "classify"
    code, _, err = run([cmd, "--config", p] + extra, capsys)
    assert code == cli.EXIT_CONFIG
    assert "configuration error" in err


def test_numerical_failure_exit_code(cfg_path, capsys):
    # an eigenvalue of H_1 makes gamma_omega singular
    code, _, err = run(["transform", "--config", cfg_path, "--z", "0.1382405056262687"], capsys)
    assert code == cli.EXIT_NUMERIC
    assert "numerical failure" in err


def test_large_imaginary_part_is_numerical_failure(cfg_path, capsys):
    code, _, _ = run(["connect", "--config", cfg_path, "--z", "0+20i"], capsys)
    assert code == cli.EXIT_NUMERIC


def test_missing_command_is_usage_error(cfg_path):
    with pytest.raises(SystemExit) as err:
        cli.main(["--config", str(cfg_path)])
    assert err.value.code == 2


@pytest.mark.parametrize(
    "text, value", [("1+0i", 1), ("-2+0.5i", -2 + 0.5j), ("i", 1j), ("-i", -1j), ("0.5-1.5j", 0.5 - 1.5j), ("3", 3)]
)
def test_parse_complex(text, value):
    assert cli.parse_complex(text) == value


def test_write_csv_roundtrip_bit_exact():
    rng = np.random.default_rng(7)
    rows = rng.normal(size=(20, 3)) * 10.0 ** rng.integers(-200, 200, size=(20, 3))
    text = cli.write_csv(["a", "b", "c"], rows)
    back = np.array([[float(v) for v in line.split(",")] for line in text.splitlines()[1:]])
    assert np.array_equal(back, rows)
    assert "\r" not in text


def test_write_csv_to_handle():
    buf = io.StringIO()
    assert cli.write_csv(["x"], [[1.0]], buf) is None
    assert buf.getvalue() == "x\n1.0000000000000000e+00\n"


def test_json_sorted_and_complex():
    text = cli.dump_json({"b": 1j, "a": [np.float64(2.0)]})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text)["b"] == {"re": 0.0, "im": 1.0}


def test_threads_env(monkeypatch):
    monkeypatch.setenv("LCSPEC_THREADS", "3")
    assert cli.workers() == 3
    assert cli.pmap(lambda v: v * 2, [1, 2, 3]) == [2, 4, 6]
    monkeypatch.setenv("LCSPEC_THREADS", "junk")
    assert cli.workers() == 1


def test_deterministic_output(cfg_path, tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"c{k}.csv"
        subprocess.run(
            [sys.executable, "-m", "lcspec.cli", "connect", "--config", str(cfg_path), "--out", str(target)],
            check=True,
        )
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_console_script_entry(cfg_path):
    res = subprocess.run(["lcspec", "classify", "--config", str(cfg_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert "limit_circle_confirmed" in res.stdout
