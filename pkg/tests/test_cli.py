import io
import json

import pytest

from taperconv import cli
from taperconv.config import ConfigError, from_dict, parse_config
from taperconv.dispersion import SyntheticDispersion, export_tabulated


def run(tmp_path, sub, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    out = tmp_path / "out.txt"
    code = cli.main([sub, "--config", str(path), "--out", str(out), *extra])
    return code, out.read_text() if out.exists() else ""


def echoed_config(text):
    line = next(ln for ln in text.splitlines() if ln.startswith("# config: "))
    return json.loads(line[len("# config: "):])


def test_phase_match(tmp_path):
    code, text = run(tmp_path, "phase-match", {"simulation": {"lambda3": 602.0}})
    assert code == 0
    rows = dict(ln.split(",") for ln in text.splitlines() if not ln.startswith("#"))
    m = SyntheticDispersion()
    expected = m.w0 + m.dbeta_dlambda * (602.0 - m.lambda3_center) / (m.kappa_w * 1e3)
    assert float(rows["phase_matched_width_um"]) == pytest.approx(expected, rel=1e-11)


def test_propagate_json(tmp_path):
    code, text = run(tmp_path, "propagate", {"profile": {"type": "uniform"}, "simulation": {"pump_power": 4.0}}, "--format", "json")
    doc = json.loads(text)
    assert code == 0
    assert doc["unitarity_error"] < 1e-9
    assert 0 < doc["eta"] <= 1
    assert len(doc["m21"]) == 2


def test_echoed_config_round_trips(tmp_path):
    cfg = {"profile": {"type": "cosine", "delta_w": 3.0, "period": 250.0}, "simulation": {"length": 750.0}}
    code, text = run(tmp_path, "propagate", cfg)
    assert code == 0
    echo = echoed_config(text)
    assert from_dict(echo) == from_dict(cfg)
    assert from_dict(echo).to_dict() == echo


def test_spectrum_csv(tmp_path):
    cfg = {"spectrum": {"lambda_min": 595.0, "lambda_max": 605.0, "points": 41}}
    code, text = run(tmp_path, "spectrum", cfg)
    data = [ln for ln in text.splitlines() if not ln.startswith("#")]
    assert code == 0
    assert data[0] == "lambda_nm,eta"
    assert len(data) == 42
    assert float(data[1].split(",")[0]) == 595.0


def test_area_law_table(tmp_path):
    cfg = {"sweep": {"parameter": "delta_w", "values": [0.0, 4.0]}, "spectrum": {"points": 201}}
    code, text = run(tmp_path, "area-law", cfg)
    rows = [ln.split(",") for ln in text.splitlines() if not ln.startswith("#")]
    assert code == 0
    assert rows[0][:3] == ["delta_w_nm", "area_numeric_nm", "area_analytic_nm"]
    assert float(rows[1][2]) == pytest.approx(0.1114)
    assert all(abs(float(r[3]) - 1) < 0.05 for r in rows[1:])


def test_sweep_output_independent_of_threads(tmp_path):
    cfg = {"sweep": {"parameter": "pump_power", "values": [2.0, 0.5, 1.0], "observable": "eta_at_center"}}
    _, one = run(tmp_path, "sweep", cfg, "--threads", "1")
    _, many = run(tmp_path, "sweep", cfg, "--threads", "3")
    assert one == many
    data = [ln for ln in one.splitlines() if not ln.startswith("#")]
    assert [r.split(",")[1] for r in data[1:]] == ["0.5", "1", "2"]


def test_sweep_jsonl(tmp_path):
    cfg = {"sweep": {"parameter": "length", "values": [500.0]}}
    code, text = run(tmp_path, "sweep", cfg, "--format", "json")
    lines = [json.loads(ln) for ln in text.splitlines()]
    assert code == 0 and lines[1]["parameter"] == "length_um"


def test_tabulated_config(tmp_path):
    table = export_tabulated(SyntheticDispersion(), tmp_path / "table.csv")
    cfg = {"dispersion": {"type": "tabulated", "path": str(table)}, "profile": {"type": "uniform"}}
    code, text = run(tmp_path, "propagate", cfg)
    assert code == 0
    assert echoed_config(text)["dispersion"]["g_ref"] == pytest.approx(SyntheticDispersion().g_ref, rel=1e-9)


@pytest.mark.parametrize(
    "cfg, where",
    [
        ('{"simulation": {"length": -1}}', "simulation.length"),
        ('{"simulation": {"lenght": 1}}', "simulation.lenght"),
        ('{"extra": {}}', "extra"),
        ('{"profile": {"type": "zigzag"}}', "profile.type"),
        ('{"profile": {"type": "cosine"}}', "profile.period"),
        ('{"sweep": {"values": [1, "a"]}}', "sweep.values[1]"),
        ('{"spectrum": {"points": 3}}', "spectrum.points"),
        ('{"spectrum": {"lambda_min": 600}}', "spectrum"),
        ('{"dispersion": {"lambda3_center": 600.4}}', "dispersion.lambda3_center"),
        ('{"dispersion": {"type": "tabulated"}}', "dispersion.path"),
        ('{"simulation": {"pump_power": true}}', "simulation.pump_power"),
        ("{not json", "invalid JSON"),
        ("[1, 2]", "top level"),
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, cfg, where):
    code, _ = run(tmp_path, "propagate", cfg)
    assert code == 2
    assert where in capsys.readouterr().err


def test_missing_config(capsys):
    assert cli.main(["spectrum"]) == 2
    assert "--config" in capsys.readouterr().err


def test_runtime_error_exit_1(tmp_path, capsys):
    code, _ = run(tmp_path, "propagate", {"profile": {"type": "uniform"}, "simulation": {"length": 1e9}})
    assert code == 1
    assert "RK4 steps" in capsys.readouterr().err


def test_parse_config_from_stream():
    cfg = parse_config(io.StringIO('{"simulation": {"step_count": "auto"}}'))
    assert cfg.simulation.step_count is None
    with pytest.raises(ConfigError):
        parse_config(io.StringIO('{"simulation": {"step_count": 2.5}}'))


@pytest.mark.slow
def test_validate_passes(capsys):
    assert cli.main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 10
