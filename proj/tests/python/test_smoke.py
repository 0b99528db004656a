import json
import math
import os
from pathlib import Path

import pytest

import imbibe

DATA = Path(os.environ.get("IMBIBE_TEST_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def test_absorption_law_plateau():
    law = imbibe.AbsorptionLaw(0.2, 0.8, 0.3)
    assert law.plateau == pytest.approx(2 * 0.3 * 0.6 / 3)
    assert law.rate(0.5) == pytest.approx(0.3)
    assert law.value(0.1) == 0.0


def test_simulate_mass_increases_and_cfl():
    bound = imbibe.cfl_max_dt(0.285, 0.219, 1.0, 9.807e-4, 0.125)
    assert bound == pytest.approx(4.541, abs=1e-3)
    times, q, row = imbibe.simulate(
        0.285, 0.219, 1.0, 9.807e-4, height=8.0, horizon=60.0, dz=0.125, dt=0.0625, theta_bar=2.33e-5
    )
    assert len(times) == len(q) == 961
    assert len(row) == 65
    assert all(b >= a for a, b in zip(q, q[1:]))
    with pytest.raises(imbibe.CflError):
        imbibe.simulate(0.285, 0.219, 1.0, 9.807e-4, height=8.0, horizon=60.0, dz=0.125, dt=5.0, theta_bar=2.33e-5)


def test_metrics():
    assert imbibe.sre([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert imbibe.dtw([0.0, 1.0, 2.0], [0.0, 1.0, 1.0, 2.0]) == 0.0
    assert imbibe.dtw([0.0], [3.0]) == pytest.approx(3.0)


def test_legendre():
    assert imbibe.legendre_shifted(1, 0.0, 2.0) == pytest.approx(1.0)
    assert imbibe.legendre_shifted(1, 2.0, 2.0) == pytest.approx(-1.0)
    assert imbibe.legendre_shifted(2, 1.0, 2.0) == pytest.approx(-0.5)


def test_fit_monotone_increasing():
    t = [float(i) for i in range(1, 21)]
    v = [math.sqrt(x) for x in t]
    r = imbibe.fit_monotone(t, v, degree=6, lambda_=1e-6, seed=1)
    fitted = r["fitted"]
    assert all(b > a for a, b in zip(fitted, fitted[1:]))
    assert r["model"]["M"] == 6


def test_cmd_simulate_writes_outputs(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"simulate": {"dz": 0.25, "horizon_min": 10}}))
    r = imbibe.cmd_simulate(config=str(cfg), out=str(tmp_path / "out"))
    assert (tmp_path / "out" / "q_curve.csv").is_file()
    assert any(f.endswith("summary.json") for f in r["files"])


def test_cmd_reconstruct_fixture(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"material": "GS", "data": {"manifest": str(DATA / "synthetic_gs" / "manifest.json")}}))
    r = imbibe.cmd_reconstruct(config=str(cfg), out=str(tmp_path / "out"), seed=2)
    assert r["summary"]["strictly_increasing"] is True


def test_error_mapping(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"simulate": {"params": {"n0": 1.5}}}))
    with pytest.raises(imbibe.ConfigError):
        imbibe.cmd_simulate(config=str(cfg), out=str(tmp_path / "out"))
    with pytest.raises(ValueError):
        imbibe.cmd_reconstruct(out=str(tmp_path / "out2"))
