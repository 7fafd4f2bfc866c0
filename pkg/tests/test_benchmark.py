import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy.signal import dlsim

from lpv_lssvm import HyperParams, butterworth_alpha, fit, tune
from lpv_lssvm.benchmark import (AstromLpvSystem, BenchmarkReport, MonteCarloConfig,
                                 RunRecord, emit_report, generate, run_monte_carlo)
from lpv_lssvm.estimator import io_coefficients

BASELINE = json.loads((Path(__file__).parent / "regression_baseline.json").read_text())
GRID = np.linspace(-0.25, 0.25, 101)


def test_frozen_system_at_zero():
    s = AstromLpvSystem()
    assert s.a11(0.0) == pytest.approx(1.75)
    assert s.a21(0.0) == pytest.approx(-0.8)
    assert s.b1(0.0) == 1.0 and s.b2(0.0) == 0.5


def test_piecewise_values():
    s = AstromLpvSystem()
    assert s.b1(0.2) == 1.5 and s.b1(-0.2) == 0.5 and s.b2(-0.2) == 1.0
    assert s.b2(0.2) == 0.0


def test_piecewise_continuity():
    s = AstromLpvSystem()
    for p in (-0.125, 0.125):
        eps = 1e-12
        assert s.b1(p - eps) == pytest.approx(s.b1(p + eps), abs=1e-10)
        assert s.b2(p - eps) == pytest.approx(s.b2(p + eps), abs=1e-10)
    assert 1 + 4 * 0.125 == 1.5 and 0.5 - 4 * (-0.125) == 1.0


def test_sinc_conventions():
    p = 0.1
    x = np.pi**2 * p
    assert AstromLpvSystem().a11(p) == pytest.approx(0.35 * np.sin(np.pi * x) / (np.pi * x) + 1.4)
    assert AstromLpvSystem(sinc="unnormalized").a11(p) == pytest.approx(0.35 * np.sin(x) / x + 1.4)
    with pytest.raises(ValueError):
        AstromLpvSystem(sinc="other")


def test_constant_scheduling_is_lti():
    s = AstromLpvSystem()
    u = np.random.default_rng(3).choice([-1.0, 1.0], 50)
    A = np.array([[1.75, 1.0], [-0.8, 0.0]])
    B = np.array([[1.0], [0.5]])
    _, y_ref, _ = dlsim((A, B, np.array([[1.0, 0.0]]), np.zeros((1, 1)), 1.0), u)
    np.testing.assert_allclose(s.output(u, np.zeros(50)), y_ref.ravel(), rtol=1e-12, atol=1e-12)


def test_generate_noiseless():
    d, y_clean = generate(AstromLpvSystem(), 200, math.inf, 1)
    np.testing.assert_array_equal(d.y, y_clean)
    assert set(np.unique(d.u)) == {-1.0, 1.0}
    assert d.p.min() >= -0.25 and d.p.max() <= 0.25


@pytest.mark.parametrize("snr", [20.0, 10.0])
@pytest.mark.parametrize("seed", range(5))
def test_snr_calibration(snr, seed):
    d, y_clean = generate(AstromLpvSystem(), 800, snr, seed)
    realized = 10 * np.log10(np.var(y_clean) / np.var(d.y - y_clean))
    assert abs(realized - snr) <= 0.5


def test_coefficient_reconstruction_b1_shape():
    system = AstromLpvSystem()
    h = HyperParams()
    errors = []
    for seed in range(5):
        d, _ = generate(system, 800, 20.0, seed)
        omega = tune(d, h).omega_star
        _, b = io_coefficients(fit(d, h, butterworth_alpha(omega, d.Ts, 2)), GRID)
        errors.append(float(np.max(np.abs(b[:, 0] - system.b1(GRID)))))
    assert np.median(errors) <= 0.15
    np.testing.assert_allclose(errors, BASELINE["b1_max_err_seeds_0_4"], rtol=1e-6)


def test_noiseless_filter_does_not_hurt():
    rep = run_monte_carlo(MonteCarloConfig(runs=1, snr_db=math.inf, seed=0))
    base, filt = rep.bfrs("baseline")[0], rep.bfrs("filtered")[0]
    assert filt >= base - 1.0
    assert [base, filt] == pytest.approx(BASELINE["noiseless_seed0_bfr"], rel=1e-6)


def test_determinism_same_seed():
    cfg = MonteCarloConfig(runs=2, N=150, validation_N=150, seed=11)
    a, b = run_monte_carlo(cfg), run_monte_carlo(cfg)
    assert a.records == b.records


def test_parallel_runs_match_serial():
    cfg = MonteCarloConfig(runs=2, N=120, validation_N=120, seed=5)
    serial = run_monte_carlo(cfg)
    parallel = run_monte_carlo(cfg, workers=2)
    assert serial.records == parallel.records


def test_run_failure_recorded(monkeypatch):
    import lpv_lssvm.benchmark as bm

    def broken_tune(*args, **kwargs):
        raise RuntimeError("forced")

    monkeypatch.setattr(bm, "tune", broken_tune)
    rep = run_monte_carlo(MonteCarloConfig(runs=1, N=60, validation_N=60))
    filt = [r for r in rep.records if r.method == "filtered"][0]
    assert filt.failed and filt.bfr == 0.0
    assert len(rep.records) == 2


def test_config_json_round_trip():
    cfg = MonteCarloConfig(runs=3, snr_db=math.inf, hyper=HyperParams(gamma=50.0))
    text = json.dumps(cfg.to_dict())
    back = MonteCarloConfig.from_dict(json.loads(text))
    assert back.runs == 3 and math.isinf(back.snr_db) and back.hyper.gamma == 50.0
    np.testing.assert_array_equal(back.curiosities.omegas, cfg.curiosities.omegas)
    with pytest.raises(ValueError):
        MonteCarloConfig.from_dict({"runz": 3})


def _read_rows(path):
    with open(path, newline="") as fh:
        return [r for r in csv.reader(fh) if r and not r[0].startswith("#")]


def test_emit_empty_report(tmp_path):
    emit_report(BenchmarkReport([]), tmp_path)
    for name, header in [("summary.csv", "method"), ("runs.csv", "run"),
                         ("hist.csv", "bin_left"), ("coeffs.csv", "p")]:
        rows = _read_rows(tmp_path / name)
        assert len(rows) == 1 and rows[0][0] == header


def test_emit_report_row_counts(tmp_path):
    records = [RunRecord(r, m, 80.0 + r + (10 if m == "filtered" else 0),
                         0.4 if m == "filtered" else None, False, (0.1, 0.2, 0.3, 0.4))
               for r in range(20) for m in ("baseline", "filtered")]
    emit_report(BenchmarkReport(records), tmp_path)
    assert len(_read_rows(tmp_path / "runs.csv")) == 41
    summary = _read_rows(tmp_path / "summary.csv")
    assert [r[0] for r in summary[1:]] == ["baseline", "filtered"]
    assert float(summary[1][1]) == pytest.approx(89.5)
    hist = _read_rows(tmp_path / "hist.csv")
    assert sum(int(r[2]) for r in hist[1:]) == 20
    assert sum(int(r[3]) for r in hist[1:]) == 20


def test_emit_coeff_grid(tmp_path):
    rep = run_monte_carlo(MonteCarloConfig(runs=1, N=200, validation_N=200))
    emit_report(rep, tmp_path)
    rows = _read_rows(tmp_path / "coeffs.csv")
    assert len(rows) == 102
    p = [float(r[0]) for r in rows[1:]]
    assert p[0] == -0.25 and p[-1] == 0.25
    assert (tmp_path / "coeffs.csv").read_text().startswith("# run 0; 101-point")
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["sinc_convention"] == "normalized"
