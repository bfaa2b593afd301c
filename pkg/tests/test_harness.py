import csv
import math

import numpy as np
import pytest
from scipy import special

from oisac import harness, modem, sensing
from oisac.channel import lambertian_pattern
from oisac.geometry import ConfigError


def test_snr_bit_calibration_constant():
    ber = 0.5 * special.erfc(math.sqrt(harness.SNR_BIT_AT_TARGET))
    assert math.isclose(ber, harness.BER_TARGET, rel_tol=1e-12)


def test_phase1_scenario_layout():
    sc = harness.phase1_scenario()
    assert sc.num_oaps == 4
    assert math.isclose(sc.layout_radius, 1.9220, rel_tol=1e-3)
    assert math.isclose(sc.layout_angles[0], math.pi / 4)
    assert sc.tx_intensity == harness.PHASE1_TX_INTENSITY
    sc6 = harness.phase1_scenario(mu=6)
    assert sc6.num_oaps == 6
    diffs = np.diff(sc6.layout_angles)
    assert np.allclose(diffs % (2 * math.pi), 2 * math.pi / 6)


def test_comm_noise_variance_hits_target():
    sc = harness.phase1_scenario()
    cfg_gains = harness.scaled_gains(
        sc, lambertian_pattern(sc.semi_angle), (0, 0, 0), modem.OfdmConfig()
    )
    sigma2 = harness.comm_noise_variance()
    gamma = harness.snr_bit(cfg_gains, sigma2, 1)
    assert math.isclose(gamma, harness.SNR_BIT_AT_TARGET, rel_tol=1e-9)


def test_sensing_noise_variance_hits_target():
    sc = harness.phase1_scenario()
    pat = lambertian_pattern(sc.semi_angle)
    sigma_i2 = harness.sensing_noise_variance()
    mse = harness.analytic_mse(sc, pat, np.zeros(3), 1.0, sigma_i2)
    assert math.isclose(mse, harness.MSE_TARGET, rel_tol=1e-9)


def test_analytic_mse_matches_monte_carlo():
    sc = harness.phase1_scenario()
    pat = lambertian_pattern(sc.semi_angle)
    pred = harness.analytic_mse(sc, pat, np.zeros(3), 1.0, 1e-19)
    sim = sensing.run_mse(sc, pat, (0, 0, 0), trials=400, sigma_i2=1e-19, seed=2)[0]
    assert math.isclose(sim, pred, rel_tol=0.15)


def test_write_csv_format(tmp_path):
    path = tmp_path / "t.csv"
    harness.write_csv(path, ("a", "b"), [(1.0 / 3.0, "x"), (2.5e-17, "y")])
    raw = path.read_bytes()
    assert raw == b"a,b\n0.333333333333,x\n2.5e-17,y\n"


def test_unknown_experiment_and_keys(tmp_path):
    with pytest.raises(ConfigError):
        harness.run_experiment("warp", {}, 0, tmp_path)
    with pytest.raises(ConfigError):
        harness.run_experiment("lens", {"bogus_key": 1}, 0, str(tmp_path))
    with pytest.raises(ConfigError):
        harness.run_experiment("lens", [], 0, str(tmp_path))
    with pytest.raises(ConfigError):
        harness.run_experiment("mse", {"scenario": 5}, 0, str(tmp_path))


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_lens_outputs(tmp_path):
    harness.run_experiment("lens", {"steps": 7, "phi_max": 0.3}, 0, str(tmp_path))
    sweep = _read(tmp_path / "lens_sweep.csv")
    assert sweep[0] == ["phi_rad", "aod_exact", "aod_approx"]
    assert len(sweep) == 8
    assert float(sweep[1][1]) == 0.0  # phi = 0 -> AoD 0
    pattern = _read(tmp_path / "pattern.csv")
    assert pattern[0] == ["phi_rad", "r_lambertian", "r_beamformed"]
    assert math.isclose(float(pattern[1][1]), 1 / math.pi, rel_tol=1e-9)


def test_run_layout_small(tmp_path):
    cfg = {"mu_list": [4], "grid_n": 128, "eps_step": 0.25, "xi0_step": 0.2}
    harness.run_experiment("layout", cfg, 0, str(tmp_path))
    rows = _read(tmp_path / "layout_comparison.csv")
    assert rows[0] == ["mu", "config_id", "eps", "xi0", "fraction"]
    ids = {r[1] for r in rows[1:]}
    assert ids == {"oracle", "theorem1"}
    surface = _read(tmp_path / "layout_surface.csv")
    assert surface[0] == ["eps", "xi0", "fraction"]
    assert len(surface) > 10


def test_run_mse_experiment_deterministic(tmp_path):
    cfg = {"trials": 100, "sigma_i2_list": [1e-19]}
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    harness.run_experiment("mse", cfg, 42, str(out_a))
    harness.run_experiment("mse", cfg, 42, str(out_b))
    for name in ("mse_directionless.csv", "mse_directional.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    rows = _read(out_a / "mse_directionless.csv")
    assert rows[0] == ["x", "y", "z", "sigma_i", "trials", "mse"]
    assert float(rows[1][5]) > 0


def test_run_ber_experiment_outputs(tmp_path):
    cfg = {"num_bits": 10_000, "ebn0_db": [4.0]}
    harness.run_experiment("ber", cfg, 1, str(tmp_path))
    rows = _read(tmp_path / "ber.csv")
    assert rows[0] == ["ebn0_db", "ber", "num_bits", "num_errors", "config_id"]
    ids = {r[4] for r in rows[1:]}
    assert ids == {"phase1_directionless_bpsk", "phase2_directional_16qam"}


def test_run_coverage_outputs(tmp_path):
    cfg = {"grid_n": 32, "map_grid_n": 4, "mse_trials": 100}
    harness.run_experiment("coverage", cfg, 3, str(tmp_path))
    fractions = _read(tmp_path / "coverage_fractions.csv")
    assert fractions[0] == ["config_id", "metric", "fraction"]
    table = {(r[0], r[1]): float(r[2]) for r in fractions[1:]}
    assert set(table) == {
        (layout, metric)
        for layout in ("threshold", "uniformity")
        for metric in ("intensity", "ber", "mse")
    }
    assert all(0.0 <= v <= 1.0 for v in table.values())
    # the threshold-optimal layout maximizes intensity coverage
    assert table[("threshold", "intensity")] >= table[("uniformity", "intensity")]
    for name in (
        "map_intensity_threshold.csv",
        "map_ber_uniformity.csv",
        "map_mse_threshold.csv",
    ):
        assert (tmp_path / name).exists()


def test_run_intensity_outputs(tmp_path):
    cfg = {"grid_n": 32}
    harness.run_experiment("intensity", cfg, 0, str(tmp_path))
    conc = _read(tmp_path / "concentration.csv")
    table = {r[0]: float(r[1]) for r in conc[1:]}
    assert set(table) == {"phase1", "phase2"}
    assert table["phase2"] > table["phase1"]


def test_bisect_power():
    req = harness._bisect_power_db(lambda p: p >= 3.75, 0.0, 10.0)
    assert abs(req - 3.75) <= 0.02
    with pytest.raises(harness.NotBracketedError):
        harness._bisect_power_db(lambda p: True, 0.0, 10.0)
    with pytest.raises(harness.NotBracketedError):
        harness._bisect_power_db(lambda p: False, 0.0, 10.0)
