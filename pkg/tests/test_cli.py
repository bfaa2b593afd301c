import pytest
import yaml

from oisac.cli import build_parser, load_config, main
from oisac.geometry import ConfigError


def test_parser_lists_experiments():
    parser = build_parser()
    args = parser.parse_args(["lens", "--seed", "7", "--out", "x"])
    assert args.experiment == "lens"
    assert args.seed == 7
    with pytest.raises(SystemExit):
        parser.parse_args(["unknown-subcommand"])


def test_load_config(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("steps: 5\n")
    assert load_config(str(path)) == {"steps": 5}
    assert load_config(None) == {}
    empty = tmp_path / "empty.yaml"
    empty.write_text("")
    assert load_config(str(empty)) == {}
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.yaml"))


def test_cli_success(tmp_path):
    cfg = tmp_path / "lens.yaml"
    cfg.write_text(yaml.safe_dump({"steps": 5, "phi_max": 0.2}))
    out = tmp_path / "out"
    code = main(["lens", "--config", str(cfg), "--seed", "0", "--out", str(out)])
    assert code == 0
    assert (out / "lens_sweep.csv").exists()


def test_cli_config_error(tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(yaml.safe_dump({"not_a_key": 1}))
    code = main(["lens", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2


def test_cli_numeric_error(tmp_path):
    # a single O-AP cannot localize: the rank error maps to exit code 3
    cfg = tmp_path / "mse.yaml"
    cfg.write_text(
        yaml.safe_dump(
            {
                "trials": 100,
                "sigma_i2_list": [1e-12],
                "scenario": {
                    "num_oaps": 1,
                    "layout_angles_deg": [45.0],
                    "tx_intensity": 1800.0,
                },
            }
        )
    )
    code = main(["mse", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 3
