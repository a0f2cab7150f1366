"""Run configuration and its precedence."""

import argparse

import pytest

from kext.cli import build_parser, resolve_config
from kext.config import ConfigError, RunConfig, from_env, load_config_file
from kext.dynsys import SQRT38


def test_defaults_validate():
    cfg = RunConfig().validate()
    assert cfg.p == SQRT38 and cfg.tol == 1e-10 and cfg.out == "-"


@pytest.mark.parametrize("changes", [
    {"tol": 0.0}, {"tol": float("nan")}, {"p": 1.5}, {"p": 0.0}, {"p_min": 0.6, "p_max": 0.5},
    {"y_end": float("inf")}, {"grid": 1}, {"samples": 1}, {"samples": -3},
    {"denom_cap": 0}, {"n": 15}, {"n": 8}, {"threads": 0},
    {"out": "/nonexistent-dir/x.csv"},
])
def test_invalid_values(changes):
    with pytest.raises(ConfigError):
        RunConfig().updated(changes).validate()


def test_updated_coerces_strings():
    cfg = RunConfig().updated({"P": " 0.5 ", "grid": "7", "out": "x.csv", "y-end": "3"})
    assert (cfg.p, cfg.grid, cfg.out, cfg.y_end) == (0.5, 7, "x.csv", 3.0)
    with pytest.raises(ConfigError):
        RunConfig().updated({"grid": "seven"})
    with pytest.raises(ConfigError):
        RunConfig().updated({"colour": "blue"})


def test_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# a run\np = 0.5  # inline\ntol = 1e-8\n")
    assert load_config_file(path) == {"p": "0.5", "tol": "1e-8"}
    path.write_text("p = 0.5\nunknown = 1\n")
    with pytest.raises(ConfigError):
        RunConfig().updated(load_config_file(path))
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.cfg")


def test_to_text_round_trip(tmp_path):
    cfg = RunConfig(p=0.25, grid=9)
    path = tmp_path / "c.cfg"
    path.write_text(cfg.to_text())
    assert RunConfig().updated(load_config_file(path)) == cfg


def test_from_env_filters_prefix():
    env = {"KEXT_P": "0.4", "KEXT_PURE_PYTHON": "1", "P": "0.9", "KEXT_TOL": "1e-9"}
    assert from_env(env) == {"p": "0.4", "tol": "1e-9"}


def test_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("p = 0.2\ntol = 1e-6\ny_end = 5\n")
    env = {"KEXT_P": "0.3", "KEXT_TOL": "1e-7"}
    parser = build_parser()
    args = parser.parse_args(["integrate", "--config", str(path), "--p", "0.4"])
    cfg = resolve_config(args, env)
    # flags > environment > file > defaults
    assert (cfg.p, cfg.tol, cfg.y_end, cfg.samples) == (0.4, 1e-7, 5.0, 0)


def test_resolve_without_config():
    args = argparse.Namespace(command="verify", config=None, out=None, threads=None, n=64)
    cfg = resolve_config(args, {})
    assert cfg.n == 64 and cfg.threads == 1
