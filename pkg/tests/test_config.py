import pytest

from courtspace.config import RunConfig, load_config, parse_k_range
from courtspace.errors import InputError
from courtspace.ingest import AttackDirection


def test_parse_k_range():
    assert parse_k_range("1..12") == tuple(range(1, 13))
    assert parse_k_range("2-4") == (2, 3, 4)
    assert parse_k_range("1:3") == (1, 2, 3)
    assert parse_k_range("8,2,3") == (2, 3, 8)
    with pytest.raises(InputError):
        parse_k_range("0..3")
    with pytest.raises(InputError):
        parse_k_range("a..b")


def test_load_config(tmp_path):
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text(
        """
[input]
sensor_log = data/match.csv

[court]
length_m = 26
attack_direction = 1:toward_positive_x, 2:toward_negative_x

[roster]
tags = 3, 7, 9, 12, 15

[kalman]
skip = true
measurement_noise = 0.04

[phases]
k_range = 1..6
k =
seed = 11
"""
    )
    cfg = load_config(cfg_path)
    assert cfg.sensor_log == str(tmp_path / "data" / "match.csv")
    assert cfg.court.length_m == 26.0 and cfg.court.width_m == 15.0
    assert cfg.court.attack_direction[2] is AttackDirection.TOWARD_NEGATIVE_X
    assert cfg.roster == ("3", "7", "9", "12", "15")
    assert cfg.skip_kalman and cfg.kalman.measurement_noise == 0.04
    assert cfg.k is None and cfg.k_range == (1, 2, 3, 4, 5, 6) and cfg.seed == 11
    # echo round-trips through the loader
    echo = tmp_path / "echo.ini"
    echo.write_text(cfg.to_ini())
    again = load_config(echo)
    assert again.court == cfg.court and again.kalman == cfg.kalman and again.k_range == cfg.k_range


def test_overrides():
    cfg = RunConfig().with_overrides(seed=3, k=None, grid_hz=10.0)
    assert cfg.seed == 3 and cfg.k is None and cfg.grid_hz == 10.0


def test_bad_config(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[court]\nlength_m = -1\n")
    with pytest.raises(InputError):
        load_config(p)
    with pytest.raises(InputError):
        load_config(tmp_path / "missing.ini")
