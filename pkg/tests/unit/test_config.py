import pytest
from pydantic import ValidationError

import config
import validate_env


def test_defaults():
    settings = config.EddSettings(_env_file=None)
    assert settings.exact_cap == 30
    assert settings.node_budget == 2_000_000
    assert settings.workers == 1
    assert settings.log_file == "logs/edd.log"
    assert settings.preset_dir == "data/presets"


def test_environment_overrides(env_settings):
    settings = env_settings(exact_cap=12, log_level="debug", workers=4)
    assert settings.exact_cap == 12
    assert settings.log_level == "DEBUG"
    assert config.settings.workers == 4


@pytest.mark.parametrize("name, value", [("workers", 0), ("exact_cap", -1), ("log_level", "chatty")])
def test_invalid_values_fail_fast(env_settings, name, value):
    with pytest.raises(ValidationError):
        env_settings(**{name: value})


def test_validate_env_report(env_settings, capsys):
    env_settings(workers=2)
    assert validate_env.check_env() == 0
    out = capsys.readouterr().out
    assert "EDD_WORKERS = 2" in out
    assert "sweep presets" in out


def test_validate_env_rejects_bad_settings(env_settings, monkeypatch, capsys):
    env_settings()
    monkeypatch.setenv("EDD_NODE_BUDGET", "0")
    assert validate_env.check_env() == 1
    assert "Invalid settings" in capsys.readouterr().out
