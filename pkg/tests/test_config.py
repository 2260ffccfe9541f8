import pytest

from cfp.config import ENV_TOLERANCE, NumericConfig, default_config


def test_defaults():
    cfg = NumericConfig()
    assert (cfg.balance, cfg.spectral, cfg.convergence, cfg.divergence) == (1e-12, 1e-8, 1e-6, 1e9)


def test_env_bare_float(monkeypatch):
    monkeypatch.setenv(ENV_TOLERANCE, "1e-9")
    assert default_config().convergence == 1e-9


def test_env_field_pairs(monkeypatch):
    monkeypatch.setenv(ENV_TOLERANCE, "balance=1e-10, convergence=1e-7")
    cfg = default_config()
    assert cfg.balance == 1e-10 and cfg.convergence == 1e-7 and cfg.spectral == 1e-8


def test_env_unknown_field(monkeypatch):
    monkeypatch.setenv(ENV_TOLERANCE, "speed=3")
    with pytest.raises(ValueError):
        default_config()
