import pytest
from pydantic import ValidationError

from simdjac.core import config
from simdjac.core.models import RunManifest, SVDConfig


@pytest.fixture(autouse=True)
def fresh_settings():
    config.get_settings.cache_clear()
    yield
    config.get_settings.cache_clear()


def test_defaults():
    settings = config.Settings(_env_file=None)
    assert settings.lanes == 8
    assert settings.strategy == "rr"
    assert settings.workers == 1
    assert settings.data_dir == "data"


def test_environment_prefix(monkeypatch):
    monkeypatch.setenv("SIMDJAC_WORKERS", "4")
    monkeypatch.setenv("SIMDJAC_STRATEGY", "me")
    monkeypatch.setenv("SIMDJAC_DEBUG_CHECKS", "true")
    settings = config.get_settings()
    assert settings.workers == 4 and settings.strategy == "me" and settings.debug_checks
    cfg = SVDConfig()
    assert cfg.workers == 4 and cfg.strategy == "me"


def test_validators(monkeypatch):
    monkeypatch.setenv("SIMDJAC_LANES", "6")
    with pytest.raises(ValidationError):
        config.get_settings()
    with pytest.raises(ValidationError):
        config.Settings(_env_file=None, workers=0)
    with pytest.raises(ValidationError):
        SVDConfig(lanes=12, max_sweeps=3, strategy="rr", workers=1)
    with pytest.raises(ValidationError):
        RunManifest(subcommand="svd", lanes=3)
