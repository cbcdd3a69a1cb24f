import pytest
from pydantic import ValidationError

from src.settings import Settings


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LCFLAB_FD_STEP", "0.002")
    monkeypatch.setenv("LCFLAB_THREADS", "4")
    settings = Settings()
    assert settings.FD_STEP == 0.002
    assert settings.THREADS == 4
    assert settings.tolerances["fd_step"] == 0.002


def test_tolerances_must_be_positive(monkeypatch):
    monkeypatch.setenv("LCFLAB_CLUSTER_TOL", "0")
    with pytest.raises(ValidationError):
        Settings()
