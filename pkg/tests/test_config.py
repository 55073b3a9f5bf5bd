import json
import logging

import pytest
from pydantic import ValidationError

from wahbakit.config.logging import configure_logging
from wahbakit.config.settings import Settings, get_settings


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    root = logging.getLogger("wahbakit")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(logging.NOTSET)


def test_settings_defaults():
    settings = Settings(_env_file=None)
    assert settings.workers == 1
    assert settings.tol_scale == 1e-13
    assert settings.quest_max_iter == 20
    assert settings.recursive_max_iter == 8
    assert settings.log_level == "WARNING"


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("WAHBA_KIT_WORKERS", "3")
    monkeypatch.setenv("WAHBA_KIT_LOG_LEVEL", "debug")
    monkeypatch.setenv("WORKERS", "7")
    settings = Settings(_env_file=None)
    assert settings.workers == 3
    assert settings.log_level == "DEBUG"


@pytest.mark.parametrize(
    "name, value",
    [
        ("WAHBA_KIT_WORKERS", "0"),
        ("WAHBA_KIT_LOG_LEVEL", "loud"),
        ("WAHBA_KIT_TOL_SCALE", "-1e-13"),
        ("WAHBA_KIT_CHUNK_SIZE", "0"),
    ],
)
def test_settings_reject_invalid_values(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValidationError):
        Settings(_env_file=None)


def test_too_many_workers_warns(monkeypatch, caplog):
    monkeypatch.setattr("wahbakit.config.settings.os.cpu_count", lambda: 2)
    with caplog.at_level(logging.WARNING, logger="wahbakit.config.settings"):
        settings = Settings(workers=16, _env_file=None)
    assert settings.workers == 16
    assert "больше числа CPU" in caplog.text


def test_get_settings_is_cached():
    get_settings.cache_clear()
    assert get_settings() is get_settings()
    get_settings.cache_clear()


def test_json_logs_carry_extra_fields(capsys):
    configure_logging("INFO", json_logs=True)
    logging.getLogger("wahbakit.domain.solvers").info("fallback", extra={"iteration": 3, "dlambda": -0.5})
    line = capsys.readouterr().err.strip().splitlines()[-1]
    event = json.loads(line)
    assert event["event"] == "fallback"
    assert event["level"] == "info"
    assert event["logger"] == "wahbakit.domain.solvers"
    assert event["iteration"] == 3
    assert "timestamp" in event


def test_console_logs_respect_level(capsys):
    configure_logging("WARNING")
    log = logging.getLogger("wahbakit.application.campaign")
    log.info("quiet")
    log.warning("loud")
    captured = capsys.readouterr()
    assert "loud" in captured.err
    assert "quiet" not in captured.err
    assert captured.out == ""


def test_reconfiguring_replaces_handler():
    configure_logging("INFO")
    configure_logging("DEBUG")
    assert len(logging.getLogger("wahbakit").handlers) == 1
    assert logging.getLogger("wahbakit").level == logging.DEBUG
