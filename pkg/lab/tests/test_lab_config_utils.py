import logging
from pathlib import Path

from pytest import approx, raises

from errors import ParamsError, SolverError
from lab_config import LabSettings, get_settings
from utils import configure_logging, log_lab_operation


def test_defaults_without_environment():
    settings = get_settings()
    assert settings.quad_tol == approx(1e-10)
    assert settings.log_level == "INFO"
    assert settings.workers == 1


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LAB_QUAD_TOL", "1e-8")
    monkeypatch.setenv("LAB_LOG_LEVEL", "debug")
    monkeypatch.setenv("LAB_WORKERS", "4")
    settings = get_settings()
    assert settings.quad_tol == approx(1e-8)
    assert settings.log_level == "DEBUG"
    assert settings.workers == 4


def test_invalid_environment_names_variable(monkeypatch):
    monkeypatch.setenv("LAB_QUAD_TOL", "abc")
    with raises(ParamsError, match="LAB_QUAD_TOL"):
        get_settings()


def test_settings_reject_unknown_level():
    with raises(ValueError, match="Invalid log level"):
        LabSettings(log_level="loud")


def test_configure_logging_writes_file(tmp_path):
    log_file = tmp_path / "lab.log"
    root = logging.getLogger()
    saved = list(root.handlers), root.level
    try:
        configure_logging("DEBUG", str(log_file))
        logging.getLogger("lab.test").info("📈 sample line")
        for handler in root.handlers:
            handler.flush()
        assert "📈 sample line" in log_file.read_text(encoding="utf-8")
    finally:
        for handler in root.handlers:
            if isinstance(handler, logging.FileHandler):
                handler.close()
        root.handlers[:] = saved[0]
        root.setLevel(saved[1])


@log_lab_operation(logging.INFO)
def _square(x):
    return x * x


@log_lab_operation(logging.INFO)
def _explode(step):
    raise SolverError("matrix is singular", step)


def test_log_lab_operation_logs_success(caplog):
    with caplog.at_level(logging.INFO, logger="utils"):
        assert _square(3) == 9
    messages = [record.getMessage() for record in caplog.records]
    assert any("RUNNING: _square" in m for m in messages)
    assert any("DONE: _square" in m for m in messages)


def test_log_lab_operation_reraises(caplog):
    with caplog.at_level(logging.INFO, logger="utils"):
        with raises(SolverError) as excinfo:
            _explode(7)
    assert excinfo.value.step == 7
    assert "(step 7)" in str(excinfo.value)
    errors = [record.getMessage() for record in caplog.records if record.levelno == logging.ERROR]
    assert any("FAILED: _explode" in m for m in errors)
    assert any("SolverError" in m for m in errors)


def test_manifest_lists_every_module():
    lab_dir = Path(__file__).resolve().parent.parent
    manifest = (lab_dir / "setup.py").read_text()
    modules = sorted(path.stem for path in lab_dir.glob("*.py") if path.stem != "setup")
    assert modules
    for name in modules:
        assert f'"{name}"' in manifest, name
    assert not (lab_dir.parent / "setup.py").exists()
