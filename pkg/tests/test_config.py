import pytest

from orlicz_maxima.config import load_settings

ENV_NAMES = [
    "ORLICZ_MAXIMA_WORKERS",
    "ORLICZ_MAXIMA_OUTPUT_DIR",
    "LOG_LEVEL",
    "ORLICZ_MAXIMA_STABLE_CALIBRATION",
    "ORLICZ_MAXIMA_REL_TOL",
    "ORLICZ_MAXIMA_ABS_TOL",
    "ORLICZ_MAXIMA_SAMPLES",
    "ORLICZ_MAXIMA_REPLICATES",
]


@pytest.fixture
def clean_env(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ENV_NAMES:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


def test_defaults(clean_env) -> None:
    settings = load_settings()
    assert settings.workers == 1
    assert settings.output_dir == "results"
    assert settings.log_level == "INFO"
    assert settings.stable_calibration_size == 10_000_000
    assert settings.default_samples == 100_000
    assert settings.default_replicates == 15
    spec = settings.quadrature_spec()
    assert (spec.rel_tol, spec.abs_tol) == (1e-9, 1e-12)


def test_environment_overrides(clean_env) -> None:
    clean_env.setenv("ORLICZ_MAXIMA_WORKERS", "8")
    clean_env.setenv("ORLICZ_MAXIMA_OUTPUT_DIR", "/tmp/studies")
    clean_env.setenv("ORLICZ_MAXIMA_REL_TOL", "1e-7")
    clean_env.setenv("ORLICZ_MAXIMA_SAMPLES", "5000")
    settings = load_settings()
    assert settings.workers == 8
    assert settings.output_dir == "/tmp/studies"
    assert settings.quadrature_rel_tol == 1e-7
    assert settings.default_samples == 5000


def test_dotenv_file_is_read(clean_env, tmp_path) -> None:
    (tmp_path / ".env").write_text("ORLICZ_MAXIMA_REPLICATES=7\n", encoding="utf-8")
    assert load_settings().default_replicates == 7


@pytest.mark.parametrize(
    "name, value",
    [
        ("ORLICZ_MAXIMA_WORKERS", "many"),
        ("ORLICZ_MAXIMA_WORKERS", "0"),
        ("ORLICZ_MAXIMA_ABS_TOL", "-1"),
        ("ORLICZ_MAXIMA_SAMPLES", "1.5"),
        ("LOG_LEVEL", "chatty"),
    ],
)
def test_malformed_values(clean_env, name: str, value: str) -> None:
    clean_env.setenv(name, value)
    with pytest.raises(ValueError):
        load_settings()


def test_log_level_is_normalized(clean_env) -> None:
    clean_env.setenv("LOG_LEVEL", " debug ")
    assert load_settings().log_level == "DEBUG"
