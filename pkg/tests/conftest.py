import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=50,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def engine_factory(tmp_path):
    """Engines over a temp data dir with offline providers."""
    from auditnet.engine import Engine, EngineConfig

    def make(subdir="data", **overrides) -> "Engine":
        return Engine(EngineConfig(data_dir=tmp_path / subdir, **overrides))

    return make
