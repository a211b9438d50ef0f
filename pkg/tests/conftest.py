import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def _clear_precision(monkeypatch):
    monkeypatch.delenv("MODULIDIM_PRECISION", raising=False)
