import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fuzzctl.kb import load_packaged_kb
from fuzzctl.service import KBRegistry, SessionManager, build_app


@pytest.fixture(scope="session")
def inventory_kb():
    return load_packaged_kb("inventory")


@pytest.fixture(scope="session")
def commute_kb():
    return load_packaged_kb("commute")


@pytest.fixture()
def manager(tmp_path):
    registry = KBRegistry()
    registry.add("inventory", load_packaged_kb("inventory"))
    registry.add("commute", load_packaged_kb("commute"))
    return SessionManager(registry, log_dir=tmp_path / "logs")


@pytest.fixture()
def client(manager):
    from fastapi.testclient import TestClient

    return TestClient(build_app(manager))
