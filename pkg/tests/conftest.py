import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import support  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def store_a():
    return support.fixture_a()


@pytest.fixture
def store_b():
    return support.fixture_b()


@pytest.fixture
def dump_a(tmp_path):
    return support.write_fixture_a(tmp_path / "dump")


@pytest.fixture
def golden():
    return GOLDEN
