from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"
FIXTURE200 = DATA_DIR / "fixture200"


@pytest.fixture(scope="session")
def fixture200_dir():
    return FIXTURE200
