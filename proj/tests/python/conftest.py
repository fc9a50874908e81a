import os
import pathlib

import pytest

SOURCE_DIR = pathlib.Path(os.environ.get("HEADGLANCE_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))


@pytest.fixture(scope="session")
def source_dir():
    return SOURCE_DIR


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("HEADGLANCE_CLI")
    if not path or not pathlib.Path(path).exists():
        pytest.skip("CLI binary not available (set HEADGLANCE_CLI)")
    return path
