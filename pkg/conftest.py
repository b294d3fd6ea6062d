import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="run mean-value table checks")
    parser.addoption("--run-expensive", action="store_true", default=False, help="run four-ququart table checks")


def pytest_collection_modifyitems(config, items):
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    skip_expensive = pytest.mark.skip(reason="needs --run-expensive")
    for item in items:
        if "expensive" in item.keywords and not config.getoption("--run-expensive"):
            item.add_marker(skip_expensive)
        elif "slow" in item.keywords and not (config.getoption("--run-slow") or config.getoption("--run-expensive")):
            item.add_marker(skip_slow)
