import sys
from pathlib import Path

import numpy as np
import pytest

try:
    import snowlidar  # noqa: F401
except ImportError:  # running from a checkout without an editable install
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from snowlidar import fixtures


@pytest.fixture(scope="session")
def clear_cloud_100k():
    return fixtures.clear_cloud(100_000)


@pytest.fixture(scope="session")
def template():
    return fixtures.clutter_template()


@pytest.fixture(scope="session")
def snowy_cloud():
    return fixtures.snowy_cloud()


@pytest.fixture(scope="session")
def cloud_files(tmp_path_factory, clear_cloud_100k, snowy_cloud):
    """Fixture clouds written to disk once, for CLI and I/O tests."""
    from snowlidar import write_cloud

    root = tmp_path_factory.mktemp("fixture-clouds")
    clear = root / "clear.bin"
    snowy = root / "snowy.bin"
    write_cloud(clear_cloud_100k, clear)
    write_cloud(snowy_cloud, snowy)
    return {"clear": clear, "snowy": snowy, "root": root}


def assert_rel(actual, expected, tol, label=""):
    actual, expected = float(actual), float(expected)
    err = abs(actual - expected) / max(abs(expected), 1e-300)
    assert err < tol, f"{label}: {actual} vs {expected} (rel err {err:.3e} >= {tol})"


@pytest.fixture(scope="session")
def rel():
    return assert_rel
