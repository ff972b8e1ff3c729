"""Pytest configuration."""
import os
import shutil
import sys
import tempfile
from pathlib import Path

import pytest

from boxchain.app import BoxchainApp
from boxchain.constants import FIXTURE_EDGES, FIXTURE_LEDGER
from boxchain.formats import EdgeList, LedgerDump
from boxchain.ledger import DagLedger
from boxchain.poset import Poset

# If the env variable is set, use it as the temporary root; this helps local debugging.
BOXCHAIN_TEST_DIR = os.environ.get("BOXCHAIN_TEST_DIR")

# Otherwise, a temporary root will be used.
_ROOT = BOXCHAIN_TEST_DIR or tempfile.mkdtemp()
if sys.platform == "darwin" and not _ROOT.startswith("/private"):
    # On macOS, use /private/<temp dir> as the root instead of /<temp dir>, otherwise paths won't match.
    _ROOT = "/private" + _ROOT

TEMP_PATH = Path(_ROOT).expanduser().absolute()


@pytest.fixture(scope="session", autouse=True)
def delete_project_temp_root():
    """Delete the temporary root before or after running the tests, depending on the env variable."""
    if BOXCHAIN_TEST_DIR:
        # If the environment variable is configured, delete its contents before the tests.
        if TEMP_PATH.exists():
            shutil.rmtree(str(TEMP_PATH))
        TEMP_PATH.mkdir()

    yield

    if not BOXCHAIN_TEST_DIR:
        # If the environment variable is not configured, then a random temp dir will be used;
        # its contents should be deleted after the tests.
        shutil.rmtree(str(TEMP_PATH))


@pytest.fixture()
def app() -> BoxchainApp:
    """A fresh application with the built-in behaviours."""
    return BoxchainApp.create_app()


@pytest.fixture()
def fixture_poset() -> Poset:
    """The 20-node fixture as a poset."""
    edge_list = EdgeList(path=FIXTURE_EDGES)
    return Poset.from_edges(edge_list.edges, edge_list.elements)


@pytest.fixture()
def fixture_ledger() -> DagLedger:
    """The 20-node fixture as a ledger, without boxes."""
    return DagLedger.from_transactions(LedgerDump(path=FIXTURE_LEDGER).as_data)
