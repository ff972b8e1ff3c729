"""Bundled fixture tests."""
import pytest
from testfixtures import compare

from boxchain.exceptions import FixtureMismatch
from boxchain.fixture import format_box, format_edges, run_fixture
from boxchain.formats import BoxDump, LedgerDump
from tests.helpers import WorkspaceMock

EXPECTED_LINES = [
    "B1={2,3,4}",
    "B2={5,6,7}",
    "B3={8,9,10,11}",
    "B4={12,13,14}",
    "B5={15,16,17,18}",
    "B6={19,20}",
    "boxers=4 7 11 14 18 20",
]


def test_lines():
    """Boxes, boxers and the redundant approvals."""
    report = run_fixture()
    compare(report.lines(), EXPECTED_LINES)
    compare(report.lines(show_redundant=True)[-1], "redundant=(9,2) (11,4) (13,6) (17,10)")


def test_formatting():
    """Members are sorted; edges are printed as pairs."""
    compare(format_box(3, [11, 8, 9]), "B3={8,9,11}")
    compare(format_edges({(11, 4), (9, 2)}), "(9,2) (11,4)")


def test_other_ledgers_do_not_match(request):
    """Only the first box of the short ledger exists."""
    report = run_fixture(WorkspaceMock(request).fixture("short.ledger"))
    compare(report.boxes, [(1, [2, 3, 4])])
    with pytest.raises(FixtureMismatch) as err:
        report.check()
    compare(str(err.value), "Fixture mismatch: expected B2={5,6,7}, got B2={}")


def test_dump(request):
    """The dumps load back with the same transactions and boxes."""
    project = WorkspaceMock(request)
    report = run_fixture()
    ledger_path, boxes_path = report.dump(project.root_dir)
    compare(ledger_path.name, "fixture.ledger")
    compare(LedgerDump(path=ledger_path).as_data, list(report.replay.ledger))
    compare([record["members"] for record in BoxDump(path=boxes_path).as_data], [m for _, m in report.boxes])
