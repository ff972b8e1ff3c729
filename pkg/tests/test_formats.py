"""Text format tests."""
from collections import OrderedDict

import pytest
from testfixtures import compare

from boxchain.constants import ZERO_DIGEST
from boxchain.exceptions import ConfigError
from boxchain.fixture import run_fixture
from boxchain.formats import BoxDump, EdgeList, LedgerDump, ScenarioFormat
from boxchain.ledger import Transaction
from tests.helpers import WorkspaceMock


def test_ledger_dump_lines():
    """Missing parents and nonces are dashes; the digest is not dumped."""
    dump = LedgerDump(
        string="""
        # a genesis and two spends
        tx 1 0 - - 0 0.0 0 -
        tx 2 4 1 - 1 0.25 0 0
        tx 3 4 1 2 0 1.5 1 -
        """
    )
    compare(
        dump.as_data,
        [
            Transaction(1, 0, ZERO_DIGEST, 0, (), 0.0),
            Transaction(2, 4, ZERO_DIGEST, 1, (1,), 0.25, spend_nonce=0),
            Transaction(3, 4, ZERO_DIGEST, 0, (1, 2), 1.5, is_empty=True),
        ],
    )
    compare(dump.as_data[1].spend_key, (4, 0))
    compare(
        dump.reformatted.splitlines(),
        ["tx 1 0 - - 0 0.0 0 -", "tx 2 4 1 - 1 0.25 0 0", "tx 3 4 1 2 0 1.5 1 -"],
    )


def test_ledger_dump_collects_every_bad_line():
    """Each bad line is reported with its number."""
    dump = LedgerDump(string="tx 1 0\ntx 2 4 1 - 1 0.25 0 0\ntx 3 4 1 2 0 1.5 2 -\nbox 1")
    with pytest.raises(ConfigError) as err:
        dump.load()
    compare([line.split(": ")[0] for line in err.value.lines], ["<string>:1", "<string>:3", "<string>:4"])
    assert "Empty flag must be 0 or 1" in err.value.lines[1]


def test_ledger_dump_without_nonces():
    """The spend nonce column may be left out."""
    short = LedgerDump(string="tx 1 1 - - 0 0.0 0\ntx 2 1 1 - 1 1.0 0").as_data
    full = LedgerDump(string="tx 1 1 - - 0 0.0 0 -\ntx 2 1 1 - 1 1.0 0 -").as_data
    compare(short, full)
    compare([tx.spend_nonce for tx in short], [None, None])
    compare(LedgerDump(data=short).reformatted.splitlines(), ["tx 1 1 - - 0 0.0 0 -", "tx 2 1 1 - 1 1.0 0 -"])


def test_box_dump_lines():
    """Boxes are parsed back into plain records."""
    line = "box 2 confirmed 7 3 {} {} members:5,6,7".format("ab" * 32, "cd" * 32)
    dump = BoxDump(string=line)
    compare(
        dump.as_data,
        [
            OrderedDict(
                index=2,
                status="confirmed",
                boxer=7,
                box_genesis=3,
                header_hash="ab" * 32,
                prev_header_hash="cd" * 32,
                members=[5, 6, 7],
            )
        ],
    )
    compare(dump.reformatted, line + "\n")
    with pytest.raises(ConfigError):
        BoxDump(string="box 2 open - - x y 5,6").load()


def test_box_dump_from_fixture_boxes():
    """Live boxes are dumped with their hashes."""
    dump = BoxDump.from_boxes(run_fixture().replay.boxes.closed_boxes)
    compare([record["members"] for record in dump.as_data][:2], [[2, 3, 4], [5, 6, 7]])
    compare(dump.as_data[0]["status"], "confirmed")
    compare(len(dump.as_data[0]["header_hash"]), 64)


def test_edge_list():
    """The ``edge`` keyword is optional and lone tokens are isolated elements."""
    edges = EdgeList(string="edge a b\nb c  # comment\n7\n")
    compare(edges.edges, [("a", "b"), ("b", "c")])
    compare(edges.elements, ["a", "b", "c", 7])
    compare(edges.reformatted, "a b\nb c\n7\n")
    with pytest.raises(ConfigError):
        EdgeList(string="1 2 3").load()


def test_scenario_format():
    """Flat TOML is kept in order."""
    scenario = ScenarioFormat(string='seed = 3\ncapacity = "uniform:4:8"\n')
    compare(scenario.as_data, OrderedDict([("seed", 3), ("capacity", "uniform:4:8")]))
    compare(ScenarioFormat(data={"seed": 3}).reformatted, "seed = 3\n")


def test_formats_need_contents():
    """A format without path, string or data is a programming error."""
    with pytest.raises(RuntimeError):
        LedgerDump()


def test_write_and_read_back(request):
    """A written dump loads back to the same records."""
    project = WorkspaceMock(request)
    records = [Transaction(1, 0, ZERO_DIGEST, 0, (), 0.0), Transaction(2, 1, ZERO_DIGEST, 1, (1,), 0.1 + 0.2)]
    path = LedgerDump(data=records).write(project.path("run.ledger"))
    compare(LedgerDump(path=path).as_data, records)
    compare(LedgerDump(path=path).name, "run.ledger")
