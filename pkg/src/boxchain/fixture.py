"""The bundled 20-node fixture and the boxes it must produce.

The ledger is a reconstruction: node 1 is the genesis, each node is issued by the agent of
the same number, one second apart.
"""
from pathlib import Path
from typing import List, Tuple

import attr

from boxchain.constants import FIXTURE_LEDGER
from boxchain.exceptions import FixtureMismatch
from boxchain.formats import BoxDump, LedgerDump
from boxchain.generic import name_value
from boxchain.poset import redundant_edges
from boxchain.simulation import Replay, replay_ledger
from boxchain.typedefs import Edge, PathOrStr

EXPECTED_BOXES = {1: [2, 3, 4], 2: [5, 6, 7], 3: [8, 9, 10, 11]}
EXPECTED_BOXERS = [4, 7, 11, 14, 18, 20]


def format_box(index: int, members: List[int]) -> str:
    """``B1={2,3,4}``."""
    return "B{}={{{}}}".format(index, ",".join(str(member) for member in sorted(members)))


def format_edges(edges) -> str:
    """``(9,2) (11,4)``."""
    return " ".join("({},{})".format(upper, lower) for upper, lower in sorted(edges))


@attr.s
class FixtureReport:
    """Boxes and boxers of the replayed fixture."""

    replay = attr.ib()  # type: Replay

    @property
    def boxes(self) -> List[Tuple[int, List[int]]]:
        """Closed boxes and their members."""
        return [(box.index, list(box.members)) for box in self.replay.boxes.closed_boxes]

    @property
    def boxers(self) -> List[int]:
        """Boxer of every closed box."""
        return [box.boxer for box in self.replay.boxes.closed_boxes]

    @property
    def redundant(self) -> List[Edge]:
        """Approvals implied by another path."""
        graph = self.replay.ledger.graph
        return sorted(redundant_edges(graph.nodes, graph.edges))

    def lines(self, show_redundant: bool = False) -> List[str]:
        """Printed output."""
        lines = [format_box(index, members) for index, members in self.boxes]
        lines.append(name_value("boxers", " ".join(str(boxer) for boxer in self.boxers)))
        if show_redundant:
            lines.append(name_value("redundant", format_edges(self.redundant)))
        return lines

    def check(self) -> None:
        """Raise ``FixtureMismatch`` unless the first boxes and every boxer are the expected ones."""
        actual = dict(self.boxes)
        for index, members in EXPECTED_BOXES.items():
            if sorted(actual.get(index, [])) != members:
                raise FixtureMismatch(format_box(index, members), format_box(index, actual.get(index, [])))
        if self.boxers != EXPECTED_BOXERS:
            raise FixtureMismatch(
                " ".join(str(boxer) for boxer in EXPECTED_BOXERS), " ".join(str(boxer) for boxer in self.boxers)
            )

    def dump(self, directory: PathOrStr, stem: str = "fixture") -> List[Path]:
        """Write the ledger and box dumps."""
        target = Path(directory)
        target.mkdir(parents=True, exist_ok=True)
        return [
            LedgerDump(data=list(self.replay.ledger)).write(target / "{}.ledger".format(stem)),
            BoxDump.from_boxes(self.replay.boxes.closed_boxes).write(target / "{}.boxes".format(stem)),
        ]


def run_fixture(ledger_path: PathOrStr = FIXTURE_LEDGER, seed: int = 0) -> FixtureReport:
    """Replay a fixture ledger into boxes."""
    records = LedgerDump(path=ledger_path).as_data
    return FixtureReport(replay_ledger(records, seed))
