"""Text formats: scenario files, ledger dumps, box dumps and edge lists."""
import abc
import logging
from collections import OrderedDict
from pathlib import Path
from typing import Any, Iterable, List, Optional, Tuple

import toml

from boxchain.boxes import AntichainBox
from boxchain.constants import ZERO_DIGEST
from boxchain.exceptions import ConfigError
from boxchain.ledger import Transaction
from boxchain.typedefs import Edge, JsonDict, PathOrStr

LOGGER = logging.getLogger(__name__)

EMPTY_FIELD = "-"
COMMENT = "#"


class BaseFormat(metaclass=abc.ABCMeta):
    """Base class for the text formats.

    :param path: Path of the file to be loaded.
    :param string: Contents in string format.
    :param data: Contents in Python format.
    """

    def __init__(self, *, path: PathOrStr = None, string: str = None, data: Any = None) -> None:
        self.path = path
        self._string = string
        self._data = data
        if path is None and string is None and data is None:
            raise RuntimeError("Inform at least one argument: path, string or data")

        self._reformatted = None  # type: Optional[str]
        self._loaded = False

    @abc.abstractmethod
    def load(self):
        """Load the contents from a file, a string or Python data."""

    @property
    def name(self) -> str:
        """Name used in error messages."""
        return Path(self.path).name if self.path is not None else "<string>"

    @property
    def as_string(self) -> str:
        """Contents of the file or the original string provided when the instance was created."""
        if self._string is None:
            self.load()
        return self._string or ""

    @property
    def as_data(self) -> Any:
        """String content converted to Python data."""
        if self._data is None:
            self.load()
        return self._data

    @property
    def reformatted(self) -> str:
        """Python data written back as a string (it might not match the original contents)."""
        if self._reformatted is None:
            self.load()
        return self._reformatted or ""

    def write(self, path: PathOrStr) -> Path:
        """Write the reformatted contents to a file."""
        target = Path(path)
        target.write_text(self.reformatted)
        LOGGER.info("Wrote %s", target)
        return target


class LineFormat(BaseFormat):
    """A format with one record per line; blank lines and ``#`` comments are skipped."""

    def load(self) -> bool:
        """Parse every record, collecting the errors of every bad line."""
        if self._loaded:
            return False
        if self.path is not None:
            self._string = Path(self.path).read_text()
        if self._string is not None:
            records, errors = [], []
            for number, line in enumerate(self._string.splitlines(), start=1):
                clean_line = line.split(COMMENT, 1)[0].strip()
                if not clean_line:
                    continue
                try:
                    records.append(self.parse_line(clean_line.split()))
                except (ValueError, IndexError) as err:
                    errors.append("{}:{}: {}".format(self.name, number, err))
            if errors:
                raise ConfigError(errors)
            self._data = records
        if self._data is not None:
            self._reformatted = "".join(self.format_line(record) + "\n" for record in self._data)
        self._loaded = True
        return True

    @abc.abstractmethod
    def parse_line(self, tokens: List[str]) -> Any:
        """Parse the tokens of one line."""

    @abc.abstractmethod
    def format_line(self, record: Any) -> str:
        """Format one record."""


def _optional_int(token: str) -> Optional[int]:
    return None if token == EMPTY_FIELD else int(token)


def _format_optional(value: Optional[int]) -> str:
    return EMPTY_FIELD if value is None else str(value)


class LedgerDump(LineFormat):
    """Transactions in issue order.

    .. code-block:: text

        tx <id> <issuer> <parent 1|-> <parent 2|-> <fee> <time> <empty 0|1> [<spend nonce|->]

    The spend nonce may be left out; it is always written.
    """

    tag = "tx"

    def parse_line(self, tokens: List[str]) -> Transaction:
        """Parse one transaction; the payload digest is not part of the dump."""
        if tokens[0] != self.tag or len(tokens) not in (8, 9):
            raise ValueError("Expected '{} <id> <issuer> <p1> <p2> <fee> <time> <empty> [<nonce>]'".format(self.tag))
        tx_id, issuer, first, second, fee, time, empty = tokens[1:8]
        nonce = tokens[8] if len(tokens) == 9 else EMPTY_FIELD
        parents = tuple(parent for parent in (_optional_int(first), _optional_int(second)) if parent is not None)
        if empty not in ("0", "1"):
            raise ValueError("Empty flag must be 0 or 1, got {!r}".format(empty))
        return Transaction(
            int(tx_id),
            int(issuer),
            ZERO_DIGEST,
            int(fee),
            parents,
            float(time),
            is_empty=empty == "1",
            spend_nonce=_optional_int(nonce),
        )

    def format_line(self, record: Transaction) -> str:
        """Times are written with ``repr`` so they read back exactly."""
        parents = list(record.parents) + [None] * (2 - len(record.parents))
        return " ".join(
            [
                self.tag,
                str(record.id),
                str(record.issuer),
                _format_optional(parents[0]),
                _format_optional(parents[1]),
                str(record.fee),
                repr(float(record.issue_time)),
                "1" if record.is_empty else "0",
                _format_optional(record.spend_nonce),
            ]
        )


class BoxDump(LineFormat):
    """Boxes of a chain, genesis box excluded.

    .. code-block:: text

        box <index> <status> <boxer|-> <box-genesis|-> <header hash> <previous header hash> members:<id,id,...>
    """

    tag = "box"
    members_prefix = "members:"

    @classmethod
    def from_boxes(cls, boxes: Iterable[AntichainBox]) -> "BoxDump":
        """Dump from live boxes."""
        return cls(
            data=[
                OrderedDict(
                    index=box.index,
                    status=box.status.value,
                    boxer=box.boxer,
                    box_genesis=box.box_genesis,
                    header_hash=box.header_hash.hex(),
                    prev_header_hash=box.prev_header_hash.hex(),
                    members=list(box.members),
                )
                for box in boxes
            ]
        )

    def parse_line(self, tokens: List[str]) -> JsonDict:
        """Parse one box."""
        if tokens[0] != self.tag or len(tokens) != 8 or not tokens[7].startswith(self.members_prefix):
            raise ValueError(
                "Expected '{} <index> <status> <boxer> <genesis> <hash> <prev> members:<ids>'".format(self.tag)
            )
        members = tokens[7][len(self.members_prefix) :]
        return OrderedDict(
            index=int(tokens[1]),
            status=tokens[2],
            boxer=_optional_int(tokens[3]),
            box_genesis=_optional_int(tokens[4]),
            header_hash=tokens[5],
            prev_header_hash=tokens[6],
            members=[int(member) for member in members.split(",") if member],
        )

    def format_line(self, record: JsonDict) -> str:
        """Format one box."""
        return " ".join(
            [
                self.tag,
                str(record["index"]),
                record["status"],
                _format_optional(record["boxer"]),
                _format_optional(record["box_genesis"]),
                record["header_hash"],
                record["prev_header_hash"],
                self.members_prefix + ",".join(str(member) for member in record["members"]),
            ]
        )


def _element(token: str):
    return int(token) if token.lstrip("-").isdigit() else token


class EdgeList(LineFormat):
    """Cover relations of a graph, one ``<upper> <lower>`` pair per line.

    An optional leading ``edge`` keyword is accepted; a single token declares an isolated element.
    """

    tag = "edge"

    def parse_line(self, tokens: List[str]) -> Tuple:
        """Parse an edge, or a lone element as a 1-tuple."""
        if tokens[0] == self.tag:
            tokens = tokens[1:]
        if len(tokens) not in (1, 2):
            raise ValueError("Expected '<upper> <lower>', got {!r}".format(" ".join(tokens)))
        return tuple(_element(token) for token in tokens)

    def format_line(self, record: Tuple) -> str:
        """Format an edge or a lone element."""
        return " ".join(str(element) for element in record)

    @property
    def edges(self) -> List[Edge]:
        """Pairs only."""
        return [record for record in self.as_data if len(record) == 2]

    @property
    def elements(self) -> List:
        """Every element mentioned, in order of appearance."""
        return list(OrderedDict.fromkeys(element for record in self.as_data for element in record))


class ScenarioFormat(BaseFormat):
    """Flat TOML scenario files."""

    def load(self) -> bool:
        """Load a scenario by its path, a string or a dict."""
        if self._loaded:
            return False
        if self.path is not None:
            self._string = Path(self.path).read_text()
        if self._string is not None:
            try:
                self._data = toml.loads(self._string, _dict=OrderedDict)
            except toml.TomlDecodeError as err:
                raise ConfigError(["{}:{}: {}".format(self.name, err.lineno, err.msg)]) from err
            nested = [key for key, value in self._data.items() if isinstance(value, dict)]
            if nested:
                raise ConfigError(["{}: sections are not allowed: {}".format(self.name, ", ".join(nested))])
        if self._data is not None:
            self._reformatted = toml.dumps(self._data)
        self._loaded = True
        return True
