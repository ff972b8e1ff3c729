"""Boxchain exceptions."""
from typing import Iterable

from boxchain.constants import ERROR_PREFIX, ExitCode


class BoxchainError(Exception):
    """Base class of every error raised by the library and the command line."""

    error_base_number = 0  # type: int
    number = 0  # type: int
    message = ""  # type: str
    exit_code = ExitCode.USAGE  # type: ExitCode

    def __init__(self, *args: object) -> None:
        if not args:
            super().__init__(self.message)
        else:
            super().__init__(*args)

    @property
    def code(self) -> str:
        """Error code shown on the command line, e.g. ``BXC301``."""
        return "{}{:03d}".format(ERROR_PREFIX, self.error_base_number + self.number)

    def pretty(self) -> str:
        """Return the message prefixed by the error code."""
        return "{} {}".format(self.code, str(self))


class PosetError(BoxchainError):
    """Poset errors."""

    error_base_number = 100


class UnknownElement(PosetError):
    """An element id is not part of the poset."""

    number = 1
    message = "Unknown element {!r}"

    def __init__(self, element: object, *args: object) -> None:
        self.element = element
        super().__init__(self.message.format(element), *args)


class NotAcyclic(PosetError):
    """The relation has a cycle."""

    number = 2
    message = "The graph is not acyclic"

    def __init__(self, cycle: Iterable = None, *args: object) -> None:
        self.cycle = list(cycle or [])
        if self.cycle:
            path = " -> ".join(str(element) for element in self.cycle)
            super().__init__("{}: cycle through {}".format(self.message, path), *args)
        else:
            super().__init__(*args)


class LedgerError(BoxchainError):
    """Primal layer errors."""

    error_base_number = 200


class UnknownTransaction(LedgerError):
    """The transaction is not in the ledger."""

    number = 1
    message = "Unknown transaction {}"

    def __init__(self, tx_id: int, *args: object) -> None:
        self.tx_id = tx_id
        super().__init__(self.message.format(tx_id), *args)


class InvalidParents(LedgerError):
    """The approvals of a transaction are malformed."""

    number = 2
    message = "Invalid parents for transaction {}: {}"

    def __init__(self, tx_id: int, reason: str, *args: object) -> None:
        super().__init__(self.message.format(tx_id, reason), *args)


class FeeTooLow(LedgerError):
    """The fee is below the configured minimum."""

    number = 3
    message = "Fee {} is below the minimum fee {}"

    def __init__(self, fee: int, min_fee: int, *args: object) -> None:
        super().__init__(self.message.format(fee, min_fee), *args)


class NoEligibleTips(LedgerError):
    """No tip can be approved by the next transaction."""

    number = 4
    message = "No eligible tips in the boxes the next transaction may approve"


class NotConflicting(LedgerError):
    """Two transactions do not spend the same key."""

    number = 5
    message = "Transactions {} and {} are not conflicting"

    def __init__(self, tx_a: int, tx_b: int, *args: object) -> None:
        super().__init__(self.message.format(tx_a, tx_b), *args)


class StuckTransactionApproved(LedgerError):
    """The transaction was approved meanwhile, so it is not stuck anymore."""

    number = 6
    message = "Transaction {} is not a tip anymore"

    def __init__(self, tx_id: int, *args: object) -> None:
        super().__init__(self.message.format(tx_id), *args)


class AgentDisabled(LedgerError):
    """Transactions of disabled agents are refused."""

    number = 7
    message = "Agent {} is disabled"

    def __init__(self, agent: int, *args: object) -> None:
        super().__init__(self.message.format(agent), *args)


class BoxError(BoxchainError):
    """Dual layer errors."""

    error_base_number = 300


class RankViolation(BoxError):
    """The approvals would place the transaction outside the open box."""

    number = 1
    message = "Parents {} place the transaction in box {}, but box {} is open"

    def __init__(self, parents: Iterable[int], index: int, open_index: int, *args: object) -> None:
        self.index = index
        self.open_index = open_index
        super().__init__(self.message.format(tuple(parents), index, open_index), *args)


class NoEligibleGenesis(BoxError):
    """No good-standing agent other than the boxer's issuer."""

    number = 2
    message = "No good-standing agent can be the box-genesis of box {}"

    def __init__(self, index: int, *args: object) -> None:
        super().__init__(self.message.format(index), *args)


class GenesisAbsent(BoxError):
    """The box has no box-genesis to confirm its predecessor."""

    number = 3
    message = "Box {} has no box-genesis"

    def __init__(self, index: int, *args: object) -> None:
        super().__init__(self.message.format(index), *args)


class HashChainMismatch(BoxError):
    """A stored header hash differs from the recomputed one."""

    number = 4
    message = "Header hash of box {} does not match its contents"

    def __init__(self, index: int, *args: object) -> None:
        self.index = index
        super().__init__(self.message.format(index), *args)


class IntegrityAlarm(BoxError):
    """The boxer disagrees with the confirmation signed by the box-genesis."""

    number = 5
    message = "Integrity alarm: boxer of box {} rejects the confirmation of box {} signed by agent {}"
    exit_code = ExitCode.INTEGRITY_ALARM

    def __init__(self, index: int, confirmed_index: int, genesis: int, *args: object) -> None:
        self.index = index
        self.confirmed_index = confirmed_index
        self.genesis = genesis
        super().__init__(self.message.format(index, confirmed_index, genesis), *args)


class EmptySupport(BoxError):
    """A capacity distribution without mass."""

    number = 6
    message = "The capacity distribution has an empty support"


class StochasticsError(BoxchainError):
    """Errors of the stochastic models."""

    error_base_number = 400


class InvalidParameter(StochasticsError):
    """A model parameter is out of range."""

    number = 1
    message = "Invalid parameter {}={!r}: {}"

    def __init__(self, name: str, value: object, reason: str, *args: object) -> None:
        self.name = name
        super().__init__(self.message.format(name, value, reason), *args)


class InvalidSeverity(StochasticsError):
    """A severity distribution that is not a pmf on the positive integers."""

    number = 2
    message = "Invalid severity: {}"

    def __init__(self, reason: str, *args: object) -> None:
        super().__init__(self.message.format(reason), *args)


class OutOfDomain(StochasticsError):
    """Bounds outside the domain of an intensity function."""

    number = 3
    message = "Interval [{}, {}] is outside the domain [0, {}]"

    def __init__(self, start: float, end: float, horizon: float, *args: object) -> None:
        super().__init__(self.message.format(start, end, horizon), *args)


class SimulationError(BoxchainError):
    """Errors of the scenario runner."""

    error_base_number = 500


class UnknownRewardKind(SimulationError):
    """A reward kind that is not in the schedule."""

    number = 1
    message = "Unknown reward kind {!r}"

    def __init__(self, kind: object, *args: object) -> None:
        super().__init__(self.message.format(kind), *args)


class UnknownAgent(SimulationError):
    """An agent that was never registered."""

    number = 2
    message = "Unknown agent {}"

    def __init__(self, agent: int, *args: object) -> None:
        super().__init__(self.message.format(agent), *args)


class UnknownBehavior(SimulationError):
    """No plugin handles the behaviour name."""

    number = 3
    message = "No plugin handles the agent behaviour {!r}"

    def __init__(self, behavior: str, *args: object) -> None:
        super().__init__(self.message.format(behavior), *args)


class ConfigError(BoxchainError):
    """Invalid scenario or input file, with one line per problem."""

    error_base_number = 600
    number = 1
    message = "Invalid configuration"

    def __init__(self, lines: Iterable[str] = None, *args: object) -> None:
        self.lines = list(lines or [])
        if self.lines:
            super().__init__("\n".join(self.lines), *args)
        else:
            super().__init__(*args)


class FixtureMismatch(BoxchainError):
    """The replayed fixture does not produce the expected boxes."""

    error_base_number = 600
    number = 2
    message = "Fixture mismatch"
    exit_code = ExitCode.FIXTURE_ASSERTION

    def __init__(self, expected: str, actual: str, *args: object) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__("{}: expected {}, got {}".format(self.message, expected, actual), *args)
