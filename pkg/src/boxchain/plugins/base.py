"""Base class for agent behaviours."""
import abc
from typing import TYPE_CHECKING, Callable, List, Optional, Tuple

import attr

from boxchain.boxes import honest_signature
from boxchain.typedefs import AgentId, Digest, TxId

if TYPE_CHECKING:
    from boxchain.config import ScenarioConfig
    from boxchain.ledger import Transaction

#: Registers a fresh address with an initial standing and returns its id.
Registrar = Callable[[int], AgentId]


@attr.s(frozen=True)
class IssueRequest:
    """One transaction an agent wants to issue."""

    issuer = attr.ib()  # type: AgentId
    time = attr.ib()  # type: float
    spend_nonce = attr.ib(default=None)  # type: Optional[int]
    #: Set by the behaviour; ``None`` means the regular tip selection.
    parents = attr.ib(default=None)  # type: Optional[Tuple[TxId, ...]]
    #: Agent of the scenario this request belongs to, when the issuer is a fresh address.
    owner = attr.ib(default=None)  # type: Optional[AgentId]
    #: Burst number of the owner, for requests issued together.
    burst = attr.ib(default=None)  # type: Optional[int]


class AgentBehavior(metaclass=abc.ABCMeta):
    """What an agent does when its arrival process fires."""

    name = ""

    #: Leave out candidates that visibly conflict with another transaction.
    filter_conflicts = True

    #: Issue empty transactions for own transactions left unapproved.
    reissue_stuck = True

    def __init__(self, config: "ScenarioConfig") -> None:
        self.config = config

    def plan_arrival(
        self, agent: AgentId, time: float, registrar: Registrar  # pylint: disable=unused-argument
    ) -> List[IssueRequest]:
        """Transactions produced by one arrival; a single one by default."""
        return [IssueRequest(agent, time)]

    def choose_parents(self, request: IssueRequest) -> Optional[Tuple[TxId, ...]]:
        """Parents to approve, or ``None`` for the regular tip selection."""
        return request.parents

    def remember(self, tx: "Transaction") -> None:
        """Called after a transaction of this behaviour entered the ledger."""

    def sign_header(self, agent: AgentId, header: bytes) -> Digest:
        """Signature of a box header when the agent serves as box-genesis."""
        return honest_signature(agent, header)
