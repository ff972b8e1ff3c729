"""Lazy agents keep approving the same old pair of transactions."""
import logging
from typing import Dict, Optional, Tuple, Type

from boxchain.config import LAZY, ScenarioConfig
from boxchain.ledger import Transaction
from boxchain.plugins import hookimpl
from boxchain.plugins.base import AgentBehavior, IssueRequest
from boxchain.typedefs import AgentId, TxId

LOGGER = logging.getLogger(__name__)


class LazyBehavior(AgentBehavior):
    """Reuse the parents of the agent's first transaction forever.

    Once the boxes move on, the old pair places the transaction below the open box and the
    placement rule rejects it.
    """

    name = LAZY
    filter_conflicts = False
    reissue_stuck = False

    def __init__(self, config: ScenarioConfig) -> None:
        super().__init__(config)
        self.pairs = {}  # type: Dict[AgentId, Tuple[TxId, ...]]

    def choose_parents(self, request: IssueRequest) -> Optional[Tuple[TxId, ...]]:
        """The remembered pair, if any."""
        return self.pairs.get(request.issuer)

    def remember(self, tx: Transaction) -> None:
        """Keep the first pair only."""
        if tx.issuer not in self.pairs:
            LOGGER.debug("Lazy agent %s will keep approving %s", tx.issuer, tx.parents)
            self.pairs[tx.issuer] = tx.parents


@hookimpl
def plugin_class() -> Type["AgentBehavior"]:
    """You should return your behaviour class here."""
    return LazyBehavior


@hookimpl
def handler(behavior: str, config: ScenarioConfig) -> Optional["AgentBehavior"]:
    """Handle lazy agents."""
    if behavior == LAZY:
        return LazyBehavior(config)
    return None
