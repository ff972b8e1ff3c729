"""Malicious agents flood the ledger with conflicting bursts."""
import logging
from typing import List, Optional, Type

from boxchain.config import MALICIOUS, ScenarioConfig
from boxchain.constants import BURST_SPACING_SEC
from boxchain.generic import sha256_digest
from boxchain.plugins import hookimpl
from boxchain.plugins.base import AgentBehavior, IssueRequest, Registrar
from boxchain.typedefs import AgentId, Digest

LOGGER = logging.getLogger(__name__)

TAMPER = b"tampered"


class MaliciousBehavior(AgentBehavior):
    """Issue a burst of transactions almost simultaneously, each from a fresh address.

    The first two transactions of a burst come from the same address and spend the same
    nonce, so they conflict. Conflicts are not filtered and a box header signed as
    box-genesis is tampered with.
    """

    name = MALICIOUS
    filter_conflicts = False
    reissue_stuck = False

    def __init__(self, config: ScenarioConfig) -> None:
        super().__init__(config)
        self.bursts = 0

    def plan_arrival(self, agent: AgentId, time: float, registrar: Registrar) -> List[IssueRequest]:
        """Fresh addresses are registered with the malicious standing."""
        self.bursts += 1
        burst = self.bursts
        double_spender = registrar(self.config.malicious_standing)
        requests = [
            IssueRequest(double_spender, time, spend_nonce=0, owner=agent, burst=burst),
            IssueRequest(double_spender, time + BURST_SPACING_SEC, spend_nonce=0, owner=agent, burst=burst),
        ]
        for position in range(2, self.config.malicious_burst_size):
            address = registrar(self.config.malicious_standing)
            at = time + position * BURST_SPACING_SEC
            requests.append(IssueRequest(address, at, spend_nonce=0, owner=agent, burst=burst))
        LOGGER.debug("Agent %s bursts %d transactions at %.6f", agent, len(requests), time)
        return requests

    def sign_header(self, agent: AgentId, header: bytes) -> Digest:  # pylint: disable=unused-argument
        """A signature the boxer will not reproduce."""
        return sha256_digest(header, TAMPER)


@hookimpl
def plugin_class() -> Type["AgentBehavior"]:
    """You should return your behaviour class here."""
    return MaliciousBehavior


@hookimpl
def handler(behavior: str, config: ScenarioConfig) -> Optional["AgentBehavior"]:
    """Handle malicious agents."""
    if behavior == MALICIOUS:
        return MaliciousBehavior(config)
    return None
