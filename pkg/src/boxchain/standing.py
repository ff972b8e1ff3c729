"""Standing of agents: who may serve as box-genesis, and who was disabled."""
import logging
import math
from typing import List

from sortedcontainers import SortedDict, SortedSet

from boxchain.constants import DEFAULT_STANDING_THRESHOLD
from boxchain.exceptions import AgentDisabled, UnknownAgent
from boxchain.typedefs import AgentId

LOGGER = logging.getLogger(__name__)


class StandingBook:
    """Scores per agent; an agent is in good standing while its score reaches the threshold.

    A disabled agent keeps a score of minus infinity for the rest of the run.
    """

    def __init__(self, threshold: float = DEFAULT_STANDING_THRESHOLD) -> None:
        self.threshold = threshold
        self.scores = SortedDict()  # type: SortedDict
        self.disabled = SortedSet()  # type: SortedSet

    def __contains__(self, agent: AgentId) -> bool:
        return agent in self.scores

    def register(self, agent: AgentId, score: float = 0) -> None:
        """Add an agent with an initial score."""
        self.scores[agent] = score

    def score(self, agent: AgentId) -> float:
        """Current score of an agent."""
        try:
            return self.scores[agent]
        except KeyError as err:
            raise UnknownAgent(agent) from err

    def credit(self, agent: AgentId, amount: float = 1) -> None:
        """Reward a legitimate validation or a completed role; unknown agents are ignored."""
        if agent in self.scores and agent not in self.disabled:
            self.scores[agent] += amount

    def disable(self, agent: AgentId) -> None:
        """Disable an agent for good."""
        LOGGER.debug("Agent %s disabled", agent)
        self.scores[agent] = -math.inf
        self.disabled.add(agent)

    def is_disabled(self, agent: AgentId) -> bool:
        """True after ``disable()``."""
        return agent in self.disabled

    def is_good(self, agent: AgentId) -> bool:
        """True if the agent is registered, enabled and at or above the threshold."""
        return agent in self.scores and agent not in self.disabled and self.scores[agent] >= self.threshold

    def good_agents(self) -> List[AgentId]:
        """Agents in good standing, ascending ids."""
        return [agent for agent in self.scores if self.is_good(agent)]

    def ensure_enabled(self, agent: AgentId) -> None:
        """Raise ``AgentDisabled`` for disabled agents."""
        if agent in self.disabled:
            raise AgentDisabled(agent)
