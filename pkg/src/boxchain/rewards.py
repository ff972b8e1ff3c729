"""Incentives: rewards for validations and roles, fees for issued transactions."""
import logging
from enum import Enum
from typing import List, Union

import attr
from sortedcontainers import SortedDict

from boxchain.exceptions import UnknownAgent, UnknownRewardKind
from boxchain.typedefs import AgentId

LOGGER = logging.getLogger(__name__)


class RewardKind(Enum):
    """Events that move boxcoins."""

    PRIMAL_VALIDATION = "primal_validation"
    DUAL_VALIDATION = "dual_validation"
    GENESIS_JOB = "genesis_job"
    BOXER_JOB = "boxer_job"
    ABNORMAL_REPORT = "abnormal_report"
    TX_FEE = "tx_fee"


@attr.s(frozen=True)
class RewardSchedule:
    """Amounts in boxcoin base units; the fee is charged, everything else is paid out."""

    fee = attr.ib(default=1)  # type: int
    primal_validation = attr.ib(default=1)  # type: int
    dual_validation = attr.ib(default=1)  # type: int
    boxer_job = attr.ib(default=5)  # type: int
    genesis_job = attr.ib(default=10)  # type: int
    abnormal_report = attr.ib(default=3)  # type: int

    def amount(self, kind: RewardKind) -> int:
        """Signed amount of one event of this kind."""
        if kind is RewardKind.TX_FEE:
            return -self.fee
        return getattr(self, kind.value)


@attr.s(frozen=True)
class RewardEvent:
    """One entry of the reward log."""

    time = attr.ib()  # type: float
    agent = attr.ib()  # type: AgentId
    kind = attr.ib()  # type: RewardKind
    amount = attr.ib()  # type: int


class RewardLedger:
    """Append-only log of rewards and fees, with running balances per agent."""

    def __init__(self, schedule: RewardSchedule = None) -> None:
        self.schedule = schedule or RewardSchedule()
        self.balances = SortedDict()  # type: SortedDict
        self.events = []  # type: List[RewardEvent]

    def register(self, agent: AgentId) -> None:
        """Open a zero balance for an agent."""
        self.balances.setdefault(agent, 0)

    def accrue(
        self, kind: Union[RewardKind, str], agent: AgentId, time: float, amount: int = None
    ) -> "RewardLedger":
        """Append one event at the time it happens; ``amount`` overrides the schedule (e.g. a fee)."""
        try:
            reward_kind = RewardKind(kind)
        except ValueError as err:
            raise UnknownRewardKind(kind) from err
        if agent not in self.balances:
            raise UnknownAgent(agent)

        value = self.schedule.amount(reward_kind) if amount is None else amount
        self.events.append(RewardEvent(time, agent, reward_kind, value))
        self.balances[agent] += value
        LOGGER.debug("%s %+d to agent %s at %.6f", reward_kind.value, value, agent, time)
        return self

    def fold(self) -> SortedDict:
        """Balances recomputed from the event log alone."""
        balances = SortedDict((agent, 0) for agent in self.balances)
        for event in self.events:
            balances[event.agent] += event.amount
        return balances

    @property
    def total_rewards(self) -> int:
        """Sum of every positive event."""
        return sum(event.amount for event in self.events if event.kind is not RewardKind.TX_FEE)

    @property
    def total_fees(self) -> int:
        """Sum of every fee charged, as a positive number."""
        return -sum(event.amount for event in self.events if event.kind is RewardKind.TX_FEE)

    @property
    def net_issuance(self) -> int:
        """Rewards paid minus fees charged."""
        return self.total_rewards - self.total_fees
