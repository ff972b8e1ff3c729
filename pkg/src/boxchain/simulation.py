"""Discrete-event runner of a scenario.

Arrivals come from the agents' intensities, every transaction goes through the ledger and
the boxchain, and rewards and fees accrue when their events happen. The future-event list
is ordered by time, then by scheduling order.
"""
import itertools
import logging
from collections import OrderedDict
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple

import attr
import numpy as np
from sortedcontainers import SortedList

from boxchain.app import BoxchainApp
from boxchain.boxes import Boxchain, BoxStatus
from boxchain.config import ScenarioConfig
from boxchain.constants import SYSTEM_AGENT, ExitCode
from boxchain.exceptions import (
    AgentDisabled,
    BoxError,
    HashChainMismatch,
    IntegrityAlarm,
    NoEligibleGenesis,
    NoEligibleTips,
    RankViolation,
    StuckTransactionApproved,
)
from boxchain.generic import format_number
from boxchain.ledger import DagLedger, Transaction
from boxchain.plugins.base import AgentBehavior, IssueRequest
from boxchain.rewards import RewardKind, RewardLedger
from boxchain.standing import StandingBook
from boxchain.stochastics import sample_nonhomogeneous
from boxchain.streams import stream
from boxchain.typedefs import AgentId, TxId

LOGGER = logging.getLogger(__name__)

#: Owner of a burst and its burst number.
BurstKey = Tuple[AgentId, int]


class EventKind(Enum):
    """Kinds of scheduled events."""

    BOX_TIMER = "box_timer"
    ARRIVAL = "arrival"
    ISSUE = "issue"
    REISSUE = "reissue"


@attr.s(frozen=True)
class Event:
    """A scheduled event; only the fields of its kind are set."""

    kind = attr.ib()  # type: EventKind
    agent = attr.ib(default=None)  # type: Optional[AgentId]
    request = attr.ib(default=None)  # type: Optional[IssueRequest]
    tx_id = attr.ib(default=None)  # type: Optional[TxId]
    box = attr.ib(default=None)  # type: Optional[int]


@attr.s(frozen=True)
class RunMetrics:  # pylint: disable=too-many-instance-attributes
    """Outcome of one run."""

    scenario = attr.ib()  # type: str
    seed = attr.ib()  # type: int
    issued_count = attr.ib()  # type: int
    confirmed_count = attr.ib()  # type: int
    latency_mean = attr.ib()  # type: float
    latency_p50 = attr.ib()  # type: float
    latency_p95 = attr.ib()  # type: float
    attack_attempts = attr.ib()  # type: int
    attack_successes = attr.ib()  # type: int
    double_confirmed_pairs = attr.ib()  # type: int
    boxes_closed = attr.ib()  # type: int
    boxes_confirmed = attr.ib()  # type: int
    disabled_agents = attr.ib(converter=tuple)  # type: tuple
    rank_rejections = attr.ib()  # type: int
    empty_transactions = attr.ib()  # type: int
    balances = attr.ib()  # type: Dict[AgentId, int]
    total_rewards = attr.ib()  # type: int
    total_fees = attr.ib()  # type: int
    net_issuance = attr.ib()  # type: int
    ledger_height = attr.ib()  # type: int
    final_chain_hash = attr.ib()  # type: str
    aborted = attr.ib(default=False)  # type: bool
    abort_reason = attr.ib(default="")  # type: str
    exit_code = attr.ib(default=ExitCode.OK)  # type: ExitCode

    def as_row(self) -> "OrderedDict[str, object]":
        """One CSV row; floats use 12 significant digits."""
        row = OrderedDict()  # type: OrderedDict
        for field in attr.fields(RunMetrics):
            value = getattr(self, field.name)
            if isinstance(value, float):
                value = format_number(value)
            elif field.name == "disabled_agents":
                value = " ".join(str(agent) for agent in value)
            elif field.name == "balances":
                value = " ".join("{}:{}".format(agent, amount) for agent, amount in value.items())
            elif field.name == "exit_code":
                value = int(value)
            elif isinstance(value, bool):
                value = int(value)
            row[field.name] = value
        return row

    def report(self) -> List[str]:
        """Structured text report, one ``name=value`` line per metric."""
        return ["{}={}".format(name, value) for name, value in self.as_row().items()]


class Simulation:  # pylint: disable=too-many-instance-attributes
    """One scenario run: a ledger, its boxchain and the agents feeding them."""

    def __init__(self, config: ScenarioConfig, app: BoxchainApp = None) -> None:
        self.config = config
        self.app = app or BoxchainApp.current()
        seed = config.seed

        self.standings = StandingBook(config.standing_threshold)
        self.rewards = RewardLedger(config.rewards)
        self.ledger = DagLedger(min_fee=config.min_fee)
        self.boxes = Boxchain(
            tau=config.tau_sec,
            capacity=config.capacity_distribution,
            rate_guard_fraction=config.rate_guard_fraction,
            capacity_rng=stream(seed, "capacity"),
            genesis_rng=stream(seed, "genesis"),
            standings=self.standings,
            rewards=self.rewards,
            signer=self.sign_header,
        )
        self.tip_rng = stream(seed, "tips")
        self.payload_rng = stream(seed, "payload")

        self.agents = config.agents
        self.behaviors = {}  # type: Dict[str, AgentBehavior]
        self.behavior_by_agent = {}  # type: Dict[AgentId, AgentBehavior]
        for spec in self.agents:
            if spec.behavior not in self.behaviors:
                self.behaviors[spec.behavior] = self.app.behavior_for(spec.behavior, config)
            self._register(spec.id, spec.standing, self.behaviors[spec.behavior])

        self.queue = SortedList()  # type: SortedList
        self._sequence = itertools.count()
        self.now = 0.0
        self.issued = []  # type: List[TxId]
        #: Transactions of each burst, keyed by owner and burst number.
        self.bursts = OrderedDict()  # type: OrderedDict[BurstKey, Set[TxId]]
        self.rank_rejections = 0
        self.empty_transactions = 0
        self.reissued = set()  # type: Set[TxId]
        self.abort = None  # type: Optional[BoxError]

    # Agents

    def _register(self, agent: AgentId, standing: int, behavior: AgentBehavior) -> None:
        self.standings.register(agent, standing)
        self.rewards.register(agent)
        self.behavior_by_agent[agent] = behavior

    def register_address(self, standing: int, behavior: AgentBehavior) -> AgentId:
        """Register a fresh address after the scenario agents."""
        agent = max(self.behavior_by_agent) + 1
        self._register(agent, standing, behavior)
        return agent

    def sign_header(self, agent: AgentId, header: bytes) -> bytes:
        """Let the behaviour of the box-genesis sign a header."""
        return self.behavior_by_agent[agent].sign_header(agent, header)

    # Event list

    def schedule(self, time: float, event: Event) -> None:
        """Add an event; equal times keep their scheduling order."""
        self.queue.add((time, next(self._sequence), event))

    def seed_events(self) -> None:
        """Schedule every arrival of the horizon and the timer of box 1."""
        for spec in self.agents:
            rng = stream(self.config.seed, "arrivals/{}".format(spec.id))
            for time in sample_nonhomogeneous(spec.arrival_stream, rng):
                if time <= self.config.horizon_sec:
                    self.schedule(float(time) + self.config.pow_delay_sec, Event(EventKind.ARRIVAL, agent=spec.id))
        self._schedule_timer()

    def _schedule_timer(self) -> None:
        box = self.boxes.open_box
        self.schedule(box.opened_at + self.config.tau_sec, Event(EventKind.BOX_TIMER, box=box.index))

    def run(self) -> RunMetrics:
        """Process events up to the horizon and collect the metrics."""
        self.seed_events()
        while self.queue:
            time, _, event = self.queue.pop(0)
            if time > self.config.horizon_sec:
                break
            try:
                self.handle(time, event)
            except (NoEligibleGenesis, IntegrityAlarm, HashChainMismatch) as err:
                LOGGER.error("Run aborted at %.6f: %s", time, err)
                self.abort = err
                break
        LOGGER.info("Run finished: %d transactions, %d boxes closed", len(self.issued), len(self.boxes.closed_boxes))
        return self.metrics()

    # Handlers

    def handle(self, time: float, event: Event) -> None:
        """Advance the clock to ``time`` and process one event."""
        self.now = time
        handlers = {
            EventKind.BOX_TIMER: self._on_timer,
            EventKind.ARRIVAL: self._on_arrival,
            EventKind.ISSUE: self._on_issue,
            EventKind.REISSUE: self._on_reissue,
        }
        handlers[event.kind](event)

    def _on_timer(self, event: Event) -> None:
        if event.box != self.boxes.open_index:
            return
        if self.boxes.maybe_close_box(self.now) is not None:
            self._after_close()
        else:
            LOGGER.debug("Box %s is still empty after tau", event.box)

    def _on_arrival(self, event: Event) -> None:
        behavior = self.behavior_by_agent[event.agent]
        if self.standings.is_disabled(event.agent):
            LOGGER.debug("Disabled agent %s stays silent", event.agent)
            return
        requests = behavior.plan_arrival(
            event.agent, self.now, lambda standing: self.register_address(standing, behavior)
        )
        for request in requests:
            if request.burst is not None:
                self.bursts.setdefault((request.owner, request.burst), set())
            self.schedule(request.time, Event(EventKind.ISSUE, agent=event.agent, request=request))

    def _on_issue(self, event: Event) -> None:
        request = event.request
        behavior = self.behavior_by_agent[request.issuer]
        try:
            self.standings.ensure_enabled(request.issuer)
            tx = self.ledger.issue_transaction(
                request.issuer,
                self.payload_rng.bytes(32),
                self.config.fee,
                self.tip_rng,
                boxes=self.boxes,
                parents=behavior.choose_parents(request),
                spend_nonce=request.spend_nonce,
                now=self.now,
                filter_conflicts=behavior.filter_conflicts,
            )
        except RankViolation as err:
            self.rank_rejections += 1
            LOGGER.warning("Rejected a transaction of agent %s: %s", request.issuer, err)
            return
        except (NoEligibleTips, AgentDisabled) as err:
            LOGGER.warning("Agent %s could not issue: %s", request.issuer, err)
            return

        behavior.remember(tx)
        self.issued.append(tx.id)
        if request.burst is not None:
            self.bursts[(request.owner, request.burst)].add(tx.id)
        self.rewards.accrue(RewardKind.TX_FEE, tx.issuer, self.now, amount=-tx.fee)
        self.rewards.accrue(RewardKind.PRIMAL_VALIDATION, tx.issuer, self.now)
        self._maybe_close()

    def _on_reissue(self, event: Event) -> None:
        if not self.boxes.is_stuck(self.ledger, event.tx_id):
            return
        try:
            tx = self.boxes.issue_empty_transaction(self.ledger, event.tx_id, self.tip_rng, self.now)
        except (StuckTransactionApproved, NoEligibleTips, RankViolation) as err:
            LOGGER.debug("No empty transaction for %s: %s", event.tx_id, err)
            return
        self.empty_transactions += 1
        self.rewards.accrue(RewardKind.PRIMAL_VALIDATION, tx.issuer, self.now)
        self._maybe_close()

    def _maybe_close(self) -> None:
        if self.boxes.maybe_close_box(self.now) is not None:
            self._after_close()

    def _after_close(self) -> None:
        self.boxes.confirm_after_close(self.ledger)
        self._schedule_timer()
        if not self.config.reissue_stuck:
            return
        for tip in list(self.ledger.tips):
            if tip in self.reissued or not self.boxes.is_stuck(self.ledger, tip):
                continue
            issuer = self.ledger.get(tip).issuer
            if issuer == SYSTEM_AGENT or not self.behavior_by_agent[issuer].reissue_stuck:
                continue
            self.reissued.add(tip)
            self.schedule(self.now + self.config.reissue_delay_sec, Event(EventKind.REISSUE, tx_id=tip))

    # Metrics

    def latencies(self) -> np.ndarray:
        """Confirmation latencies of the final, non-empty transactions."""
        values = [
            self.boxes.confirmed_at[tx_id] - self.ledger.get(tx_id).issue_time
            for tx_id in self.issued
            if tx_id in self.boxes.confirmed_at
        ]
        return np.array(values, dtype=float)

    def attack_successes(self) -> int:
        """Bursts owning every member of two consecutive closed boxes."""
        closed = [box for box in self.boxes.boxes[1:] if box.status is not BoxStatus.OPEN and box.members]
        successes = 0
        for burst in self.bursts.values():
            for first, second in zip(closed, closed[1:]):
                if second.index == first.index + 1 and burst.issuperset(first.members + second.members):
                    successes += 1
                    break
        return successes

    def double_confirmed_pairs(self) -> int:
        """Conflicting pairs with both members final."""
        return sum(
            1
            for first, second in self.ledger.conflicting_pairs()
            if self.boxes.is_final(first) and self.boxes.is_final(second)
        )

    def verify_chain(self) -> None:
        """Recompute every confirmed header and its link to the previous one."""
        for box in self.boxes.confirmed_boxes:
            self.boxes.verify_header(box)

    def metrics(self) -> RunMetrics:
        """Collect the metrics of the run so far."""
        latencies = self.latencies()
        confirmed = self.boxes.confirmed_boxes
        exit_code = ExitCode.OK if self.abort is None else self.abort.exit_code
        return RunMetrics(
            scenario=self.config.name,
            seed=self.config.seed,
            issued_count=len(self.issued),
            confirmed_count=len(latencies),
            latency_mean=float(latencies.mean()) if len(latencies) else 0.0,
            latency_p50=float(np.percentile(latencies, 50)) if len(latencies) else 0.0,
            latency_p95=float(np.percentile(latencies, 95)) if len(latencies) else 0.0,
            attack_attempts=len(self.bursts),
            attack_successes=self.attack_successes(),
            double_confirmed_pairs=self.double_confirmed_pairs(),
            boxes_closed=len(self.boxes.closed_boxes),
            boxes_confirmed=len(confirmed),
            disabled_agents=list(self.standings.disabled),
            rank_rejections=self.rank_rejections,
            empty_transactions=self.empty_transactions,
            balances=dict(self.rewards.balances),
            total_rewards=self.rewards.total_rewards,
            total_fees=self.rewards.total_fees,
            net_issuance=self.rewards.net_issuance,
            ledger_height=self.ledger.height(),
            final_chain_hash=confirmed[-1].header_hash.hex() if confirmed else self.boxes.boxes[0].header_hash.hex(),
            aborted=self.abort is not None,
            abort_reason=self.abort.pretty() if self.abort is not None else "",
            exit_code=exit_code,
        )


def run_scenario(config: ScenarioConfig) -> RunMetrics:
    """Run a scenario; the result only depends on the configuration, seed included."""
    return Simulation(config).run()


@attr.s
class Replay:
    """A ledger rebuilt from a dump, with the boxes its transactions imply."""

    ledger = attr.ib()  # type: DagLedger
    boxes = attr.ib()  # type: Boxchain


def replay_ledger(records: Iterable[Transaction], seed: int = 0) -> Replay:
    """Feed dumped transactions to a boxchain in replay mode.

    A box closes when the next transaction needs the following box; the last box closes
    after the last transaction. Issuers start in good standing.
    """
    records = list(records)
    ledger = DagLedger(genesis_time=records[0].issue_time, genesis_id=records[0].id)
    standings = StandingBook()
    for issuer in sorted({record.issuer for record in records} - {SYSTEM_AGENT}):
        standings.register(issuer)
    boxes = Boxchain(
        tau=float("inf"),
        rate_guard_fraction=0.0,
        capacity_rng=stream(seed, "capacity"),
        genesis_rng=stream(seed, "genesis"),
        standings=standings,
        genesis_id=records[0].id,
        genesis_time=records[0].issue_time,
        replay=True,
    )
    for record in records[1:]:
        boxes.check_placement(record.parents)
        ledger.append(record)
        boxes.assign_to_box(ledger, record)
    boxes.close_all(ledger, records[-1].issue_time)
    LOGGER.info("Replayed %d transactions into %d boxes", len(records), len(boxes.closed_boxes))
    return Replay(ledger, boxes)
