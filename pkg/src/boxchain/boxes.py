"""The dual layer: a chain of antichain boxes mirroring the ledger in real time.

Boxes open one after another; box ``i`` opens when box ``i - 1`` closes. A transaction joins
box ``1 + max(box of its parents)``, which must be the open box. The last member of a closed
box is its boxer; a randomly chosen good-standing agent becomes its box-genesis and, at that
moment, confirms the box before it.
"""
import logging
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple

import attr
import numpy as np
from sortedcontainers import SortedSet

from boxchain.constants import (
    DEFAULT_RATE_GUARD_FRACTION,
    DEFAULT_TAU_SEC,
    GENESIS_ID,
    MICROSECONDS,
    SYSTEM_AGENT,
    ZERO_DIGEST,
)
from boxchain.exceptions import (
    EmptySupport,
    GenesisAbsent,
    HashChainMismatch,
    IntegrityAlarm,
    NoEligibleGenesis,
    RankViolation,
    StuckTransactionApproved,
)
from boxchain.generic import ceil_div, pack_ids, parse_pairs, sha256_digest
from boxchain.ledger import DagLedger, Transaction
from boxchain.rewards import RewardKind, RewardLedger
from boxchain.standing import StandingBook
from boxchain.typedefs import AgentId, Digest, TxId

LOGGER = logging.getLogger(__name__)

#: Signs a serialized header on behalf of an agent.
Signer = Callable[[AgentId, bytes], Digest]


def honest_signature(agent: AgentId, header: bytes) -> Digest:  # pylint: disable=unused-argument
    """The signature every honest agent produces: the digest of the header."""
    return sha256_digest(header)


@attr.s(frozen=True)
class CapacityDistribution:
    """A discrete distribution of box capacities on the integers ``[l, u]``."""

    support = attr.ib(converter=tuple)  # type: Tuple[int, ...]
    probabilities = attr.ib(converter=tuple)  # type: Tuple[float, ...]

    def __attrs_post_init__(self):
        if not self.support or len(self.support) != len(self.probabilities) or sum(self.probabilities) <= 0:
            raise EmptySupport()
        if min(self.support) < 1 or any(p < 0 for p in self.probabilities):
            raise ValueError("Capacities must be positive and probabilities nonnegative")
        if list(self.support) != sorted(set(self.support)):
            raise ValueError("Capacities must be distinct and ascending")

    @classmethod
    def degenerate(cls, capacity: int) -> "CapacityDistribution":
        """Always the same capacity."""
        return cls((capacity,), (1.0,))

    @classmethod
    def uniform(cls, lower: int, upper: int) -> "CapacityDistribution":
        """Uniform on ``lower..upper``."""
        if lower > upper:
            raise EmptySupport()
        size = upper - lower + 1
        return cls(range(lower, upper + 1), [1.0 / size] * size)

    @classmethod
    def parse(cls, text: str) -> "CapacityDistribution":
        """Parse ``degenerate:<m>``, ``uniform:<l>:<u>`` or ``pmf:<m>=<p>,<m>=<p>,...``."""
        kind, _, arguments = text.strip().partition(":")
        if kind == "degenerate":
            return cls.degenerate(int(arguments))
        if kind == "uniform":
            lower, _, upper = arguments.partition(":")
            return cls.uniform(int(lower), int(upper))
        if kind == "pmf":
            pairs = sorted((int(key), float(value)) for key, value in parse_pairs(arguments, pair_separator="="))
            return cls((key for key, _ in pairs), (value for _, value in pairs))
        raise ValueError("Unknown capacity distribution {!r}".format(text))

    @property
    def upper(self) -> int:
        """Largest capacity with positive probability."""
        return max(m for m, p in zip(self.support, self.probabilities) if p > 0)

    def inverse(self, quantile: float) -> int:
        """Smallest capacity ``m`` with ``F(m) >= quantile`` (generalized inverse)."""
        cdf = np.cumsum(self.probabilities) / sum(self.probabilities)
        cdf[-1] = 1.0
        position = int(np.searchsorted(cdf, quantile, side="left"))
        return self.support[min(position, len(self.support) - 1)]


def sample_box_capacity(rng: np.random.Generator, dist_spec: CapacityDistribution) -> int:
    """Draw a box capacity ``M = F^-1(p)`` with ``p`` uniform on ``(0, 1)``."""
    return dist_spec.inverse(rng.random())


class BoxStatus(Enum):
    """Life cycle of a box."""

    OPEN = "open"
    CLOSING = "closing"
    CONFIRMED = "confirmed"


class ValidationReason(Enum):
    """Machine-checkable reason of a validation verdict."""

    OK = "ok"
    CONFLICT = "conflict"
    RANK_VIOLATION = "rank_violation"
    REDUNDANT_ANCESTOR = "redundant_ancestor"


class Verdict(Enum):
    """Verdict of a dual-layer validation."""

    LEGITIMATE = "legitimate"
    ILLEGAL = "illegal"


@attr.s(frozen=True)
class ValidationResult:
    """A new member's check of its prior neighbour's approvals."""

    checked_tx = attr.ib()  # type: TxId
    neighbor_tx = attr.ib()  # type: TxId
    verdict = attr.ib()  # type: Verdict
    reason = attr.ib(default=ValidationReason.OK)  # type: ValidationReason

    @property
    def illegal(self) -> bool:
        """Shortcut for the illegal verdict."""
        return self.verdict is Verdict.ILLEGAL


@attr.s
class AntichainBox:  # pylint: disable=too-many-instance-attributes
    """One box of the dual layer; its members form a chain in join order."""

    index = attr.ib()  # type: int
    opened_at = attr.ib()  # type: float
    capacity = attr.ib(default=0)  # type: int
    members = attr.ib(factory=list)  # type: List[TxId]
    boxer = attr.ib(default=None)  # type: Optional[TxId]
    box_genesis = attr.ib(default=None)  # type: Optional[AgentId]
    status = attr.ib(default=BoxStatus.OPEN)  # type: BoxStatus
    closed_at = attr.ib(default=None)  # type: Optional[float]
    header_hash = attr.ib(default=ZERO_DIGEST)  # type: Digest
    prev_header_hash = attr.ib(default=ZERO_DIGEST)  # type: Digest
    member_digest = attr.ib(default=ZERO_DIGEST)  # type: Digest
    capacity_reached_at = attr.ib(default=None)  # type: Optional[float]
    rate_guarded = attr.ib(default=False)  # type: bool
    dual_prev = attr.ib(factory=dict)  # type: Dict[TxId, TxId]
    void = attr.ib(factory=set)  # type: Set[TxId]

    @property
    def is_open(self) -> bool:
        """True while transactions may join."""
        return self.status is BoxStatus.OPEN

    @property
    def confirmed_members(self) -> List[TxId]:
        """Members that became final when the box was confirmed."""
        if self.status is not BoxStatus.CONFIRMED:
            return []
        return [member for member in self.members if member not in self.void]

    def header_bytes(self) -> bytes:
        """Canonical serialization of the header, big-endian fixed width."""
        closed_at = 0 if self.closed_at is None else int(round(self.closed_at * MICROSECONDS))
        return b"".join(
            [
                pack_ids([self.index]),
                self.prev_header_hash,
                pack_ids(sorted(self.members)),
                pack_ids([self.boxer if self.boxer is not None else 0]),
                pack_ids([self.box_genesis if self.box_genesis is not None else SYSTEM_AGENT]),
                pack_ids([closed_at]),
            ]
        )

    def compute_header_hash(self) -> Digest:
        """SHA-256 of the canonical header."""
        return sha256_digest(self.header_bytes())


@attr.s(frozen=True)
class ConfirmationReport:
    """What happened when a box-genesis confirmed the previous box."""

    confirmed_index = attr.ib()  # type: int
    box_genesis = attr.ib()  # type: AgentId
    final = attr.ib(converter=tuple, factory=tuple)  # type: Tuple[TxId, ...]
    illegal = attr.ib(converter=tuple, factory=tuple)  # type: Tuple[TxId, ...]
    disabled_agents = attr.ib(converter=tuple, factory=tuple)  # type: Tuple[AgentId, ...]
    voided = attr.ib(converter=tuple, factory=tuple)  # type: Tuple[TxId, ...]
    header_hash = attr.ib(default=ZERO_DIGEST)  # type: Digest
    vacuous = attr.ib(default=False)  # type: bool


class Boxchain:  # pylint: disable=too-many-instance-attributes,too-many-public-methods
    """The chain of antichain boxes and its covering chain of box-geneses.

    :param tau: Time limit of a box, in seconds.
    :param capacity: Distribution of the box size ``M``, sampled when a box opens.
    :param rate_guard_fraction: ``M`` members within this fraction of ``tau`` are too fast;
        the box then stays open until ``tau``.
    :param replay: Boxes close only when a transaction needs the following box.
    """

    def __init__(  # pylint: disable=too-many-arguments
        self,
        tau: float = DEFAULT_TAU_SEC,
        capacity: CapacityDistribution = None,
        rate_guard_fraction: float = DEFAULT_RATE_GUARD_FRACTION,
        capacity_rng: np.random.Generator = None,
        genesis_rng: np.random.Generator = None,
        standings: StandingBook = None,
        rewards: RewardLedger = None,
        signer: Signer = None,
        genesis_id: TxId = GENESIS_ID,
        genesis_time: float = 0.0,
        replay: bool = False,
    ) -> None:
        self.tau = tau
        self.capacity = capacity or CapacityDistribution.degenerate(1000)
        self.rate_guard_fraction = rate_guard_fraction
        self.capacity_rng = capacity_rng if capacity_rng is not None else np.random.default_rng(0)
        self.genesis_rng = genesis_rng if genesis_rng is not None else np.random.default_rng(0)
        self.standings = standings if standings is not None else StandingBook()
        self.rewards = rewards
        self.signer = signer or honest_signature
        self.replay = replay

        genesis_box = AntichainBox(
            0, genesis_time, capacity=1, members=[genesis_id], boxer=genesis_id, closed_at=genesis_time
        )
        genesis_box.member_digest = sha256_digest(pack_ids(genesis_box.members))
        genesis_box.header_hash = genesis_box.compute_header_hash()
        genesis_box.status = BoxStatus.CONFIRMED

        self.boxes = [genesis_box]  # type: List[AntichainBox]
        self.genesis_chain = []  # type: List[AgentId]
        self.sync_log = []  # type: List[List[Digest]]
        self.validations = []  # type: List[ValidationResult]
        self.verdicts = {}  # type: Dict[TxId, ValidationResult]
        self.box_index = {genesis_id: 0}  # type: Dict[TxId, int]
        self.confirmed_at = {genesis_id: genesis_time}  # type: Dict[TxId, float]
        self.void = SortedSet()  # type: SortedSet
        #: Ordered log of role assignments: ("boxer", index) and ("genesis", index).
        self.role_log = []  # type: List[Tuple[str, int]]
        self._open_next(genesis_time)

    # Queries

    @property
    def open_box(self) -> AntichainBox:
        """The box transactions are joining now."""
        return self.boxes[-1]

    @property
    def open_index(self) -> int:
        """Index of the open box."""
        return self.open_box.index

    @property
    def closed_boxes(self) -> List[AntichainBox]:
        """Boxes with a boxer, genesis box excluded."""
        return [box for box in self.boxes[1:] if not box.is_open]

    @property
    def confirmed_boxes(self) -> List[AntichainBox]:
        """Confirmed boxes, genesis box excluded."""
        return [box for box in self.boxes[1:] if box.status is BoxStatus.CONFIRMED]

    def box_of(self, tx_id: TxId) -> Optional[int]:
        """Index of the box holding the transaction."""
        return self.box_index.get(tx_id)

    def members_of(self, index: int) -> List[TxId]:
        """Members of a box, empty for indices outside the chain."""
        if 0 <= index < len(self.boxes):
            return list(self.boxes[index].members)
        return []

    def is_excluded(self, tx_id: TxId) -> bool:
        """Voided transactions and transactions flagged illegal may not be approved by honest agents."""
        verdict = self.verdicts.get(tx_id)
        return tx_id in self.void or (verdict is not None and verdict.illegal)

    def is_final(self, tx_id: TxId) -> bool:
        """True once the box of the transaction is confirmed and the transaction was not voided."""
        return tx_id in self.confirmed_at

    def closings_since(self, tx_id: TxId) -> int:
        """Number of boxes closed since the transaction joined its box."""
        index = self.box_of(tx_id)
        if index is None:
            return 0
        return max(0, len(self.boxes) - 1 - index)

    # placement

    def placement(self, parents: Iterable[TxId]) -> int:
        """Box index implied by the parents: one above the highest parent box."""
        indices = []
        for parent in parents:
            index = self.box_of(parent)
            if index is None:
                raise RankViolation(parents, -1, self.open_index)
            indices.append(index)
        return 1 + max(indices)

    def check_placement(self, parents: Iterable[TxId]) -> int:
        """Raise ``RankViolation`` unless the parents place the transaction in the open box.

        Every parent must also lie at most two boxes below. In replay mode the box right
        after the open one is accepted too.
        """
        parents = tuple(parents)
        index = self.placement(parents)
        allowed = {self.open_index, self.open_index + 1} if self.replay else {self.open_index}
        if index not in allowed or any(self.box_index[parent] < index - 2 for parent in parents):
            raise RankViolation(parents, index, self.open_index)
        return index

    def assign_to_box(self, ledger: DagLedger, tx: Transaction, now: float = None) -> int:
        """Append the transaction to its box, after the placement check.

        In replay mode, a transaction that needs the next box closes the open one first.
        """
        index = self.check_placement(tx.parents)
        if index == self.open_index + 1:
            self.close_open_box(tx.issue_time if now is None else now)
            self.confirm_after_close(ledger)

        box = self.open_box
        box.dual_prev[tx.id] = box.members[-1] if box.members else self._last_boxer()
        box.members.append(tx.id)
        self.box_index[tx.id] = index
        if len(box.members) >= box.capacity and box.capacity_reached_at is None:
            box.capacity_reached_at = tx.issue_time
        LOGGER.debug("Transaction %s joined box %s", tx.id, index)
        self.two_plus_two_check(ledger, tx.id)
        return index

    def _last_boxer(self) -> TxId:
        for box in reversed(self.boxes):
            if box.boxer is not None:
                return box.boxer
        return self.boxes[0].boxer

    # closing

    def maybe_close_box(self, now: float) -> Optional[TxId]:
        """Close the open box on cardinality or duration; return the boxer if it closed.

        Reaching ``M`` faster than the rate guard allows keeps the box open until ``tau``.
        """
        box = self.open_box
        if not box.members:
            return None
        if now >= box.opened_at + self.tau:
            return self.close_open_box(now)
        if len(box.members) >= box.capacity:
            reached_at = box.capacity_reached_at if box.capacity_reached_at is not None else now
            if reached_at - box.opened_at < self.rate_guard_fraction * self.tau:
                if not box.rate_guarded:
                    LOGGER.info("Box %s reached %s members too fast; waiting for tau", box.index, box.capacity)
                box.rate_guarded = True
                return None
            return self.close_open_box(now)
        return None

    def close_open_box(self, now: float) -> TxId:
        """Fix the boxer of the open box and open the next one."""
        box = self.open_box
        box.boxer = box.members[-1]
        box.status = BoxStatus.CLOSING
        box.closed_at = now
        box.member_digest = sha256_digest(pack_ids(box.members))
        self.role_log.append(("boxer", box.index))
        LOGGER.info("Closed box %s with %d members at %.6f, boxer %s", box.index, len(box.members), now, box.boxer)
        self._open_next(now)
        return box.boxer

    def _open_next(self, now: float) -> AntichainBox:
        box = AntichainBox(len(self.boxes), now, capacity=sample_box_capacity(self.capacity_rng, self.capacity))
        self.boxes.append(box)
        return box

    def select_box_genesis(self, ledger: DagLedger, index: int = None) -> AgentId:
        """Choose the box-genesis of a closed box among good-standing agents.

        The boxer's issuer is excluded. The choice is uniform under ``genesis_rng``.
        """
        box = self.boxes[index if index is not None else self.open_index - 1]
        if box.boxer is None:
            raise GenesisAbsent(box.index)
        boxer_issuer = ledger.get(box.boxer).issuer
        eligible = [agent for agent in self.standings.good_agents() if agent != boxer_issuer]
        if not eligible:
            raise NoEligibleGenesis(box.index)
        box.box_genesis = eligible[int(self.genesis_rng.integers(len(eligible)))]
        self.genesis_chain.append(box.box_genesis)
        self.sync_log.append([])
        self.role_log.append(("genesis", box.index))
        LOGGER.info("Agent %s is the box-genesis of box %s", box.box_genesis, box.index)
        self._accrue(RewardKind.BOXER_JOB, boxer_issuer, box.closed_at)
        self.standings.credit(boxer_issuer)
        return box.box_genesis

    # 2+2 consensus

    def two_plus_two_check(self, ledger: DagLedger, new_member: TxId) -> ValidationResult:
        """Re-verify the two approvals of the new member's prior neighbour in the dual layer."""
        box = self.boxes[self.box_index[new_member]]
        neighbor = box.dual_prev[new_member]
        neighbor_tx = ledger.get(neighbor)
        neighbor_index = self.box_index[neighbor]
        parents = neighbor_tx.parents

        if len(parents) == 2 and parents[1] in ledger.conflicts_of(parents[0]):
            result = ValidationResult(new_member, neighbor, Verdict.ILLEGAL, ValidationReason.CONFLICT)
        elif parents and (
            1 + max(self.box_index[p] for p in parents) != neighbor_index
            or any(self.box_index[p] < neighbor_index - 2 for p in parents)
        ):
            result = ValidationResult(new_member, neighbor, Verdict.ILLEGAL, ValidationReason.RANK_VIOLATION)
        elif len(parents) == 2 and (ledger.approves(*parents) or ledger.approves(parents[1], parents[0])):
            result = ValidationResult(new_member, neighbor, Verdict.LEGITIMATE, ValidationReason.REDUNDANT_ANCESTOR)
        else:
            result = ValidationResult(new_member, neighbor, Verdict.LEGITIMATE)

        self.validations.append(result)
        self.verdicts[neighbor] = result
        validator = ledger.get(new_member).issuer
        self._accrue(RewardKind.DUAL_VALIDATION, validator, ledger.get(new_member).issue_time)
        if result.illegal:
            LOGGER.warning("Transaction %s flags its neighbour %s: %s", new_member, neighbor, result.reason.value)
            self._accrue(RewardKind.ABNORMAL_REPORT, validator, ledger.get(new_member).issue_time)
        else:
            self.standings.credit(validator)
        return result

    # final confirmation

    def _illegal_members(self, ledger: DagLedger, box: AntichainBox) -> List[TxId]:
        illegal = []
        for member in box.members:
            if member in self.void:
                continue
            verdict = self.verdicts.get(member)
            if verdict is not None and verdict.illegal:
                illegal.append(member)
                continue
            for other in ledger.conflicts_of(member):
                if self.box_of(other) is None or self.box_of(other) > box.index + 1:
                    continue
                if ledger.detect_conflict(self, member, other).rejected_id == member:
                    illegal.append(member)
                    break
        return illegal

    def verify_header(self, box: AntichainBox) -> None:
        """Raise ``HashChainMismatch`` if the stored header hash is not the recomputed one."""
        if box.status is BoxStatus.CONFIRMED and box.compute_header_hash() != box.header_hash:
            raise HashChainMismatch(box.index)
        if box.index > 0 and box.prev_header_hash != self.boxes[box.index - 1].header_hash:
            raise HashChainMismatch(box.index)

    def finalize_box(self, ledger: DagLedger, index: int) -> ConfirmationReport:
        """Let the box-genesis of box ``index`` confirm box ``index - 1``.

        Illegal members of the previous box are rejected, their issuers and the issuers of
        members of box ``index`` that approved them are disabled, and every unconfirmed
        transaction of a disabled agent is voided. The remaining members become final.
        """
        box = self.boxes[index]
        if box.box_genesis is None:
            raise GenesisAbsent(index)
        if index == 1:
            LOGGER.debug("Box 1 confirms the genesis box, which is final by construction")
            return ConfirmationReport(0, box.box_genesis, self.boxes[0].members, vacuous=True)

        previous = self.boxes[index - 1]
        self.verify_header(self.boxes[index - 2])

        illegal = self._illegal_members(ledger, previous)
        illegal_set = set(illegal)
        disabled = SortedSet(ledger.get(member).issuer for member in illegal)
        for member in box.members:
            if illegal_set.intersection(ledger.get(member).parents):
                disabled.add(ledger.get(member).issuer)
        for agent in disabled:
            if not self.standings.is_disabled(agent):
                LOGGER.warning("Disabling agent %s after the confirmation of box %s", agent, previous.index)
                self.standings.disable(agent)
        voided = self._void_unconfirmed(ledger, illegal_set)

        previous.prev_header_hash = self.boxes[index - 2].header_hash
        header = previous.header_bytes()
        signature = self.signer(box.box_genesis, header)
        expected = sha256_digest(header)
        if signature != expected:
            LOGGER.error("Boxer %s rejects the confirmation signed by agent %s", box.boxer, box.box_genesis)
            raise IntegrityAlarm(index, previous.index, box.box_genesis)

        previous.header_hash = expected
        previous.status = BoxStatus.CONFIRMED
        final = previous.confirmed_members
        for member in final:
            self.confirmed_at[member] = box.closed_at
        for entry in self.sync_log[: index - 1]:
            entry.append(expected)

        self._accrue(RewardKind.GENESIS_JOB, box.box_genesis, box.closed_at)
        for _ in illegal:
            self._accrue(RewardKind.ABNORMAL_REPORT, box.box_genesis, box.closed_at)
        self.standings.credit(box.box_genesis)
        LOGGER.info(
            "Box %s confirmed by agent %s: %d final, %d illegal",
            previous.index,
            box.box_genesis,
            len(final),
            len(illegal),
        )
        return ConfirmationReport(previous.index, box.box_genesis, final, illegal, disabled, voided, expected)

    def _void_unconfirmed(self, ledger: DagLedger, illegal: Set[TxId]) -> List[TxId]:
        voided = []
        for box in self.boxes[1:]:
            if box.status is BoxStatus.CONFIRMED:
                continue
            for member in box.members:
                if member in self.void:
                    continue
                if member in illegal or self.standings.is_disabled(ledger.get(member).issuer):
                    box.void.add(member)
                    self.void.add(member)
                    voided.append(member)
        return voided

    def confirm_after_close(self, ledger: DagLedger) -> ConfirmationReport:
        """Pick the box-genesis of the box that just closed and let it confirm its predecessor."""
        index = self.open_index - 1
        self.select_box_genesis(ledger, index)
        return self.finalize_box(ledger, index)

    def close_all(self, ledger: DagLedger, now: float) -> None:
        """Close the open box if it has members (end of a replay)."""
        if self.open_box.members:
            self.close_open_box(now)
            self.confirm_after_close(ledger)

    # Empty transactions and bounds

    def is_stuck(self, ledger: DagLedger, tx_id: TxId) -> bool:
        """A legitimate tip left unapproved while two boxes formed after its own."""
        return (
            tx_id in ledger.tips
            and tx_id != ledger.genesis_id
            and not self.is_excluded(tx_id)
            and self.closings_since(tx_id) >= 2
        )

    def issue_empty_transaction(
        self, ledger: DagLedger, stuck_tx: TxId, rng: np.random.Generator, now: float
    ) -> Transaction:
        """Issue an empty transaction from the issuer of a stuck transaction.

        The stuck transaction takes one approval slot while it is still eligible; the other
        slot goes to a regular tip.
        """
        if stuck_tx not in ledger.tips:
            raise StuckTransactionApproved(stuck_tx)
        issuer = ledger.get(stuck_tx).issuer
        tx = ledger.issue_transaction(issuer, ZERO_DIGEST, 0, rng, boxes=self, is_empty=True, now=now, prefer=stuck_tx)
        LOGGER.info("Agent %s issued empty transaction %s for stuck transaction %s", issuer, tx.id, stuck_tx)
        return tx

    def height_bound_check(self, ledger: DagLedger, n: int, m_max: int) -> bool:
        """True iff the ledger height is at most ``ceil(N / M) + 1`` (genesis layer)."""
        return ledger.height() <= ceil_div(n, m_max) + 1

    def _accrue(self, kind: RewardKind, agent: AgentId, time: Optional[float]) -> None:
        if self.rewards is not None and agent != SYSTEM_AGENT:
            self.rewards.accrue(kind, agent, time or 0.0)

