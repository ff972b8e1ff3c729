"""The primal layer: transactions, tip selection, weights, closures and conflicts."""
import logging
from enum import Enum
from typing import TYPE_CHECKING, Dict, Iterable, Iterator, List, Optional, Set, Tuple

import attr
import networkx as nx
import numpy as np
from sortedcontainers import SortedSet

from boxchain.constants import GENESIS_ID, MAX_TIP_DRAWS, SYSTEM_AGENT, ZERO_DIGEST
from boxchain.exceptions import FeeTooLow, InvalidParents, NoEligibleTips, NotConflicting, UnknownTransaction
from boxchain.poset import Poset
from boxchain.typedefs import AgentId, Digest, SpendKey, TxId

if TYPE_CHECKING:
    from boxchain.boxes import Boxchain

LOGGER = logging.getLogger(__name__)


@attr.s(frozen=True)
class Transaction:
    """A vertex of the ledger; it approves up to two earlier transactions."""

    id = attr.ib()  # type: TxId
    issuer = attr.ib()  # type: AgentId
    payload_digest = attr.ib()  # type: Digest
    fee = attr.ib()  # type: int
    parents = attr.ib(converter=tuple)  # type: Tuple[TxId, ...]
    issue_time = attr.ib()  # type: float
    is_empty = attr.ib(default=False)  # type: bool
    spend_nonce = attr.ib(default=None)  # type: Optional[int]

    #: Own weight of every transaction.
    weight = 1

    @property
    def spend_key(self) -> Optional[SpendKey]:
        """Two transactions with the same spend key are a double spend."""
        if self.spend_nonce is None:
            return None
        return self.issuer, self.spend_nonce


class ConflictOutcome(Enum):
    """How a conflict between two transactions is settled."""

    NO_CONFLICT = "no_conflict"
    REJECT_LATTER = "reject_latter"
    WEIGHT_TIEBREAK = "weight_tiebreak"
    BOXER_ADJUDICATION = "boxer_adjudication"


@attr.s(frozen=True)
class ConflictVerdict:
    """Outcome of a conflict check; ``rejected_id`` is set unless there is no conflict."""

    outcome = attr.ib()  # type: ConflictOutcome
    rejected_id = attr.ib(default=None)  # type: Optional[TxId]

    @rejected_id.validator
    def _check_rejected(self, attribute, value):  # pylint: disable=unused-argument
        if (value is None) != (self.outcome is ConflictOutcome.NO_CONFLICT):
            raise ValueError("rejected_id must be present iff there is a conflict")


class DagLedger:  # pylint: disable=too-many-instance-attributes
    """The approval DAG, owned by a single writer.

    Edges of the internal graph point from the approver (child) to the approved
    transaction (parent), towards the genesis.
    """

    def __init__(self, min_fee: int = 0, genesis_time: float = 0.0, genesis_id: TxId = GENESIS_ID) -> None:
        self.min_fee = min_fee
        self.genesis_id = genesis_id
        self.clock = genesis_time
        self.transactions = {}  # type: Dict[TxId, Transaction]
        self.children = {}  # type: Dict[TxId, Set[TxId]]
        self.tips = SortedSet()  # type: SortedSet
        self.graph = nx.DiGraph()

        self._next_id = genesis_id
        self._last_by_issuer = {}  # type: Dict[AgentId, TxId]
        self._spends = {}  # type: Dict[SpendKey, List[TxId]]

        self.append(
            Transaction(genesis_id, SYSTEM_AGENT, ZERO_DIGEST, 0, (), genesis_time, is_empty=True), allow_root=True
        )

    def __len__(self) -> int:
        return len(self.transactions)

    def __contains__(self, tx_id: TxId) -> bool:
        return tx_id in self.transactions

    def __iter__(self) -> Iterator[Transaction]:
        """Transactions in issue order, which is a topological order."""
        return iter(self.transactions.values())

    @classmethod
    def from_transactions(cls, transactions: Iterable[Transaction], min_fee: int = 0) -> "DagLedger":
        """Rebuild a ledger from records in issue order; the first one is the genesis.

        Later records without parents are accepted as extra roots.
        """
        records = iter(transactions)
        genesis = next(records)
        ledger = cls(min_fee=min_fee, genesis_time=genesis.issue_time, genesis_id=genesis.id)
        for record in records:
            ledger.append(record, allow_root=True)
        return ledger

    def get(self, tx_id: TxId) -> Transaction:
        """Return a transaction by id."""
        try:
            return self.transactions[tx_id]
        except KeyError as err:
            raise UnknownTransaction(tx_id) from err

    def next_id(self) -> TxId:
        """Id the next issued transaction will get."""
        return self._next_id

    def last_by(self, issuer: AgentId) -> Optional[TxId]:
        """Previous transaction of the issuer, if any."""
        return self._last_by_issuer.get(issuer)

    def append(self, tx: Transaction, allow_root: bool = False) -> Transaction:
        """Add a transaction whose parents were already chosen and checked by the caller."""
        if tx.id in self.transactions:
            raise InvalidParents(tx.id, "duplicate transaction id")
        if not tx.parents and not allow_root:
            raise InvalidParents(tx.id, "only the genesis has no parents")
        if len(tx.parents) > 2 or len(set(tx.parents)) != len(tx.parents):
            raise InvalidParents(tx.id, "expected one or two distinct parents, got {}".format(tx.parents))
        for parent in tx.parents:
            if parent not in self.transactions:
                raise InvalidParents(tx.id, "parent {} is not in the ledger".format(parent))
            if self.transactions[parent].issue_time >= tx.issue_time:
                raise InvalidParents(tx.id, "parent {} is not strictly earlier".format(parent))

        self.transactions[tx.id] = tx
        self.children[tx.id] = set()
        self.graph.add_node(tx.id)
        for parent in tx.parents:
            self.children[parent].add(tx.id)
            self.graph.add_edge(tx.id, parent)
            self.tips.discard(parent)
        self.tips.add(tx.id)
        self.clock = max(self.clock, tx.issue_time)
        self._next_id = max(self._next_id, tx.id + 1)
        if tx.issuer != SYSTEM_AGENT:
            self._last_by_issuer[tx.issuer] = tx.id
        if tx.spend_key is not None:
            self._spends.setdefault(tx.spend_key, []).append(tx.id)
        return tx

    def issue_transaction(  # pylint: disable=too-many-arguments
        self,
        issuer: AgentId,
        payload_digest: Digest,
        fee: int,
        rng: np.random.Generator,
        boxes: "Boxchain" = None,
        parents: Iterable[TxId] = None,
        spend_nonce: int = None,
        is_empty: bool = False,
        now: float = None,
        filter_conflicts: bool = True,
        prefer: TxId = None,
    ) -> Transaction:
        """Select parents, check them and append a new transaction.

        When ``boxes`` is given, the placement rule is checked before the transaction
        enters the ledger and the transaction then joins the open box. When no tip of the
        box before the open one is eligible, its other members are used instead.
        """
        if not is_empty and fee < self.min_fee:
            raise FeeTooLow(fee, self.min_fee)
        issue_time = self.clock if now is None else now

        if parents is None:
            try:
                chosen = self.select_tips(rng, boxes, issuer, filter_conflicts, prefer=prefer)
            except NoEligibleTips:
                if boxes is None:
                    raise
                LOGGER.debug("No eligible tips for agent %s; approving older members", issuer)
                chosen = self.select_tips(rng, boxes, issuer, filter_conflicts, include_non_tips=True, prefer=prefer)
        else:
            chosen = tuple(parents)
        if boxes is not None:
            boxes.check_placement(chosen)

        tx = self.append(
            Transaction(
                self._next_id,
                issuer,
                payload_digest,
                0 if is_empty else fee,
                chosen,
                issue_time,
                is_empty=is_empty,
                spend_nonce=spend_nonce,
            )
        )
        LOGGER.debug("Issued transaction %s by agent %s approving %s", tx.id, issuer, tx.parents)
        if boxes is not None:
            boxes.assign_to_box(self, tx)
        return tx

    def _candidates(
        self, boxes: Optional["Boxchain"], filter_conflicts: bool, include_non_tips: bool
    ) -> Tuple[List[TxId], Set[TxId]]:
        if boxes is None:
            eligible = list(self.tips)
            required = set(eligible)
        else:
            open_index = boxes.open_index
            pool = [
                member
                for index in (open_index - 1, open_index - 2)
                for member in boxes.members_of(index)
                if include_non_tips or member in self.tips
            ]
            eligible = sorted(member for member in pool if not boxes.is_excluded(member))
            required = {member for member in eligible if boxes.box_of(member) == open_index - 1}
        if filter_conflicts:
            eligible = [tx_id for tx_id in eligible if not self.is_suspicious(tx_id)]
            required &= set(eligible)
        return eligible, required

    def select_tips(  # pylint: disable=too-many-arguments
        self,
        rng: np.random.Generator,
        boxes: "Boxchain" = None,
        issuer: AgentId = None,
        filter_conflicts: bool = True,
        include_non_tips: bool = False,
        prefer: TxId = None,
    ) -> Tuple[TxId, ...]:
        """Choose two parents uniformly among the eligible tips.

        With a boxchain, the candidates lie in the two boxes before the open one and at
        least one of them lies in the box right before it. The issuer's previous
        transaction, or ``prefer``, takes one slot when it is a candidate. A single parent is returned
        while fewer than two candidates exist.
        """
        eligible, required = self._candidates(boxes, filter_conflicts, include_non_tips)
        if not required:
            raise NoEligibleTips()
        if len(eligible) < 2:
            return (eligible[0],)

        own = prefer if prefer is not None else self._last_by_issuer.get(issuer)
        if own in eligible:
            others = [tx_id for tx_id in eligible if tx_id != own]
            if own not in required:
                others = [tx_id for tx_id in others if tx_id in required]
            return own, others[int(rng.integers(len(others)))]

        for _ in range(MAX_TIP_DRAWS):
            first, second = rng.choice(len(eligible), size=2, replace=False)
            pair = (eligible[int(first)], eligible[int(second)])
            if pair[0] in required or pair[1] in required:
                return pair
        LOGGER.debug("Tip selection fell back after %d draws", MAX_TIP_DRAWS)
        forced = sorted(required)[int(rng.integers(len(required)))]
        rest = [tx_id for tx_id in eligible if tx_id != forced]
        return forced, rest[int(rng.integers(len(rest)))]

    def cumulative_weight(self, tx_id: TxId) -> int:
        """One plus the number of transactions that approve ``tx_id`` directly or indirectly."""
        self.get(tx_id)
        return 1 + len(nx.ancestors(self.graph, tx_id))

    def ancestor_closure(self, tx_id: TxId) -> Set[TxId]:
        """The transaction plus every transaction it approves directly or indirectly."""
        self.get(tx_id)
        return {tx_id} | nx.descendants(self.graph, tx_id)

    def approves(self, child: TxId, parent: TxId) -> bool:
        """True if ``child`` approves ``parent`` directly or indirectly."""
        self.get(child)
        self.get(parent)
        return child != parent and nx.has_path(self.graph, child, parent)

    def conflicts_of(self, tx_id: TxId) -> List[TxId]:
        """Other transactions spending the same key."""
        key = self.get(tx_id).spend_key
        if key is None:
            return []
        return [other for other in self._spends.get(key, []) if other != tx_id]

    def conflicting_pairs(self) -> Iterator[Tuple[TxId, TxId]]:
        """Every pair of transactions spending the same key, smaller id first."""
        for tx_ids in self._spends.values():
            for position, first in enumerate(tx_ids):
                for second in tx_ids[position + 1 :]:
                    yield first, second

    def parents_conflict(self, tx_id: TxId) -> bool:
        """True if the transaction approves both sides of a double spend."""
        parents = self.get(tx_id).parents
        return len(parents) == 2 and parents[1] in self.conflicts_of(parents[0])

    def is_suspicious(self, tx_id: TxId) -> bool:
        """Visible double spend, or an approval of one."""
        return bool(self.conflicts_of(tx_id)) or self.parents_conflict(tx_id)

    def detect_conflict(self, boxes: "Boxchain", tx_a: TxId, tx_b: TxId, strict: bool = True) -> ConflictVerdict:
        """Decide which of two conflicting transactions is rejected.

        Different boxes: the one in the later box. Same box: the lower cumulative
        weight. Equal weights: the boxer adjudicates and the smaller id survives.
        """
        if tx_b not in self.conflicts_of(tx_a):
            if strict:
                raise NotConflicting(tx_a, tx_b)
            return ConflictVerdict(ConflictOutcome.NO_CONFLICT)

        box_a, box_b = boxes.box_of(tx_a), boxes.box_of(tx_b)
        if box_a != box_b:
            later = tx_a if box_a > box_b else tx_b
            return ConflictVerdict(ConflictOutcome.REJECT_LATTER, later)

        weight_a, weight_b = self.cumulative_weight(tx_a), self.cumulative_weight(tx_b)
        if weight_a != weight_b:
            lighter = tx_a if weight_a < weight_b else tx_b
            return ConflictVerdict(ConflictOutcome.WEIGHT_TIEBREAK, lighter)
        return ConflictVerdict(ConflictOutcome.BOXER_ADJUDICATION, max(tx_a, tx_b))

    def as_poset(self) -> Poset:
        """The ledger as a poset of transaction ids."""
        return Poset(self.transactions.keys(), self.graph.edges())

    def height(self) -> int:
        """Number of transactions on the longest approval chain, genesis included."""
        return nx.dag_longest_path_length(self.graph) + 1
