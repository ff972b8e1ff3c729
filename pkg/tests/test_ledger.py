"""Primal layer tests."""
import pytest
from testfixtures import compare

from boxchain.boxes import Boxchain
from boxchain.constants import ZERO_DIGEST
from boxchain.exceptions import FeeTooLow, InvalidParents, NotConflicting, RankViolation, UnknownTransaction
from boxchain.ledger import ConflictOutcome, ConflictVerdict, DagLedger, Transaction
from boxchain.streams import stream


def _tx(tx_id, parents, time, issuer=None, nonce=None):
    return Transaction(tx_id, tx_id if issuer is None else issuer, ZERO_DIGEST, 1, parents, time, spend_nonce=nonce)


def test_fixture_weights_and_tips(fixture_ledger):
    """Every transaction approves the genesis; the tips are not approved by anyone."""
    compare(len(fixture_ledger), 20)
    compare(fixture_ledger.cumulative_weight(1), 20)
    compare(fixture_ledger.cumulative_weight(19), 1)
    compare(fixture_ledger.cumulative_weight(13), 6)
    compare(list(fixture_ledger.tips), [15, 18, 19, 20])
    compare(fixture_ledger.height(), 7)


def test_fixture_closure(fixture_ledger):
    """The closure holds every transaction approved directly or indirectly."""
    compare(fixture_ledger.ancestor_closure(12), {1, 2, 3, 4, 5, 6, 7, 9, 10, 12})
    assert fixture_ledger.approves(12, 3)
    assert not fixture_ledger.approves(3, 12)
    assert not fixture_ledger.approves(12, 12)


def test_closure_with_several_roots():
    """Seven transactions, four of them without parents."""
    ledger = DagLedger.from_transactions(
        [
            _tx(1, (), 1.0),
            _tx(2, (), 2.0),
            _tx(3, (), 3.0),
            _tx(4, (), 4.0),
            _tx(5, (2, 1), 5.0),
            _tx(6, (4, 3), 6.0),
            _tx(7, (6, 5), 7.0),
        ]
    )
    compare(ledger.ancestor_closure(7), {1, 2, 3, 4, 5, 6, 7})
    compare(ledger.ancestor_closure(5), {1, 2, 5})
    compare(ledger.cumulative_weight(1), 3)
    compare(ledger.as_poset().minimal, frozenset({1, 2, 3, 4}))


def test_issue_without_boxes():
    """Without boxes, the parents are drawn among the tips."""
    ledger = DagLedger()
    rng = stream(0, "tips")
    first = ledger.issue_transaction(1, ZERO_DIGEST, 1, rng, now=1.0)
    second = ledger.issue_transaction(2, ZERO_DIGEST, 1, rng, now=2.0)
    compare(first.parents, (1,))
    compare(second.parents, (first.id,))
    compare(list(ledger.tips), [second.id])
    compare(ledger.last_by(1), first.id)
    compare(ledger.next_id(), 4)


def test_two_parents_are_drawn_from_the_tips():
    """With several tips, two distinct ones are approved."""
    ledger = DagLedger()
    for tx_id in (2, 3, 4):
        ledger.append(_tx(tx_id, (1,), float(tx_id)))
    tx = ledger.issue_transaction(9, ZERO_DIGEST, 1, stream(3, "tips"), now=5.0)
    compare(len(set(tx.parents)), 2)
    assert set(tx.parents) <= {2, 3, 4}


def test_fee_below_minimum():
    """Regular transactions pay at least the minimum fee; empty ones are free."""
    ledger = DagLedger(min_fee=2)
    with pytest.raises(FeeTooLow):
        ledger.issue_transaction(1, ZERO_DIGEST, 1, stream(0, "tips"), now=1.0)
    empty = ledger.issue_transaction(1, ZERO_DIGEST, 0, stream(0, "tips"), now=1.0, is_empty=True)
    compare(empty.fee, 0)


@pytest.mark.parametrize(
    "tx, reason",
    [
        (_tx(2, (), 2.0), "only the genesis has no parents"),
        (_tx(2, (1, 1), 2.0), "expected one or two distinct parents"),
        (_tx(2, (7,), 2.0), "parent 7 is not in the ledger"),
        (_tx(2, (1,), 0.5), "parent 1 is not strictly earlier"),
        (_tx(1, (1,), 2.0), "duplicate transaction id"),
    ],
)
def test_invalid_parents(tx, reason):
    """Malformed approvals are refused before the ledger changes."""
    ledger = DagLedger(genesis_time=1.0)
    with pytest.raises(InvalidParents) as err:
        ledger.append(tx)
    assert reason in str(err.value)
    compare(len(ledger), 1)


def test_unknown_transaction():
    """Lookups of missing ids fail with the ledger error."""
    with pytest.raises(UnknownTransaction) as err:
        DagLedger().get(42)
    compare(err.value.pretty(), "BXC201 Unknown transaction 42")


def test_conflicts_are_visible():
    """Two transactions spending the same key conflict; approving both is suspicious."""
    ledger = DagLedger()
    ledger.append(_tx(2, (1,), 1.0, issuer=7, nonce=0))
    ledger.append(_tx(3, (1,), 2.0, issuer=7, nonce=0))
    ledger.append(_tx(4, (2, 3), 3.0, issuer=8))
    ledger.append(_tx(5, (4,), 4.0, issuer=7, nonce=1))
    compare(ledger.conflicts_of(2), [3])
    compare(list(ledger.conflicting_pairs()), [(2, 3)])
    assert ledger.is_suspicious(2)
    assert ledger.parents_conflict(4)
    assert ledger.is_suspicious(4)
    assert not ledger.is_suspicious(5)


def test_honest_selection_skips_suspicious_tips():
    """Conflicting tips are left out unless the issuer does not filter them."""
    ledger = DagLedger()
    ledger.append(_tx(2, (1,), 1.0, issuer=7, nonce=0))
    ledger.append(_tx(3, (1,), 2.0, issuer=7, nonce=0))
    ledger.append(_tx(4, (1,), 3.0, issuer=8))
    compare(ledger.select_tips(stream(0, "tips"), issuer=9), (4,))
    compare(len(ledger.select_tips(stream(0, "tips"), issuer=9, filter_conflicts=False)), 2)


def test_detect_conflict():
    """Later box loses; in the same box the lighter one loses; equal weights go to the boxer."""
    ledger = DagLedger()
    boxes = Boxchain(tau=10.0)
    rng = stream(0, "tips")
    first = ledger.issue_transaction(
        5, ZERO_DIGEST, 1, rng, boxes=boxes, spend_nonce=0, now=1.0, filter_conflicts=False
    )
    second = ledger.issue_transaction(
        5, ZERO_DIGEST, 1, rng, boxes=boxes, spend_nonce=0, now=2.0, filter_conflicts=False
    )
    compare(boxes.box_of(first.id), 1)
    compare(boxes.box_of(second.id), 1)
    compare(
        ledger.detect_conflict(boxes, first.id, second.id),
        ConflictVerdict(ConflictOutcome.BOXER_ADJUDICATION, second.id),
    )

    boxes.close_open_box(10.0)
    approver = ledger.issue_transaction(6, ZERO_DIGEST, 1, rng, boxes=boxes, parents=(second.id,), now=11.0)
    compare(boxes.box_of(approver.id), 2)
    compare(
        ledger.detect_conflict(boxes, first.id, second.id),
        ConflictVerdict(ConflictOutcome.WEIGHT_TIEBREAK, first.id),
    )

    late = ledger.issue_transaction(
        5, ZERO_DIGEST, 1, rng, boxes=boxes, parents=(second.id,), spend_nonce=0, now=12.0
    )
    compare(ledger.detect_conflict(boxes, first.id, late.id), ConflictVerdict(ConflictOutcome.REJECT_LATTER, late.id))

    with pytest.raises(NotConflicting):
        ledger.detect_conflict(boxes, approver.id, first.id)
    compare(
        ledger.detect_conflict(boxes, approver.id, first.id, strict=False),
        ConflictVerdict(ConflictOutcome.NO_CONFLICT),
    )


def test_verdict_needs_a_rejected_id_iff_conflicting():
    """A verdict without conflict cannot reject anything, and the other way round."""
    with pytest.raises(ValueError):
        ConflictVerdict(ConflictOutcome.NO_CONFLICT, 3)
    with pytest.raises(ValueError):
        ConflictVerdict(ConflictOutcome.REJECT_LATTER)


def test_placement_is_checked_before_appending():
    """Parents two boxes below the open box are refused and the ledger is unchanged."""
    ledger = DagLedger()
    boxes = Boxchain(tau=10.0)
    rng = stream(0, "tips")
    ledger.issue_transaction(1, ZERO_DIGEST, 1, rng, boxes=boxes, now=1.0)
    boxes.close_open_box(10.0)
    ledger.issue_transaction(2, ZERO_DIGEST, 1, rng, boxes=boxes, now=11.0)
    boxes.close_open_box(20.0)
    with pytest.raises(RankViolation):
        ledger.issue_transaction(3, ZERO_DIGEST, 1, rng, boxes=boxes, parents=(1,), now=21.0)
    compare(len(ledger), 3)
