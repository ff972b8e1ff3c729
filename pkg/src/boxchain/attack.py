"""Double-spend burst attack trials.

A trial succeeds when the attacker's burst owns two back-to-back boxes, that is when no
honest transaction arrives while they form. A takeover additionally needs the attacker to
be chosen as box-genesis of both boxes.
"""
import logging
import math
from typing import List, Tuple

import attr
import numpy as np
from joblib import Parallel, delayed
from more_itertools import chunked

from boxchain.boxes import Boxchain, CapacityDistribution
from boxchain.constants import BURST_SPACING_SEC, CONFIDENCE_LEVEL, TRIALS_PER_LEAF
from boxchain.exceptions import InvalidParameter, NoEligibleTips, RankViolation
from boxchain.generic import name_value, sha256_digest
from boxchain.ledger import DagLedger
from boxchain.standing import StandingBook
from boxchain.stochastics import attack_success_prob, binomial_interval
from boxchain.streams import stream

LOGGER = logging.getLogger(__name__)

#: Leaves handed to one worker at a time.
LEAVES_PER_TASK = 64


@attr.s(frozen=True)
class AttackResult:  # pylint: disable=too-many-instance-attributes
    """Counts of a batch of trials, with the empirical rate and its confidence interval."""

    lambda_per_sec = attr.ib()  # type: float
    tau = attr.ib()  # type: float
    trials = attr.ib()  # type: int
    successes = attr.ib()  # type: int
    takeovers = attr.ib()  # type: int
    ci_low = attr.ib()  # type: float
    ci_high = attr.ib()  # type: float

    @property
    def rate(self) -> float:
        """Empirical success rate."""
        return self.successes / self.trials

    @property
    def takeover_rate(self) -> float:
        """Empirical end-to-end takeover rate."""
        return self.takeovers / self.trials

    @property
    def closed_form(self) -> float:
        """``e^(-2 lambda tau)``."""
        return attack_success_prob(self.lambda_per_sec, self.tau)

    @property
    def covers_closed_form(self) -> bool:
        """True if the confidence interval contains the closed form."""
        return self.ci_low <= self.closed_form <= self.ci_high

    def lines(self) -> List[str]:
        """``name=value`` output lines."""
        return [
            name_value("trials", self.trials),
            name_value("successes", self.successes),
            name_value("empirical_rate", float(self.rate)),
            name_value("ci_low", self.ci_low),
            name_value("ci_high", self.ci_high),
            name_value("closed_form", self.closed_form),
            name_value("covers_closed_form", int(self.covers_closed_form)),
            name_value("takeovers", self.takeovers),
            name_value("takeover_rate", float(self.takeover_rate)),
        ]


def _leaf(lambda_per_sec: float, tau: float, size: int, seed: int, leaf: int, genesis_share: float) -> Tuple[int, int]:
    rng = stream(seed, "attack/{}".format(leaf))
    if lambda_per_sec > 0:
        first_honest = rng.exponential(1.0 / lambda_per_sec, size)
    else:
        first_honest = np.full(size, np.inf)
    dominated = first_honest > 2.0 * tau
    geneses = rng.random((size, 2)) < genesis_share
    takeover = dominated & geneses.all(axis=1)
    return int(dominated.sum()), int(takeover.sum())


def _task(lambda_per_sec, tau, trials, seed, genesis_share, leaves) -> Tuple[int, int]:
    successes = takeovers = 0
    for leaf in leaves:
        size = min(TRIALS_PER_LEAF, trials - leaf * TRIALS_PER_LEAF)
        leaf_successes, leaf_takeovers = _leaf(lambda_per_sec, tau, size, seed, leaf, genesis_share)
        successes += leaf_successes
        takeovers += leaf_takeovers
    return successes, takeovers


def run_attack_trials(  # pylint: disable=too-many-arguments
    lambda_per_sec: float,
    tau: float,
    trials: int,
    seed: int = 0,
    genesis_share: float = 0.0,
    parallel: int = 1,
    level: float = CONFIDENCE_LEVEL,
) -> AttackResult:
    """Run vectorised trials of the burst attack.

    Trials are grouped in leaves of ``TRIALS_PER_LEAF`` with one random stream each, so the
    counts do not depend on the number of parallel workers.
    """
    if trials < 1:
        raise InvalidParameter("trials", trials, "must be at least 1")
    if lambda_per_sec < 0 or tau < 0:
        raise InvalidParameter("lambda/tau", (lambda_per_sec, tau), "must be nonnegative")
    leaves = range(math.ceil(trials / TRIALS_PER_LEAF))
    tasks = (
        delayed(_task)(lambda_per_sec, tau, trials, seed, genesis_share, chunk)
        for chunk in chunked(leaves, LEAVES_PER_TASK)
    )
    counts = Parallel(n_jobs=parallel)(tasks)
    successes = sum(count[0] for count in counts)
    takeovers = sum(count[1] for count in counts)
    ci_low, ci_high = binomial_interval(successes, trials, level)
    LOGGER.info("%d of %d attack trials succeeded", successes, trials)
    return AttackResult(lambda_per_sec, tau, trials, successes, takeovers, ci_low, ci_high)


@attr.s(frozen=True)
class TrialOutcome:
    """What one full-mechanics trial produced."""

    dominated = attr.ib()  # type: bool
    double_confirmed = attr.ib()  # type: bool
    first_honest = attr.ib()  # type: float


HONEST_ISSUERS = (1, 2)
ATTACKER = 3
CLEAN_ATTACKER = 4
LATE_ATTACKER = 5


def replay_attack_trial(lambda_per_sec: float, tau: float, seed: int = 0, trial: int = 0) -> TrialOutcome:
    """One trial through the real ledger and boxchain.

    The attacker double-spends right after box 1 opens, adds a clean transaction, and adds
    another one right after box 2 opens. One honest agent arrives after an exponential
    time; the other closes box 3 so that box 2 gets confirmed.
    """
    rng = stream(seed, "attack-replay/{}".format(trial))
    first_honest = float(rng.exponential(1.0 / lambda_per_sec)) if lambda_per_sec > 0 else math.inf

    standings = StandingBook()
    for agent in HONEST_ISSUERS:
        standings.register(agent)
    for agent in (ATTACKER, CLEAN_ATTACKER, LATE_ATTACKER):
        standings.register(agent, -1)
    ledger = DagLedger()
    boxes = Boxchain(
        tau=tau,
        capacity=CapacityDistribution.degenerate(1000),
        rate_guard_fraction=0.0,
        capacity_rng=stream(seed, "attack-replay/{}/capacity".format(trial)),
        genesis_rng=stream(seed, "attack-replay/{}/genesis".format(trial)),
        standings=standings,
    )

    epsilon = BURST_SPACING_SEC
    # (time, order, issuer, spend nonce); issuer None is the box timer
    events = [
        (epsilon, 0, ATTACKER, 0),
        (2 * epsilon, 1, ATTACKER, 0),
        (3 * epsilon, 2, CLEAN_ATTACKER, 0),
        (tau + 2 * epsilon, 3, LATE_ATTACKER, 0),
        (2 * tau + epsilon, 4, HONEST_ISSUERS[1], None),
        (tau, 5, None, None),
        (2 * tau, 6, None, None),
        (3 * tau, 7, None, None),
    ]
    if first_honest <= 3 * tau:
        events.append((first_honest, 8, HONEST_ISSUERS[0], None))

    for now, _, issuer, nonce in sorted(events):
        if issuer is not None:
            try:
                ledger.issue_transaction(
                    issuer,
                    sha256_digest(str(now).encode("utf-8")),
                    1,
                    rng,
                    boxes=boxes,
                    spend_nonce=nonce,
                    now=now,
                    filter_conflicts=issuer in HONEST_ISSUERS,
                )
            except (NoEligibleTips, RankViolation) as err:
                LOGGER.debug("Trial %s: agent %s could not issue: %s", trial, issuer, err)
        if boxes.maybe_close_box(now) is not None:
            boxes.confirm_after_close(ledger)

    attacker_ids = {tx.id for tx in ledger if tx.issuer in (ATTACKER, CLEAN_ATTACKER, LATE_ATTACKER)}
    first_two = boxes.members_of(1) + boxes.members_of(2)
    dominated = bool(boxes.members_of(2)) and attacker_ids.issuperset(first_two)
    double_confirmed = any(boxes.is_final(a) and boxes.is_final(b) for a, b in ledger.conflicting_pairs())
    return TrialOutcome(dominated, double_confirmed, first_honest)
