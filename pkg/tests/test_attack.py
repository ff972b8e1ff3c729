"""Burst attack trial tests."""
import math

import pytest
from testfixtures import compare

from boxchain.attack import replay_attack_trial, run_attack_trials
from boxchain.exceptions import InvalidParameter
from boxchain.stochastics import attack_success_prob, binomial_interval


def test_empirical_rate_is_close_to_the_closed_form():
    """With one honest arrival per second and boxes of half a second, about e^-1 of the bursts win."""
    result = run_attack_trials(1.0, 0.5, 100000, seed=3, level=1 - 1e-9)
    assert abs(result.rate - math.exp(-1)) < 0.01
    assert result.ci_low < result.rate < result.ci_high
    assert result.covers_closed_form
    compare(result.closed_form, math.exp(-1))


def test_counts_do_not_depend_on_the_workers():
    """Every leaf of trials has its own stream, whatever the number of workers."""
    serial = run_attack_trials(0.5, 1.0, 5000, seed=11)
    parallel = run_attack_trials(0.5, 1.0, 5000, seed=11, parallel=2)
    compare(serial, parallel)
    compare(serial.trials, 5000)


def test_takeover_needs_both_geneses():
    """Without good-standing agents the attacker never takes over; with all of them, every win is a takeover."""
    none = run_attack_trials(0.5, 1.0, 3000, seed=2, genesis_share=0.0)
    compare(none.takeovers, 0)
    every = run_attack_trials(0.5, 1.0, 3000, seed=2, genesis_share=1.0)
    compare(every.takeovers, every.successes)


def test_no_honest_traffic_always_wins():
    """Without honest arrivals every burst owns its two boxes."""
    result = run_attack_trials(0.0, 10.0, 2048)
    compare(result.successes, 2048)
    compare(result.ci_high, 1.0)


def test_lines():
    """Printed result lines, in order."""
    result = run_attack_trials(0.5, 20.0, 1000)
    compare(
        [line.split("=")[0] for line in result.lines()],
        [
            "trials",
            "successes",
            "empirical_rate",
            "ci_low",
            "ci_high",
            "closed_form",
            "covers_closed_form",
            "takeovers",
            "takeover_rate",
        ],
    )
    assert "trials=1000" in result.lines()
    assert "closed_form=2.06115362244e-09" in result.lines()


@pytest.mark.parametrize("trials, lambda_per_sec, tau", [(0, 1.0, 1.0), (10, -1.0, 1.0), (10, 1.0, -1.0)])
def test_invalid_trials(trials, lambda_per_sec, tau):
    """Trials must be positive and rates nonnegative."""
    with pytest.raises(InvalidParameter):
        run_attack_trials(lambda_per_sec, tau, trials)


def test_replayed_trial_without_honest_traffic():
    """The attacker owns the first two boxes but its double spend is never confirmed twice."""
    outcome = replay_attack_trial(0.0, 10.0)
    assert outcome.dominated
    assert not outcome.double_confirmed
    compare(outcome.first_honest, math.inf)


def test_replayed_trial_with_fast_honest_traffic():
    """An honest transaction lands in the first box."""
    outcome = replay_attack_trial(1000.0, 10.0, seed=1)
    assert not outcome.dominated
    assert not outcome.double_confirmed


def test_replayed_trials_agree_with_the_fast_model():
    """Bursts replayed through the ledger and the boxchain win as often as the vectorised trials."""
    lambda_per_sec, tau, trials = 0.1, 5.0, 400
    dominated = sum(replay_attack_trial(lambda_per_sec, tau, seed=17, trial=trial).dominated for trial in range(trials))
    low, high = binomial_interval(dominated, trials, level=0.999)
    assert low <= attack_success_prob(lambda_per_sec, tau) <= high

    fast = run_attack_trials(lambda_per_sec, tau, 20000, seed=17, level=0.999)
    assert low <= fast.rate <= high
