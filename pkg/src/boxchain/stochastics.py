"""Workload and analysis models.

Poisson processes (homogeneous, nonhomogeneous and gamma-mixed), interarrival laws, flow
merging, compound distributions by recursion, attack probabilities, discounted fees and the
boxdollar valuation. Time is in seconds and rates are per second unless stated otherwise.
"""
import heapq
import logging
import math
from typing import Iterable, List, Sequence, Tuple

import attr
import numpy as np
from scipy import special, stats

from boxchain.constants import CONFIDENCE_LEVEL
from boxchain.exceptions import InvalidParameter, InvalidSeverity, OutOfDomain
from boxchain.generic import parse_pairs

LOGGER = logging.getLogger(__name__)

#: Above this mean, the Poisson pmf is evaluated in the log domain.
LOG_DOMAIN_MEAN = 50.0

SEVERITY_TOLERANCE = 1e-12


def _check(name: str, value: float, valid: bool, reason: str) -> None:
    if not valid:
        raise InvalidParameter(name, value, reason)


@attr.s(frozen=True)
class IntensityPiece:
    """``lambda(u) = intercept + slope * u`` on ``[t_start, t_end]``."""

    t_start = attr.ib()  # type: float
    t_end = attr.ib()  # type: float
    intercept = attr.ib()  # type: float
    slope = attr.ib(default=0.0)  # type: float

    def value(self, time):
        """Intensity at ``time`` (scalar or array)."""
        return self.intercept + self.slope * time

    def integral(self, start: float, end: float) -> float:
        """Closed-form integral over ``[start, end]`` clipped to the piece."""
        low, high = max(start, self.t_start), min(end, self.t_end)
        if high <= low:
            return 0.0
        return self.intercept * (high - low) + self.slope * (high * high - low * low) / 2.0


@attr.s(frozen=True)
class IntensityFunction:
    """A nonnegative piecewise affine intensity on ``[0, T]``."""

    pieces = attr.ib(converter=tuple)  # type: Tuple[IntensityPiece, ...]

    @pieces.validator
    def _check_pieces(self, attribute, value):  # pylint: disable=unused-argument
        if not value:
            raise InvalidParameter("pieces", value, "at least one piece is needed")
        if value[0].t_start != 0:
            raise InvalidParameter("t_start", value[0].t_start, "the first piece must start at 0")
        for previous, piece in zip(value, value[1:]):
            if piece.t_start != previous.t_end:
                raise InvalidParameter("t_start", piece.t_start, "pieces must be contiguous")
        for piece in value:
            if piece.t_end <= piece.t_start:
                raise InvalidParameter("t_end", piece.t_end, "pieces must have a positive length")
            if min(piece.value(piece.t_start), piece.value(piece.t_end)) < 0:
                raise InvalidParameter("intercept", piece.intercept, "the intensity must be nonnegative")

    @classmethod
    def constant(cls, rate: float, horizon: float) -> "IntensityFunction":
        """A homogeneous intensity."""
        return cls([IntensityPiece(0.0, horizon, rate)])

    @classmethod
    def parse(cls, text: str, base_rate: float = 1.0) -> "IntensityFunction":
        """Parse ``start:end:intercept:slope`` pieces separated by ``;``, scaled by ``base_rate``."""
        pieces = []
        for chunk in text.split(";"):
            if not chunk.strip():
                continue
            values = [float(part) for part in chunk.split(":")]
            if len(values) not in (3, 4):
                raise ValueError("Expected start:end:intercept[:slope], got {!r}".format(chunk.strip()))
            start, end, intercept = values[:3]
            slope = values[3] if len(values) == 4 else 0.0
            pieces.append(IntensityPiece(start, end, intercept * base_rate, slope * base_rate))
        return cls(pieces)

    @property
    def horizon(self) -> float:
        """End of the domain."""
        return self.pieces[-1].t_end

    def sup(self) -> float:
        """Largest value of the intensity (attained at a piece boundary)."""
        return max(max(piece.value(piece.t_start), piece.value(piece.t_end)) for piece in self.pieces)

    def values(self, times: np.ndarray) -> np.ndarray:
        """Vectorized intensity."""
        times = np.asarray(times, dtype=float)
        result = np.zeros_like(times)
        for position, piece in enumerate(self.pieces):
            last = position == len(self.pieces) - 1
            mask = (times >= piece.t_start) & ((times <= piece.t_end) if last else (times < piece.t_end))
            result[mask] = piece.value(times[mask])
        return result

    def scaled(self, factor: float) -> "IntensityFunction":
        """The intensity multiplied by a constant."""
        return IntensityFunction(
            IntensityPiece(p.t_start, p.t_end, p.intercept * factor, p.slope * factor) for p in self.pieces
        )


@attr.s(frozen=True)
class SeverityPmf:
    """A pmf on the positive integers with finite support."""

    probabilities = attr.ib(converter=lambda pairs: tuple(sorted(pairs)))  # type: Tuple[Tuple[int, float], ...]

    @probabilities.validator
    def _check_probabilities(self, attribute, value):  # pylint: disable=unused-argument
        if not value:
            raise InvalidSeverity("empty support")
        for size, probability in value:
            if int(size) != size or size <= 0:
                raise InvalidSeverity("support must be positive integers, got {}".format(size))
            if probability < 0:
                raise InvalidSeverity("negative probability {}".format(probability))
        total = math.fsum(probability for _, probability in value)
        if abs(total - 1.0) > SEVERITY_TOLERANCE:
            raise InvalidSeverity("probabilities sum to {}".format(total))

    @classmethod
    def parse(cls, text: str) -> "SeverityPmf":
        """Parse ``1:0.5,2:0.5``."""
        try:
            return cls((int(size), float(probability)) for size, probability in parse_pairs(text))
        except ValueError as err:
            raise InvalidSeverity(str(err)) from err

    @classmethod
    def degenerate(cls, size: int = 1) -> "SeverityPmf":
        """All the mass on one size."""
        return cls([(size, 1.0)])

    @property
    def support(self) -> np.ndarray:
        """Sizes, ascending."""
        return np.array([size for size, _ in self.probabilities])

    @property
    def masses(self) -> np.ndarray:
        """Probabilities aligned with ``support``."""
        return np.array([probability for _, probability in self.probabilities])

    def prob(self, size: int) -> float:
        """``P(X = size)``."""
        return dict(self.probabilities).get(size, 0.0)

    @property
    def mean(self) -> float:
        """``E(X)``."""
        return float(np.dot(self.support, self.masses))

    @property
    def second_moment(self) -> float:
        """``E(X^2)``."""
        return float(np.dot(self.support ** 2, self.masses))


@attr.s(frozen=True)
class CompoundPmf:
    """Probabilities ``f(0), ..., f(k_max)`` of an aggregate count."""

    values = attr.ib(converter=tuple)  # type: Tuple[float, ...]
    rate = attr.ib()  # type: float
    frequency = attr.ib(default="poisson")  # type: str

    def __getitem__(self, k: int) -> float:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        """Mean of the truncated distribution."""
        return float(sum(k * value for k, value in enumerate(self.values)))


def poisson_pmf(mu: float, k: int) -> float:
    """``P(N = k)`` for a Poisson count of mean ``mu``.

    Small means multiply up from ``e^-mu``; above ``LOG_DOMAIN_MEAN`` the value is
    computed from logarithms.
    """
    _check("mu", mu, mu >= 0, "must be nonnegative")
    _check("k", k, k >= 0, "must be a natural number")
    if mu == 0:
        return 1.0 if k == 0 else 0.0
    if mu <= LOG_DOMAIN_MEAN:
        value = math.exp(-mu)
        for i in range(1, k + 1):
            value *= mu / i
        return value
    return math.exp(k * math.log(mu) - mu - special.gammaln(k + 1))


def intensity_integral(f: IntensityFunction, s: float, t: float) -> float:
    """Mean number of events in ``[s, t]``."""
    if not 0 <= s <= t <= f.horizon:
        raise OutOfDomain(s, t, f.horizon)
    return float(sum(piece.integral(s, t) for piece in f.pieces))


def sample_homogeneous(rate: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted event times of a homogeneous process on ``[0, horizon]``."""
    _check("rate", rate, rate >= 0, "must be nonnegative")
    count = rng.poisson(rate * horizon)
    return np.sort(rng.uniform(0.0, horizon, count))


def sample_nonhomogeneous(f: IntensityFunction, rng: np.random.Generator) -> np.ndarray:
    """Sorted event times on ``[0, T]`` by thinning a homogeneous process at ``sup(f)``."""
    lambda_max = f.sup()
    if lambda_max <= 0:
        return np.empty(0)
    candidates = sample_homogeneous(lambda_max, f.horizon, rng)
    keep = rng.random(len(candidates)) * lambda_max < f.values(candidates)
    return candidates[keep]


def sample_window_counts(
    f: IntensityFunction, s: float, t: float, replications: int, rng: np.random.Generator
) -> np.ndarray:
    """Event counts in ``[s, t]`` for many independent thinned paths at once."""
    if not 0 <= s <= t <= f.horizon:
        raise OutOfDomain(s, t, f.horizon)
    lambda_max = f.sup()
    if lambda_max <= 0 or t == s:
        return np.zeros(replications, dtype=int)
    candidates = rng.poisson(lambda_max * (t - s), replications)
    times = rng.uniform(s, t, int(candidates.sum()))
    keep = rng.random(len(times)) * lambda_max < f.values(times)
    owners = np.repeat(np.arange(replications), candidates)
    return np.bincount(owners[keep], minlength=replications)


def sample_mixed_poisson(r: float, p_param: float, t: float, rng: np.random.Generator, size: int = None):
    """Poisson count with a gamma-distributed time scale.

    The scale has shape ``r`` and scale ``(1 - p) / p``; at ``t = 1`` the marginal law is
    negative binomial ``(r, p)``.
    """
    _check("r", r, r > 0, "must be positive")
    _check("p_param", p_param, 0 < p_param < 1, "must be in (0, 1)")
    _check("t", t, t >= 0, "must be nonnegative")
    theta = rng.gamma(shape=r, scale=(1.0 - p_param) / p_param, size=size)
    return rng.poisson(theta * t)


def merge_flows(rates: Iterable[float]) -> float:
    """Rate of the superposition of independent Poisson flows."""
    total = 0.0
    for rate in rates:
        _check("rate", rate, rate >= 0, "must be nonnegative")
        total += rate
    return total


def sample_merged_flows(
    rates: Sequence[float], horizon: float, rng: np.random.Generator
) -> List[Tuple[float, int]]:
    """Interleave independent flows into one stream of ``(time, flow index)``."""
    merge_flows(rates)
    flows = [
        [(float(time), index) for time in sample_homogeneous(rate, horizon, rng)] for index, rate in enumerate(rates)
    ]
    return list(heapq.merge(*flows))


def erlang_pdf(n: int, lam: float, x: float) -> float:
    """Density of the time of the ``n``-th event."""
    _check("n", n, int(n) == n and n >= 1, "must be a positive integer")
    _check("lambda", lam, lam > 0, "must be positive")
    _check("x", x, x >= 0, "must be nonnegative")
    if x == 0:
        return lam if n == 1 else 0.0
    return math.exp(n * math.log(lam) + (n - 1) * math.log(x) - lam * x - special.gammaln(n))


def erlang_cdf(n: int, lam: float, t: float) -> float:
    """``P(W_n <= t)``; ``F_0`` is 1."""
    _check("n", n, int(n) == n and n >= 0, "must be a natural number")
    _check("lambda", lam, lam > 0, "must be positive")
    if n == 0:
        return 1.0
    return float(special.gammainc(n, lam * t))


def poisson_count_probability(n: int, lam: float, t: float) -> float:
    """``P_n(t) = F_n(t) - F_(n+1)(t)``, the probability of exactly ``n`` events by ``t``."""
    if n == 0:
        _check("lambda", lam, lam >= 0, "must be nonnegative")
        return math.exp(-lam * t)
    return erlang_cdf(n, lam, t) - erlang_cdf(n + 1, lam, t)


def expected_discounted_fees(lam: float, beta: float, t: float, fee: float = 1.0) -> float:
    """``E(sum of e^(-beta W_k))`` over events in ``(0, t)``, ``fee`` per event."""
    _check("lambda", lam, lam >= 0, "must be nonnegative")
    _check("beta", beta, beta != 0, "must be positive; without discount the value is lambda * t")
    _check("beta", beta, beta > 0, "must be positive")
    _check("t", t, t >= 0, "must be nonnegative")
    return fee * lam / beta * (1.0 - math.exp(-beta * t))


def simulate_discounted_fees(
    lam: float, beta: float, t: float, replications: int, rng: np.random.Generator
) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of the discounted fees.

    Given their count, event times are independent uniforms on ``(0, t)``.
    """
    counts = rng.poisson(lam * t, replications)
    times = rng.uniform(0.0, t, int(counts.sum()))
    owners = np.repeat(np.arange(replications), counts)
    totals = np.bincount(owners, weights=np.exp(-beta * times), minlength=replications)
    return float(totals.mean()), float(totals.std(ddof=1) / math.sqrt(replications))


def attack_success_prob(lam: float, tau: float) -> float:
    """Probability that no honest transaction arrives while two boxes form, ``e^(-2 lambda tau)``."""
    _check("lambda", lam, lam >= 0, "must be nonnegative")
    _check("tau", tau, tau >= 0, "must be nonnegative")
    return math.exp(-2.0 * lam * tau)


def min_tau_for_bound(lam: float, p_max: float) -> float:
    """Smallest ``tau`` whose attack success probability is at most ``p_max``."""
    _check("lambda", lam, lam > 0, "must be positive")
    _check("p_max", p_max, 0 < p_max <= 1, "must be in (0, 1]")
    if p_max == 1:
        return 0.0
    return math.log(p_max) / (-2.0 * lam)


def panjer_compound_pmf(lam: float, severity: SeverityPmf, k_max: int) -> CompoundPmf:
    """Compound Poisson pmf by recursion.

    ``f(0) = e^-lambda`` and ``f(k) = lambda / k * sum_i i g(i) f(k - i)``.
    """
    _check("lambda", lam, lam >= 0, "must be nonnegative")
    _check("k_max", k_max, k_max >= 0, "must be a natural number")
    values = np.zeros(k_max + 1)
    values[0] = math.exp(-lam)
    weights = _severity_vector(severity, k_max)
    sizes = np.arange(k_max + 1)
    for k in range(1, k_max + 1):
        i = sizes[1 : k + 1]
        values[k] = lam / k * float(np.dot(i * weights[1 : k + 1], values[k - i]))
    return CompoundPmf(values.tolist(), lam)


def panjer_negative_binomial_pmf(r: float, p_param: float, severity: SeverityPmf, k_max: int) -> CompoundPmf:
    """Compound negative binomial pmf, for a gamma-mixed Poisson frequency.

    ``f(0) = p^r`` and ``f(k) = sum_i (a + b i / k) g(i) f(k - i)`` with ``a = 1 - p``
    and ``b = (r - 1)(1 - p)``.
    """
    _check("r", r, r > 0, "must be positive")
    _check("p_param", p_param, 0 < p_param < 1, "must be in (0, 1)")
    _check("k_max", k_max, k_max >= 0, "must be a natural number")
    a = 1.0 - p_param
    b = (r - 1.0) * a
    values = np.zeros(k_max + 1)
    values[0] = p_param ** r
    weights = _severity_vector(severity, k_max)
    sizes = np.arange(k_max + 1)
    for k in range(1, k_max + 1):
        i = sizes[1 : k + 1]
        values[k] = float(np.dot((a + b * i / k) * weights[1 : k + 1], values[k - i]))
    return CompoundPmf(values.tolist(), r * a / p_param, frequency="negative_binomial")


def _severity_vector(severity: SeverityPmf, k_max: int) -> np.ndarray:
    weights = np.zeros(k_max + 1)
    for size, probability in severity.probabilities:
        if size <= k_max:
            weights[size] = probability
    return weights


def merge_compound_flows(flows: Sequence[Tuple[float, SeverityPmf]]) -> Tuple[float, SeverityPmf]:
    """Aggregate independent compound Poisson flows into one.

    The rate is the sum of the rates; the severity is the mixture weighted by rate.
    """
    if not flows:
        raise InvalidParameter("flows", flows, "at least one flow is needed")
    total = merge_flows(rate for rate, _ in flows)
    if total == 0:
        return 0.0, flows[0][1]
    mixture = {}  # type: dict
    for rate, severity in flows:
        for size, probability in severity.probabilities:
            mixture[size] = mixture.get(size, 0.0) + rate / total * probability
    rest = 1.0 - math.fsum(mixture.values())
    largest = max(mixture, key=lambda size: mixture[size])
    mixture[largest] += rest
    return total, SeverityPmf(mixture.items())


def sample_compound(
    lam: float, severity: SeverityPmf, t: float, replications: int, rng: np.random.Generator
) -> np.ndarray:
    """Simulated values of ``S(t)``, the sum of the sizes of the events up to ``t``."""
    _check("lambda", lam, lam >= 0, "must be nonnegative")
    counts = rng.poisson(lam * t, replications)
    sizes = rng.choice(severity.support, size=int(counts.sum()), p=severity.masses)
    owners = np.repeat(np.arange(replications), counts)
    return np.bincount(owners, weights=sizes, minlength=replications)


def mean_confirmation_time(tau: float) -> float:
    """Expected confirmation latency, ``1.5 tau``: the average of ``tau < T < 2 tau``."""
    _check("tau", tau, tau > 0, "must be positive")
    return 1.5 * tau


def boxdollar_value(m0: float, r: float, delta: float, t: float) -> float:
    """Value ``e^((r - delta) t) M_0`` of a boxdollar reserve."""
    _check("m0", m0, m0 >= 0, "must be nonnegative")
    _check("t", t, t >= 0, "must be nonnegative")
    return m0 * math.exp((r - delta) * t)


def binomial_interval(successes: int, trials: int, level: float = CONFIDENCE_LEVEL) -> Tuple[float, float]:
    """Clopper-Pearson interval for a binomial proportion."""
    _check("trials", trials, trials >= 1, "must be positive")
    _check("successes", successes, 0 <= successes <= trials, "must be between 0 and trials")
    alpha = 1.0 - level
    low = 0.0 if successes == 0 else float(stats.beta.ppf(alpha / 2, successes, trials - successes + 1))
    high = 1.0 if successes == trials else float(stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return low, high
