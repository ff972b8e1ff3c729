"""Scenario configuration, read from flat scenario files."""
import logging
from pathlib import Path
from typing import List, Optional

import attr

from boxchain.boxes import CapacityDistribution
from boxchain.constants import (
    CFG_EXTENSION,
    DEFAULT_RATE_GUARD_FRACTION,
    DEFAULT_STANDING_THRESHOLD,
    DEFAULT_TAU_SEC,
    SCENARIOS_DIR,
    SECONDS_PER_MINUTE,
)
from boxchain.exceptions import ConfigError
from boxchain.formats import ScenarioFormat
from boxchain.rewards import RewardSchedule
from boxchain.schemas import ScenarioSchema, flatten_marshmallow_errors, located_errors
from boxchain.stochastics import IntensityFunction
from boxchain.typedefs import AgentId, JsonDict, PathOrStr

LOGGER = logging.getLogger(__name__)

HONEST = "honest"
LAZY = "lazy"
MALICIOUS = "malicious"
BEHAVIORS = (HONEST, LAZY, MALICIOUS)


@attr.s(frozen=True)
class AgentSpec:
    """One agent of a scenario: its behaviour, arrival intensity and initial standing."""

    id = attr.ib()  # type: AgentId
    behavior = attr.ib(validator=attr.validators.in_(BEHAVIORS))  # type: str
    arrival_stream = attr.ib()  # type: IntensityFunction
    standing = attr.ib(default=0)  # type: int


@attr.s(frozen=True)
class ScenarioConfig:  # pylint: disable=too-many-instance-attributes
    """Every knob of a simulated run. Rates are per minute, as in the scenario files."""

    seed = attr.ib(default=0)  # type: int
    horizon_sec = attr.ib(default=600.0)  # type: float
    tau_sec = attr.ib(default=DEFAULT_TAU_SEC)  # type: float
    capacity = attr.ib(default="degenerate:1000")  # type: str
    rate_guard_fraction = attr.ib(default=DEFAULT_RATE_GUARD_FRACTION)  # type: float
    min_fee = attr.ib(default=0)  # type: int
    fee = attr.ib(default=1)  # type: int

    honest_agents = attr.ib(default=5)  # type: int
    honest_rate_per_min = attr.ib(default=6.0)  # type: float
    lazy_agents = attr.ib(default=0)  # type: int
    lazy_rate_per_min = attr.ib(default=1.0)  # type: float
    malicious_agents = attr.ib(default=0)  # type: int
    malicious_rate_per_min = attr.ib(default=0.5)  # type: float
    malicious_burst_size = attr.ib(default=8)  # type: int
    malicious_standing = attr.ib(default=-5)  # type: int
    standing_threshold = attr.ib(default=DEFAULT_STANDING_THRESHOLD)  # type: int
    arrival_profile = attr.ib(default="")  # type: str

    reissue_stuck = attr.ib(default=True)  # type: bool
    reissue_delay_sec = attr.ib(default=1.0)  # type: float
    pow_delay_sec = attr.ib(default=0.0)  # type: float

    reward_primal_validation = attr.ib(default=1)  # type: int
    reward_dual_validation = attr.ib(default=1)  # type: int
    reward_boxer_job = attr.ib(default=5)  # type: int
    reward_genesis_job = attr.ib(default=10)  # type: int
    reward_abnormal_report = attr.ib(default=3)  # type: int

    attack_trials = attr.ib(default=0)  # type: int
    attack_genesis_share = attr.ib(default=0.0)  # type: float

    name = attr.ib(default="", eq=False)  # type: str

    def __attrs_post_init__(self):
        errors = ScenarioSchema().validate(self.as_dict())
        if errors:
            raise ConfigError(flatten_marshmallow_errors(errors).splitlines())
        if self.fee < self.min_fee:
            raise ConfigError(["fee: {} is below min_fee {}".format(self.fee, self.min_fee)])
        if self.arrival_profile.strip():
            profile = IntensityFunction.parse(self.arrival_profile)
            if profile.horizon < self.horizon_sec:
                raise ConfigError(
                    [
                        "arrival_profile: ends at {} but horizon_sec is {}".format(
                            profile.horizon, self.horizon_sec
                        )
                    ]
                )

    @classmethod
    def from_dict(cls, data: JsonDict, name: str = "") -> "ScenarioConfig":
        """Build from validated scenario data; missing keys take their defaults."""
        return cls(name=name, **data)

    def as_dict(self) -> JsonDict:
        """Scenario keys and values, as written in scenario files."""
        return attr.asdict(self, filter=lambda attribute, _: attribute.name != "name")

    def with_seed(self, seed: Optional[int]) -> "ScenarioConfig":
        """Copy with another seed; ``None`` keeps the current one."""
        return self if seed is None else attr.evolve(self, seed=seed)

    @property
    def rewards(self) -> RewardSchedule:
        """Fee and reward amounts."""
        return RewardSchedule(
            fee=self.fee,
            primal_validation=self.reward_primal_validation,
            dual_validation=self.reward_dual_validation,
            boxer_job=self.reward_boxer_job,
            genesis_job=self.reward_genesis_job,
            abnormal_report=self.reward_abnormal_report,
        )

    @property
    def capacity_distribution(self) -> CapacityDistribution:
        """Distribution of the box size ``M``."""
        return CapacityDistribution.parse(self.capacity)

    def intensity(self, rate_per_min: float) -> IntensityFunction:
        """Arrival intensity per second of one agent, shaped by the arrival profile."""
        rate = rate_per_min / SECONDS_PER_MINUTE
        if not self.arrival_profile.strip():
            return IntensityFunction.constant(rate, self.horizon_sec)
        return IntensityFunction.parse(self.arrival_profile, base_rate=rate)

    @property
    def agents(self) -> List[AgentSpec]:
        """Agents numbered from 1: honest first, then lazy, then malicious."""
        groups = [
            (HONEST, self.honest_agents, self.honest_rate_per_min, 0),
            (LAZY, self.lazy_agents, self.lazy_rate_per_min, 0),
            (MALICIOUS, self.malicious_agents, self.malicious_rate_per_min, self.malicious_standing),
        ]
        agents = []  # type: List[AgentSpec]
        for behavior, count, rate, standing in groups:
            for _ in range(count):
                agents.append(AgentSpec(len(agents) + 1, behavior, self.intensity(rate), standing))
        return agents

    @property
    def honest_rate_per_sec(self) -> float:
        """Arrival rate of the agents that are not attacking."""
        return (self.honest_agents * self.honest_rate_per_min + self.lazy_agents * self.lazy_rate_per_min) / (
            SECONDS_PER_MINUTE
        )

    @property
    def total_rate_per_sec(self) -> float:
        """Base arrival rate of every agent together."""
        return (
            self.honest_agents * self.honest_rate_per_min
            + self.lazy_agents * self.lazy_rate_per_min
            + self.malicious_agents * self.malicious_rate_per_min
        ) / SECONDS_PER_MINUTE


def resolve_scenario(reference: PathOrStr) -> Path:
    """Find a scenario file: a path on disk or the name of a bundled scenario, extension optional."""
    candidates = [Path(reference)]
    if not str(reference).endswith(CFG_EXTENSION):
        candidates.append(Path("{}{}".format(reference, CFG_EXTENSION)))
    name = Path(str(reference)).name
    candidates.append(SCENARIOS_DIR / (name if name.endswith(CFG_EXTENSION) else name + CFG_EXTENSION))
    for candidate in candidates:
        if candidate.is_file():
            LOGGER.debug("Scenario %s resolved to %s", reference, candidate)
            return candidate
    raise ConfigError(["Scenario not found: {}".format(reference)])


def bundled_scenarios() -> List[str]:
    """Names of the scenarios shipped with the package."""
    return sorted(path.stem for path in SCENARIOS_DIR.glob("*" + CFG_EXTENSION))


def load_scenario(reference: PathOrStr) -> ScenarioConfig:
    """Read, validate and build a scenario; errors point at the offending lines."""
    path = resolve_scenario(reference)
    scenario_file = ScenarioFormat(path=path)
    data = scenario_file.as_data
    errors = ScenarioSchema().validate(data)
    if errors:
        raise ConfigError(located_errors(path.name, scenario_file.as_string, errors))
    return ScenarioConfig.from_dict(dict(data), name=path.stem)
