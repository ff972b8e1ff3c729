"""Scenario configuration tests."""
import pytest
from testfixtures import compare

from boxchain.config import HONEST, LAZY, MALICIOUS, ScenarioConfig, bundled_scenarios, load_scenario
from boxchain.exceptions import ConfigError
from boxchain.stochastics import intensity_integral
from tests.helpers import WorkspaceMock


def test_defaults_are_valid():
    """The default scenario has five honest agents numbered from 1."""
    config = ScenarioConfig()
    compare([agent.id for agent in config.agents], [1, 2, 3, 4, 5])
    compare({agent.behavior for agent in config.agents}, {HONEST})
    compare(config.capacity_distribution.support, (1000,))
    compare(config.rewards.genesis_job, 10)


def test_agents_by_behaviour():
    """Honest agents come first, then lazy, then malicious ones with their own standing."""
    config = ScenarioConfig(honest_agents=2, lazy_agents=1, malicious_agents=2, malicious_standing=-2)
    compare([(agent.id, agent.behavior, agent.standing) for agent in config.agents], [
        (1, HONEST, 0),
        (2, HONEST, 0),
        (3, LAZY, 0),
        (4, MALICIOUS, -2),
        (5, MALICIOUS, -2),
    ])


def test_rates():
    """Rates per minute become rates per second; malicious agents do not count as honest traffic."""
    config = ScenarioConfig(
        honest_agents=5, honest_rate_per_min=6, lazy_agents=2, lazy_rate_per_min=3, malicious_agents=1
    )
    assert config.honest_rate_per_sec == pytest.approx(0.6)
    assert config.total_rate_per_sec == pytest.approx(0.6 + 0.5 / 60)


def test_arrival_profile_shapes_every_agent():
    """A profile multiplies the base rate of each agent."""
    config = ScenarioConfig(horizon_sec=4, honest_rate_per_min=60, arrival_profile="0:2:1;2:4:2")
    intensity = config.agents[0].arrival_stream
    assert intensity_integral(intensity, 0, 4) == pytest.approx(6.0)


@pytest.mark.parametrize(
    "kwargs, key",
    [
        ({"honest_agents": 0}, "honest_agents"),
        ({"tau_sec": 0}, "tau_sec"),
        ({"seed": 1.5}, "seed"),
        ({"capacity": "binomial:3"}, "capacity"),
        ({"rate_guard_fraction": 2.0}, "rate_guard_fraction"),
        ({"malicious_burst_size": 1}, "malicious_burst_size"),
        ({"arrival_profile": "0:1"}, "arrival_profile"),
    ],
)
def test_invalid_values(kwargs, key):
    """Each invalid key is reported on its own line."""
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(**kwargs)
    compare(len(err.value.lines), 1)
    assert err.value.lines[0].startswith(key + ": ")


def test_fee_below_minimum():
    """The fee must cover the minimum fee."""
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(fee=1, min_fee=2)
    compare(err.value.lines, ["fee: 1 is below min_fee 2"])


def test_profile_shorter_than_the_horizon():
    """The profile must cover the whole run."""
    with pytest.raises(ConfigError) as err:
        ScenarioConfig(horizon_sec=10, arrival_profile="0:5:1")
    compare(err.value.lines, ["arrival_profile: ends at 5.0 but horizon_sec is 10"])


def test_bundled_scenarios():
    """Every bundled scenario loads and is named after its file."""
    names = bundled_scenarios()
    compare(names, ["attack", "fixed_capacity", "honest", "lazy", "malicious", "starvation"])
    for name in names:
        compare(load_scenario(name).name, name)
    honest = load_scenario("honest")
    compare((honest.seed, honest.tau_sec, honest.honest_agents), (1, 20, 5))


def test_with_seed():
    """A seed from the command line replaces the scenario seed."""
    config = ScenarioConfig(seed=4, name="x")
    assert config.with_seed(None) is config
    compare(config.with_seed(9).seed, 9)
    compare(config.with_seed(9).name, "x")


def test_scenario_file_errors_point_at_lines(request):
    """Invalid values and unknown keys are reported with their line numbers."""
    project = WorkspaceMock(request).scenario(
        """
        # comment
        seed = 3
        tau_sec = -1
        colour = "blue"
        """,
        name="bad",
    )
    with pytest.raises(ConfigError) as err:
        load_scenario(project.path("bad.cfg"))
    compare(len(err.value.lines), 2)
    assert err.value.lines[0].startswith("bad.cfg:3: tau_sec: ")
    compare(err.value.lines[1], "bad.cfg:4: colour: Unknown configuration key. See docs/configuration.rst.")


def test_scenario_file_by_stem(request):
    """The extension may be left out."""
    project = WorkspaceMock(request).scenario("seed = 8\nhonest_agents = 2", name="mine")
    config = load_scenario(project.path("mine"))
    compare((config.name, config.seed, config.honest_agents), ("mine", 8, 2))


def test_toml_syntax_error(request):
    """Syntax errors carry the file name and line."""
    project = WorkspaceMock(request).scenario("seed = 3\ntau_sec = = 2", name="broken")
    with pytest.raises(ConfigError) as err:
        load_scenario(project.path("broken.cfg"))
    assert err.value.lines[0].startswith("broken.cfg:2: ")


def test_sections_are_not_allowed(request):
    """Scenario files are flat."""
    project = WorkspaceMock(request).scenario("seed = 3\n[agents]\nhonest = 2", name="nested")
    with pytest.raises(ConfigError) as err:
        load_scenario(project.path("nested.cfg"))
    compare(err.value.lines, ["nested.cfg: sections are not allowed: agents"])


def test_missing_scenario():
    """Unknown names are a configuration error."""
    with pytest.raises(ConfigError) as err:
        load_scenario("does-not-exist")
    compare(err.value.lines, ["Scenario not found: does-not-exist"])
    compare(err.value.code, "BXC601")
