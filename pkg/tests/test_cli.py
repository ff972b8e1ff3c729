"""Command line tests."""
import pandas as pd
from testfixtures import compare

from boxchain import __version__
from boxchain.constants import FIXTURE_EDGES, FIXTURE_LEDGER, ExitCode
from tests.helpers import WorkspaceMock
from tests.test_fixture import EXPECTED_LINES
from tests.test_stochastics import TRAPEZOID


def test_version(request):
    """The version is printed by click."""
    project = WorkspaceMock(request).run("--version").assert_exit_code(ExitCode.OK)
    assert project.out.strip().endswith(__version__)


def test_stoch_attack(request):
    """Thirty honest transactions per minute against boxes of twenty seconds."""
    WorkspaceMock(request).run("stoch", "attack", "--lambda-per-min", 30, "--tau-sec", 20).assert_exit_code(
        ExitCode.OK
    ).assert_output("attack_success_prob=2.06115362244e-09")


def test_stoch_mintau(request):
    """One hundred transactions per minute and a bound of one in a million."""
    WorkspaceMock(request).run("stoch", "mintau", "--lambda-per-min", 100, "--pmax", 1e-6).assert_output(
        """
        min_tau_sec=4.14465316739
        min_tau_min=0.0690775527898
        """
    )


def test_stoch_panjer(request):
    """Compound Poisson with sizes 1 and 2."""
    WorkspaceMock(request).run("stoch", "panjer", "--lambda", 1, "--sev", "1:0.5,2:0.5", "--kmax", 2).assert_output(
        """
        f0=0.367879441171
        f1=0.183939720586
        f2=0.229924650732
        """
    )


def test_stoch_panjer_needs_one_frequency(request):
    """Poisson and negative binomial parameters exclude each other."""
    project = WorkspaceMock(request).run(
        "stoch", "panjer", "--lambda", 1, "--nb-r", 2, "--nb-p", 0.4, "--sev", "1:1", "--kmax", 2
    )
    project.assert_exit_code(ExitCode.USAGE).assert_error_contains("Use either --lambda")


def test_stoch_pmf(request):
    """Poisson pmf for a mean, or for a window of an intensity."""
    project = WorkspaceMock(request).run("stoch", "pmf", "--mu", 3, "--k", 2)
    project.assert_output("poisson_pmf=0.224041807655")
    project.run("stoch", "pmf", "--profile", TRAPEZOID, "--start", 0, "--end", 2, "--k", 2)
    project.assert_exit_code(ExitCode.OK).assert_output(
        """
        mean=3
        poisson_pmf=0.224041807655
        """
    )


def test_stoch_pmf_needs_a_mean(request):
    """Either a mean or a profile."""
    WorkspaceMock(request).run("stoch", "pmf", "--k", 2).assert_exit_code(ExitCode.USAGE)


def test_stoch_fees(request):
    """Closed form of the expected discounted fees."""
    WorkspaceMock(request).run("stoch", "fees", "--lambda", 30, "--beta", 0.1, "--t", 1).assert_output(
        "expected_discounted_fees=28.5487745892"
    )


def test_stoch_fees_invalid_discount(request):
    """A zero discount rate is an invalid parameter."""
    WorkspaceMock(request).run("stoch", "fees", "--lambda", 30, "--beta", 0, "--t", 1).assert_exit_code(
        ExitCode.USAGE
    ).assert_error_contains("BXC401")


def test_stoch_valuation_and_latency(request):
    """Reserve growth and the expected confirmation time."""
    project = WorkspaceMock(request)
    project.run("stoch", "valuation", "--m0", 100, "--r", 0.05, "--t", 1).assert_output(
        "boxdollar_value=105.127109638"
    )
    project.run("stoch", "latency", "--tau-sec", 20).assert_output("mean_confirmation_time_sec=30")


def test_fixture(request):
    """The bundled ledger produces its boxes."""
    WorkspaceMock(request).run("fixture").assert_exit_code(ExitCode.OK).assert_output("\n".join(EXPECTED_LINES))


def test_fixture_dump_and_check(request):
    """Dumps replay to the same boxes; a shorter ledger does not match them."""
    project = WorkspaceMock(request)
    project.run("fixture", "--dump").assert_exit_code(ExitCode.OK)
    boxes = project.path("fixture.boxes")
    project.run("simulate", "--replay", project.path("fixture.ledger"), "--check-boxes", boxes)
    project.assert_exit_code(ExitCode.OK).assert_output("\n".join(EXPECTED_LINES))

    project.run("simulate", "--replay", project.fixture("short.ledger"), "--check-boxes", boxes)
    project.assert_exit_code(ExitCode.FIXTURE_ASSERTION).assert_error_contains("expected B2={5,6,7}, got B2={}")


def test_replay_ledger_without_nonces(request):
    """Ledger dumps without the nonce column replay to the same boxes."""
    project = WorkspaceMock(request)
    project.run("fixture", "--dump").assert_exit_code(ExitCode.OK)
    lines = [
        line[: -len(" -")] if line.startswith("tx ") else line for line in FIXTURE_LEDGER.read_text().splitlines()
    ]
    assert all(len(line.split()) == 8 for line in lines if line.startswith("tx "))
    project.save_file("plain.ledger", "\n".join(lines))
    project.run("simulate", "--replay", project.path("plain.ledger"), "--check-boxes", project.path("fixture.boxes"))
    project.assert_exit_code(ExitCode.OK).assert_output("\n".join(EXPECTED_LINES))


def test_fixture_other_ledger(request):
    """Other ledgers are replayed without the assertion."""
    project = WorkspaceMock(request)
    project.run("fixture", "--ledger", project.fixture("short.ledger")).assert_exit_code(ExitCode.OK)
    project.assert_output(
        """
        B1={2,3,4}
        boxers=4
        """
    )


def test_decompose(request):
    """Layers of a chain, then the summary of the fixture."""
    project = WorkspaceMock(request)
    project.run("decompose", project.fixture("three_chain.edges")).assert_exit_code(ExitCode.OK)
    compare(len(project.lines), 3)
    project.run("decompose", FIXTURE_EDGES, "--summary").assert_exit_code(ExitCode.OK)
    compare(project.lines[-3:], ["height=7", "width=4", "width_exact=1"])


def test_decompose_cycle(request):
    """Cycles are refused."""
    project = WorkspaceMock(request).run("decompose", WorkspaceMock.fixtures_dir / "cycle.edges")
    project.assert_exit_code(ExitCode.USAGE).assert_error_contains("BXC102")


def test_simulate_writes_csv(request):
    """Metrics are printed and written as one CSV row named after the scenario."""
    project = WorkspaceMock(request).scenario(
        """
        seed = 9
        horizon_sec = 60
        tau_sec = 10
        honest_agents = 3
        honest_rate_per_min = 12
        """,
        name="tiny",
    )
    project.run("--config", project.path("tiny.cfg"), "simulate").assert_exit_code(ExitCode.OK)
    assert "scenario=tiny" in project.lines
    frame = pd.read_csv(project.path("tiny.csv"))
    compare(len(frame), 1)
    compare(int(frame["seed"][0]), 9)
    compare(int(frame["exit_code"][0]), 0)


def test_seed_overrides_the_scenario(request):
    """The global seed wins over the scenario file."""
    project = WorkspaceMock(request).scenario("seed = 9\nhorizon_sec = 30\nhonest_agents = 2", name="tiny")
    project.run("--seed", 4, "--config", project.path("tiny.cfg"), "simulate").assert_output_contains("seed=4")


def test_simulate_missing_scenario(request):
    """Unknown scenarios are a configuration error."""
    WorkspaceMock(request).run("--config", "nope", "simulate").assert_exit_code(ExitCode.USAGE).assert_error_contains(
        "BXC601 Scenario not found: nope"
    )


def test_simulate_invalid_scenario(request):
    """Every invalid key is reported with its line."""
    project = WorkspaceMock(request).scenario("seed = 1\ntau_sec = 0\nhonest_agents = 0", name="bad")
    project.run("--config", project.path("bad.cfg"), "simulate").assert_exit_code(ExitCode.USAGE)
    project.assert_error_contains("BXC601 bad.cfg:2: tau_sec: ").assert_error_contains(
        "BXC601 bad.cfg:3: honest_agents: "
    )


def test_check_boxes_needs_replay(request):
    """Box checks only apply to replays."""
    project = WorkspaceMock(request)
    project.run("simulate", "--check-boxes", project.fixture("short.ledger")).assert_exit_code(ExitCode.USAGE)
    project.assert_error_contains("--check-boxes needs --replay")


def test_simulate_integrity_alarm(request):
    """A tampered confirmation stops the run with its own exit code."""
    project = WorkspaceMock(request).scenario(
        """
        seed = 2
        horizon_sec = 300
        tau_sec = 10
        honest_agents = 3
        honest_rate_per_min = 12
        malicious_agents = 1
        malicious_rate_per_min = 6
        malicious_standing = 0
        """,
        name="alarm",
    )
    project.run("--config", project.path("alarm.cfg"), "simulate").assert_exit_code(ExitCode.INTEGRITY_ALARM)
    project.assert_output_contains("aborted=1").assert_error_contains("BXC305")


def test_attack_trials(request):
    """Empirical rate next to the closed form."""
    project = WorkspaceMock(request).run("attack", "--lambda-per-min", 60, "--tau-sec", 1, "--trials", 20000)
    project.assert_exit_code(ExitCode.OK).assert_output_contains("trials=20000", "closed_form=0.135335283237")
