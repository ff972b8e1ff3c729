"""Command line interface.

Exit codes: 0 ok, 1 usage or configuration error, 2 integrity alarm, 3 fixture assertion.
"""
import logging
import sys
from pathlib import Path
from typing import List, Optional

import attr
import click
import pandas as pd

from boxchain import __version__
from boxchain.attack import run_attack_trials
from boxchain.config import ScenarioConfig, bundled_scenarios, load_scenario
from boxchain.constants import CSV_EXTENSION, FIXTURE_LEDGER, PROJECT_NAME, SECONDS_PER_MINUTE, ExitCode
from boxchain.exceptions import BoxchainError, ConfigError, FixtureMismatch
from boxchain.fixture import format_box, run_fixture
from boxchain.formats import BoxDump, EdgeList, LedgerDump
from boxchain.generic import name_value
from boxchain.poset import Poset, mirsky_decompose
from boxchain.simulation import Replay, RunMetrics, Simulation, replay_ledger
from boxchain.stochastics import (
    IntensityFunction,
    SeverityPmf,
    attack_success_prob,
    boxdollar_value,
    expected_discounted_fees,
    intensity_integral,
    mean_confirmation_time,
    min_tau_for_bound,
    panjer_compound_pmf,
    panjer_negative_binomial_pmf,
    poisson_pmf,
    simulate_discounted_fees,
)
from boxchain.streams import stream

LOGGER = logging.getLogger(__name__)

LOG_MAPPING = {1: logging.INFO, 2: logging.DEBUG}

SCENARIO_KEYS_HELP = "Scenario keys and defaults: " + ", ".join(
    "{}={!r}".format(key, value) for key, value in ScenarioConfig().as_dict().items()
)


@attr.s
class CliConfig:
    """Global options shared by every command."""

    seed = attr.ib(default=None)  # type: Optional[int]
    output = attr.ib(default=Path("."))  # type: Path
    config = attr.ib(default="honest")  # type: str
    verbose = attr.ib(default=0)  # type: int

    def output_path(self, name: str) -> Path:
        """A file inside the output directory, created on demand."""
        self.output.mkdir(parents=True, exist_ok=True)
        return self.output / name


def echo_lines(lines: List[str]) -> None:
    """Print result lines."""
    for line in lines:
        click.echo(line)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name=PROJECT_NAME)
@click.option("--seed", type=int, default=None, help="Run seed; overrides the scenario seed.")
@click.option(
    "--output",
    type=click.Path(file_okay=False),
    default=".",
    show_default=True,
    help="Directory of the metrics and dump files.",
)
@click.option(
    "--config",
    default="honest",
    show_default=True,
    help="Scenario file or bundled scenario name ({}).".format(", ".join(bundled_scenarios())),
)
@click.option("-v", "--verbose", count=True, help="-v for info messages, -vv for debug messages.")
@click.pass_context
def cli(ctx: click.Context, seed: Optional[int], output: str, config: str, verbose: int) -> None:
    """Dual ledger-keeping: a DAG ledger mirrored by a chain of antichain boxes."""
    logging.basicConfig(level=LOG_MAPPING.get(min(verbose, 2), logging.WARNING))
    ctx.obj = CliConfig(seed, Path(output), config, verbose)


def _write_replay_dumps(cli_config: CliConfig, replay: Replay, stem: str) -> None:
    LedgerDump(data=list(replay.ledger)).write(cli_config.output_path(stem + ".ledger"))
    BoxDump.from_boxes(replay.boxes.closed_boxes).write(cli_config.output_path(stem + ".boxes"))


def _check_boxes(replay: Replay, boxes_path: str) -> None:
    expected = {record["index"]: sorted(record["members"]) for record in BoxDump(path=boxes_path).as_data}
    actual = {box.index: sorted(box.members) for box in replay.boxes.closed_boxes}
    for index in sorted(set(expected) | set(actual)):
        if expected.get(index) != actual.get(index):
            raise FixtureMismatch(format_box(index, expected.get(index, [])), format_box(index, actual.get(index, [])))


@cli.command(epilog=SCENARIO_KEYS_HELP)
@click.option("--replay", "replay_path", type=click.Path(exists=True, dir_okay=False), help="Replay a ledger dump.")
@click.option(
    "--check-boxes",
    type=click.Path(exists=True, dir_okay=False),
    help="With --replay: box dump the replayed boxes must match.",
)
@click.option("--dump", is_flag=True, help="Also write the ledger and box dumps.")
@click.pass_obj
def simulate(cli_config: CliConfig, replay_path: Optional[str], check_boxes: Optional[str], dump: bool) -> int:
    """Run a scenario and write its metrics as CSV, or replay a ledger dump."""
    if replay_path is not None:
        replay = replay_ledger(LedgerDump(path=replay_path).as_data, cli_config.seed or 0)
        echo_lines([format_box(box.index, box.members) for box in replay.boxes.closed_boxes])
        echo_lines([name_value("boxers", " ".join(str(box.boxer) for box in replay.boxes.closed_boxes))])
        if check_boxes is not None:
            _check_boxes(replay, check_boxes)
        if dump:
            _write_replay_dumps(cli_config, replay, Path(replay_path).stem + ".replay")
        return ExitCode.OK
    if check_boxes is not None:
        raise click.UsageError("--check-boxes needs --replay")

    config = load_scenario(cli_config.config).with_seed(cli_config.seed)
    simulation = Simulation(config)
    metrics = simulation.run()  # type: RunMetrics
    echo_lines(metrics.report())

    stem = config.name or "scenario"
    pd.DataFrame([metrics.as_row()]).to_csv(cli_config.output_path(stem + CSV_EXTENSION), index=False)
    if dump:
        _write_replay_dumps(cli_config, Replay(simulation.ledger, simulation.boxes), stem)

    if config.attack_trials:
        result = run_attack_trials(
            config.honest_rate_per_sec,
            config.tau_sec,
            config.attack_trials,
            seed=config.seed,
            genesis_share=config.attack_genesis_share,
        )
        echo_lines(result.lines())
    if metrics.aborted:
        click.secho(metrics.abort_reason, fg="red", err=True)
    return metrics.exit_code


@cli.command()
@click.option("--lambda-per-min", type=float, required=True, help="Honest arrival rate per minute.")
@click.option("--tau-sec", type=float, required=True, help="Box time limit in seconds.")
@click.option("--trials", type=click.IntRange(min=1), default=1000000, show_default=True)
@click.option(
    "--genesis-share",
    type=click.FloatRange(0, 1),
    default=0.0,
    show_default=True,
    help="Share of good-standing agents the attacker controls.",
)
@click.option("--parallel-trials", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes.")
@click.pass_obj
def attack(  # pylint: disable=too-many-arguments
    cli_config: CliConfig,
    lambda_per_min: float,
    tau_sec: float,
    trials: int,
    genesis_share: float,
    parallel_trials: int,
) -> int:
    """Estimate the success rate of a burst attack on two back-to-back boxes."""
    result = run_attack_trials(
        lambda_per_min / SECONDS_PER_MINUTE,
        tau_sec,
        trials,
        seed=cli_config.seed or 0,
        genesis_share=genesis_share,
        parallel=parallel_trials,
    )
    echo_lines(result.lines())
    return ExitCode.OK


@cli.group()
def stoch() -> None:
    """Closed-form and recursive calculators; rates on the command line are per minute."""


@stoch.command()
@click.option("--mu", type=float, help="Mean of the count.")
@click.option("--profile", help="Intensity pieces start:end:intercept[:slope] separated by ';'.")
@click.option("--start", type=float, default=0.0, show_default=True, help="Window start, with --profile.")
@click.option("--end", type=float, help="Window end, with --profile.")
@click.option("--k", "count", type=click.IntRange(min=0), required=True, help="Number of events.")
def pmf(mu: Optional[float], profile: Optional[str], start: float, end: Optional[float], count: int) -> int:
    """Poisson probability of exactly K events, for a mean or a window of an intensity."""
    if (mu is None) == (profile is None):
        raise click.UsageError("Use either --mu or --profile")
    if profile is not None:
        try:
            intensity = IntensityFunction.parse(profile)
        except ValueError as err:
            raise click.BadParameter(str(err), param_hint="--profile") from err
        mu = intensity_integral(intensity, start, intensity.horizon if end is None else end)
        click.echo(name_value("mean", mu))
    click.echo(name_value("poisson_pmf", poisson_pmf(mu, count)))
    return ExitCode.OK


@stoch.command(name="attack")
@click.option("--lambda-per-min", type=float, required=True)
@click.option("--tau-sec", type=float, required=True)
def attack_probability(lambda_per_min: float, tau_sec: float) -> int:
    """Probability that no honest transaction arrives while two boxes form."""
    click.echo(name_value("attack_success_prob", attack_success_prob(lambda_per_min / SECONDS_PER_MINUTE, tau_sec)))
    return ExitCode.OK


@stoch.command()
@click.option("--lambda-per-min", type=float, required=True)
@click.option("--pmax", type=float, required=True, help="Largest acceptable attack success probability.")
def mintau(lambda_per_min: float, pmax: float) -> int:
    """Smallest box time limit keeping the attack success probability under PMAX."""
    tau = min_tau_for_bound(lambda_per_min / SECONDS_PER_MINUTE, pmax)
    echo_lines([name_value("min_tau_sec", tau), name_value("min_tau_min", tau / SECONDS_PER_MINUTE)])
    return ExitCode.OK


@stoch.command()
@click.option("--lambda", "lam", type=float, help="Poisson frequency mean.")
@click.option("--nb-r", type=float, help="Negative binomial frequency: r.")
@click.option("--nb-p", type=float, help="Negative binomial frequency: p.")
@click.option("--sev", required=True, help="Severity pmf, e.g. 1:0.5,2:0.5.")
@click.option("--kmax", type=click.IntRange(min=0), required=True)
def panjer(lam: Optional[float], nb_r: Optional[float], nb_p: Optional[float], sev: str, kmax: int) -> int:
    """Compound distribution of the aggregate size, f(0) to f(KMAX)."""
    severity = SeverityPmf.parse(sev)
    if lam is not None and nb_r is None and nb_p is None:
        compound = panjer_compound_pmf(lam, severity, kmax)
    elif lam is None and nb_r is not None and nb_p is not None:
        compound = panjer_negative_binomial_pmf(nb_r, nb_p, severity, kmax)
    else:
        raise click.UsageError("Use either --lambda or both --nb-r and --nb-p")
    echo_lines([name_value("f{}".format(k), float(value)) for k, value in enumerate(compound.values)])
    return ExitCode.OK


@stoch.command()
@click.option("--lambda", "lam", type=float, required=True, help="Arrival rate.")
@click.option("--beta", type=float, required=True, help="Discount rate.")
@click.option("--t", "horizon", type=float, required=True, help="Horizon.")
@click.option("--fee", type=float, default=1.0, show_default=True)
@click.option("--replications", type=click.IntRange(min=0), default=0, help="Also estimate by Monte Carlo.")
@click.pass_obj
def fees(  # pylint: disable=too-many-arguments
    cli_config: CliConfig, lam: float, beta: float, horizon: float, fee: float, replications: int
) -> int:
    """Expected discounted fees collected over (0, T)."""
    click.echo(name_value("expected_discounted_fees", expected_discounted_fees(lam, beta, horizon, fee)))
    if replications >= 2:
        mean, stderr = simulate_discounted_fees(lam, beta, horizon, replications, stream(cli_config.seed or 0, "fees"))
        echo_lines([name_value("monte_carlo_mean", mean * fee), name_value("monte_carlo_stderr", stderr * fee)])
    return ExitCode.OK


@stoch.command()
@click.option("--m0", type=float, required=True, help="Initial reserve.")
@click.option("--r", "rate", type=float, required=True, help="Interest rate.")
@click.option("--delta", type=float, default=0.0, show_default=True, help="Stability fee rate.")
@click.option("--t", "horizon", type=float, required=True)
def valuation(m0: float, rate: float, delta: float, horizon: float) -> int:
    """Value of a boxdollar reserve after T."""
    click.echo(name_value("boxdollar_value", boxdollar_value(m0, rate, delta, horizon)))
    return ExitCode.OK


@stoch.command()
@click.option("--tau-sec", type=float, required=True)
def latency(tau_sec: float) -> int:
    """Expected confirmation time of a transaction."""
    click.echo(name_value("mean_confirmation_time_sec", mean_confirmation_time(tau_sec)))
    return ExitCode.OK


@cli.command()
@click.option("--show-redundant", is_flag=True, help="Also print the approvals implied by another path.")
@click.option("--dump", is_flag=True, help="Write the ledger and box dumps to the output directory.")
@click.option(
    "--ledger",
    type=click.Path(exists=True, dir_okay=False),
    help="Another ledger dump; the expected boxes are only asserted for the bundled one.",
)
@click.pass_obj
def fixture(cli_config: CliConfig, show_redundant: bool, dump: bool, ledger: Optional[str]) -> int:
    """Replay the bundled 20-node ledger and check its boxes and boxers."""
    report = run_fixture(ledger or FIXTURE_LEDGER, cli_config.seed or 0)
    echo_lines(report.lines(show_redundant))
    if dump:
        report.dump(cli_config.output)
    if ledger is None:
        report.check()
    return ExitCode.OK


@cli.command()
@click.argument("graph_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--summary", is_flag=True, help="Also print the height and the width.")
def decompose(graph_file: str, summary: bool) -> int:
    """Split the poset of an edge list into antichains, one line per layer."""
    edge_list = EdgeList(path=graph_file)
    poset = Poset.from_edges(edge_list.edges, edge_list.elements)
    echo_lines(mirsky_decompose(poset).as_lines())
    if summary:
        width = poset.width()
        echo_lines([name_value("height", poset.height()), name_value("width", width.value)])
        echo_lines([name_value("width_exact", int(width.exact))])
    return ExitCode.OK


def main(argv: List[str] = None) -> int:
    """Run the command line and map every outcome to an exit code."""
    try:
        result = cli.main(args=argv, prog_name=PROJECT_NAME, standalone_mode=False)
    except click.ClickException as err:
        err.show()
        return ExitCode.USAGE
    except click.Abort:
        click.secho("Aborted!", fg="red", err=True)
        return ExitCode.USAGE
    except ConfigError as err:
        for line in err.lines or [str(err)]:
            click.secho("{} {}".format(err.code, line), fg="red", err=True)
        return err.exit_code
    except BoxchainError as err:
        click.secho(err.pretty(), fg="red", err=True)
        return err.exit_code
    return int(result or ExitCode.OK)


def run() -> None:
    """Console script entry point."""
    sys.exit(main())
