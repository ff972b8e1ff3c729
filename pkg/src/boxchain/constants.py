"""Constants."""
from enum import IntEnum
from pathlib import Path

PROJECT_NAME = "boxchain"
ERROR_PREFIX = "BXC"
PACKAGE_DIR = Path(__file__).parent
DATA_DIR = PACKAGE_DIR / "data"
SCENARIOS_DIR = PACKAGE_DIR / "scenarios"
CFG_EXTENSION = ".cfg"
LEDGER_EXTENSION = ".ledger"
BOXES_EXTENSION = ".boxes"
CSV_EXTENSION = ".csv"

FIXTURE_LEDGER = DATA_DIR / "fixture{}".format(LEDGER_EXTENSION)
FIXTURE_EDGES = DATA_DIR / "fixture.edges"

CONFIGURATION_DOCS = "docs/configuration.rst"

#: Id of the genesis transaction of every ledger.
GENESIS_ID = 1

#: Issuer of the genesis transaction; regular agents are numbered from 1.
SYSTEM_AGENT = 0

DIGEST_SIZE = 32
ZERO_DIGEST = bytes(DIGEST_SIZE)

SECONDS_PER_MINUTE = 60.0
MICROSECONDS = 1000000

SIGNIFICANT_DIGITS = 12

#: Above this many elements, the width of a poset is estimated from its Mirsky layers.
EXACT_WIDTH_LIMIT = 20

DEFAULT_TAU_SEC = 20.0
DEFAULT_RATE_GUARD_FRACTION = 0.25
DEFAULT_STANDING_THRESHOLD = 0

#: Monte Carlo replications are summed per leaf of this many trials.
TRIALS_PER_LEAF = 1024
CONFIDENCE_LEVEL = 0.99

#: Spacing between the transactions of one burst, "almost simultaneously".
BURST_SPACING_SEC = 1e-6

#: Candidate pairs drawn before the tip selection gives up on rejection sampling.
MAX_TIP_DRAWS = 64


class ExitCode(IntEnum):
    """Exit codes of the command line."""

    OK = 0
    USAGE = 1
    INTEGRITY_ALARM = 2
    FIXTURE_ASSERTION = 3
