"""Test helpers."""
from pathlib import Path
from textwrap import dedent
from typing import List

from _pytest.fixtures import FixtureRequest
from testfixtures import compare

from boxchain.cli import main
from boxchain.constants import CFG_EXTENSION
from boxchain.typedefs import PathOrStr
from tests.conftest import TEMP_PATH


def assert_conditions(*args):
    """Assert all conditions are True."""
    for arg in args:
        if not arg:
            raise AssertionError()


class WorkspaceMock:
    """A scratch directory with input files, and the output of the last command line run."""

    fixtures_dir = Path(__file__).parent / "fixtures"  # type: Path

    def __init__(self, pytest_request: FixtureRequest) -> None:
        """Create a root dir named after the test; the output of ``main()`` is captured with ``capsys``."""
        subdir = "/".join(pytest_request.module.__name__.split(".")[1:])
        caller_function_name = pytest_request.node.name
        self.root_dir = TEMP_PATH / subdir / caller_function_name  # type: Path

        # To make debugging easy, each test should not reuse another test directory.
        self.root_dir.mkdir(parents=True)
        self.capsys = pytest_request.getfixturevalue("capsys")
        self.exit_code = None  # type: int
        self.out = ""
        self.err = ""

    def path(self, file_name: PathOrStr) -> Path:
        """A path inside the root dir."""
        return self.root_dir / file_name

    def fixture(self, file_name: str) -> Path:
        """A file of the ``tests/fixtures`` dir."""
        return self.fixtures_dir / file_name

    def save_file(self, file_name: PathOrStr, file_contents: str) -> "WorkspaceMock":
        """Save a file in the root dir with the desired contents; parent dirs are created."""
        path = self.path(file_name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dedent(file_contents).strip() + "\n")
        return self

    def scenario(self, file_contents: str, name: str = "scenario") -> "WorkspaceMock":
        """Save a scenario file."""
        return self.save_file(name + CFG_EXTENSION, file_contents)

    def run(self, *args: PathOrStr) -> "WorkspaceMock":
        """Run the command line with the output directory set to the root dir."""
        self.capsys.readouterr()
        self.exit_code = main(["--output", str(self.root_dir)] + [str(arg) for arg in args])
        captured = self.capsys.readouterr()
        self.out, self.err = captured.out, captured.err
        return self

    @property
    def lines(self) -> List[str]:
        """Standard output lines of the last run."""
        return self.out.splitlines()

    def assert_exit_code(self, expected: int) -> "WorkspaceMock":
        """Assert the exit code of the last run."""
        if self.exit_code != expected:
            raise AssertionError(
                "Expected exit code {}, got {}\nout:\n{}\nerr:\n{}".format(expected, self.exit_code, self.out, self.err)
            )
        return self

    def assert_output(self, expected: str) -> "WorkspaceMock":
        """Assert the whole standard output, line by line."""
        compare(expected=dedent(expected).strip().splitlines(), actual=self.lines)
        return self

    def assert_output_contains(self, *expected_lines: str) -> "WorkspaceMock":
        """Assert every line is printed on the standard output."""
        for line in expected_lines:
            if line not in self.lines:
                raise AssertionError("{!r} not in the output:\n{}".format(line, self.out))
        return self

    def assert_error_contains(self, text: str) -> "WorkspaceMock":
        """Assert the standard error contains a text."""
        if text not in self.err:
            raise AssertionError("{!r} not in the error output:\n{}".format(text, self.err))
        return self
