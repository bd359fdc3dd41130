import os

from hypothesis import HealthCheck, settings

from algflow.lattice import Lattice
from algflow.linalg import QI

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


def split_lattice():
    """Z x (Z + iZ) in C^2: real first factor, full second factor."""
    return Lattice(2, [[QI(1), QI(0)], [QI(0), QI(1)], [QI(0), QI(0, 1)]])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
