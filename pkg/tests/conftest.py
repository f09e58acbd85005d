import os
import sys
from fractions import Fraction

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

# Derandomized so that every run checks the same examples.
settings.register_profile("repo", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repo")

F = Fraction


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
