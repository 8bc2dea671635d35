import pytest

from ompcore.runtime import parallel_run


def run_team(block, threads: int):
    """Run a region and re-raise any contained member failure."""
    outcome = parallel_run(block, num_threads=threads)
    outcome.raise_if_errors()
    return outcome


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose per-phase outcomes so fixtures can report pass/fail lines
    outcome = yield
    report = outcome.get_result()
    setattr(item, "outcome_" + report.when, report)
