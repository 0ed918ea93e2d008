"""Shared pytest wiring: surface acceptance verdict lines in the summary.

Passing tests have their stdout captured, which would hide the per-criterion
pass/fail lines the acceptance suite prints.  The suite also appends each
line here, and the terminal-summary hook re-emits them after the run.
"""

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
