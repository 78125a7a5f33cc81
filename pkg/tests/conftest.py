import pathlib

import pytest

from phidiv.modpoly import compute_phi

DATA = pathlib.Path(__file__).parent / "data"
PRIMES = (2, 3, 5, 7, 11, 13)

# filled by test_acceptance, echoed at the end of the run
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def phi():
    return compute_phi


def factored(expr):
    """Evaluate '2^90*3^18*-1*5' style products."""
    out = 1
    for part in expr.split("*"):
        base, _, exp = part.partition("^")
        out *= int(base) ** int(exp or 1)
    return out


@pytest.fixture(scope="session")
def phi5_table():
    rows = {}
    for line in (DATA / "phi5_factored.txt").read_text().splitlines():
        i, j, expr = line.split()
        rows[(int(i), int(j))] = factored(expr)
    return rows


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key:2d}: {detail}")
