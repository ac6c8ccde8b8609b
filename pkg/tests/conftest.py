import pytest

from ngramfd import build_table, tokenize

C0_RAW = ["the cat sat", "the cat ran", "a dog sat"]

# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def c0():
    return [tokenize(s) for s in C0_RAW]


@pytest.fixture
def t1(c0):
    return build_table(c0, 1)


@pytest.fixture
def t2(c0):
    return build_table(c0, 2)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (len(k), k)):
        ok, detail = ACCEPTANCE[key]
        status = "PASS" if ok is True else "FAIL" if ok is False else "SKIP"
        terminalreporter.write_line(f"[{status}] criterion {key}: {detail}")
