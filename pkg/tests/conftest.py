import pytest

from rigidkit.congruence_graphs import cayley_build, elementary_generators, enumerate_group

ACCEPTANCE_LINES = []


def record(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


_GRAPHS = {}


def sl2_cayley(q):
    if q not in _GRAPHS:
        gens = elementary_generators(2, q)
        _GRAPHS[q] = cayley_build(enumerate_group(2, q, gens), gens)
    return _GRAPHS[q]


@pytest.fixture
def cayley():
    return sl2_cayley
