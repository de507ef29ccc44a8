import pytest

from circlekit.forms import expand_parametric, parse_form

TOYS = {
    "product": ("x1*x2", 2),
    "sum_of_squares": ("x1^2 + x2^2", 2),
    "cubic": ("x1^3 + x2^3 + x3^3", 3),
}


def toy(name: str, m: int = 2):
    text, s = TOYS[name]
    return expand_parametric(parse_form(text, s), m)


@pytest.fixture(scope="session")
def product():
    return toy("product")


@pytest.fixture(scope="session")
def squares():
    return toy("sum_of_squares")


@pytest.fixture(scope="session")
def cubic():
    return toy("cubic")


@pytest.fixture(scope="session", params=sorted(TOYS))
def any_toy(request):
    return toy(request.param)


ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
