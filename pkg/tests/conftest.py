from fractions import Fraction

import pytest

from mehler_sos.polycore import Polynomial


def motzkin() -> Polynomial:
    return Polynomial(2, {(4, 2): 1, (2, 4): 1, (2, 2): -3, (0, 0): 1})


def random_deg4(d: int, seed: int = 7) -> Polynomial:
    """Fixed pseudo-random rational polynomial of degree 4 in d variables."""
    import numpy as np

    from mehler_sos.polycore import multi_indices

    rng = np.random.default_rng(seed)
    terms = {}
    for alpha in multi_indices(d, 4):
        if rng.random() < 0.6 or sum(alpha) == 4:
            terms[alpha] = Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 6)))
    terms.setdefault((4,) + (0,) * (d - 1), Fraction(1))
    return Polynomial(d, terms)


@pytest.fixture
def motz():
    return motzkin()


@pytest.fixture
def z2():
    return Polynomial(1, {(2,): 1})


_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion reported in the summary")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    failed = call.excinfo is not None
    previous = _CRITERIA.get(number, (title, "PASS"))[1]
    _CRITERIA[number] = (title, "FAIL" if failed or previous == "FAIL" else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
