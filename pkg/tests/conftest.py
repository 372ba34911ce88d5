import numpy as np
import pytest

from bkmodes.dataset import CategoricalDataset


def random_dataset(rng, n, m, max_card=4, min_card=2):
    cards = rng.integers(min_card, max_card + 1, size=m)
    codes = np.stack([rng.integers(0, c, size=n) for c in cards], axis=1)
    return CategoricalDataset(codes.astype(np.uint8), cards)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_dataset():
    return random_dataset


_ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, with its wall time."""
    import time

    name = request.node.get_closest_marker("criterion").args[0]
    start = time.perf_counter()
    yield name
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    _ACCEPTANCE.append(f"[{status}] {name} ({time.perf_counter() - start:.2f}s)")


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
