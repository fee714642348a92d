import numpy as np
import pytest

from incrlearn.core import RngStream
from incrlearn.net import NetSpec, add_class_heads, init_params


def tiny_params(seed=0, input_dim=8, hidden=(16,), d=8, t=4):
    rng = RngStream(seed)
    p = init_params(NetSpec(input_dim, hidden, d), rng)
    return add_class_heads(p, t, rng) if t else p


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_bench():
    """Four-class toy task, cheap enough for unit tests."""
    from incrlearn.data import toy_ibench

    return toy_ibench(seed=3, num_classes=4, n_train=60, n_test=30)


ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    """Store an acceptance outcome, then assert it."""

    def _record(number, name, ok, detail=""):
        ACCEPTANCE[number] = (name, bool(ok), detail)
        assert ok, f"criterion {number} ({name}) failed: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}")
