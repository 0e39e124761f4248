import numpy as np
import pytest

from wsnbattery.core import PROFILES, BatteryParams, precompute


@pytest.fixture
def params():
    return BatteryParams.from_mah(880)


@pytest.fixture
def derived(params):
    return precompute(params)


@pytest.fixture
def sky():
    return PROFILES["sky"]


@pytest.fixture
def wsn430():
    return PROFILES["wsn430"]


def random_windows(rng, n, delta_ms=2000, cpu_max=300, tx_max=40, rx_max=120):
    """Duty-cycled windows with the CPU/LPM partition and a bounded radio."""
    cpu = rng.integers(0, cpu_max + 1, n)
    tx = rng.integers(0, tx_max + 1, n)
    rx = rng.integers(0, rx_max + 1, n)
    return np.column_stack([cpu, delta_ms - cpu, tx, rx]).astype(np.int64)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line for the acceptance summary."""
    def record(number, title, ok, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} | {detail}"))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
