import itertools
import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def brute_force_sums(freqs, e_cut):
    """Every tensor-sum energy of oscillator modes below ``e_cut``, by plain enumeration."""
    ranges = [range(int(e_cut // f) + 1) for f in freqs]
    out = []
    for ns in itertools.product(*ranges):
        e = sum(n * f for n, f in zip(ns, freqs))
        if e <= e_cut + 1e-9:
            out.append(e)
    return sorted(out)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
