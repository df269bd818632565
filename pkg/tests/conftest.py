import math

import numpy as np
import pytest

from cepzeeman.pulse import PulseParams
from cepzeeman.spin import SpinSystem

TWO_PI = 2 * math.pi
NU1 = TWO_PI * 50e3
NU2 = TWO_PI * 150e3
FWHM = 130e-6


def pulse_from_rabi(omega1, omega2, phi1=0.0, phi2=0.0, fwhm=FWHM):
    return PulseParams.from_rabi(NU1, NU2, phi1, phi2, omega1, omega2, fwhm)


@pytest.fixture
def weak_pulse():
    # max|Omega| T = 0.1 with equal amplitudes
    om = 0.1 / (4 * FWHM)
    return pulse_from_rabi(om, om)


@pytest.fixture
def resonant_system():
    return SpinSystem.from_splitting(NU2)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(number, title, ok, detail=""):
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
