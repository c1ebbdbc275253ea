"""Shared fixtures and independent high-precision oracles.

The oracles below are written directly from the closed-form definitions with
mpmath at 40 digits and do not call library code.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np
import pytest

from plap.coretypes import NumericPolicy

mp.mp.dps = 40


# --- plateau pair ----------------------------------------------------------


def mp_xs(p):
    p = mp.mpf(p)
    return 1 - 3 / mp.power(2, p / (p - 1))


def mp_b0(p):
    p = mp.mpf(p)
    return -mp.power(mp.mpf(3) / 2, 1 - p) * mp.power((p - 2) / (p - 1), 1 - p)


def mp_plateau_u(p, x):
    p, x = mp.mpf(p), mp.mpf(x)
    if x < -0.5:
        return -4 * x * (x + 1)
    return 1 - mp.power(3, (1 - p) / (p - 2)) * mp.power(2 * x + 1, (p - 1) / (p - 2))


def mp_plateau_v(p, x):
    p, x = mp.mpf(p), mp.mpf(x)
    xs = mp_xs(p)
    if x < -0.5:
        return -4 * x * (x + 1)
    if x <= xs:
        return mp.mpf(1)
    return 1 - mp.power(2, p / (p - 2)) * mp.power(3, (1 - p) / (p - 2)) \
        * mp.power(x - xs, (p - 1) / (p - 2))


def mp_operator_image(p, b, w, x, lam=0):
    """``-(|w'|^{p-2} w')' - b(x) w' + lam w`` by mpmath differentiation of ``w``."""
    p = mp.mpf(p)

    def flux_of(t):
        d = mp.diff(w, t)
        return mp.sign(d) * mp.power(abs(d), p - 1)

    x = mp.mpf(x)
    return -mp.diff(flux_of, x) - b(x) * mp.diff(w, x) + lam * w(x)


def mp_plateau_third_branch(p, x):
    """Third branch of the source g as printed in the construction."""
    p, x = mp.mpf(p), mp.mpf(x)
    return (mp.power(2, ((p - 1) ** 2 + 1) / (p - 2)) * mp.power(3, -((p - 1) ** 2) / (p - 2))
            * mp.power((p - 1) / (p - 2), p) * mp.power(x - mp_xs(p), 1 / (p - 2)))


# --- theta family -------------------------------------------------------------


def mp_drift(p, t1, t2, x):
    p, t1, t2, x = (mp.mpf(a) for a in (p, t1, t2, x))
    return (p - 1) ** 2 * (t1 - 1) * mp.power(t1, p - 2) \
        * mp.power(abs(x), (p - 2) * (t2 - 1) - 1) * mp.sign(x)


def mp_f_theta(p, t1, t2, lam, theta, x):
    """Three summands evaluated term by term."""
    p, theta, x = mp.mpf(p), mp.mpf(theta), mp.mpf(x)
    a = (p - 1) * mp.power(theta, p - 1) * (theta - 1) * mp.power(abs(x), (theta - 1) * (p - 1) - 1)
    b = theta * mp_drift(p, t1, t2, x) * mp.sign(x) * mp.power(abs(x), theta - 1)
    c = mp.mpf(lam) * (1 - mp.power(abs(x), theta))
    return a + b + c


def lambda_min(p, t2):
    return 2 * (p - 1) ** 2 * (t2 - 1) * t2 ** (p - 1)


@pytest.fixture
def policy():
    return NumericPolicy(grid_n=2001)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
