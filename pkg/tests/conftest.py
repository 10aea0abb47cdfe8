"""Shared oracles for the test suite.

The brute-force seminorm oracle deliberately uses a decomposition unrelated
to the implementation's element blocks: midpoint Riemann in the position
variable and log-midpoint Riemann in the separation variable, with the
far-field handled by its own log grid.
"""

import numpy as np
import pytest


def brute_force_seminorm(G, s, u, nx=2000, nt=2400, tmin=1e-7, tmax=1e6):
    """Dense double Riemann sum for the fractional modular (n = 1)."""
    left, right = u.left, u.right
    xs = np.linspace(left, right, nx + 1)
    xs = 0.5 * (xs[:-1] + xs[1:])
    dx = (right - left) / nx

    log_t = np.linspace(np.log(tmin), np.log(tmax), nt + 1)
    t_mid = np.exp(0.5 * (log_t[:-1] + log_t[1:]))
    dlog_t = np.diff(log_t)

    ux = u(xs)
    total = 0.0
    # x inside the support, the partner anywhere
    for sign in (1.0, -1.0):
        diff = np.abs(ux[:, None] - u(xs[:, None] + sign * t_mid[None, :]))
        total += float(np.sum(G(diff * t_mid[None, :] ** (-s))
                              * dlog_t[None, :] * dx))
    # partner inside the support, x beyond either end
    log_r = np.linspace(0.0, np.log(1e8), nt + 1)
    r_mid = np.exp(0.5 * (log_r[:-1] + log_r[1:]))
    dlog_r = np.diff(log_r)
    for dist in (right - xs, xs - left):
        r = dist[:, None] * r_mid[None, :]
        total += float(np.sum(G(np.abs(ux)[:, None] * r ** (-s))
                              * dlog_r[None, :] * dx))
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
