"""Small shared quadrature helpers (cached Gauss-Legendre rules)."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_rule_01(order):
    """Gauss-Legendre nodes/weights on the reference interval (0, 1).

    Weights sum to 1, so ``h * w @ f(a + h * x)`` integrates f over (a, a+h).
    """
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def gauss_integrate(f, a, b, order=32):
    """Fixed-order Gauss-Legendre integral of a vectorized f over (a, b)."""
    x, w = gauss_rule_01(order)
    return (b - a) * float(w @ f(a + (b - a) * x))
