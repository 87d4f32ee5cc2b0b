from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np


@lru_cache(maxsize=None)
def _gauss_legendre_unit(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def simplex_rule(t: float, n: int, m: int):
    """Nodes and weights for the ordered simplex t > t_1 > ... > t_n > 0.

    Tensor Gauss-Legendre on [0,1]^n mapped by t_1 = t u_1, t_k = t_{k-1} u_k.
    Returns (nodes of shape (m**n, n), weights of shape (m**n,)).
    """
    if n == 0:
        return np.zeros((1, 0)), np.ones(1)
    u, w = _gauss_legendre_unit(m)
    nodes, weights = [], []
    for idx in product(range(m), repeat=n):
        times, jac, prev = [], 1.0, t
        for i in idx:
            jac *= prev * w[i]
            prev = prev * u[i]
            times.append(prev)
        nodes.append(times)
        weights.append(jac)
    return np.array(nodes), np.array(weights)


def default_nodes(order: int) -> int:
    return 32 if order <= 2 else 12
