"""Pure numpy fallback for the compiled jet kernels.

Same call signatures as the Cython module.  The pair tables are sorted by
target index, so a product row collapses with ``np.add.reduceat``.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _starts(key):
    ik = np.frombuffer(key, dtype=np.intp)
    starts = np.flatnonzero(np.r_[True, ik[1:] != ik[:-1]])
    return starts, ik[starts]


def mul(a, b, ia, ib, ik, m):
    prod = a[:, ia] * b[:, ib]
    starts, targets = _starts(ik.tobytes())
    out = np.zeros((a.shape[0], m))
    out[:, targets] = np.add.reduceat(prod, starts, axis=1)
    return out


def compose(d, coef, ia, ib, ik, m):
    nb = d.shape[0]
    K = coef.shape[1] - 1
    out = np.zeros((nb, m))
    out[:, 0] = coef[:, K]
    for k in range(K - 1, -1, -1):
        out = mul(d, out, ia, ib, ik, m)
        out[:, 0] += coef[:, k]
    return out
