"""Truncated derivative jets.

A jet is an array whose leading axis holds (v, v', v'', ...) at one or more
points.  Products and reciprocals follow Leibniz' rule.
"""

from math import comb

import numpy as np


def jet_mul(A, B):
    n = min(len(A), len(B))
    out = np.zeros_like(np.asarray(A[:n], dtype=float) * np.asarray(B[:n], dtype=float))
    for k in range(n):
        for j in range(k + 1):
            out[k] = out[k] + comb(k, j) * A[j] * B[k - j]
    return out


def jet_recip(A):
    A = np.asarray(A, dtype=float)
    out = np.zeros_like(A)
    out[0] = 1.0 / A[0]
    for n in range(1, len(A)):
        acc = np.zeros_like(A[0])
        for k in range(n):
            acc = acc + comb(n, k) * out[k] * A[n - k]
        out[n] = -acc / A[0]
    return out


def const_jet(value, like, order=4):
    out = np.zeros((order + 1,) + np.shape(like))
    out[0] = value
    return out
