"""Truncated power series arithmetic on coefficient arrays (constant term first)."""

import numpy as np


def mul(a, b, n):
    return np.convolve(a[:n], b[:n])[:n]


def inv(a, n):
    """Reciprocal of a series with nonzero constant term."""
    out = np.zeros(n, dtype=np.result_type(a, float))
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        m = min(k, len(a) - 1)
        out[k] = -np.dot(a[1 : m + 1], out[k - 1 :: -1][:m]) / a[0]
    return out


def exp(a, n):
    """``exp`` of a series via ``e' = a' e``."""
    a = np.pad(np.asarray(a)[:n], (0, max(0, n - len(a))))
    out = np.zeros(n, dtype=np.result_type(a, float))
    out[0] = np.exp(a[0])
    ka = np.arange(n) * a
    for k in range(1, n):
        out[k] = np.dot(ka[1 : k + 1], out[k - 1 :: -1][:k]) / k
    return out


def evaluate(c, x):
    """Horner evaluation of ``sum c_n x^n``."""
    acc = 0.0 * x
    for coef in c[::-1]:
        acc = acc * x + coef
    return acc
