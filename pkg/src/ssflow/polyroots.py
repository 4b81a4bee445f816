"""Aberth-Ehrlich simultaneous iteration for sparse real polynomials.

Polynomials are given as ``{exponent: coefficient}``.  All roots are returned
with multiplicities; complex roots come in exact conjugate pairs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SolverError

CLUSTER_RADIUS = 1e-7
_BLOCK = 1024


def _evaluate(terms, z):
    """``p(z)`` and ``p'(z)`` for a sparse polynomial."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    logz = np.log(z)
    for e, c in terms:
        if e == 0:
            p += c
            continue
        ze1 = np.exp((e - 1) * logz)
        p += c * ze1 * z
        dp += c * e * ze1
    return p, dp


def _pair_sums(z):
    """``sum_{j != i} 1/(z_i - z_j)`` in row blocks to bound memory."""
    out = np.empty_like(z)
    idx = np.arange(z.size)
    for start in range(0, z.size, _BLOCK):
        rows = slice(start, min(start + _BLOCK, z.size))
        diff = z[rows, None] - z[None, :]
        diff[idx[rows] - start, idx[rows]] = 1.0
        inv = 1.0 / diff
        inv[idx[rows] - start, idx[rows]] = 0.0
        out[rows] = inv.sum(axis=1)
    return out


def _initial(terms, degree):
    coef = dict(terms)
    lead = coef[degree]
    low = min(coef)
    # Cauchy bounds for the moduli of the nonzero roots
    upper = 1.0 + max(abs(c / lead) for e, c in terms if e != degree)
    c0 = coef[low]
    lower = 1.0 / (1.0 + max(abs(c / c0) for e, c in terms if e != low))
    radius = math.sqrt(upper * lower)
    angles = 2 * np.pi * (np.arange(degree - low) + 0.25) / (degree - low) + 0.4
    return radius * np.exp(1j * angles), low


def _symmetrize(z, tol=1e-12):
    """Snap near-real roots to the axis and force conjugate pairing."""
    z = z.copy()
    near = np.abs(z.imag) <= tol * np.maximum(1.0, np.abs(z))
    z[near] = z[near].real
    upper = z[z.imag > 0]
    lower = z[z.imag < 0]
    if upper.size != lower.size:
        return z
    upper = upper[np.argsort(upper.real)]
    lower = lower[np.argsort(lower.real)]
    used = np.zeros(lower.size, bool)
    mirrored = np.empty_like(upper)
    for i, u in enumerate(upper):
        d = np.abs(lower - np.conj(u))
        d[used] = np.inf
        j = int(np.argmin(d))
        used[j] = True
        mirrored[i] = 0.5 * (u + np.conj(lower[j]))
    return np.concatenate([z[z.imag == 0], mirrored, np.conj(mirrored)])


def _cluster(z, radius):
    """Group roots closer than ``radius`` (relative to modulus); returns (centre, size) pairs."""
    order = np.argsort(z.real)
    zs = z[order]
    taken = np.zeros(zs.size, bool)
    out = []
    for i in range(zs.size):
        if taken[i]:
            continue
        scale = radius * max(1.0, abs(zs[i]))
        members = [i]
        j = i + 1
        while j < zs.size and zs[j].real - zs[i].real <= scale:
            if not taken[j] and abs(zs[j] - zs[i]) <= scale:
                members.append(j)
            j += 1
        taken[members] = True
        out.append((complex(zs[members].mean()), len(members)))
    return out


def sparse_roots(coefficients, maxiter=500, tol=1e-14):
    """All roots of ``sum c_e z^e`` with multiplicities.

    Parameters
    ----------
    coefficients : mapping
        ``{exponent: real coefficient}``; exponents are nonnegative integers.

    Returns
    -------
    list of (complex, int)
        Distinct roots and their multiplicities, sorted by argument.
    """
    terms = [(int(e), float(c)) for e, c in coefficients.items() if c != 0]
    if not terms:
        raise SolverError("zero polynomial", coefficients=dict(coefficients))
    degree = max(e for e, _ in terms)
    if degree == 0:
        return []
    z, low = _initial(terms, degree)
    roots = [(0j, low)] if low else []
    shifted = [(e - low, c) for e, c in terms]
    if degree == low:
        return roots
    converged = np.zeros(z.size, bool)
    for _ in range(maxiter):
        p, dp = _evaluate(shifted, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            step = ratio / (1.0 - ratio * _pair_sums(z))
        step[~np.isfinite(step)] = 0.0
        step[converged] = 0.0
        z = z - step
        converged |= np.abs(step) <= tol * np.maximum(1.0, np.abs(z))
        if converged.all():
            break
    else:
        if not converged.all():
            # multiple roots stall at ~sqrt(eps) with steps that never settle;
            # accept them when the residual is at rounding level
            p, _ = _evaluate(shifted, z)
            scale = sum(abs(c) * np.abs(z) ** e for e, c in shifted)
            bad = int(np.sum(~converged & (np.abs(p) > 1e-12 * scale)))
            if bad > max(1, z.size // 100) or np.max(np.abs(p) / scale) > 1e-6:
                raise SolverError(
                    f"Aberth iteration did not converge ({bad} roots unsettled)",
                    coefficients=dict(coefficients),
                )
    z = _symmetrize(z)
    clusters = _cluster(z, CLUSTER_RADIUS)
    polished = []
    for root, mult in clusters:
        if mult == 1:
            for _ in range(3):
                p, dp = _evaluate(shifted, np.array([root]))
                if dp[0] == 0:
                    break
                nxt = root - p[0] / dp[0]
                if abs(nxt - root) > 1e-6 * max(1.0, abs(root)):
                    break
                root = complex(nxt)
            if abs(root.imag) <= 1e-13 * max(1.0, abs(root)):
                root = complex(root.real, 0.0)
        polished.append((root, mult))
    roots.extend(polished)
    roots.sort(key=lambda rm: (np.angle(rm[0]), abs(rm[0])))
    return roots
