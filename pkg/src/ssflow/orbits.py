"""Primitive periodic orbits of the full shift and their counting functions.

Primitive orbits correspond to Lyndon words.  They are generated with the
Fredricksen-Kessler-Maiorana recursion, pruned by accumulated weight; letters
are ordered by weight so a too-heavy letter ends the scan of its siblings.
"""

from __future__ import annotations

import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import OutOfCensusError, ResourceError, ValidationError
from .flow import FlowSpec, solve_dimension

#: default cap on the number of census records
MEMORY_CAP = 10**8
#: relative tolerance for deciding that log x sits on a jump k*w_t(p)
JUMP_RTOL = 1e-12
JUMPS = ("full", "half")


@dataclass(frozen=True)
class OrbitRecord:
    representative: str
    length: int
    total_weight: float


@dataclass(frozen=True)
class OrbitCensus:
    """All primitive orbits with total weight at most ``cutoff``.

    Records are sorted by weight, then representative.  ``weights`` and
    ``lengths`` mirror the records as arrays for fast counting.
    """

    flow: FlowSpec
    cutoff: float
    representatives: tuple = field(repr=False)
    weights: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.representatives)

    @property
    def records(self):
        return [
            OrbitRecord(r, int(l), float(w))
            for r, l, w in zip(self.representatives, self.lengths, self.weights)
        ]

    def counts_by_length(self):
        lengths, counts = np.unique(self.lengths, return_counts=True)
        return dict(zip(lengths.tolist(), counts.tolist()))

    def word_multiplicities(self, rtol=1e-9):
        """Number of periodic sequences (words) per total weight.

        Each pair (orbit, k) with ``k w_t <= cutoff`` contributes ``#p`` words
        of weight ``k w_t``.  Returns a list of ``(weight, count)`` with equal
        weights merged within ``rtol``.
        """
        pairs = []
        for w, l in zip(self.weights, self.lengths):
            n = int(math.floor(self.cutoff / w * (1 + JUMP_RTOL)))
            pairs.extend((k * w, int(l)) for k in range(1, n + 1))
        pairs.sort()
        out = []
        for w, c in pairs:
            if out and abs(w - out[-1][0]) <= rtol * w:
                out[-1][1] += c
            else:
                out.append([w, c])
        return [(w, c) for w, c in out]

    def to_csv(self, fmt=repr):
        lines = ["length,total_weight,representative"]
        for r, l, w in zip(self.representatives, self.lengths, self.weights):
            lines.append(f"{int(l)},{fmt(float(w))},{r}")
        return "\n".join(lines) + "\n"


def estimate_census_size(flow: FlowSpec, cutoff):
    """Rough upper estimate of the number of primitive orbits up to ``cutoff``."""
    if flow.N == 1:
        return 1
    D = solve_dimension(flow).D
    w1 = flow.weights[0]
    c = max(cutoff, w1)
    return int(4 * math.exp(D * c) / (D * c) + flow.N)


def _alphabet(N):
    if N <= 9:
        return [str(a + 1) for a in range(N)]
    return [f"{a + 1}." for a in range(N)]


def _lyndon_from(first, weights, cutoff):
    """Lyndon words starting with letter ``first`` with weight <= cutoff.

    Returns ``(weight, representative)`` pairs.
    """
    N = len(weights)
    slack = cutoff * (1 + 1e-12)
    max_len = int(cutoff / weights[0] + 1e-9) + 1
    letters = _alphabet(N)
    a = [0] * (max_len + 2)
    counts = [0] * N
    out = []
    if weights[first] > slack:
        return out
    a[1] = first
    counts[first] = 1
    fsum = math.fsum

    def rec(t, p, acc, word):
        if p == t:
            out.append((fsum([c * w for c, w in zip(counts, weights)]), word))
        if t >= max_len:
            return
        start = a[t + 1 - p]
        for j in range(start, N):
            nacc = acc + weights[j]
            if nacc > slack:
                break
            a[t + 1] = j
            counts[j] += 1
            rec(t + 1, p if j == start else t + 1, nacc, word + letters[j])
            counts[j] -= 1

    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, max_len + 100))
    try:
        rec(1, 1, weights[first], letters[first])
    finally:
        sys.setrecursionlimit(old)
    return out


def enumerate_orbits(flow: FlowSpec, weight_cutoff, memory_cap=MEMORY_CAP, workers=1) -> OrbitCensus:
    """Enumerate primitive periodic orbits with total weight at most ``weight_cutoff``.

    A cutoff below ``w_1`` yields an empty census.  ``workers > 1``
    distributes the first-letter subtrees over processes; the merge is a
    deterministic sort so the result does not depend on ``workers``.
    """
    if not weight_cutoff > 0:
        raise ValidationError("must be positive", "cutoff")
    if flow.N == 0:
        raise ValidationError("flow has no weights", "flow")
    estimate = estimate_census_size(flow, weight_cutoff)
    if estimate > memory_cap:
        raise ResourceError(f"census estimated at {estimate} records exceeds the cap {memory_cap}")
    weights = list(flow.weights)
    N = flow.N
    if workers > 1 and N > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_lyndon_from, range(N), [weights] * N, [weight_cutoff] * N))
    else:
        parts = [_lyndon_from(i, weights, weight_cutoff) for i in range(N)]
    found = [item for part in parts for item in part]
    if len(found) > memory_cap:
        raise ResourceError(f"census holds {len(found)} records, above the cap {memory_cap}")
    found.sort()
    reps = tuple(word.rstrip(".") for _, word in found)
    ws = np.array([w for w, _ in found], dtype=float)
    if N <= 9:
        ls = np.array([len(word) for word in reps], dtype=np.int64)
    else:
        ls = np.array([word.count(".") + 1 for word in reps], dtype=np.int64)
    return OrbitCensus(flow, float(weight_cutoff), reps, ws, ls)


def _check(census, L):
    if L > census.cutoff * (1 + JUMP_RTOL):
        raise OutOfCensusError(f"log x = {L!r} beyond the census cutoff {census.cutoff!r}", "x")


def _multiples(wp, L, jump):
    """Number of k >= 1 with k*wp <= L, half-counting exact hits when ``jump='half'``."""
    ratio = L / wp
    n = np.floor(ratio * (1 + JUMP_RTOL))
    if jump == "full":
        return n
    if jump != "half":
        raise ValidationError(f"jump must be one of {JUMPS}", "jump")
    near = np.rint(ratio)
    on_jump = (near >= 1) & (np.abs(ratio - near) <= JUMP_RTOL * ratio)
    return n - 0.5 * on_jump


def _logx(x):
    x = float(x)
    if not x > 0:
        raise ValidationError("x must be positive", "x")
    return math.log(x)


def psi(census: OrbitCensus, x, jump="full"):
    """``psi_w(x) = sum over (p, k) with k w_t(p) <= log x of w_t(p)``."""
    L = _logx(x)
    _check(census, L)
    idx = np.searchsorted(census.weights, L * (1 + JUMP_RTOL), side="right")
    wp = census.weights[:idx]
    return math.fsum(wp * _multiples(wp, L, jump))


def theta(census: OrbitCensus, x, jump="full"):
    """``theta_w(x) = sum of w_t(p) over primitive orbits with w_t(p) <= log x``."""
    L = _logx(x)
    _check(census, L)
    idx = np.searchsorted(census.weights, L * (1 + JUMP_RTOL), side="right")
    wp = census.weights[:idx]
    return math.fsum(wp * np.minimum(_multiples(wp, L, jump), 1.0))


def pi_count(census: OrbitCensus, x, jump="full"):
    """Number of primitive orbits with ``w_t(p) <= log x``."""
    L = _logx(x)
    _check(census, L)
    idx = np.searchsorted(census.weights, L * (1 + JUMP_RTOL), side="right")
    if jump == "full":
        return int(idx)
    wp = census.weights[:idx]
    return float(np.sum(np.minimum(_multiples(wp, L, jump), 1.0)))


def psi_integral(census: OrbitCensus, x, start=0.0):
    """``int_start^x psi_w(t) dt``, exactly, as a sum over (p, k) of
    ``w_t(p) (x - max(start, e^{k w_t(p)}))_+``."""
    L = _logx(x)
    _check(census, L)
    if not 0 <= start <= x:
        raise ValidationError("need 0 <= start <= x", "start")
    La = math.log(start) if start > 0 else -math.inf
    total = []
    for wp in census.weights[: np.searchsorted(census.weights, L * (1 + JUMP_RTOL), side="right")]:
        n = int(math.floor(L / wp * (1 + JUMP_RTOL)))
        na = min(n, int(math.floor(La / wp * (1 + JUMP_RTOL)))) if start > 1 else 0
        # k <= na: whole interval; na < k <= n: geometric closed form
        geo = math.exp((na + 1) * wp) * math.expm1((n - na) * wp) / math.expm1(wp)
        total.append(wp * (na * (x - start) + (n - na) * x - geo))
    return math.fsum(total)


def counting_table(census: OrbitCensus, xs, jump="full", fmt=repr):
    lines = ["x,psi,theta,pi"]
    for x in xs:
        lines.append(
            f"{fmt(float(x))},{fmt(psi(census, x, jump))},{fmt(theta(census, x, jump))},{pi_count(census, x, jump)}"
        )
    return "\n".join(lines) + "\n"


def _powers(census):
    n = np.floor(census.cutoff / census.weights * (1 + JUMP_RTOL))
    return census.weights, n


def euler_sum(census: OrbitCensus, s):
    """Truncated Euler sum ``sum_p sum_{k w_t <= cutoff} w_t(p) e^{-s k w_t(p)}`` for ``-zeta'/zeta``."""
    s = complex(s)
    if len(census) and census.flow.N >= 2 and s.real <= solve_dimension(census.flow).D:
        warnings.warn("Re s <= D: the Euler sum does not converge there", RuntimeWarning, stacklevel=2)
    w, n = _powers(census)
    u = np.exp(-s * w)
    # geometric partial sums u (1 - u^n)/(1 - u)
    terms = w * u * (-np.expm1(-s * w * n)) / (-np.expm1(-s * w))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def log_euler_product(census: OrbitCensus, s):
    """``log prod_p (1 - e^{-s w_t(p)})^{-1}`` over the orbits in the census."""
    s = complex(s)
    terms = -np.log1p(-np.exp(-s * census.weights))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def log_zeta_truncated(census: OrbitCensus, s):
    """``sum_p sum_{k w_t <= cutoff} e^{-s k w_t(p)}/k``: the word-sum truncation of ``log zeta``."""
    s = complex(s)
    w, n = _powers(census)
    acc_re, acc_im = [], []
    kmax = int(n.max()) if n.size else 0
    for k in range(1, kmax + 1):
        sel = n >= k
        t = np.exp(-s * k * w[sel]) / k
        acc_re.append(math.fsum(t.real))
        acc_im.append(math.fsum(t.imag))
    return complex(math.fsum(acc_re), math.fsum(acc_im))
