"""Continued fractions, Ostrowski (alpha-adic) numeration and simultaneous
Diophantine approximation of flow weights.

Continued fractions of quadratic irrationals are computed exactly in integer
arithmetic (``QuadraticIrrational``); binary64 inputs are expanded as the
exact rational they represent, with a flag marking where that expansion stops
describing the intended real number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NumericIntegrityError, PreconditionError, ResourceError, ValidationError

INT64_MAX = 2**63 - 1

#: default cap on the number of q values scanned by :func:`simultaneous_approx`
SEARCH_CAP = 10**8


@dataclass(frozen=True)
class QuadraticIrrational:
    """The real number ``(P + sqrt(d)) / Q`` with ``d`` a positive non-square."""

    P: int
    d: int
    Q: int

    def __post_init__(self):
        if self.d <= 0 or math.isqrt(self.d) ** 2 == self.d:
            raise ValidationError(f"d={self.d} must be a positive non-square", "d")
        if self.Q == 0:
            raise ValidationError("Q must be nonzero", "Q")

    @classmethod
    def golden(cls):
        return cls(1, 5, 2)

    @classmethod
    def sqrt(cls, d):
        return cls(0, d, 1)

    def __float__(self):
        return (self.P + math.sqrt(self.d)) / self.Q

    def decimal(self, digits=50):
        with localcontext() as ctx:
            ctx.prec = digits
            return (Decimal(self.P) + Decimal(self.d).sqrt()) / Decimal(self.Q)

    def offset(self, n, m):
        """Return ``n*alpha - m`` without the cancellation of binary64."""
        with localcontext() as ctx:
            ctx.prec = 60
            return float(Decimal(n) * self.decimal(60) - Decimal(m))

    def _normalized(self):
        # the recursion needs Q | d - P^2
        P, d, Q = self.P, self.d, self.Q
        if (d - P * P) % Q:
            P, d, Q = P * abs(Q), d * Q * Q, Q * abs(Q)
        return P, d, Q


def parse_constant(text):
    """Parse ``golden``, ``sqrt(d)`` or a float literal.

    Returns a :class:`QuadraticIrrational` for the symbolic kinds and a
    ``float`` for ``literal`` input.
    """
    text = str(text).strip()
    if text == "golden":
        return QuadraticIrrational.golden()
    match = re.fullmatch(r"sqrt\((\d+)\)", text)
    if match:
        return QuadraticIrrational.sqrt(int(match.group(1)))
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"unrecognised constant {text!r}", "constant") from None


@dataclass(frozen=True)
class ContinuedFraction:
    """Partial quotients, convergents and the products ``q'_k`` of complete quotients.

    ``q_primes[k]`` is ``alpha_1 * ... * alpha_k`` (``q_primes[0] == 1``); it is
    available one index beyond the last convergent unless the expansion
    terminated (rational input).
    """

    alpha: float
    partial_quotients: tuple
    convergents: tuple
    q_primes: tuple
    terminated: bool = False
    early_stop: bool = False
    exact: object = field(default=None, repr=False, compare=False)

    @property
    def p(self):
        return [pk for pk, _ in self.convergents]

    @property
    def q(self):
        return [qk for _, qk in self.convergents]

    def __len__(self):
        return len(self.partial_quotients)

    def offset(self, n, m):
        """``n*alpha - m``, exact when the expansion came from an exact constant."""
        if isinstance(self.exact, QuadraticIrrational):
            return self.exact.offset(n, m)
        if isinstance(self.exact, Fraction):
            return float(n * self.exact - m)
        return n * self.alpha - m

    def max_partial_quotient(self, start=1):
        return max(self.partial_quotients[start:], default=0)


def _quadratic_quotients(x: QuadraticIrrational, depth: int):
    P, d, Q = x._normalized()
    root = math.isqrt(d)
    sqrt_d = math.sqrt(d)
    quotients, completes = [], []
    for _ in range(depth + 2):
        if Q > 0:
            a = (P + root) // Q
        else:
            a = -((P + root) // -Q) - 1
        quotients.append(a)
        completes.append((P + sqrt_d) / Q)
        P = a * Q - P
        Q = (d - P * P) // Q
    return quotients, completes


def _fraction_quotients(x: Fraction, depth: int):
    quotients, completes, fracs = [], [], []
    terminated = False
    for _ in range(depth + 2):
        a = math.floor(x)
        quotients.append(a)
        completes.append(float(x))
        frac = x - a
        fracs.append(float(frac))
        if frac == 0:
            terminated = True
            break
        x = 1 / frac
    return quotients, completes, fracs, terminated


def expand_cf(alpha, depth=20):
    """Continued fraction expansion of ``alpha`` to ``depth`` partial quotients past ``a_0``.

    ``alpha`` may be a float, a :class:`fractions.Fraction` or a
    :class:`QuadraticIrrational`.  Float input is expanded as the exact binary
    rational it denotes; ``early_stop`` is set when the expansion was cut at
    the first partial quotient that half an ulp of ``alpha`` could change
    (beyond that the digits describe the float, not the number it
    approximates).  All
    expansions stop before a convergent would overflow a signed 64-bit integer.
    """
    if depth < 1:
        raise ValidationError("depth must be >= 1", "depth")
    if isinstance(alpha, str):
        alpha = parse_constant(alpha)
    exact = alpha
    terminated = False
    if isinstance(alpha, QuadraticIrrational):
        quotients, completes = _quadratic_quotients(alpha, depth)
        value = float(alpha)
        half_ulp = None
    else:
        if float(alpha) <= 0:
            raise ValidationError("alpha must be positive", "alpha")
        exact = Fraction(alpha)
        quotients, completes, fracs, terminated = _fraction_quotients(exact, depth)
        value = float(alpha)
        half_ulp = None if isinstance(alpha, Fraction) else 0.5 * math.ulp(value)

    a_out, conv, qp = [], [], [1.0]
    p2, p1, q2, q1 = 0, 1, 1, 0
    early = False
    for k, a in enumerate(quotients[: depth + 1]):
        p, q = a * p1 + p2, a * q1 + q2
        if abs(p) > INT64_MAX or q > INT64_MAX:
            early = True
            break
        if half_ulp is not None and not (terminated and k == len(quotients) - 1):
            # d alpha_k / d alpha = (q_{k-1} alpha_k + q_{k-2})^2: drop a_k once
            # half an ulp in alpha could push alpha_k across an integer
            sens = half_ulp * (q1 * completes[k] + q2) ** 2
            if min(fracs[k], 1.0 - fracs[k]) <= 2 * sens:
                early = True
                break
        nxt = None
        if k + 1 < len(completes):
            nxt = qp[-1] * completes[k + 1]
        elif k + 1 < len(quotients):
            nxt = qp[-1] * float(quotients[k + 1])
        a_out.append(a)
        conv.append((p, q))
        p2, p1, q2, q1 = p1, p, q1, q
        if nxt is not None:
            qp.append(nxt)
    terminated = terminated and len(a_out) == len(quotients)
    qp = qp[: len(a_out) + (0 if terminated else 1)]
    return ContinuedFraction(
        alpha=value,
        partial_quotients=tuple(a_out),
        convergents=tuple(conv),
        q_primes=tuple(qp),
        terminated=terminated,
        early_stop=early,
        exact=exact,
    )


@dataclass(frozen=True)
class OstrowskiExpansion:
    n: int
    digits: tuple
    cf: ContinuedFraction = field(repr=False)

    @property
    def lowest_index(self):
        """Index ``k`` of the lowest nonzero digit."""
        return next(i for i, d in enumerate(self.digits) if d)

    def value(self):
        return sum(d * q for d, q in zip(self.digits, self.cf.q))


def digits_admissible(digits: Sequence[int], partial_quotients: Sequence[int]) -> bool:
    """Check the three digit constraints that make alpha-adic expansions unique."""
    a = partial_quotients
    if digits and digits[0] >= a[1]:
        return False
    for nu, d in enumerate(digits):
        if d < 0 or d > a[nu + 1]:
            return False
        if d == a[nu + 1] and nu > 0 and digits[nu - 1] != 0:
            return False
    return True


def ostrowski(n, cf: ContinuedFraction) -> OstrowskiExpansion:
    """Greedy alpha-adic expansion ``n = sum d_nu q_nu``."""
    if n < 1:
        raise ValidationError("n must be a positive integer", "n")
    q = cf.q
    if q[-1] <= n:
        raise PreconditionError(
            f"continued fraction too shallow: need q_(l+1) > {n}, deepest q is {q[-1]}", "cf"
        )
    l = max(i for i in range(len(q)) if q[i] <= n)
    digits = [0] * (l + 1)
    rest = n
    for nu in range(l, -1, -1):
        digits[nu], rest = divmod(rest, q[nu])
    # q_0 = q_1 = 1 when a_1 = 1; the greedy pass leaves d_0 = 0 there
    assert rest == 0
    return OstrowskiExpansion(n=n, digits=tuple(digits), cf=cf)


def orbit_of_approximation(n, cf: ContinuedFraction, slack=1e-9):
    """Bracket ``n*alpha - m`` between ``(-1)^k/q'_(k+2)`` and ``(-1)^k/q'_k``.

    Returns ``(m, lower, upper, k)`` with ``lower < upper``.
    """
    exp = ostrowski(n, cf)
    k = exp.lowest_index
    if k + 2 >= len(cf.q_primes):
        raise PreconditionError(f"need q'_{k + 2}; expansion too shallow", "cf")
    m = sum(d * p for d, p in zip(exp.digits, cf.p))
    sign = -1.0 if k % 2 else 1.0
    ends = sorted((sign / cf.q_primes[k + 2], sign / cf.q_primes[k]))
    value = cf.offset(n, m)
    scale = max(abs(ends[0]), abs(ends[1]))
    if not (ends[0] - slack * scale < value < ends[1] + slack * scale):
        raise NumericIntegrityError(
            f"n*alpha - m = {value!r} escapes ({ends[0]!r}, {ends[1]!r}) for n={n}, k={k}"
        )
    return m, ends[0], ends[1], k


def _round_half_away(v):
    return math.copysign(math.floor(abs(v) + 0.5), v)


@dataclass(frozen=True)
class SimultaneousApproximation:
    """Integers ``q`` and ``p_j`` with ``|q w_j - p_j w_1| <= w_1/Q``.

    ``deltas[j] = q w_j/w_1 - p_j``; the perturbation variables are
    ``x_j = 2*pi*i*deltas[j]``.
    """

    q: int
    p: tuple
    deltas: tuple
    Q: float

    @property
    def errors(self):
        return tuple(2 * math.pi * abs(d) for d in self.deltas)


def _weight_ratios(flow):
    w = np.asarray(flow.weights, dtype=float)
    return w / w[0]


def _flow_cf(flow, depth=60):
    alpha = flow.alpha if getattr(flow, "alpha", None) is not None else flow.weights[1] / flow.weights[0]
    return expand_cf(alpha, depth)


def _check_lemma(flow, approx, bound_q=True):
    w = flow.weights
    for wj, pj in zip(w, approx.p):
        if abs(approx.q * wj - pj * w[0]) > w[0] / approx.Q * (1 + 1e-9):
            raise NumericIntegrityError(f"|q w_j - p_j w_1| exceeds w_1/Q for q={approx.q}")
    if bound_q and not approx.q < approx.Q ** (len(w) - 1):
        raise NumericIntegrityError(f"q={approx.q} not below Q^(N-1)")


def simultaneous_approx(flow, Q, cap=SEARCH_CAP):
    """Smallest ``q < Q^(N-1)`` with every ``|q w_j/w_1 - p_j| <= 1/Q``.

    Two weights go through the convergents of ``w_2/w_1`` (they are the best
    approximations); more weights use a direct scan of ``q``.
    """
    N = len(flow.weights)
    if N < 2:
        raise ValidationError("need at least two weights", "flow")
    if not Q > 1:
        raise ValidationError("Q must exceed 1", "Q")
    limit = math.ceil(Q ** (N - 1))
    ratios = _weight_ratios(flow)
    tol = 1.0 / Q * (1 + 1e-12)
    q_found = None
    if N == 2:
        cf = _flow_cf(flow)
        for k, (pk, qk) in enumerate(cf.convergents):
            if abs(cf.offset(qk, pk)) <= tol:
                q_found = qk
                break
        if q_found is None and cf.terminated:
            q_found = cf.q[-1]
        if q_found is None:
            raise ResourceError(f"no convergent reaches 1/Q={1 / Q:g} within binary64 resolution")
    else:
        if limit - 1 > cap:
            raise ResourceError(f"scan up to Q^(N-1)={limit} exceeds the cap {cap}; use a smaller Q")
        rest = ratios[1:]
        chunk = 1 << 16
        for start in range(1, limit, chunk):
            qs = np.arange(start, min(start + chunk, limit), dtype=float)[:, None]
            dev = np.abs(qs * rest - np.rint(qs * rest)).max(axis=1)
            hit = np.flatnonzero(dev <= tol)
            if hit.size:
                q_found = int(qs[hit[0], 0])
                break
        if q_found is None:
            raise NumericIntegrityError(f"no q < Q^(N-1) found for Q={Q}; weights may be degenerate")
    p = tuple(int(_round_half_away(q_found * r)) for r in ratios)
    deltas = tuple(float(q_found * r - pj) for r, pj in zip(ratios, p))
    if N == 2 and isinstance(getattr(flow, "alpha", None), QuadraticIrrational):
        deltas = (0.0, flow.alpha.offset(q_found, p[1]))
    approx = SimultaneousApproximation(q=q_found, p=p, deltas=deltas, Q=float(Q))
    _check_lemma(flow, approx)
    return approx


def approximate_from(flow, q_min, max_dev, cap=SEARCH_CAP):
    """Smallest ``q >= q_min`` with ``max_j |q w_j/w_1 - p_j| <= max_dev``.

    Used to build lattice surrogates with generator ``w_1/q``.  The returned
    ``Q`` is the quality actually achieved; ``q < Q^(N-1)`` is not promised.
    """
    ratios = _weight_ratios(flow)
    rest = ratios[1:]
    chunk = 1 << 15
    q = max(1, int(q_min))
    while q <= cap:
        qs = np.arange(q, q + chunk, dtype=float)[:, None]
        dev = np.abs(qs * rest - np.rint(qs * rest)).max(axis=1)
        hit = np.flatnonzero(dev <= max_dev)
        if hit.size:
            qf = int(qs[hit[0], 0])
            p = tuple(int(_round_half_away(qf * r)) for r in ratios)
            deltas = tuple(float(qf * r - pj) for r, pj in zip(ratios, p))
            worst = max(abs(d) for d in deltas)
            return SimultaneousApproximation(q=qf, p=p, deltas=deltas, Q=1.0 / worst if worst else math.inf)
        q += chunk
    raise ResourceError(f"no surrogate denominator below the cap {cap}")


@dataclass(frozen=True)
class ApproximabilityProfile:
    """``e(q) = max_j |q w_j - p_j w_1|`` and ``e(q) q^(1/(N-1)) / w_1`` for q = 1..q_max."""

    q: np.ndarray
    max_error: np.ndarray
    ratio: np.ndarray

    def rows(self):
        return list(zip(self.q.tolist(), self.max_error.tolist(), self.ratio.tolist()))


def approximability_profile(flow, q_max) -> ApproximabilityProfile:
    N = len(flow.weights)
    if N < 2:
        raise ValidationError("need at least two weights", "flow")
    w = np.asarray(flow.weights, dtype=float)
    ratios = w[1:] / w[0]
    qs = np.arange(1, int(q_max) + 1)
    qf = qs.astype(float)[:, None]
    if N == 2 and isinstance(getattr(flow, "alpha", None), QuadraticIrrational):
        alpha = flow.alpha
        dev = np.array([[abs(alpha.offset(int(q), int(_round_half_away(q * float(alpha)))))] for q in qs])
    else:
        dev = np.abs(qf * ratios - np.rint(qf * ratios))
    err = dev.max(axis=1) * w[0]
    ratio = err * qs ** (1.0 / (N - 1)) / w[0]
    return ApproximabilityProfile(q=qs, max_error=err, ratio=ratio)
