"""Flow specifications, the lattice/nonlattice dichotomy and the real dimension."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Mapping, Optional

import numpy as np
from scipy.optimize import brentq

from .diophantine import QuadraticIrrational, parse_constant
from .errors import SolverError, ValidationError

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

#: relative tolerance for declaring w_j/w_1 rational
LATTICE_RTOL = 1e-12
#: p/q must beat the generic 1/q^2 approximation quality by this factor
RESOLVE_FACTOR = 1e-3
#: residual target for the real roots
ROOT_TOL = 1e-13


@dataclass(frozen=True)
class FlowSpec:
    """Weights ``w_1 <= ... <= w_N`` of a self-similar flow.

    ``alpha`` optionally records ``w_2/w_1`` as an exact quadratic irrational
    (two-weight flows only); it makes the nonlattice verdict and continued
    fraction exact instead of resolution-limited.
    """

    weights: tuple
    name: Optional[str] = None
    alpha: Optional[QuadraticIrrational] = field(default=None, compare=False)

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        for x in w:
            if not (math.isfinite(x) and x > 0):
                raise ValidationError(f"weights must be positive and finite, got {x!r}", "weights")
        object.__setattr__(self, "weights", tuple(sorted(w)))
        if self.alpha is not None and len(w) != 2:
            raise ValidationError("a symbolic ratio needs exactly two weights", "symbolic_ratio")

    @property
    def N(self):
        return len(self.weights)

    @property
    def ratios(self):
        return tuple(math.exp(-w) for w in self.weights)

    @property
    def w(self):
        return np.asarray(self.weights, dtype=float)

    @property
    def smallest_multiplicity(self):
        """Number of weights equal to ``w_N`` (multiplicity of the smallest ratio)."""
        wN = self.weights[-1]
        return sum(1 for x in self.weights if abs(x - wN) <= LATTICE_RTOL * wN)

    def scaled(self, c):
        alpha = self.alpha
        return FlowSpec(tuple(c * x for x in self.weights), self.name, alpha)

    @classmethod
    def from_ratios(cls, ratios, name=None):
        for r in ratios:
            if not 0 < r < 1:
                raise ValidationError(f"ratios must lie in (0, 1), got {r!r}", "ratios")
        return cls(tuple(-math.log(r) for r in ratios), name)

    @classmethod
    def from_lattice(cls, generator, multipliers, name=None):
        return cls(tuple(k * generator for k in multipliers), name)


def cantor_flow():
    return FlowSpec((math.log(3), math.log(3)), "cantor")


def fibonacci_flow():
    return FlowSpec((math.log(2), 2 * math.log(2)), "fibonacci")


def golden_flow():
    phi = QuadraticIrrational.golden()
    return FlowSpec((math.log(2), float(phi) * math.log(2)), "golden", alpha=phi)


NAMED_FLOWS = {"cantor": cantor_flow, "fibonacci": fibonacci_flow, "golden": golden_flow}


def named_flow(name):
    try:
        return NAMED_FLOWS[name]()
    except KeyError:
        raise ValidationError(f"unknown flow {name!r}; known: {', '.join(NAMED_FLOWS)}", "flow") from None


def _numbers(values, key):
    if not isinstance(values, (list, tuple)) or not values:
        raise ValidationError("must be a nonempty list of numbers", key)
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError(f"entry {i} is not a number: {v!r}", key)
        out.append(float(v))
    return out


def flow_from_mapping(doc: Mapping) -> FlowSpec:
    if "weights" in doc and "ratios" in doc:
        raise ValidationError("give either weights or ratios, not both", "weights")
    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ValidationError("must be a string", "name")
    if "weights" in doc:
        weights = _numbers(doc["weights"], "weights")
        for w in weights:
            if w <= 0:
                raise ValidationError(f"nonpositive weight {w!r}", "weights")
    elif "ratios" in doc:
        ratios = _numbers(doc["ratios"], "ratios")
        for r in ratios:
            if not 0 < r < 1:
                raise ValidationError(f"ratio {r!r} outside (0, 1)", "ratios")
        weights = [-math.log(r) for r in ratios]
    else:
        raise ValidationError("missing key; need weights or ratios", "weights")
    alpha = None
    if "symbolic_ratio" in doc:
        alpha = parse_constant(doc["symbolic_ratio"])
        if not isinstance(alpha, QuadraticIrrational):
            raise ValidationError("must be 'golden' or 'sqrt(d)'", "symbolic_ratio")
        if len(weights) != 2:
            raise ValidationError("a symbolic ratio needs exactly two weights", "symbolic_ratio")
        w1 = min(weights)
        if abs(max(weights) / w1 - float(alpha)) > 1e-12 * float(alpha):
            raise ValidationError("does not match w_2/w_1", "symbolic_ratio")
        weights = [w1, float(alpha) * w1]
    return FlowSpec(tuple(weights), name, alpha)


def load_flow(source) -> FlowSpec:
    """Load a flow from a TOML/JSON file path, a document string or a mapping."""
    if isinstance(source, Mapping):
        return flow_from_mapping(source)
    path = Path(source)
    if path.suffix in (".toml", ".json") or path.exists():
        try:
            text = path.read_text()
        except OSError as exc:
            raise ValidationError(str(exc), "source") from exc
        fmt = "json" if path.suffix == ".json" else "toml"
    else:
        text = str(source)
        fmt = "json" if text.lstrip().startswith("{") else "toml"
    try:
        doc = json.loads(text) if fmt == "json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ValidationError(f"cannot parse {fmt}: {exc}", "source") from exc
    if not isinstance(doc, Mapping):
        raise ValidationError("document must be a table/object", "source")
    return flow_from_mapping(doc)


@dataclass(frozen=True)
class LatticeStructure:
    """``w_j = k_j * generator`` with ``gcd(k) = 1``."""

    generator: float
    multipliers: tuple
    max_denominator: int = 0

    @property
    def k_max(self):
        return self.multipliers[-1]


def classify_lattice(flow: FlowSpec, max_denominator=10**6) -> Optional[LatticeStructure]:
    """Return the lattice structure of ``flow`` or ``None`` (nonlattice at this resolution)."""
    if max_denominator < 1:
        raise ValidationError("must be >= 1", "max_denominator")
    if flow.N == 0:
        return None
    if flow.alpha is not None:
        return None  # exact quadratic irrational ratio
    w1 = flow.weights[0]
    fracs = []
    for wj in flow.weights:
        ratio = wj / w1
        frac = Fraction(ratio).limit_denominator(max_denominator)
        err = abs(ratio - frac.numerator / frac.denominator)
        if err >= LATTICE_RTOL * ratio:
            return None
        # an irrational ratio is always within 1/q^2 of some p/q; accept only
        # approximations far better than that (binary64 rounding of a true p/q)
        if err * frac.denominator**2 >= RESOLVE_FACTOR * max(1.0, ratio):
            return None
        fracs.append(frac)
    L = reduce(math.lcm, (f.denominator for f in fracs))
    k = [f.numerator * (L // f.denominator) for f in fracs]
    g = reduce(math.gcd, k)
    k = tuple(x // g for x in k)
    return LatticeStructure(generator=w1 / k[0], multipliers=k, max_denominator=int(max_denominator))


@dataclass(frozen=True)
class DimensionPair:
    """Real dimension ``D``, strip edge ``D0`` and the multiplicity ``m`` of ``r_N``."""

    D: float
    D0: float
    m: int
    degenerate: bool = False


def _polish(fun, dfun, x, steps=4):
    for _ in range(steps):
        d = dfun(x)
        if d == 0:
            break
        nx = x - fun(x) / d
        if not math.isfinite(nx) or abs(fun(nx)) >= abs(fun(x)):
            break
        x = nx
    return x


def solve_dimension(flow: FlowSpec) -> DimensionPair:
    """Solve ``sum r_j^D = 1`` and the equation for the strip edge ``D0``."""
    if flow.N <= 1:
        return DimensionPair(0.0, 0.0, flow.N, degenerate=True)
    w = flow.w
    N = flow.N

    def f(s):
        return 1.0 - math.fsum(np.exp(-w * s))

    def df(s):
        return math.fsum(w * np.exp(-w * s))

    # D <= log N / w_1, with equality for equal weights; widen so rounding cannot flip the sign
    hi = 1.01 * math.log(N) / w[0]
    try:
        D = brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise SolverError(f"dimension bracket failed: {exc}", bracket=(0.0, hi)) from exc
    D = _polish(f, df, D)
    if abs(f(D)) > ROOT_TOL:
        raise SolverError(f"residual {f(D):.3g} above {ROOT_TOL}", bracket=(0.0, hi))

    m = flow.smallest_multiplicity
    wN = w[-1]
    rest = w[: N - m]

    def h(s):
        return m - math.exp(wN * s) - math.fsum(np.exp((wN - rest) * s))

    def dh(s):
        return -wN * math.exp(wN * s) - math.fsum((wN - rest) * np.exp((wN - rest) * s))

    # h decreases from m to -inf and h(D) <= 0 (D0 = D for equal weights); pad for rounding
    upper = D + 1e-6 * (1.0 + abs(D))
    lower = min(0.0, D) - 1.0
    for _ in range(200):
        if h(lower) > 0:
            break
        lower = 2 * lower
    else:
        raise SolverError("could not bracket D0", bracket=(lower, upper))
    if h(upper) > 0:
        raise SolverError("D0 bracket inconsistent", bracket=(lower, upper))
    D0 = brentq(h, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    D0 = _polish(h, dh, D0)
    scale = m * math.exp(-wN * D0)
    resid = (1 + math.fsum(np.exp(-rest * D0)) - scale) / max(1.0, scale)
    if abs(resid) > 1e-12:
        raise SolverError(f"D0 residual {resid:.3g}", bracket=(lower, upper))
    return DimensionPair(D=float(D), D0=float(min(D0, D)), m=m)
