"""Explicit formulas for the orbit counting function.

``psi_w(x) = sum_omega res(omega) x^omega / omega - (1/(N-1)) sum_j w_j``,
summed over the complex dimensions.  Lattice flows collapse each vertical line
into a periodic function ``g_u``; nonlattice flows are truncated to a window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dimensions import DimensionWindow
from .errors import NumericIntegrityError, PreconditionError, ValidationError
from .flow import FlowSpec, LatticeStructure
from .orbits import OrbitCensus, psi as census_psi, psi_integral
from .polyroots import sparse_roots
from .zeta import log_deriv_at_zero

#: log x / w within this of an integer is treated as a jump point
LATTICE_POINT_TOL = 1e-12


@dataclass(frozen=True)
class PeriodicProfile:
    """``g_u(y) = (w b/(b - 1)) b^{-{y/w}}`` with ``b = e^{w omega_u}``.

    ``g_u(log x) x^{omega_u}`` is the contribution of the whole line
    ``omega_u + 2 pi i n / w`` to the explicit formula.
    """

    omega_u: complex
    b_u: complex
    period: float

    @classmethod
    def from_omega(cls, omega, w):
        return cls(complex(omega), complex(np.exp(w * omega)), float(w))

    def closed_form(self, y, jump="full"):
        w, b = self.period, self.b_u
        t = y / w
        n = math.floor(t)
        frac = t - n
        value = w * b / (b - 1) * b ** (-frac)
        near = round(t)
        if jump == "half" and abs(t - near) <= LATTICE_POINT_TOL * max(1.0, abs(t)):
            # average of the right value (frac = 0) and the left limit (frac -> 1)
            value = w * b / (b - 1) * 0.5 * (1 + 1 / b)
        return value

    def line_term(self, y, jump="full"):
        """``g_u(y) e^{omega_u y}``, computed as ``(w b/(b-1)) b^{floor(y/w)}``."""
        w, b = self.period, self.b_u
        t = y / w
        near = round(t)
        on_jump = abs(t - near) <= LATTICE_POINT_TOL * max(1.0, abs(t))
        n = near if on_jump else math.floor(t)
        # psi vanishes on both sides of x = 1, so y = 0 is not a jump
        on_jump = on_jump and near >= 1
        value = w * b / (b - 1) * b**n
        if on_jump and jump == "half":
            value = 0.5 * (value + w * b / (b - 1) * b ** (n - 1))
        return value

    def fourier_partial(self, y, terms):
        """Symmetric partial sum ``sum_{|n| <= terms} e^{2 pi i n y/w}/(omega_u + 2 pi i n/w)``."""
        n = np.arange(-terms, terms + 1)
        k = 2j * np.pi * n / self.period
        return complex(np.sum(np.exp(k * y) / (self.omega_u + k)))

    def fourier_tail_bound(self, y, terms):
        """Bound on the symmetric-partial-sum error away from the jumps.

        Pairs ``n, -n`` leave an alternating-type tail controlled by
        ``w / (2 pi terms sin(pi d))`` where ``d`` is the distance of ``y/w``
        to the nearest integer, plus the ``1/n^2`` part of the expansion.
        """
        w = self.period
        d = abs(y / w - round(y / w))
        if d == 0:
            return math.inf
        big = abs(self.omega_u) * w / (2 * math.pi)
        return w / (2 * math.pi * terms * math.sin(math.pi * d)) * (1 + big) + w * big**2 / (
            2 * math.pi**2 * terms
        )


def lattice_profiles(flow: FlowSpec, lat: LatticeStructure):
    """Periodic profiles and residues of every line of a lattice flow."""
    poly = {}
    for k in lat.multipliers:
        poly[k] = poly.get(k, 0.0) + 1.0
    poly[0] = poly.get(0, 0.0) - 1.0
    out = []
    for z, mult in sparse_roots(poly):
        if z == 0:
            continue
        omega = complex(-math.log(abs(z)), -np.angle(z)) / lat.generator
        out.append((PeriodicProfile(omega, 1 / z, lat.generator), int(mult)))
    return out


def lattice_psi(flow: FlowSpec, lat: LatticeStructure, x, jump="half", profiles=None):
    """Exact closed form ``psi_w(x) = sum_u res_u g_u(log x) x^{omega_u} - sum w_j/(N-1)``.

    ``jump='half'`` returns the midpoint value at jumps (the value the
    explicit formula converges to); ``'full'`` the right-continuous one.
    """
    if x < 1:
        raise ValidationError("x must be >= 1", "x")
    if jump not in ("full", "half"):
        raise ValidationError("jump must be 'full' or 'half'", "jump")
    profiles = profiles if profiles is not None else lattice_profiles(flow, lat)
    y = math.log(x)
    terms = [res * p.line_term(y, jump) for p, res in profiles]
    value = math.fsum(t.real for t in terms) + log_deriv_at_zero(flow)
    imag = math.fsum(t.imag for t in terms)
    if abs(imag) > 1e-9 * max(1.0, abs(value)):
        raise NumericIntegrityError(f"lattice expansion not real: imaginary part {imag:.3g}")
    return value


@dataclass(frozen=True)
class ExplicitExpansion:
    """Truncated explicit formula at level 1 or 2 over a window of dimensions."""

    flow: FlowSpec
    T: float
    D: float
    terms: tuple  # (omega, residue) with Im omega > 0, ascending
    real_terms: tuple  # (omega, residue) real, omega != D
    constant_term: float
    level: int = 1

    @classmethod
    def from_window(cls, window: DimensionWindow, level=1):
        if level not in (1, 2):
            raise ValidationError("level must be 1 or 2", "level")
        upper = [(d.omega, d.residue) for d in window.dims if d.omega.imag > 0]
        upper.sort(key=lambda t: t[0].imag)
        real = [(d.omega, d.residue) for d in window.dims if d.omega.imag == 0 and d.omega != window.D]
        for om, _ in upper + real:
            if abs(om) < 1e-12:
                raise NumericIntegrityError("0 is never a complex dimension of a self-similar flow")
        return cls(
            window.flow, window.T, window.D, tuple(upper), tuple(real), log_deriv_at_zero(window.flow), level
        )

    def oscillatory(self, x):
        """Sum over the dimensions other than ``D``, conjugate pairs combined."""
        y = math.log(x)
        parts = []
        for om, res in self.terms:
            if self.level == 1:
                parts.append(2 * res * (np.exp(om * y) / om).real)
            else:
                parts.append(2 * res * (np.exp((om + 1) * y) / (om * (om + 1))).real)
        for om, res in self.real_terms:
            om = om.real
            if self.level == 1:
                parts.append(res * math.exp(om * y) / om)
            else:
                parts.append(res * math.exp((om + 1) * y) / (om * (om + 1)))
        return math.fsum(parts)

    def main_term(self, x):
        D = self.D
        return x**D / D if self.level == 1 else x ** (D + 1) / (D * (D + 1))

    def evaluate(self, x):
        if self.level == 1:
            return self.main_term(x) + self.oscillatory(x) + self.constant_term
        return self.main_term(x) + self.oscillatory(x) + x * self.constant_term - _level2_constant(self.flow)


def _level2_constant(flow):
    """``(-zeta'/zeta)(-1) = sum w_j e^{w_j} / (1 - sum e^{w_j})``."""
    w = np.asarray(flow.weights, dtype=float)
    return float(np.sum(w * np.exp(w)) / (1 - np.sum(np.exp(w))))


def nonlattice_psi(flow: FlowSpec, window: DimensionWindow, x):
    """Truncated level-1 formula; returns ``(value, tail_bound)``.

    ``tail_bound = (w_N/pi) x^D / T`` is heuristic: the level-1 sum is not
    absolutely convergent, so it only indicates the size of the neglected part.
    """
    if window.T < 2 * math.pi / flow.weights[0]:
        raise PreconditionError(f"window half-height {window.T} below 2 pi / w_1", "T")
    exp = ExplicitExpansion.from_window(window, 1)
    value = exp.evaluate(x)
    tail = flow.weights[-1] / math.pi * x**window.D / window.T
    return value, tail


def psi_level2(flow: FlowSpec, window: DimensionWindow, x):
    """``int_0^x psi_w`` from the level-2 explicit formula.

    Lattice windows use the closed form of each line (exact); otherwise the
    sum is truncated to the window.
    """
    if x < 1:
        raise ValidationError("x must be >= 1", "x")
    if window.period is not None:
        y = math.log(x)
        w = 2 * math.pi / window.period
        parts = []
        for omega_u, res in window.lines:
            p0 = PeriodicProfile.from_omega(omega_u, w)
            p1 = PeriodicProfile.from_omega(omega_u + 1, w)
            parts.append(res * (x * p0.line_term(y, "half") - p1.line_term(y, "half")))
        value = math.fsum(p.real for p in parts)
        return value + x * log_deriv_at_zero(flow) - _level2_constant(flow)
    if window.T < 2 * math.pi / flow.weights[0]:
        raise PreconditionError(f"window half-height {window.T} below 2 pi / w_1", "T")
    return ExplicitExpansion.from_window(window, 2).evaluate(x)


@dataclass(frozen=True)
class TauberianBracket:
    lower: float
    psi: float
    upper: float

    #: rounding allowance; on a flat stretch all three values coincide
    rtol: float = 1e-12

    @property
    def holds(self):
        tol = self.rtol * max(abs(self.psi), 1.0)
        return self.lower <= self.psi + tol and self.psi <= self.upper + tol


def tauberian_bracket(census: OrbitCensus, x, h, jump="full"):
    """``(1/h) int_{x-h}^x psi <= psi(x) <= (1/h) int_x^{x+h} psi`` from the census."""
    if not 0 < h < x:
        raise ValidationError("need 0 < h < x", "h")
    lower = psi_integral(census, x, start=x - h) / h
    upper = psi_integral(census, x + h, start=x) / h
    return TauberianBracket(lower, census_psi(census, x, jump), upper)


@dataclass(frozen=True)
class ErrorScalingReport:
    x: np.ndarray
    psi_census: np.ndarray
    psi_formula: np.ndarray
    main_term: np.ndarray
    normalized_error: np.ndarray
    envelope: np.ndarray
    exponent: float
    fitted_c: float

    def to_csv(self, fmt=repr):
        lines = ["x,psi_census,psi_formula,main_term,normalized_error,envelope"]
        for row in zip(self.x, self.psi_census, self.psi_formula, self.main_term, self.normalized_error, self.envelope):
            lines.append(",".join(fmt(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def envelope_exponent(N, l=0):
    """``(N-1)/(4l+4)``; ``l = 0`` for badly approximable weights."""
    return (N - 1) / (4 * l + 4)


def error_scaling_report(flow: FlowSpec, window: DimensionWindow, x_grid, census: OrbitCensus, exponent=None):
    """Census error against the envelope ``(log log x / log x)^e``.

    Purely descriptive: the envelope is an asymptotic statement.  ``fitted_c``
    is the least-squares constant in ``|error| ~ c * envelope``.
    """
    xs = np.asarray(x_grid, dtype=float)
    if np.any(np.log(xs) <= math.e):
        raise ValidationError("x grid must satisfy log x > e for the envelope to be decreasing", "x_grid")
    e = envelope_exponent(flow.N) if exponent is None else float(exponent)
    D = window.D
    pc = np.array([census_psi(census, x, "half") for x in xs])
    exp = ExplicitExpansion.from_window(window, 1)
    pf = np.array([exp.evaluate(x) for x in xs])
    main = xs**D / D
    norm = (pc - main) / xs**D
    L = np.log(xs)
    env = (np.log(L) / L) ** e
    c = float(np.sum(np.abs(norm) * env) / np.sum(env * env))
    return ErrorScalingReport(xs, pc, pf, main, norm, env, e, c)
