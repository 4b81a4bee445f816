"""Complex dimensions: roots of ``f(s) = 1 - sum_j exp(-w_j s)``.

Lattice flows reduce to the polynomial ``sum_j z^{k_j} = 1`` with
``z = exp(-w s)``.  Nonlattice flows are handled by solving a lattice
surrogate and Newton-refining each candidate against the true ``f``.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _series
from .diophantine import (
    ContinuedFraction,
    SimultaneousApproximation,
    approximate_from,
    expand_cf,
    ostrowski,
    simultaneous_approx,
)
from .errors import (
    AccuracyError,
    CapabilityError,
    DomainError,
    NumericIntegrityError,
    PreconditionError,
    ResourceError,
    ValidationError,
)
from .flow import FlowSpec, LatticeStructure, classify_lattice, solve_dimension
from .polyroots import sparse_roots
from .zeta import f_prime, f_value

log = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-9
NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50
MERGE_RADIUS = 1e-8
#: refuse windows expected to hold more roots than this
ROOT_CAP = 200_000
MAX_SERIES_ORDER = 8


def residual_scale(weights, s):
    w = np.asarray(weights, dtype=float)
    return 1.0 + np.sum(w * np.exp(-np.multiply.outer(np.real(s), w)), axis=-1)


@dataclass(frozen=True)
class ComplexDimension:
    omega: complex
    residue: int = 1
    source: str = "refined"
    residual: float = 0.0

    @property
    def re(self):
        return self.omega.real

    @property
    def im(self):
        return self.omega.imag


@dataclass(frozen=True)
class DimensionWindow:
    """Complex dimensions with ``|Im| <= T``, sorted by imaginary part.

    ``lines`` holds the base points and residues of the vertical lines for a
    lattice flow (``period = 2*pi/generator``); it is empty otherwise.
    """

    flow: FlowSpec
    T: float
    dims: tuple
    D: float
    D0: float
    lines: tuple = ()
    period: Optional[float] = None
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def omegas(self):
        return np.array([d.omega for d in self.dims], dtype=complex)

    @property
    def residues(self):
        return np.array([d.residue for d in self.dims], dtype=int)

    def __len__(self):
        return len(self.dims)

    def nontrivial(self):
        """Dimensions other than ``D`` itself."""
        return [d for d in self.dims if abs(d.omega - self.D) > 1e-9]

    def to_csv(self, fmt=repr):
        lines = ["re,im,residue,source,residual"]
        for d in self.dims:
            lines.append(
                f"{fmt(float(d.omega.real))},{fmt(float(d.omega.imag))},{d.residue},{d.source},{fmt(float(d.residual))}"
            )
        return "\n".join(lines) + "\n"


def _newton(weights, s, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER):
    """Newton iteration on ``f``; returns ``(root, relative residual, converged)``."""
    w = np.asarray(weights, dtype=float)
    for _ in range(maxiter):
        fv = complex(f_value(w, s))
        res = abs(fv) / float(residual_scale(w, s))
        if res < tol:
            return s, res, True
        step = fv / complex(f_prime(w, s))
        s = s - step
        if not np.isfinite(s):
            return s, math.inf, False
        if abs(step) < 1e-15 * max(1.0, abs(s)):
            break
    fv = complex(f_value(w, s))
    res = abs(fv) / float(residual_scale(w, s))
    return s, res, res < RESIDUAL_RTOL


def refine_root(flow, s, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER):
    """Newton-refine a single guess against the true ``f``."""
    root, res, ok = _newton(flow.weights, complex(s), tol, maxiter)
    if not ok:
        return None
    return ComplexDimension(root, 1, "refined", res)


def lattice_dimensions(flow: FlowSpec, lat: LatticeStructure, T) -> DimensionWindow:
    """All complex dimensions with ``|Im| <= T`` of a lattice flow."""
    if T <= 0:
        raise ValidationError("must be positive", "T")
    if flow.N < 2:
        raise DomainError("lattice dimensions need N >= 2", "flow")
    w = lat.generator
    for wj, kj in zip(flow.weights, lat.multipliers):
        if abs(wj - kj * w) > 1e-10 * wj:
            raise ValidationError("lattice structure inconsistent with weights", "lat")
    period = 2 * math.pi / w
    if 2 * T / period * lat.k_max > ROOT_CAP:
        raise ResourceError(f"window would hold about {2 * T / period * lat.k_max:.0f} roots; cap {ROOT_CAP}")
    coeffs = Counter(lat.multipliers)
    poly = {e: float(c) for e, c in coeffs.items()}
    poly[0] = poly.get(0, 0.0) - 1.0
    roots = sparse_roots(poly)
    pair = solve_dimension(flow)
    base = []
    for z, mult in roots:
        if z == 0:
            continue
        theta = math.atan2(z.imag, z.real) if z.imag != 0 else (math.pi if z.real < 0 else 0.0)
        base.append((complex(-math.log(abs(z)) / w, -theta / w), int(mult)))
    # the positive real root is D exactly
    for i, (om, m) in enumerate(base):
        if om.imag == 0 and abs(om.real - pair.D) < 1e-8:
            base[i] = (complex(pair.D, 0.0), m)
    dims = []
    for om, mult in base:
        n_lo = math.ceil((-T - om.imag) / period - 1e-12)
        n_hi = math.floor((T - om.imag) / period + 1e-12)
        for n in range(n_lo, n_hi + 1):
            s = complex(om.real, om.imag + n * period)
            if abs(s.imag) > T:
                continue
            res = abs(complex(f_value(flow.weights, s))) / float(residual_scale(flow.weights, s))
            dims.append(ComplexDimension(s, mult, "lattice-exact", res))
    dims.sort(key=lambda d: (d.omega.imag, d.omega.real))
    window = DimensionWindow(
        flow=flow,
        T=float(T),
        dims=tuple(dims),
        D=pair.D,
        D0=pair.D0,
        lines=tuple(base),
        period=period,
        metadata={
            "method": "lattice-exact",
            "generator": w,
            "multipliers": list(lat.multipliers),
            "max_denominator": lat.max_denominator,
            "residue_total": sum(m for _, m in base),
        },
    )
    return window


def _surrogate(flow, T, max_dev, approx_Q=None):
    """Lattice surrogate ``(q, p_j)`` whose generator ``w_1/q`` resolves the window."""
    w1 = flow.weights[0]
    q_min = math.ceil(4 * T * w1 / (2 * math.pi))
    if approx_Q is not None:
        sim = simultaneous_approx(flow, approx_Q)
        if sim.q >= q_min:
            return sim
    if flow.N == 2:
        cf = _flow_cf(flow)
        for pk, qk in cf.convergents:
            if qk >= q_min and abs(cf.offset(qk, pk)) <= max_dev:
                dev = cf.offset(qk, pk)
                Q = 1.0 / abs(dev) if dev else math.inf
                return SimultaneousApproximation(qk, (qk, pk), (0.0, dev), Q)
    return approximate_from(flow, q_min, max_dev)


def _flow_cf(flow, depth=80):
    alpha = flow.alpha if flow.alpha is not None else flow.weights[1] / flow.weights[0]
    return expand_cf(alpha, depth)


def nonlattice_dimensions(flow: FlowSpec, T, approx_Q=None, max_dev=0.05, workers=1) -> DimensionWindow:
    """Complex dimensions with ``|Im| <= T`` of a (nonlattice) flow.

    The roots of a lattice surrogate with generator ``w_1/q`` (and ``pi q/w_1
    > 2T``) serve as starting points for Newton's method on the true ``f``.
    The surrogate is tightened until the starting residuals are below 0.1.
    """
    if T <= 0:
        raise ValidationError("must be positive", "T")
    if flow.N < 2:
        raise DomainError("complex dimensions need N >= 2", "flow")
    expected = T * flow.weights[-1] / math.pi
    if expected > ROOT_CAP:
        raise ResourceError(f"window expected to hold about {expected:.0f} roots; cap {ROOT_CAP}")
    pair = solve_dimension(flow)
    w = np.asarray(flow.weights, dtype=float)
    margin = 1.0
    attempt = 0
    while True:
        sim = _surrogate(flow, T, max_dev, approx_Q if attempt == 0 else None)
        q = sim.q
        gen = w[0] / q
        degree = max(sim.p)
        if degree > 20 * ROOT_CAP:
            raise ResourceError(f"surrogate polynomial degree {degree} too large")
        poly = Counter(sim.p)
        poly = {e: float(c) for e, c in poly.items()}
        poly[0] = poly.get(0, 0.0) - 1.0
        roots = sparse_roots(poly)
        cands = []
        for z, _ in roots:
            if z == 0:
                continue
            s = complex(-math.log(abs(z)) / gen, -np.angle(z) / gen)
            if abs(s.imag) <= T + margin and s.imag >= -1e-9:
                cands.append(s)
        cands = np.array(cands, dtype=complex)
        pre = np.abs(f_value(w, cands)) / residual_scale(w, cands)
        worst = float(pre.max()) if pre.size else 0.0
        if worst < 0.1 or attempt >= 6:
            break
        attempt += 1
        max_dev /= 4
        log.info("surrogate q=%d too coarse (pre-residual %.3g); tightening", q, worst)
    found = []
    failures = 0
    for s in cands:
        if abs(s.imag) < 1e-9:
            s = complex(s.real, 0.0)
        root, res, ok = _newton(w, s)
        if ok and abs(root.imag) < 1e-9:
            root = complex(root.real, 0.0)
        inside = ok and (pair.D0 - 1e-9 <= root.real <= pair.D + 1e-9)
        if not inside:
            if abs(s.imag) <= T - margin:
                failures += 1
            continue
        if abs(root.imag) > T or root.imag < 0:
            continue
        found.append((root, res))
    if cands.size and failures > 0.01 * cands.size:
        raise AccuracyError(
            f"{failures} of {cands.size} Newton refinements diverged; use a larger Q",
            surrogate_q=q,
        )
    found.sort(key=lambda t: (t[0].imag, t[0].real))
    merged = []
    for root, res in found:
        if merged and abs(root - merged[-1][0]) < MERGE_RADIUS * max(1.0, abs(root)):
            continue
        if any(abs(root - r) < MERGE_RADIUS * max(1.0, abs(root)) for r, _ in merged[-8:]):
            continue
        merged.append((root, res))
    if len(merged) != len(cands):
        log.info("surrogate gave %d candidates, %d distinct roots after refinement", len(cands), len(merged))
    dims = []
    for root, res in merged:
        if root.imag == 0:
            if abs(root.real - pair.D) < 1e-8:
                root = complex(pair.D, 0.0)
                res = abs(complex(f_value(w, root))) / float(residual_scale(w, root))
            dims.append(ComplexDimension(root, 1, "refined", res))
        else:
            dims.append(ComplexDimension(root, 1, "refined", res))
            dims.append(ComplexDimension(root.conjugate(), 1, "refined", res))
    if not any(d.omega == pair.D for d in dims):
        dims.append(ComplexDimension(complex(pair.D, 0.0), 1, "refined", 0.0))
    dims.sort(key=lambda d: (d.omega.imag, d.omega.real))
    return DimensionWindow(
        flow=flow,
        T=float(T),
        dims=tuple(dims),
        D=pair.D,
        D0=pair.D0,
        metadata={
            "method": "surrogate-refined",
            "surrogate_q": q,
            "surrogate_multipliers": list(sim.p),
            "surrogate_quality": sim.Q,
            "candidates": int(cands.size),
            "pre_residual_max": worst,
            "diverged": failures,
        },
    )


def dimensions_window(flow: FlowSpec, T, max_denominator=10**6, **kwargs) -> DimensionWindow:
    lat = classify_lattice(flow, max_denominator)
    if lat is not None:
        return lattice_dimensions(flow, lat, T)
    return nonlattice_dimensions(flow, T, **kwargs)


@dataclass(frozen=True)
class PerturbationSeries:
    """``Delta(x) = c_1 x + c_2 x^2 + ...`` for two weights, or the gradient and
    Hessian of ``Delta(x_2, ..., x_N)`` at 0 for more.

    ``coefficients[0]`` is ``c_1``.
    """

    weights: tuple
    D: float
    coefficients: Optional[tuple] = None
    radius_lower_bound: float = math.pi
    gradient: Optional[tuple] = None
    hessian: Optional[tuple] = None

    def __call__(self, x):
        if self.coefficients is not None:
            return _series.evaluate(np.concatenate([[0.0], self.coefficients]), x)
        x = np.asarray(x, dtype=complex)
        g = np.asarray(self.gradient)
        H = np.asarray(self.hessian)
        return complex(g @ x + 0.5 * x @ H @ x)

    @property
    def order(self):
        return len(self.coefficients) if self.coefficients is not None else 2


def _series_radius(w1, w2):
    a = w2 / w1
    if a == 1.0:
        return abs(complex(0.0, math.pi))
    return abs(complex(-a * math.log(a) + (a - 1) * math.log(a - 1), math.pi))


def perturbation_series(flow: FlowSpec, order=6) -> PerturbationSeries:
    """Expansion of the shift ``Delta`` of a complex dimension in the phase error.

    For ``N = 2``, ``Delta(x)`` solves
    ``r_1 exp(-w_1 Delta) + r_2 exp(-x) exp(-w_2 Delta) = 1`` with ``r_j =
    exp(-w_j D)``; its Taylor coefficients come from Newton's method on
    truncated power series.  For ``N > 2`` only the gradient and Hessian in
    ``(x_2, ..., x_N)`` are provided.
    """
    if flow.N < 2:
        raise DomainError("perturbation series needs N >= 2", "flow")
    D = solve_dimension(flow).D
    w = np.asarray(flow.weights, dtype=float)
    r = np.exp(-w * D)
    fp = float(np.sum(w * r))
    if flow.N > 2:
        if order > 2:
            raise CapabilityError(f"order {order} unsupported for N > 2 (degree 2 only)", "order")
        fpp = -float(np.sum(w * w * r))
        rj, wj = r[1:], w[1:]
        grad = -rj / fp
        H = np.diag(rj / fp) - (fpp / fp**3 + (wj[:, None] + wj[None, :]) / fp**2) * np.outer(rj, rj)
        return PerturbationSeries(
            tuple(flow.weights), D, None, math.pi, tuple(grad), tuple(map(tuple, H))
        )
    if not 1 <= order <= MAX_SERIES_ORDER:
        raise CapabilityError(f"order must lie in 1..{MAX_SERIES_ORDER}", "order")
    n = order + 1
    w1, w2 = w
    r1, r2 = r
    x = np.zeros(n)
    x[1] = 1.0
    ex = _series.exp(-x, n)
    delta = np.zeros(n)
    for _ in range(order + 2):
        e1 = _series.exp(-w1 * delta, n)
        e2 = _series.mul(ex, _series.exp(-w2 * delta, n), n)
        F = r1 * e1 + r2 * e2
        F[0] -= 1.0
        dF = -w1 * r1 * e1 - w2 * r2 * e2
        delta = delta - _series.mul(F, _series.inv(dF, n), n)
        delta[0] = 0.0
    coeffs = tuple(float(c) for c in delta[1:])
    c1 = -r2 / fp
    c2 = w1 * w1 * r1 * r2 / (2 * fp**3)
    if abs(coeffs[0] - c1) > 1e-10 * abs(c1) or (order >= 2 and abs(coeffs[1] - c2) > 1e-10 * abs(c2)):
        raise NumericIntegrityError("series coefficients disagree with the closed forms for c1, c2")
    return PerturbationSeries(tuple(flow.weights), D, coeffs, _series_radius(w1, w2))


def predict_dimension(flow: FlowSpec, q, approx, order=MAX_SERIES_ORDER) -> ComplexDimension:
    """Predicted complex dimension near ``D + 2 pi i q / w_1``.

    ``approx`` is the continued fraction of ``w_2/w_1`` (two weights) or a
    :class:`SimultaneousApproximation` for ``q``.
    """
    w = np.asarray(flow.weights, dtype=float)
    if isinstance(approx, ContinuedFraction):
        if flow.N != 2:
            raise PreconditionError("continued fraction prediction needs N = 2", "flow")
        exp = ostrowski(q, approx)
        k = exp.lowest_index
        a1 = approx.partial_quotients[1]
        if not (k >= 2 or (k == 1 and a1 >= 2)):
            raise PreconditionError(f"lowest Ostrowski digit index k={k} (a1={a1}) outside the theorem's range", "q")
        p = sum(d * pn for d, pn in zip(exp.digits, approx.p))
        x = 2j * math.pi * approx.offset(q, p)
        series = perturbation_series(flow, order)
        if abs(x) >= series.radius_lower_bound:
            raise PreconditionError(f"|x|={abs(x):.3g} outside the convergence disc", "q")
        delta = series(x)
    elif isinstance(approx, SimultaneousApproximation):
        if approx.q != q:
            raise ValidationError(f"approximation is for q={approx.q}, not {q}", "q")
        xs = 2j * math.pi * np.asarray(approx.deltas, dtype=float)
        if flow.N == 2:
            series = perturbation_series(flow, order)
            delta = series(xs[1])
        else:
            series = perturbation_series(flow, 2)
            delta = series(xs[1:])
    else:
        raise ValidationError("expected a ContinuedFraction or SimultaneousApproximation", "approx")
    D = series.D
    omega = complex(D, 2 * math.pi * q / w[0]) + complex(delta)
    res = abs(complex(f_value(w, omega))) / float(residual_scale(w, omega))
    return ComplexDimension(omega, 1, "predicted", res)


@dataclass(frozen=True)
class RegionProfile:
    """Empirical gap to ``Re s = D`` per height band and the theoretical curve."""

    band_edges: np.ndarray
    gap: np.ndarray
    B: Optional[float]
    M: Optional[int]
    fitted_B: Optional[float]
    min_ratio: Optional[float]

    def theoretical_gap(self, t):
        if self.B is None:
            return None
        return self.B / (self.M**2 * np.asarray(t, dtype=float) ** 2)


def dimension_free_region(flow: FlowSpec, window: DimensionWindow, bands=10, slack=0.1) -> RegionProfile:
    """Compare ``D - Re omega`` against ``B / (M^2 t^2)``.

    For lattice windows the translates ``D + 2 pi i n/w`` are skipped, so the
    gap is the distance to the next vertical line.

    ``M`` bounds the partial quotients relevant to the window (two weights
    only).  Raises :class:`NumericIntegrityError` when a root sits closer to
    the line than the bound allows beyond ``slack``.
    """
    D = window.D
    nt = [d for d in window.nontrivial() if d.omega.imag > 0]
    if window.period is not None:
        # lattice: the translates of D share its line; the gap is to the next line
        nt = [d for d in nt if D - d.omega.real > 1e-9]
    edges = np.linspace(0.0, window.T, bands + 1)
    gap = np.full(bands, np.nan)
    if not nt:
        return RegionProfile(edges, gap, None, None, None, None)
    t = np.array([d.omega.imag for d in nt])
    g = D - np.array([d.omega.real for d in nt])
    for i in range(bands):
        sel = (t > edges[i]) & (t <= edges[i + 1])
        if sel.any():
            gap[i] = g[sel].min()
    fitted = float(np.min(g * t * t))
    B = M = ratio = None
    if flow.N == 2 and window.period is None:
        w = np.asarray(flow.weights)
        r = np.exp(-w * D)
        fp = float(np.sum(w * r))
        B = math.pi**4 * r[0] * r[1] / (2 * fp**3)
        cf = _flow_cf(flow)
        limit = window.T * w[0] / (2 * math.pi)
        K = max([i for i, qk in enumerate(cf.q) if qk <= limit] + [0])
        M = max(cf.partial_quotients[: K + 2])
        bound = B / (M**2 * t * t)
        ratio = float(np.min(g / bound))
        if ratio < 1 - slack:
            worst = int(np.argmin(g / bound))
            raise NumericIntegrityError(
                f"root {nt[worst].omega} lies within the dimension free region (ratio {ratio:.3g})"
            )
    return RegionProfile(edges, gap, B, M, fitted, ratio)


@dataclass(frozen=True)
class DensityReport:
    heights: np.ndarray
    counts: np.ndarray
    bound: np.ndarray
    C: float


def density_check(window: DimensionWindow) -> DensityReport:
    """Smallest ``C`` with ``#{|Im omega| <= T'} <= (w_N/pi) T' + C`` for all ``T' <= T``.

    Counts include residues (multiplicities).
    """
    if not window.dims:
        raise ValidationError("window is empty", "window")
    wN = window.flow.weights[-1]
    im = np.abs(window.omegas.imag)
    res = window.residues
    heights = np.unique(im)
    order = np.argsort(im)
    cum = np.cumsum(res[order])
    sorted_im = im[order]
    idx = np.searchsorted(sorted_im, heights, side="right") - 1
    counts = cum[idx]
    bound = wN / math.pi * heights
    C = float(np.max(counts - bound))
    return DensityReport(heights, counts, bound, C)


def check_window(window: DimensionWindow, density_C=None):
    """Structural invariants of a window; returns a dict of failures (empty if all pass)."""
    fails = {}
    w = window.flow.weights
    om = window.omegas
    conj = np.sort_complex(np.conj(om))
    if om.size and np.max(np.abs(np.sort_complex(om) - conj)) > 1e-9 * max(1.0, window.T):
        fails["conjugate_closure"] = float(np.max(np.abs(np.sort_complex(om) - conj)))
    lo, hi = window.D0 - 1e-9, window.D + 1e-9
    bad = [d.omega for d in window.dims if not lo <= d.omega.real <= hi]
    if bad:
        fails["strip"] = bad[:5]
    bad = [d for d in window.dims if d.residual >= RESIDUAL_RTOL]
    if bad:
        fails["residual"] = [(d.omega, d.residual) for d in bad[:5]]
    recomputed = np.abs(f_value(w, om)) / residual_scale(w, om)
    if om.size and recomputed.max() >= RESIDUAL_RTOL:
        fails["residual_recomputed"] = float(recomputed.max())
    if any(d.residue < 1 for d in window.dims):
        fails["residue"] = True
    if window.period is not None and om.size:
        order = np.argsort(om.imag)
        sorted_om = om[order]
        for s in om + 1j * window.period:
            if abs(s.imag) > window.T - 1e-9:
                continue
            i = np.searchsorted(sorted_om.imag, s.imag)
            near = sorted_om[max(0, i - 40) : i + 40]
            if np.min(np.abs(near - s)) > 1e-12 * max(1.0, abs(s)):
                fails.setdefault("periodicity", []).append(s - 1j * window.period)
    if density_C is not None:
        C = density_check(window).C
        if C > density_C:
            fails["density"] = C
    return fails
