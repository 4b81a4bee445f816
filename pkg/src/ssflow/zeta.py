"""Closed forms for the dynamical zeta function of a self-similar flow.

With ``f(s) = 1 - sum_j exp(-w_j s)`` the zeta function is ``1/f`` and its
negative logarithmic derivative is ``sum_j w_j exp(-w_j s) / f(s)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: |f| below this multiple of (1 + sum w_j e^{-w_j Re s}) is treated as a pole
POLE_RTOL = 1e-10


def _exp_terms(weights, s):
    """``exp(-w_j s)`` for array ``s`` (trailing axis = weights), via cos/sin."""
    w = np.asarray(weights, dtype=float)
    s = np.asarray(s, dtype=complex)[..., None]
    mod = np.exp(-w * s.real)
    ang = -w * s.imag
    return mod * (np.cos(ang) + 1j * np.sin(ang))


def f_value(weights, s):
    """``f(s) = 1 - sum exp(-w_j s)``; vectorized over ``s``."""
    return 1.0 - _exp_terms(weights, s).sum(axis=-1)


def f_prime(weights, s):
    w = np.asarray(weights, dtype=float)
    return (w * _exp_terms(weights, s)).sum(axis=-1)


def f_double_prime(weights, s):
    w = np.asarray(weights, dtype=float)
    return -(w * w * _exp_terms(weights, s)).sum(axis=-1)


@dataclass(frozen=True)
class ZetaEvaluation:
    s: complex
    zeta: complex
    neg_log_deriv: complex
    f_value: complex
    f_prime: complex
    f_double_prime: complex
    is_pole: bool = False

    def as_dict(self):
        def enc(z):
            return [float(np.real(z)), float(np.imag(z))]

        return {
            "s": enc(self.s),
            "zeta": None if self.is_pole else enc(self.zeta),
            "neg_log_deriv": None if self.is_pole else enc(self.neg_log_deriv),
            "f": enc(self.f_value),
            "f_prime": enc(self.f_prime),
            "f_double_prime": enc(self.f_double_prime),
            "is_pole": self.is_pole,
        }


def eval_zeta(flow, s) -> ZetaEvaluation:
    """Evaluate ``zeta_w``, ``-zeta_w'/zeta_w``, ``f``, ``f'``, ``f''`` at ``s``.

    At a pole ``zeta`` and ``neg_log_deriv`` are complex infinity and
    ``is_pole`` is set; ``f`` and its derivatives are still reported.
    """
    s = complex(s)
    w = np.asarray(flow.weights, dtype=float)
    terms = _exp_terms(w, s)
    fv = complex(1.0 - terms.sum())
    fp = complex((w * terms).sum())
    fpp = complex(-(w * w * terms).sum())
    scale = 1.0 + float(np.sum(w * np.exp(-w * s.real)))
    if abs(fv) < POLE_RTOL * scale:
        inf = complex(math.inf, 0.0)
        return ZetaEvaluation(s, inf, inf, fv, fp, fpp, is_pole=True)
    return ZetaEvaluation(s, 1.0 / fv, fp / fv, fv, fp, fpp)


@dataclass(frozen=True)
class ZeroFreeReport:
    zero_free: bool
    min_modulus: float
    min_bound: float
    samples: int
    poles_skipped: int


def zeta_zero_free(flow, samples) -> ZeroFreeReport:
    """Check ``|zeta_w(s)| >= 1/(1 + sum r_j^Re s)`` on every finite sample.

    ``zeta_w = 1/f`` and ``|f(s)| <= 1 + sum r_j^Re s`` so the bound is
    automatic; a violation would indicate broken arithmetic.
    """
    s = np.asarray(samples, dtype=complex).ravel()
    w = np.asarray(flow.weights, dtype=float)
    fv = f_value(w, s)
    bound_den = 1.0 + np.exp(-np.outer(s.real, w)).sum(axis=-1)
    scale = 1.0 + (w * np.exp(-np.outer(s.real, w))).sum(axis=-1)
    pole = np.abs(fv) < POLE_RTOL * scale
    mod = 1.0 / np.abs(fv[~pole])
    bound = 1.0 / bound_den[~pole]
    ok = bool(np.all(mod >= bound * (1 - 1e-12)))
    return ZeroFreeReport(
        zero_free=ok,
        min_modulus=float(mod.min()) if mod.size else math.nan,
        min_bound=float(bound.min()) if bound.size else math.nan,
        samples=int(s.size),
        poles_skipped=int(pole.sum()),
    )


def log_deriv_at_zero(flow) -> float:
    """``-zeta_w'(0)/zeta_w(0) = -(1/(N-1)) sum w_j``."""
    if flow.N <= 1:
        raise DomainError("needs N >= 2 (f(0) = 1 - N vanishes for N = 1)", "flow")
    return -math.fsum(flow.weights) / (flow.N - 1)


def neg_log_deriv(weights, s):
    """Vectorized ``-zeta'/zeta`` (no pole handling)."""
    w = np.asarray(weights, dtype=float)
    t = _exp_terms(w, s)
    return (w * t).sum(axis=-1) / (1.0 - t.sum(axis=-1))
