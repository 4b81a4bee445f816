import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssflow import DomainError, FlowSpec, enumerate_orbits, euler_sum, eval_zeta, log_deriv_at_zero, zeta_zero_free
from ssflow.dimensions import residual_scale
from ssflow.flow import solve_dimension
from ssflow.zeta import f_prime, f_value, neg_log_deriv

from conftest import LOG2, LOG3, PHI

complex_st = st.builds(complex, st.floats(-3, 3), st.floats(-200, 200))


def mp_zeta(weights, s):
    mpmath.mp.dps = 40
    s = mpmath.mpc(s.real, s.imag)
    return complex(1 / (1 - mpmath.fsum(mpmath.exp(-mpmath.mpf(w) * s) for w in weights)))


def test_cantor_at_zero(cantor):
    assert eval_zeta(cantor, 0).zeta == pytest.approx(-1.0, abs=1e-15)


def test_fibonacci_pole(fibonacci):
    ev = eval_zeta(fibonacci, solve_dimension(fibonacci).D)
    assert ev.is_pole
    assert abs(ev.f_value) < 1e-12
    assert ev.as_dict()["zeta"] is None


def test_golden_at_one(golden):
    ev = eval_zeta(golden, 1.0)
    expected = 1 / (1 - 0.5 - 2.0 ** (-PHI))
    assert ev.zeta.real > 0 and ev.zeta.imag == 0
    assert ev.zeta.real == pytest.approx(expected, rel=1e-14)


def test_golden_log_derivative_against_orbits(golden):
    # at s = 1 the census tail decays like exp(-(1 - D) cutoff), far above 1e-6
    # for any census that fits in memory, so the rel 1e-6 check uses s = 2
    census = enumerate_orbits(golden, 25 * golden.weights[0])
    for s in (1.0, 2.0):
        exact = eval_zeta(golden, s).neg_log_deriv
        approx = euler_sum(census, s)
        tail = 4 * math.exp(-(s - solve_dimension(golden).D) * census.cutoff) * abs(exact)
        assert abs(approx - exact) <= max(tail, 1e-6 * abs(exact))
    assert euler_sum(census, 2.0) == pytest.approx(eval_zeta(golden, 2.0).neg_log_deriv, rel=1e-6)


@given(complex_st)
def test_against_mpmath(s):
    w = (LOG2, PHI * LOG2)
    ev = eval_zeta(FlowSpec(w), s)
    if ev.is_pole:
        return
    assert ev.zeta == pytest.approx(mp_zeta(w, s), rel=1e-10, abs=1e-12)
    assert ev.zeta * ev.f_value == pytest.approx(1.0, rel=1e-12)
    assert ev.neg_log_deriv == pytest.approx(ev.f_prime / ev.f_value, rel=1e-12)


def test_large_imaginary_part():
    w = (LOG2, LOG3)
    s = complex(0.7, 1e6)
    assert eval_zeta(FlowSpec(w), s).zeta == pytest.approx(mp_zeta(w, s), rel=1e-9)


@given(complex_st)
def test_reflection(s):
    flow = FlowSpec((LOG2, LOG3, 2.5))
    a, b = eval_zeta(flow, s), eval_zeta(flow, s.conjugate())
    if not a.is_pole:
        assert a.zeta.conjugate() == pytest.approx(b.zeta, rel=1e-13)


@given(complex_st)
def test_lattice_periodicity(s):
    flow = FlowSpec((LOG2, 2 * LOG2, 5 * LOG2))
    a = eval_zeta(flow, s)
    b = eval_zeta(flow, s + 2j * math.pi / LOG2)
    if not a.is_pole:
        assert b.zeta == pytest.approx(a.zeta, rel=1e-12, abs=1e-12)


@given(st.lists(st.floats(0.1, 4), min_size=1, max_size=5), st.floats(-3, 3))
def test_f_increasing_on_reals(w, x):
    fp = f_prime(w, x)
    assert fp > 0
    assert f_value(w, x + 1e-3) > f_value(w, x)


def test_degenerate_flows():
    assert eval_zeta(FlowSpec(()), 1 + 2j).zeta == 1
    s = 0.3 + 1j
    assert eval_zeta(FlowSpec((1.0,)), s).zeta == pytest.approx(1 / (1 - np.exp(-s)), rel=1e-14)


class TestZeroFree:
    def grid(self):
        re, im = np.meshgrid(np.linspace(-2, 2, 100), np.linspace(0, 50, 100))
        return (re + 1j * im).ravel()

    def test_cantor(self, cantor):
        rep = zeta_zero_free(cantor, self.grid())
        assert rep.zero_free and rep.samples == 10**4 and rep.min_modulus > 0

    def test_golden(self, golden):
        assert zeta_zero_free(golden, self.grid()).zero_free

    def test_circle_flow(self):
        grid = np.array([0.5 + 1j, 1 + 3j, -1 + 0.5j])
        rep = zeta_zero_free(FlowSpec((1.0,)), grid)
        assert rep.zero_free and rep.min_modulus >= rep.min_bound

    def test_poles_skipped(self, cantor):
        rep = zeta_zero_free(cantor, [solve_dimension(cantor).D, 1.0])
        assert rep.poles_skipped == 1


class TestLogDerivAtZero:
    def test_values(self, cantor, fibonacci):
        assert log_deriv_at_zero(cantor) == pytest.approx(-2 * LOG3)
        assert log_deriv_at_zero(fibonacci) == pytest.approx(-3 * LOG2)
        assert log_deriv_at_zero(FlowSpec((1.0, 1.0, 1.0))) == -1.5

    def test_domain(self):
        with pytest.raises(DomainError):
            log_deriv_at_zero(FlowSpec((1.0,)))

    @pytest.mark.parametrize("w", [(LOG2, LOG3), (0.5, 1.0, 1.7)])
    def test_limit(self, w):
        flow = FlowSpec(w)
        assert eval_zeta(flow, 1e-9).neg_log_deriv.real == pytest.approx(log_deriv_at_zero(flow), rel=1e-6)


def test_vectorized_helpers(golden):
    s = np.array([1 + 1j, 2 - 3j])
    nl = neg_log_deriv(golden.weights, s)
    for z, v in zip(s, nl):
        assert v == pytest.approx(eval_zeta(golden, z).neg_log_deriv, rel=1e-14)
    assert residual_scale(golden.weights, s).shape == (2,)
