import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssflow import (
    FlowSpec,
    PreconditionError,
    QuadraticIrrational,
    ResourceError,
    ValidationError,
    approximability_profile,
    expand_cf,
    orbit_of_approximation,
    ostrowski,
    parse_constant,
    simultaneous_approx,
)
from ssflow.diophantine import approximate_from, digits_admissible

from conftest import LOG2, LOG3, PHI

GOLDEN = QuadraticIrrational.golden()
FIB = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233]


def floor_recursion(x, depth):
    # independent oracle at 60 significant digits
    mpmath.mp.dps = 60
    out = []
    for _ in range(depth + 1):
        a = int(mpmath.floor(x))
        out.append(a)
        x = 1 / (x - a)
    return out


quadratic_st = st.builds(
    lambda d, P, Q: QuadraticIrrational(P, d, Q),
    st.integers(2, 500).filter(lambda d: math.isqrt(d) ** 2 != d),
    st.integers(0, 20),
    st.integers(1, 20),
)


class TestExpandCF:
    def test_golden(self):
        cf = expand_cf(GOLDEN, 12)
        assert cf.partial_quotients == (1,) * 13
        assert cf.q == FIB

    def test_golden_float_flags_early_stop(self):
        cf = expand_cf(PHI, 60)
        assert cf.early_stop and not cf.terminated
        assert set(cf.partial_quotients) == {1}

    def test_rational(self):
        cf = expand_cf(2.5, 10)
        assert cf.partial_quotients == (2, 2)
        assert cf.terminated and not cf.early_stop
        assert cf.convergents[-1] == (5, 2)

    def test_one_plus_inverse_pi(self):
        alpha = 1 + 1 / math.pi
        mpmath.mp.dps = 60
        oracle = floor_recursion(1 + 1 / mpmath.pi, 6)
        assert list(expand_cf(alpha, 6).partial_quotients) == oracle
        assert oracle[:6] == [1, 3, 7, 15, 1, 292]

    def test_int64_guard(self):
        cf = expand_cf(GOLDEN, 200)
        assert cf.early_stop
        assert cf.q[-1] <= 2**63 - 1

    def test_validation(self):
        with pytest.raises(ValidationError):
            expand_cf(1.5, 0)
        with pytest.raises(ValidationError):
            expand_cf(-1.0, 3)

    @given(quadratic_st)
    def test_quadratic_against_floor_recursion(self, x):
        mpmath.mp.dps = 60
        value = (x.P + mpmath.sqrt(x.d)) / x.Q
        if value <= 0:
            return
        cf = expand_cf(x, 15)
        assert list(cf.partial_quotients) == floor_recursion(value, len(cf.partial_quotients) - 1)

    @given(quadratic_st)
    def test_recurrence_and_growth(self, x):
        if float(x) <= 0:
            return
        cf = expand_cf(x, 30)
        a, p, q = cf.partial_quotients, cf.p, cf.q
        for k in range(2, len(a)):
            assert p[k] == a[k] * p[k - 1] + p[k - 2]
            assert q[k] == a[k] * q[k - 1] + q[k - 2]
        for k, qk in enumerate(q):
            assert qk >= PHI ** (k - 1) * (1 - 1e-12)

    @given(quadratic_st)
    def test_approx_identity(self, x):
        if float(x) <= 0:
            return
        cf = expand_cf(x, 25)
        for k in range(len(cf.q)):
            if k + 1 >= len(cf.q_primes):
                break
            target = (-1) ** k / cf.q_primes[k + 1]
            assert abs(cf.offset(cf.q[k], cf.p[k]) - target) < 1e-9 * abs(target)


def test_parse_constant():
    assert parse_constant("golden") == GOLDEN
    assert parse_constant("sqrt(2)") == QuadraticIrrational(0, 2, 1)
    assert parse_constant("1.25") == 1.25
    with pytest.raises(ValidationError):
        parse_constant("pi")
    with pytest.raises(ValidationError):
        QuadraticIrrational(0, 4, 1)


class TestOstrowski:
    cf = expand_cf(GOLDEN, 30)

    def test_sixty(self):
        exp = ostrowski(60, self.cf)
        nonzero = {i: d for i, d in enumerate(exp.digits) if d}
        assert nonzero == {9: 1, 4: 1}
        assert self.cf.q[9] == 55 and self.cf.q[4] == 5

    def test_fifty(self):
        exp = ostrowski(50, self.cf)
        assert {i for i, d in enumerate(exp.digits) if d} == {8, 6, 3}

    def test_one(self):
        assert ostrowski(1, self.cf).digits[:2] == (0, 1)  # a_1 = 1
        cf2 = expand_cf(QuadraticIrrational.sqrt(2), 20)  # a_1 = 2
        assert ostrowski(1, cf2).digits == (1,)

    def test_shallow(self):
        with pytest.raises(PreconditionError):
            ostrowski(10**6, expand_cf(GOLDEN, 5))
        with pytest.raises(ValidationError):
            ostrowski(0, self.cf)

    @given(st.integers(1, 10**5), quadratic_st)
    def test_roundtrip(self, n, x):
        if float(x) <= 0:
            return
        cf = expand_cf(x, 60)
        if cf.q[-1] <= n:
            return
        exp = ostrowski(n, cf)
        assert exp.value() == n
        assert digits_admissible(exp.digits, cf.partial_quotients)

    @pytest.mark.parametrize("x", [GOLDEN, QuadraticIrrational.sqrt(2), QuadraticIrrational(1, 7, 3)])
    def test_uniqueness_exhaustive(self, x):
        cf = expand_cf(x, 40)
        a, q = cf.partial_quotients, cf.q
        limit = 2000
        top = max(i for i, qi in enumerate(q) if qi <= limit)
        counts = {}

        # every admissible digit string, independent of the greedy algorithm
        def rec(nu, digits, total):
            if nu > top:
                if total and digits_admissible(digits, a):
                    counts[total] = counts.get(total, 0) + 1
                return
            for d in range(0, a[nu + 1] + 1):
                t = total + d * q[nu]
                if t > limit:
                    break
                rec(nu + 1, digits + [d], t)

        rec(0, [], 0)
        assert sorted(counts) == list(range(1, limit + 1))
        assert set(counts.values()) == {1}


class TestOrbitOfApproximation:
    cf = expand_cf(GOLDEN, 40)

    def test_sixty(self):
        m, lo, hi, k = orbit_of_approximation(60, self.cf)
        assert k == 4
        assert (lo, hi) == (1 / self.cf.q_primes[6], 1 / self.cf.q_primes[4])
        assert lo < 60 * PHI - m < hi

    def test_fifty(self):
        m, lo, hi, k = orbit_of_approximation(50, self.cf)
        assert k == 3 and hi < 0
        assert lo < GOLDEN.offset(50, m) < hi

    @pytest.mark.parametrize("k", range(2, 12))
    def test_single_convergent(self, k):
        qk = self.cf.q[k]
        m, lo, hi, kk = orbit_of_approximation(qk, self.cf)
        value = GOLDEN.offset(qk, m)
        assert kk == k
        assert value == pytest.approx((-1) ** k / self.cf.q_primes[k + 1], rel=1e-12)
        assert lo < value < hi

    @given(st.integers(1, 10**6))
    def test_bracket(self, n):
        m, lo, hi, k = orbit_of_approximation(n, self.cf)
        assert lo < GOLDEN.offset(n, m) < hi


class TestSimultaneousApprox:
    @pytest.mark.parametrize("k", range(2, 12))
    def test_golden_convergents_optimal(self, k, golden):
        cf = expand_cf(GOLDEN, 30)
        approx = simultaneous_approx(golden, cf.q_primes[k + 1])
        assert approx.q == cf.q[k]

    def test_rational_exact(self):
        approx = simultaneous_approx(FlowSpec((1.0, 2.5)), 3.0)
        assert approx.q == 2 and approx.p == (2, 5) and approx.errors == (0.0, 0.0)

    def test_three_primes(self):
        w = (LOG2, LOG3, math.log(5))
        approx = simultaneous_approx(FlowSpec(w), 20)
        assert approx.q < 400
        for wj, pj in zip(w, approx.p):
            assert abs(approx.q * wj - pj * w[0]) <= w[0] / 20
        # exhaustive oracle: no smaller q works
        for q in range(1, approx.q):
            dev = max(abs(q * wj / w[0] - round(q * wj / w[0])) for wj in w)
            assert dev > 1 / 20

    @given(st.floats(1.5, 50))
    def test_lemma_inequalities(self, Q):
        w = (LOG2, LOG3, math.log(5))
        approx = simultaneous_approx(FlowSpec(w), Q)
        assert approx.q < Q**2
        assert all(abs(approx.q * wj - pj * w[0]) <= w[0] / Q * (1 + 1e-9) for wj, pj in zip(w, approx.p))

    def test_cap(self):
        with pytest.raises(ResourceError):
            simultaneous_approx(FlowSpec((LOG2, LOG3, math.log(5))), 1e5, cap=10**6)

    def test_approximate_from(self):
        approx = approximate_from(FlowSpec((LOG2, LOG3, math.log(5))), 100, 0.05)
        assert approx.q >= 100 and max(abs(d) for d in approx.deltas) <= 0.05


class TestProfile:
    def test_golden_bounded(self, golden):
        prof = approximability_profile(golden, 1000)
        assert prof.ratio.min() > 0.38
        assert prof.ratio.max() <= 0.5 * 1000

    def test_lattice_zeros(self):
        prof = approximability_profile(FlowSpec((1.0, 1.5)), 20)
        assert np.all(prof.max_error[1::2] == 0)
        assert np.all(prof.max_error[0::2] > 0)

    def test_log2_log3_against_cf(self):
        prof = approximability_profile(FlowSpec((LOG2, LOG3)), 700)
        mpmath.mp.dps = 50
        alpha = mpmath.log(3) / mpmath.log(2)
        a = floor_recursion(alpha, 8)
        p, q = [1, a[0]], [0, 1]
        for ak in a[1:]:
            p.append(ak * p[-1] + p[-2])
            q.append(ak * q[-1] + q[-2])
        for pk, qk in zip(p[2:], q[2:]):
            if qk > 700:
                break
            oracle = float(abs(qk * alpha - pk)) * LOG2
            assert prof.max_error[qk - 1] == pytest.approx(oracle, rel=1e-9)
            assert prof.rows()[qk - 1][0] == qk
