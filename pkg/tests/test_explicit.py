import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ssflow import (
    ExplicitExpansion,
    FlowSpec,
    PeriodicProfile,
    PreconditionError,
    ValidationError,
    classify_lattice,
    dimensions_window,
    enumerate_orbits,
    error_scaling_report,
    lattice_psi,
    nonlattice_dimensions,
    nonlattice_psi,
    psi,
    psi_integral,
    psi_level2,
    solve_dimension,
    tauberian_bracket,
)
from ssflow.explicit import envelope_exponent, lattice_profiles

from conftest import LOG2, LOG3


@pytest.fixture(scope="module")
def golden_setup():
    from ssflow import golden_flow

    flow = golden_flow()
    return flow, enumerate_orbits(flow, 13.0), {T: nonlattice_dimensions(flow, T) for T in (50, 150, 500)}


def midpoints(census, lo, hi, count, rng):
    """Random points halfway between consecutive jumps of psi in (lo, hi)."""
    raw = np.sort([k * w for w in census.weights for k in range(1, int(hi / w) + 1)] + [lo, hi])
    # the same jump reached through different orbits differs by rounding only
    jumps = raw[np.concatenate([[True], np.diff(raw) > 1e-9 * raw[1:]])]
    jumps = jumps[(jumps >= lo) & (jumps <= hi)]
    idx = rng.integers(0, len(jumps) - 1, count)
    return np.exp(0.5 * (jumps[idx] + jumps[idx + 1]))


class TestPeriodicProfile:
    def setup_method(self):
        flow = FlowSpec((LOG3, LOG3))
        self.profile, self.res = lattice_profiles(flow, classify_lattice(flow))[0]

    @given(st.floats(0.01, 30.0))
    def test_periodic(self, y):
        p = self.profile
        t = y / p.period
        if abs(t - round(t)) < 1e-6:
            return
        assert p.closed_form(y + p.period) == pytest.approx(p.closed_form(y), rel=1e-12)

    def test_fourier_partial_sums(self):
        p = self.profile
        rng = np.random.default_rng(7)
        ys = rng.uniform(0.05, 3 * p.period, 50)
        ys = ys[np.abs(ys / p.period - np.rint(ys / p.period)) > 0.02]
        for y in ys:
            err = abs(p.closed_form(y) - p.fourier_partial(y, 10**4))
            assert err <= p.fourier_tail_bound(y, 10**4)
        # the 1/n decay means 1e-5 needs about 10^5 terms
        for y in ys[:5]:
            d = abs(y / p.period - round(y / p.period))
            if d > 0.2:
                assert abs(p.closed_form(y) - p.fourier_partial(y, 10**5)) < 1e-5

    def test_half_jump_value(self):
        p = self.profile
        w = p.period
        left, right = p.closed_form(w - 1e-9), p.closed_form(w + 1e-9)
        assert p.closed_form(w, "half") == pytest.approx(0.5 * (left + right), rel=1e-6)


class TestLatticePsi:
    def test_cantor_27(self, cantor):
        lat = classify_lattice(cantor)
        census = enumerate_orbits(cantor, 3 * LOG3)
        assert lattice_psi(cantor, lat, 27, jump="full") == pytest.approx(14 * LOG3, rel=1e-14)
        assert lattice_psi(cantor, lat, 27) == pytest.approx(psi(census, 27, "half"), rel=1e-14)

    @pytest.mark.parametrize("n", range(1, 16))
    def test_fibonacci_powers_of_two(self, fibonacci, n):
        lat = classify_lattice(fibonacci)
        census = enumerate_orbits(fibonacci, 15 * LOG2)
        for jump in ("full", "half"):
            assert lattice_psi(fibonacci, lat, 2.0**n, jump) == pytest.approx(psi(census, 2.0**n, jump), rel=1e-9)

    @pytest.mark.parametrize("name", ["cantor", "fibonacci"])
    def test_random_points(self, name, request):
        flow = request.getfixturevalue(name)
        lat = classify_lattice(flow)
        cutoff = 15 * LOG3
        census = enumerate_orbits(flow, cutoff)
        profiles = lattice_profiles(flow, lat)
        for x in midpoints(census, flow.weights[0], cutoff, 200, np.random.default_rng(11)):
            assert lattice_psi(flow, lat, x, profiles=profiles) == pytest.approx(psi(census, x), rel=1e-9)

    def test_below_first_orbit(self, cantor):
        lat = classify_lattice(cantor)
        for jump in ("full", "half"):
            assert abs(lattice_psi(cantor, lat, 2.999, jump)) < 1e-12
            assert abs(lattice_psi(cantor, lat, 1.0, jump)) < 1e-12

    def test_validation(self, cantor):
        lat = classify_lattice(cantor)
        with pytest.raises(ValidationError):
            lattice_psi(cantor, lat, 0.5)
        with pytest.raises(ValidationError):
            lattice_psi(cantor, lat, 5.0, jump="left")


class TestNonlatticePsi:
    def test_within_two_percent(self, golden_setup):
        flow, census, windows = golden_setup
        x = math.exp(10)
        value, tail = nonlattice_psi(flow, windows[500], x)
        assert value == pytest.approx(psi(census, x, "half"), rel=0.02)
        assert tail > 0

    @pytest.mark.parametrize("L", [9.3, 10.0, 12.7])
    def test_larger_window_better(self, golden_setup, L):
        flow, census, windows = golden_setup
        x = math.exp(L)
        D = windows[50].D
        err = {T: abs(nonlattice_psi(flow, windows[T], x)[0] - psi(census, x, "half")) / x**D for T in (50, 500)}
        assert err[500] < err[50]

    def test_mean_error_monotone(self, golden_setup):
        flow, census, windows = golden_setup
        xs = np.exp(np.linspace(6, 13, 60))
        mean = [np.mean([abs(nonlattice_psi(flow, windows[T], x)[0] - psi(census, x, "half")) for x in xs]) for T in (50, 150, 500)]
        assert mean[0] > mean[1] > mean[2]

    @pytest.mark.parametrize("x", [1.1, 1.5, 1.9])
    def test_below_first_orbit(self, golden_setup, x):
        flow, _, windows = golden_setup
        D = windows[500].D
        assert abs(nonlattice_psi(flow, windows[500], x)[0]) <= 0.5 * x**D / D

    def test_realness(self, golden_setup):
        flow, _, windows = golden_setup
        win = windows[150]
        exp = ExplicitExpansion.from_window(win, 1)
        x = math.exp(7.3)
        full = sum(d.residue * x**d.omega / d.omega for d in win.dims) + exp.constant_term
        assert abs(full.imag) <= 1e-9 * abs(full.real)
        assert exp.evaluate(x) == pytest.approx(full.real, rel=1e-12)

    def test_small_window(self, golden_setup):
        flow = golden_setup[0]
        with pytest.raises(PreconditionError):
            nonlattice_psi(flow, nonlattice_dimensions(flow, 5), 100.0)


class TestLevel2:
    def test_cantor_quadrature(self, cantor):
        census = enumerate_orbits(cantor, 5 * LOG3)
        win = dimensions_window(cantor, 10)
        for x in (3.0**5, 100.0, 17.5, 3.0):
            assert psi_level2(cantor, win, x) == pytest.approx(psi_integral(census, x), rel=1e-6, abs=1e-12)

    def test_golden_quadrature(self, golden_setup):
        flow, census, windows = golden_setup
        x = math.exp(8)
        assert psi_level2(flow, windows[500], x) == pytest.approx(psi_integral(census, x), rel=1e-3)

    @pytest.mark.parametrize("L", [6.0, 7.7, 9.1])
    def test_derivative_matches_level1(self, golden_setup, L):
        flow, _, windows = golden_setup
        win = windows[500]
        x = math.exp(L)
        h = 1e-3 * x
        slope = (psi_level2(flow, win, x + h) - psi_level2(flow, win, x - h)) / (2 * h)
        assert slope == pytest.approx(nonlattice_psi(flow, win, x)[0], rel=1e-3)

    @given(st.floats(1.5, 11.5), st.floats(1e-4, 0.3))
    def test_tauberian(self, L, frac):
        census = _golden_census()
        x = math.exp(L)
        br = tauberian_bracket(census, x, frac * x)
        assert br.holds
        assert br.lower <= br.psi * (1 + 1e-12) + 1e-12

    def test_tauberian_validation(self, cantor):
        census = enumerate_orbits(cantor, 3 * LOG3)
        with pytest.raises(ValidationError):
            tauberian_bracket(census, 10.0, 20.0)


_CACHE = {}


def _golden_census():
    from ssflow import golden_flow

    if "c" not in _CACHE:
        _CACHE["c"] = enumerate_orbits(golden_flow(), 12.0)
    return _CACHE["c"]


class TestErrorScaling:
    def test_golden_report(self, golden_setup):
        flow, census, windows = golden_setup
        xs = np.exp(np.linspace(5, 13, 30))
        rep = error_scaling_report(flow, windows[500], xs, census)
        D = windows[500].D
        assert rep.exponent == 0.25 == envelope_exponent(2)
        assert np.allclose(rep.main_term, xs**D / D)
        assert np.allclose(rep.normalized_error, (rep.psi_census - rep.main_term) / xs**D)
        assert rep.fitted_c > 0
        assert rep.to_csv().splitlines()[0] == "x,psi_census,psi_formula,main_term,normalized_error,envelope"

    def test_lattice_oscillation_persists(self, cantor):
        census = enumerate_orbits(cantor, 15 * LOG3)
        win = dimensions_window(cantor, 10)
        early = np.exp(np.linspace(3.0, 3.0 + 3 * LOG3, 200))
        late = np.exp(np.linspace(12.0, 12.0 + 3 * LOG3, 200))
        amp = [np.ptp(error_scaling_report(cantor, win, xs, census).normalized_error) for xs in (early, late)]
        assert amp[1] > 0.5 * amp[0] > 0

    def test_grid_validation(self, golden_setup):
        flow, census, windows = golden_setup
        with pytest.raises(ValidationError):
            error_scaling_report(flow, windows[50], [5.0], census)
