import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpmg_shotnoise import analytic as an
from cpmg_shotnoise.analytic import FilterFunctionSpec, SequenceKind, filter_function
from cpmg_shotnoise.core import DomainError, ResonatorQubitParams


def closed_form(spec, w):
    """Textbook expression, singular where cos(w dt / 2) = 0 (mpmath scalar)."""
    dt, n = mp.mpf(spec.dt), spec.n_pulses
    w = mp.mpf(w)
    base = 8 / w ** 2 * mp.sin(w * dt / 4) ** 4
    last = mp.sin(w * n * dt / 2) if n % 2 == 0 else mp.cos(w * n * dt / 2)
    return base * last ** 2 / mp.cos(w * dt / 2) ** 2


def alternative_form(spec, w):
    """(2/w^2) [1 - 1/cos(w dt/2)]^2 sin^2(...) form of the same response."""
    dt, n = mp.mpf(spec.dt), spec.n_pulses
    w = mp.mpf(w)
    c = mp.cos(w * dt / 2)
    last = mp.sin(w * n * dt / 2) if n % 2 == 0 else mp.cos(w * n * dt / 2)
    return 2 / w ** 2 * (1 - 1 / c) ** 2 * last ** 2


SPECS = [
    FilterFunctionSpec("ramsey", 0, 1e-6),
    FilterFunctionSpec("echo_N1", 1, 1e-6),
    FilterFunctionSpec.cpmg(2, 1e-6),
    FilterFunctionSpec.cpmg(3, 1e-6),
    FilterFunctionSpec.cpmg(8, 1e-6),
    FilterFunctionSpec.cpmg(16, 1e-6),
]


class TestSpec:
    def test_kind_consistency(self):
        with pytest.raises(DomainError):
            FilterFunctionSpec("echo_N1", 2, 1e-6)
        with pytest.raises(DomainError):
            FilterFunctionSpec("cpmg_even_N", 3, 1e-6)
        with pytest.raises(DomainError):
            FilterFunctionSpec("ramsey", 1, 1e-6)

    def test_cpmg_factory(self):
        assert FilterFunctionSpec.cpmg(4, 1e-6).sequence_kind is SequenceKind.CPMG_EVEN
        assert FilterFunctionSpec.cpmg(5, 1e-6).sequence_kind is SequenceKind.CPMG_ODD

    def test_echo_is_single_pulse_cpmg(self):
        w = np.geomspace(1e4, 1e9, 50)
        e = filter_function(FilterFunctionSpec("echo_N1", 1, 1e-6), w)
        c = filter_function(FilterFunctionSpec.cpmg(1, 1e-6), w)
        np.testing.assert_allclose(e, c, rtol=1e-9, atol=1e-30)


class TestValues:
    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.sequence_kind.value}-{s.n_pulses}")
    def test_normalisation(self, spec):
        total = an.filter_function_integral(spec)
        assert total == pytest.approx(spec.total_time / 4, rel=1e-3)

    @pytest.mark.parametrize("spec", SPECS[2:], ids=lambda s: f"N{s.n_pulses}")
    def test_removable_singularities(self, spec):
        rng = np.random.default_rng(11)
        m = rng.integers(0, 40, 500)
        # cos(w dt / 2) = 0 at w dt = (2m + 1) pi; probe within 1e-6 relative
        w_sing = (2 * m + 1) * math.pi / spec.dt
        w_near = w_sing * (1 + rng.uniform(-1e-6, 1e-6, 500))
        w_far = rng.uniform(1e3, 40 * math.pi / spec.dt, 500)
        w = np.concatenate([w_near, w_far])
        F = filter_function(spec, w)
        assert np.all(np.isfinite(F)) and np.all(F >= 0)
        with mp.workdps(40):
            ref1 = np.array([float(closed_form(spec, x)) for x in w])
            ref2 = np.array([float(alternative_form(spec, x)) for x in w])
        scale = np.max(ref1)
        np.testing.assert_allclose(F, ref1, rtol=1e-8, atol=1e-14 * scale)
        np.testing.assert_allclose(F, ref2, rtol=1e-8, atol=1e-14 * scale)
        # exact singular points: limit of sin(N t)/cos(t) or cos(N t)/cos(t) has modulus N
        theta = w_sing * spec.dt / 2
        limit = 8 * spec.n_pulses ** 2 * np.sin(theta / 2) ** 4 / w_sing ** 2
        np.testing.assert_allclose(filter_function(spec, w_sing), limit, rtol=1e-8)

    def test_quartic_at_origin(self):
        # sin^4(w dt/4)/w^2 ~ w^2 times sin^2(N w dt/2) ~ w^2
        spec = FilterFunctionSpec.cpmg(8, 1e-6)
        w = np.array([1e-4, 1e-3]) / spec.dt
        F = filter_function(spec, w)
        assert F[1] / F[0] == pytest.approx(1e4, rel=1e-4)

    def test_main_peak(self):
        spec = FilterFunctionSpec.cpmg(64, 1e-6)
        x = np.linspace(0.05, 0.95, 90001)  # omega dt / 2 pi
        F = filter_function(spec, 2 * math.pi * x / spec.dt)
        assert x[np.argmax(F)] == pytest.approx(0.5, abs=2e-3)

    def test_main_lobe_fraction(self):
        n, dt = 16, 1e-6
        spec = FilterFunctionSpec.cpmg(n, dt)
        lo, hi = (0.5 - 1 / n) * 2 * math.pi / dt, (0.5 + 1 / n) * 2 * math.pi / dt
        frac = an.filter_function_integral(spec, lo, hi) / an.filter_function_integral(spec)
        assert frac == pytest.approx(0.73, abs=0.01)

    def test_positive_frequency_required(self):
        with pytest.raises(DomainError):
            filter_function(SPECS[0], 0.0)


class TestGaussianRates:
    @given(st.floats(0.01, 100.0), st.sampled_from(["thermal", "coherent_resonant"]))
    @settings(max_examples=40, deadline=None)
    def test_closed_form_equals_harmonic_sum(self, kdt, kind):
        p = ResonatorQubitParams(1 / 19.4e-9, math.pi * 5.7e6)
        dt = kdt / p.kappa
        a = an.gamma_filterfunction(dt, 1e-3, p, kind)
        b = an.gamma_filterfunction_sum(dt, 1e-3, p, kind)
        assert a == pytest.approx(b, rel=1e-6)

    def test_long_period_limit_lacks_saturation_factor(self, fig2):
        g = an.gamma_filterfunction(1e6 / fig2.kappa, 1e-3, fig2)
        assert g == pytest.approx(4 * fig2.chi ** 2 * 1e-3 / fig2.kappa, rel=1e-5)
        ratio = g / an.gamma_lowfreq_thermal(1e-3, fig2)
        assert ratio == pytest.approx(1 + fig2.ratio ** 2, rel=1e-5)

    def test_zero_population(self, fig2):
        assert an.gamma_filterfunction(1e-6, 0.0, fig2) == 0
        assert an.gamma_filterfunction_sum(1e-6, 0.0, fig2) == 0

    def test_phenomenological_factor(self, fig2):
        a = an.gamma_filterfunction(1e-6, 1e-3, fig2, phenomenological=True)
        b = an.gamma_filterfunction(1e-6, 1e-3, fig2)
        assert a == pytest.approx(b / (1 + fig2.ratio ** 2))

    def test_weak_coupling_agreement(self):
        p = ResonatorQubitParams(1e7, 0.025 * 1e7)
        f_s = np.linspace(0.1, 2.0, 40) * p.kappa / (2 * math.pi)
        dt = 0.5 / f_s
        ff = an.gamma_filterfunction(dt, 1e-3, p)
        exact = an.gamma_thermal(dt, 1e-3, p)
        assert np.max(np.abs(ff / exact - 1)) < 0.01

    def test_spectral_density_integral(self, fig2):
        # Ramsey at long times: rate = S(0) / 4 in the Gaussian limit
        S0 = an.spectral_density_thermal(0.0, 1e-3, fig2)
        assert S0 / 4 == pytest.approx(4 * fig2.chi ** 2 * 1e-3 / fig2.kappa)
        S0c = an.spectral_density_coherent(0.0, 1e-3, fig2)
        assert S0c / 4 == pytest.approx(8 * fig2.chi ** 2 * 1e-3 / fig2.kappa)
