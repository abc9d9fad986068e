import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpmg_shotnoise import core
from cpmg_shotnoise.core import (
    CoherenceTrace, CpmgSchedule, DomainError, DriveSpec, RateCurve, ResonatorQubitParams,
    ScheduleError, coherent_population, drive_amplitude_for_population, thermal_occupation,
)
from frozen_values import BOSE_5p2GHZ_30MK


class TestThermalOccupation:
    def test_zero_temperature_limit(self):
        assert thermal_occupation(2 * math.pi * 5e9, 1e-6) == 0.0

    def test_ln2_gives_one(self):
        T = 0.05
        omega = core.constants.k * T * math.log(2) / core.constants.hbar
        assert thermal_occupation(omega, T) == pytest.approx(1.0, rel=1e-12)

    def test_extended_precision_reference(self):
        val = thermal_occupation(2 * math.pi * 5.2e9, 0.030)
        # reference constants carry 10 significant digits
        assert val == pytest.approx(BOSE_5p2GHZ_30MK, rel=1e-8)

    @pytest.mark.parametrize("T", [0.0, -1.0])
    def test_bad_temperature(self, T):
        with pytest.raises(DomainError):
            thermal_occupation(1e9, T)


class TestCoherentPopulation:
    def test_no_drive(self, fig2):
        assert coherent_population(fig2, 0) == 0

    def test_lorentzian_peak(self):
        p = ResonatorQubitParams(1e7, 0.0)
        F = 3.0 + 4.0j
        assert coherent_population(p, F) == pytest.approx(4 * 25 / 1e7, rel=1e-14)

    def test_round_trip(self, fig2):
        F = drive_amplitude_for_population(fig2, 1e-3)
        assert coherent_population(fig2, F) == pytest.approx(1e-3, rel=1e-13)

    def test_detuned_returns_triple(self, fig2):
        p = fig2.with_detuning(fig2.chi)
        n0, n1, n_max = coherent_population(p, 50.0)
        assert n_max == pytest.approx(4 * 2500 / p.kappa)
        assert n1 == pytest.approx(n_max)  # qubit 1 sits on resonance when delta = chi
        assert n0 < n1

    @given(st.floats(1e-8, 1.0), st.floats(-3.0, 3.0))
    def test_round_trip_property(self, n, r):
        p = ResonatorQubitParams(5e7, r * 2.5e7)
        F = drive_amplitude_for_population(p, n)
        assert coherent_population(p, F) == pytest.approx(n, rel=1e-12)


class TestUnits:
    @given(st.floats(1e-6, 1e6))
    def test_mhz_round_trip(self, f):
        assert core.rad_s_to_mhz(core.mhz_to_rad_s(f)) == pytest.approx(f, rel=1e-12)

    @given(st.floats(1e-6, 1e6))
    def test_rate_round_trip(self, g):
        assert core.per_s_to_per_us(core.per_us_to_per_s(g)) == pytest.approx(g, rel=1e-12)

    def test_lab_units(self, fig2):
        p = ResonatorQubitParams.from_lab_units(19.4, 5.7)
        assert p.kappa == pytest.approx(fig2.kappa, rel=1e-14)
        assert p.chi == pytest.approx(fig2.chi, rel=1e-14)

    @given(st.floats(1e3, 1e9))
    def test_cpmg_frequency_inverse(self, f):
        assert core.cpmg_frequency(core.interpulse_period(f)) == pytest.approx(f, rel=1e-12)


class TestParams:
    @pytest.mark.parametrize("k", [0.0, -1.0, math.inf, math.nan])
    def test_kappa_positive(self, k):
        with pytest.raises(DomainError):
            ResonatorQubitParams(k, 1.0)

    def test_ratio(self, fig2):
        assert fig2.ratio == pytest.approx(2 * fig2.chi * 19.4e-9)


class TestDriveSpec:
    def test_negative_population(self):
        with pytest.raises(DomainError):
            DriveSpec.thermal(-1e-3)

    def test_none_must_be_empty(self):
        with pytest.raises(DomainError):
            DriveSpec("none", n_th=1e-3)

    def test_thermal_rejects_amplitude(self):
        with pytest.raises(DomainError):
            DriveSpec("thermal", n_th=1e-3, F_dc=1.0)


class TestSchedule:
    @given(st.integers(1, 60), st.floats(1e-9, 1e-5))
    def test_sign_flips(self, n, dt):
        s = CpmgSchedule(n, dt)
        t = np.linspace(0, s.total_time, 40 * n + 1)
        signs = s.chi_sign(t)
        assert signs[0] == 1
        assert np.count_nonzero(np.diff(signs)) == n

    def test_pulse_centres(self):
        s = CpmgSchedule(3, 2.0)
        np.testing.assert_allclose(s.pulse_centers(), [1.0, 3.0, 5.0])
        assert s.total_time == 6.0 and s.f_s == 0.25

    def test_overlapping_pulses(self):
        with pytest.raises(ScheduleError):
            CpmgSchedule(2, 20e-9, 25e-9, "raised_cosine")

    @pytest.mark.parametrize("n", [0, -1, 1.5])
    def test_bad_pulse_count(self, n):
        with pytest.raises(ScheduleError):
            CpmgSchedule(n, 1e-6)

    def test_shape_duration_consistency(self):
        with pytest.raises(ScheduleError):
            CpmgSchedule(1, 1e-6, 0.0, "raised_cosine")
        with pytest.raises(ScheduleError):
            CpmgSchedule(1, 1e-6, 1e-9, "instantaneous")


class TestTraces:
    def test_increasing_times(self):
        with pytest.raises(ValueError):
            CoherenceTrace([1.0, 1.0], [0.5, 0.4])

    def test_statistical_headroom(self):
        CoherenceTrace([1.0], [1.004], [0.001], "trajectory")
        with pytest.raises(ValueError):
            CoherenceTrace([1.0], [1.006], [0.001], "trajectory")

    def test_negative_coherence(self):
        with pytest.raises(ValueError):
            CoherenceTrace([1.0, 2.0], [0.5, -0.1])

    def test_rate_curve(self):
        c = RateCurve([1e6, 2e6], [1e4, 2e4])
        assert not c.has_sigma
        np.testing.assert_allclose(c.dt, [5e-7, 2.5e-7])
        with pytest.raises(ValueError):
            RateCurve([0.0], [1.0])
