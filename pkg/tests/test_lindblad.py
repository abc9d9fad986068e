import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpmg_shotnoise import analytic as an
from cpmg_shotnoise import lindblad as lb
from cpmg_shotnoise.core import (ConfigurationError, CpmgSchedule, DriveSpec, PulseShape,
                                 ResonatorQubitParams, ScheduleError)

KAPPA = 1 / 19.4e-9


@pytest.fixture
def weak():
    """2 chi / kappa = 0.7."""
    return ResonatorQubitParams(KAPPA, 0.35 * KAPPA)


class TestSystemState:
    def test_ground_is_valid(self):
        s = lb.SystemState.ground(4)
        s.check()
        assert s.rho.shape == (8, 8)
        assert s.qubit_populations() == pytest.approx([1, 0])

    def test_check_rejects_bad_trace(self):
        s = lb.SystemState.ground(3)
        s.rho[0, 0] = 1.1
        with pytest.raises(lb.StateError, match="trace"):
            s.check()

    def test_check_rejects_non_hermitian(self):
        s = lb.SystemState.ground(3)
        s.rho[0, 1] = 0.1
        with pytest.raises(lb.StateError, match="Hermitian"):
            s.check()

    def test_check_rejects_negative_eigenvalue(self):
        s = lb.SystemState.ground(3)
        s.rho[0, 0], s.rho[1, 1] = 1.1, -0.1
        with pytest.raises(lb.StateError, match="negative"):
            s.check()

    def test_coherence_of_plus_state(self):
        s = lb.SystemState.ground(3).apply_qubit_unitary(lb.HALF_PI_Y)
        assert s.coherence() == pytest.approx(1.0, abs=1e-15)

    def test_fock_config_validation(self):
        with pytest.raises(ConfigurationError):
            lb.FockConfig(n_fock=1)
        with pytest.raises(ConfigurationError):
            lb.FockConfig(integrator_step=0.0)
        assert lb.FockConfig().thermalization(ResonatorQubitParams(KAPPA, 1.0)) == pytest.approx(100 / KAPPA)


class TestEvolve:
    def test_vacuum_is_stationary(self, weak):
        s0 = lb.SystemState.ground(5)
        s1 = lb.evolve(s0, weak, DriveSpec(), None, 50 / KAPPA)
        np.testing.assert_allclose(s1.rho, s0.rho, atol=1e-13)

    def test_thermal_populations_are_geometric(self, weak):
        n = 0.05
        s = lb.evolve(lb.SystemState.ground(10), weak, DriveSpec.thermal(n), None, 60 / KAPPA)
        p = s.fock_populations()
        geometric = n ** np.arange(10) / (1 + n) ** np.arange(1, 11)
        np.testing.assert_allclose(p[:4], geometric[:4], rtol=1e-2)
        assert np.dot(np.arange(10), p) == pytest.approx(n, rel=1e-2)

    def test_shaped_pi_pulse_flips_qubit(self):
        p = ResonatorQubitParams(KAPPA, 0.0)
        tau = 20e-9
        g = lb.raised_cosine(tau)
        s = lb.evolve(lb.SystemState.ground(3), p, DriveSpec(), g, tau, t0=-tau / 2)
        assert s.qubit_populations()[1] >= 1 - 1e-6

    def test_pulse_area(self):
        tau = 17e-9
        t = np.linspace(-tau / 2, tau / 2, 20001)
        assert np.trapezoid(lb.raised_cosine(tau)(t), t) == pytest.approx(math.pi / 2, rel=1e-8)

    def test_negative_duration(self, weak):
        with pytest.raises(ConfigurationError):
            lb.evolve(lb.SystemState.ground(3), weak, DriveSpec(), None, -1e-9)

    def test_leakage_is_reported(self, weak):
        with pytest.raises(lb.TruncationError, match="n_fock"):
            lb.evolve(lb.SystemState.ground(3), weak, DriveSpec.thermal(0.5), None, 20 / KAPPA)

    def test_trace_preserved_under_pulse(self, weak):
        tau = 25e-9
        s = lb.thermalize(weak, DriveSpec.thermal(5e-3), lb.FockConfig(5))
        s = s.apply_qubit_unitary(lb.HALF_PI_Y)
        out = lb.evolve(s, weak, DriveSpec.thermal(5e-3), lb.raised_cosine(tau), tau, t0=-tau / 2)
        out.check()
        assert abs(np.trace(out.rho) - 1) < 1e-8 * max(1.0, KAPPA * tau)

    def test_step_rule(self, weak):
        h = lb.max_step(weak, 25e-9)
        assert h <= min(1 / KAPPA, 25e-9, 2 * math.pi / (2 * weak.chi)) / 20
        assert lb.max_step(weak, 25e-9, lb.FockConfig(integrator_step=1e-12)) == 1e-12


class TestCpmgExperiment:
    def test_no_photons_keeps_full_coherence(self, weak):
        trace = lb.cpmg_experiment(weak, DriveSpec(), CpmgSchedule(6, 100e-9))
        np.testing.assert_allclose(trace.coherence, 1.0, atol=1e-10)

    def test_pulse_longer_than_period(self):
        with pytest.raises(ScheduleError):
            CpmgSchedule(4, 20e-9, 25e-9, PulseShape.RAISED_COSINE)

    def test_n_values_out_of_range(self, weak):
        with pytest.raises(ScheduleError):
            lb.cpmg_experiment(weak, DriveSpec(), CpmgSchedule(3, 100e-9), n_values=[4])

    def test_unknown_readout(self, weak):
        with pytest.raises(ConfigurationError):
            lb.cpmg_experiment(weak, DriveSpec(), CpmgSchedule(3, 100e-9), readout="scope")

    @pytest.mark.parametrize("tau", [0.0, 25e-9])
    def test_phase_scan_matches_direct(self, weak, tau):
        shape = PulseShape.RAISED_COSINE if tau else PulseShape.INSTANTANEOUS
        sched = CpmgSchedule(6, 100e-9, tau, shape)
        d = DriveSpec.thermal(2e-2)
        a = lb.cpmg_experiment(weak, d, sched)
        b = lb.cpmg_experiment(weak, d, sched, readout="phase_scan")
        np.testing.assert_allclose(b.coherence, a.coherence, rtol=1e-9)

    def test_prefix_property(self, weak):
        d = DriveSpec.thermal(1e-2)
        full = lb.cpmg_experiment(weak, d, CpmgSchedule(8, 80e-9))
        part = lb.cpmg_experiment(weak, d, CpmgSchedule(8, 80e-9), n_values=[3, 8])
        np.testing.assert_allclose(part.coherence, full.coherence[[2, 7]], rtol=1e-12)

    def test_invariants_along_run(self, weak):
        """check_state makes every readout verify trace, Hermiticity and positivity."""
        sched = CpmgSchedule(10, 60e-9, 25e-9, PulseShape.RAISED_COSINE)
        trace = lb.cpmg_experiment(weak, DriveSpec.coherent_population(weak, 1e-2), sched,
                                   lb.FockConfig(check_state=True))
        assert np.all(np.diff(trace.coherence) < 0)

    @settings(max_examples=10, deadline=None)
    @given(n=st.floats(1e-4, 3e-2), dt_ns=st.floats(30, 400), seed_tau=st.one_of(st.just(0.0), st.floats(0.05, 0.8)))
    def test_coherence_bounded(self, n, dt_ns, seed_tau):
        p = ResonatorQubitParams(KAPPA, 0.35 * KAPPA)
        tau = seed_tau * dt_ns * 1e-9
        shape = PulseShape.RAISED_COSINE if tau > 0 else PulseShape.INSTANTANEOUS
        trace = lb.cpmg_experiment(p, DriveSpec.thermal(n), CpmgSchedule(4, dt_ns * 1e-9, tau, shape))
        assert np.all((trace.coherence > 0) & (trace.coherence <= 1))


class TestRates:
    F_S = np.array([0.5, 1, 2, 5, 10, 12.5]) * 1e6

    def test_thermal_matches_analytic(self, weak):
        g = lb.lindblad_rate_curve(weak, DriveSpec.thermal(5e-3), self.F_S)
        np.testing.assert_allclose(g, an.gamma_thermal(0.5 / self.F_S, 5e-3, weak), rtol=0.02)

    def test_coherent_matches_analytic(self, weak):
        g = lb.lindblad_rate_curve(weak, DriveSpec.coherent_population(weak, 5e-3), self.F_S)
        np.testing.assert_allclose(g, an.gamma_coherent(0.5 / self.F_S, 5e-3, weak), rtol=0.02)

    def test_zero_population_gives_zero_rate(self, weak):
        est = lb.rate_from_lindblad(weak, DriveSpec(), CpmgSchedule(1, 200e-9))
        assert abs(est.gamma) <= 1e-6 + 3 * est.sigma

    def test_fock_truncation_stability(self, weak):
        f = np.array([1, 5, 12.5]) * 1e6
        d = DriveSpec.thermal(5e-3)
        r5 = lb.lindblad_rate_curve(weak, d, f, 25e-9, lb.FockConfig(5))
        r10 = lb.lindblad_rate_curve(weak, d, f, 25e-9, lb.FockConfig(10))
        np.testing.assert_allclose(r10, r5, rtol=2e-3)

    def test_step_halving(self, weak):
        sched = CpmgSchedule(1, 50e-9, 25e-9, PulseShape.RAISED_COSINE)
        d = DriveSpec.thermal(5e-3)
        h = lb.max_step(weak, 25e-9)
        a = lb.rate_from_lindblad(weak, d, sched, lb.FockConfig(integrator_step=h)).gamma
        b = lb.rate_from_lindblad(weak, d, sched, lb.FockConfig(integrator_step=h / 2)).gamma
        assert b == pytest.approx(a, rel=1e-6)

    def test_return_trace(self, weak):
        est, trace = lb.rate_from_lindblad(weak, DriveSpec.thermal(1e-3), CpmgSchedule(1, 100e-9),
                                           return_trace=True)
        assert KAPPA * trace.t_cpmg[0] >= 4 - 1e-9
        assert est.gamma > 0
