"""Independent reference values for the test-suite.

Each value here is computed by a route that shares no code with the
function it checks (extended-precision arithmetic, a generic ODE solver,
the master-equation or Monte-Carlo route).  Run this script to regenerate
``tests/frozen_values.py``; the tests only read the frozen numbers.

    python tests/oracles/derived_values.py > tests/frozen_values.py
"""
import math

import mpmath as mp
import numpy as np
from scipy import integrate

from cpmg_shotnoise.core import DriveSpec, CpmgSchedule, ResonatorQubitParams, drive_amplitude_for_population
from cpmg_shotnoise import lindblad, trajectory

mp.mp.dps = 50

KAPPA = 1 / 19.4e-9
CHI = math.pi * 5.7e6
FIG2 = ResonatorQubitParams(KAPPA, CHI)
FIGS1 = ResonatorQubitParams(1 / 19e-9, CHI)


def bose_einstein_mp():
    hbar = mp.mpf("1.054571817e-34")
    kB = mp.mpf("1.380649e-23")
    w = 2 * mp.pi * mp.mpf("5.2e9")
    return float(1 / (mp.exp(hbar * w / (kB * mp.mpf("0.030"))) - 1))


def lowfreq_exact_mp(n, params):
    r = mp.mpf(2 * params.chi / params.kappa)
    z = (1 - 1j * r) ** 2 - 4j * r * mp.mpf(n)
    return float(params.kappa / 2 * mp.re(mp.sqrt(z) - 1))


def _flip_ode(rhs, y0, dt, n_periods, record):
    """Integrate a 2-state ODE whose coefficients flip sign at each (k+1/2) dt."""
    y = np.asarray(y0, dtype=complex)
    t = 0.0
    edges = [0.0] + [(k + 0.5) * dt for k in range(2 * n_periods)] + [2 * n_periods * dt]
    out = {}
    for i in range(len(edges) - 1):
        a, b = edges[i], edges[i + 1]
        sign = 1 if i % 2 == 0 else -1
        ts = [s for s in record if a <= s <= b]
        sol = integrate.solve_ivp(lambda t, y: rhs(t, y, sign), (a, b), y, method="DOP853",
                                  rtol=1e-12, atol=1e-16, dense_output=True)
        for s in ts:
            out[s] = sol.sol(s)
        y = sol.y[:, -1]
    return out


def correlator_ode(dt, n_th, params, n_periods=20):
    """Steady correlator A at a +chi interval start and the rate from its integral.

    A' = -(kappa - 2 i chi~) A + kappa n with a running integral of
    Re(2 i chi~ A) as second component.
    """
    k, chi = params.kappa, params.chi

    def rhs(t, y, s):
        A = y[0]
        return [-(k - 2j * s * chi) * A + k * n_th, -np.real(2j * s * chi * A)]

    tp = (2 * n_periods - 0.5) * dt - 2 * dt  # start of a +chi interval, late in the run
    tq = tp + dt
    vals = _flip_ode(rhs, [0, 0], dt, n_periods, [tp, tq])
    A_tp = complex(vals[tp][0])
    gamma = float(np.real(vals[tq][1] - vals[tp][1]) / dt)
    return A_tp, gamma


def detuned_coherent_ode(dt, F, params, n_periods=30):
    """Rate from deterministic amplitudes over one steady period (two intervals)."""
    k, chi, d = params.kappa, params.chi, params.delta_omega_d
    sk = math.sqrt(k)

    def rhs(t, y, s):
        a0, a1, X = y
        g0 = k / 2 - 1j * (d + s * chi)
        g1 = k / 2 - 1j * (d - s * chi)
        return [-g0 * a0 + sk * F, -g1 * a1 + sk * F, 2j * s * chi * a0 * np.conj(a1)]

    t0 = (2 * n_periods - 4) * dt
    t1 = t0 + 2 * dt
    vals = _flip_ode(rhs, [0, 0, 0], dt, n_periods, [t0, t1])
    return float(-np.real(vals[t1][2] - vals[t0][2]) / (2 * dt))


def main():
    v = {}
    v["BOSE_5p2GHZ_30MK"] = bose_einstein_mp()
    v["LOWFREQ_EXACT_FIG2_N1E-6"] = lowfreq_exact_mp(1e-6, FIG2)
    v["LOWFREQ_EXACT_FIGS1_N0p1"] = lowfreq_exact_mp(0.1, FIGS1)

    corr = {}
    for dt in (40e-9, 100e-9, 500e-9):
        A, g = correlator_ode(dt, 1e-3, FIG2)
        corr[dt] = (A.real, A.imag, g)
    v["CORRELATOR_ODE_FIG2_N1E-3"] = corr

    pd = FIG2.with_detuning(CHI)
    F = 0.7 * drive_amplitude_for_population(FIG2, 1e-3)
    det = {}
    for f in (0.5e6, 1e6, 2e6, 5e6):
        det[f] = detuned_coherent_ode(0.5 / f, F, pd)
    v["DETUNED_F"] = F
    v["DETUNED_ODE_FIG2_DELTA_CHI"] = det
    det_lb = {}
    for f in (0.5e6, 1e6, 2e6, 5e6):
        det_lb[f] = lindblad.rate_from_lindblad(pd, DriveSpec.coherent(F), CpmgSchedule(1, 0.5 / f)).gamma
    v["DETUNED_LINDBLAD_FIG2_DELTA_CHI"] = det_lb

    dc = DriveSpec.coherent_population(FIG2, 1e-3)
    sched = CpmgSchedule(1, 0.5e-6, 1e-9, "raised_cosine")
    v["COHERENT_LINDBLAD_TAU1NS_1MHZ_N1E-3"] = lindblad.rate_from_lindblad(FIG2, dc, sched).gamma

    mod = {}
    for f in (0.2e6, 1e6, 3e6):
        mod[f] = lindblad.rate_from_lindblad(FIGS1, DriveSpec.thermal(0.1), CpmgSchedule(1, 0.5 / f),
                                             lindblad.FockConfig(14)).gamma
    v["MODERATE_LINDBLAD_FIGS1_N0p1"] = mod

    # Monte-Carlo: rate and correlator at dt = 100 ns, n = 1e-3, 1e5 realisations
    dt = 100e-9
    est, _ = trajectory.simulate_rate(FIG2, DriveSpec.thermal(1e-3), dt, ensemble_size=100_000, seed=2024)
    v["MC_RATE_FIG2_DT100NS_N1E-3"] = (est.gamma, est.sigma)
    cfg = trajectory.cpmg_config(FIG2, dt, 6, ensemble_size=100_000, seed=7)
    tp = 4.5 * dt
    s_vals = [0.0, 0.25 * dt, 0.5 * dt, 0.75 * dt, dt]
    ens = trajectory.run_ensemble(FIG2, DriveSpec.thermal(1e-3), cfg, [6 * dt], [tp + s for s in s_vals])
    v["MC_CORRELATOR_FIG2_DT100NS_N1E-3"] = {
        "s_over_dt": [0.0, 0.25, 0.5, 0.75, 1.0],
        "re": ens.correlator_A.real.tolist(), "im": ens.correlator_A.imag.tolist(),
        "se": ens.correlator_se.tolist()}

    print('"""Frozen oracle values; regenerate with tests/oracles/derived_values.py."""')
    for key, val in v.items():
        print(f"{key.replace('-', '_').replace('.', 'p')} = {val!r}")


if __name__ == "__main__":
    main()
