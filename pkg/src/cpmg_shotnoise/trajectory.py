"""Monte-Carlo evaluation of the qubit coherence from paired resonator trajectories.

The two resonator amplitudes alpha_0(t), alpha_1(t), one per qubit branch,
obey linear Langevin equations driven by the *same* thermal white noise
and the same coherent tone, with branch-dependent complex decay rates that
swap at every pi-pulse.  The coherence is

    C(t) = | < exp( int_0^t 2i chi~(s) alpha_0(s) alpha_1^*(s) ds ) > |

with the average taken over noise realisations before the modulus.

Between grid points the amplitudes are advanced with the exact
Ornstein-Uhlenbeck propagator: the pair of stochastic increments is drawn
jointly from its exact 2x2 complex covariance, which keeps the shared-noise
cross-correlation exact at any step size.  The exponent integral is
accumulated by the trapezoid rule on the step grid.
"""
from __future__ import annotations

import dataclasses
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .core import (ConfigurationError, CoherenceTrace, CpmgSchedule, DriveSpec,
                   ResonatorQubitParams, Route, ScheduleError, stationary_amplitude)

log = logging.getLogger(__name__)

THREADS_ENV = "CPMG_SHOTNOISE_THREADS"


class InsufficientDataError(ValueError):
    """Too few usable coherence points for a rate fit."""


@dataclass(frozen=True)
class TrajectoryConfig:
    """Integrator and ensemble settings.

    ``pulse_times`` may be any strictly increasing sequence (Uhrig etc.);
    each time must lie on the uniform grid of spacing ``time_step``.
    ``initial`` selects the resonator state at t = 0: ``"vacuum"`` starts
    both amplitudes at 0, ``"stationary"`` samples the steady state reached
    with the qubit in |0> before the sequence.
    """

    time_step: float
    ensemble_size: int = 10_000
    seed: int = 0
    pulse_times: tuple = ()
    chunk_size: int = 5000
    block_size: int = 500
    initial: str = "vacuum"
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "pulse_times", tuple(float(t) for t in self.pulse_times))
        if not self.time_step > 0:
            raise ConfigurationError("time_step must be positive")
        if min(self.ensemble_size, self.chunk_size, self.block_size) < 1:
            raise ConfigurationError("ensemble_size, chunk_size and block_size must be positive")
        if self.initial not in ("vacuum", "stationary"):
            raise ConfigurationError(f"unknown initial state {self.initial!r}")
        p = np.asarray(self.pulse_times)
        if np.any(np.diff(p) <= 0) or np.any(p < 0):
            raise ScheduleError("pulse_times must be nonnegative and strictly increasing")

    def validate_step(self, params: ResonatorQubitParams, min_interval: float | None = None):
        """Enforce time_step <= min(pulse spacing, 1/kappa) / 20."""
        scale = 1.0 / params.kappa
        if min_interval is not None:
            scale = min(scale, min_interval)
        if self.time_step > scale / 20 * (1 + 1e-9):
            raise ConfigurationError(
                f"time_step {self.time_step:.3g} s exceeds min(dt, 1/kappa)/20 = {scale / 20:.3g} s")

    def with_pulses(self, pulse_times) -> "TrajectoryConfig":
        return dataclasses.replace(self, pulse_times=tuple(pulse_times))


def aligned_time_step(dt: float, params: ResonatorQubitParams, per: int = 40) -> float:
    """Largest step <= min(dt, 1/kappa)/per that puts every (k+1/2) dt on the grid."""
    h_max = min(dt, 1.0 / params.kappa) / per
    return (dt / 2) / math.ceil((dt / 2) / h_max * (1 - 1e-12))


def cpmg_config(params: ResonatorQubitParams, dt: float, n_pulses: int, *,
                ensemble_size: int = 10_000, seed: int = 0, per: int = 40,
                initial: str = "vacuum", chunk_size: int = 5000) -> TrajectoryConfig:
    sched = CpmgSchedule(n_pulses, dt)
    return TrajectoryConfig(aligned_time_step(dt, params, per), ensemble_size, seed,
                            tuple(sched.pulse_centers()), chunk_size=chunk_size, initial=initial)


def _grid_index(t: float, h: float, what: str) -> int:
    k = round(t / h)
    if abs(k * h - t) > 1e-6 * h:
        raise ScheduleError(f"{what} {t:.6g} s is not on the integration grid (step {h:.6g} s)")
    return int(k)


class _Propagator:
    """Exact one-step update for both branches and both chi-tilde signs."""

    def __init__(self, params: ResonatorQubitParams, drive: DriveSpec, h: float):
        k, chi, d = params.kappa, params.chi, params.delta_omega_d
        F = complex(drive.F_dc)
        self.decay = {}
        self.forced = {}
        self.chol = {}
        for s in (1, -1):
            g = np.array([k / 2 - 1j * (d + s * chi), k / 2 - 1j * (d - s * chi)])
            e = np.exp(-g * h)
            self.decay[s] = e
            self.forced[s] = math.sqrt(k) * F * (-np.expm1(-g * h)) / g
            if drive.n_th > 0:
                self.chol[s] = _joint_noise_factor(k, chi * s, d, drive.n_th, h)
        self.noisy = drive.n_th > 0


def _joint_noise_factor(kappa, chi, delta, n_th, h) -> np.ndarray:
    """Lower Cholesky factor of the 2x2 covariance of the shared-noise increments.

    The Schur complement c11 - |c10|^2 / c00 is of order (chi h)^2 relative
    to c00 and cancels in double precision when chi h is small, so the
    factor is formed in extended precision.
    """
    with mpmath.workdps(40):
        k, c, d = mpmath.mpf(kappa), mpmath.mpf(chi), mpmath.mpf(delta)
        g = [k / 2 - 1j * (d + c), k / 2 - 1j * (d - c)]

        def cov(i, j):
            gs = g[i] + mpmath.conj(g[j])
            return k * n_th * (-mpmath.expm1(-gs * h)) / gs

        L00 = mpmath.sqrt(mpmath.re(cov(0, 0)))
        L10 = cov(1, 0) / L00
        L11 = mpmath.sqrt(max(mpmath.re(cov(1, 1)) - abs(L10) ** 2, 0))
        return np.array([[complex(L00), 0], [complex(L10), complex(L11)]])


def _initial_amplitudes(params, drive, config, m, rng):
    a = np.zeros(m, dtype=complex)
    if config.initial == "stationary":
        if drive.F_dc != 0:
            a += stationary_amplitude(params, drive.F_dc, 0)
        if drive.n_th > 0:
            z = rng.standard_normal((2, m))
            a += math.sqrt(drive.n_th / 2) * (z[0] + 1j * z[1])
    return a, a.copy()


def _chi_signs(n_steps: int, h: float, pulse_times: Sequence[float]) -> np.ndarray:
    """Sign of chi-tilde on each step interval."""
    flips = np.zeros(n_steps + 1, dtype=int)
    for tp in pulse_times:
        k = _grid_index(tp, h, "pulse time")
        if k <= n_steps:
            flips[k] += 1
    return np.where(np.cumsum(flips)[:-1] % 2 == 0, 1, -1)


def integrate_pair(params: ResonatorQubitParams, drive: DriveSpec, config: TrajectoryConfig,
                   t_end: float, noise_stream: np.random.Generator | None = None,
                   record_times: Sequence[float] | None = None, ensemble_size: int | None = None,
                   correlator_times: Sequence[float] | None = None):
    """Integrate one batch of paired trajectories.

    Returns the accumulated exponent int 2i chi~ alpha_0 alpha_1^* dt per
    realisation, shape ``(len(record_times), m)`` (or ``(m,)`` at ``t_end``
    when ``record_times`` is None).  With ``correlator_times`` a second
    array of alpha_0 alpha_1^* samples, shape ``(len(correlator_times), m)``,
    is returned as well.
    """
    h = config.time_step
    m = config.ensemble_size if ensemble_size is None else ensemble_size
    rng = noise_stream if noise_stream is not None else np.random.default_rng(config.seed)
    n_steps = _grid_index(t_end, h, "end time")
    rec = [n_steps] if record_times is None else [_grid_index(t, h, "record time") for t in record_times]
    cor = [] if correlator_times is None else [_grid_index(t, h, "correlator time") for t in correlator_times]
    if max(rec + cor, default=0) > n_steps:
        raise ConfigurationError("record times must not exceed t_end")
    signs = _chi_signs(n_steps, h, config.pulse_times)
    prop = _Propagator(params, drive, h)
    chi = params.chi

    a0, a1 = _initial_amplitudes(params, drive, config, m, rng)
    X = np.zeros(m, dtype=complex)
    prod = a0 * np.conj(a1)
    out = np.empty((len(rec), m), dtype=complex)
    corr = np.empty((len(cor), m), dtype=complex)
    rec_pos = {k: i for i, k in enumerate(rec)}
    cor_pos = {k: i for i, k in enumerate(cor)}
    if 0 in rec_pos:
        out[rec_pos[0]] = X
    if 0 in cor_pos:
        corr[cor_pos[0]] = prod
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for j in range(n_steps):
        s = int(signs[j])
        e0, e1 = prop.decay[s]
        f0, f1 = prop.forced[s]
        a0 = e0 * a0 + f0
        a1 = e1 * a1 + f1
        if prop.noisy:
            L = prop.chol[s]
            z = rng.standard_normal((4, m))
            w0 = (z[0] + 1j * z[1]) * inv_sqrt2
            w1 = (z[2] + 1j * z[3]) * inv_sqrt2
            a0 += L[0, 0] * w0
            a1 += L[1, 0] * w0 + L[1, 1] * w1
        new_prod = a0 * np.conj(a1)
        X += (1j * chi * s * h) * (prod + new_prod)
        prod = new_prod
        k = j + 1
        if k in rec_pos:
            out[rec_pos[k]] = X
        if k in cor_pos:
            corr[cor_pos[k]] = prod
    if record_times is None:
        out = out[0]
    if correlator_times is not None:
        return out, corr
    return out


def sample_paths(params: ResonatorQubitParams, drive: DriveSpec, config: TrajectoryConfig,
                 t_end: float, ensemble_size: int | None = None):
    """Full amplitude paths on the step grid, for diagnostics and tests.

    Returns ``(t, alpha0, alpha1, signs)``; the amplitude arrays have shape
    ``(n_steps + 1, m)`` and ``signs`` gives chi-tilde/chi per step interval.
    """
    h = config.time_step
    n_steps = _grid_index(t_end, h, "end time")
    grid = np.arange(n_steps + 1) * h
    m = config.ensemble_size if ensemble_size is None else ensemble_size
    rng = np.random.default_rng(config.seed)
    signs = _chi_signs(n_steps, h, config.pulse_times)
    prop = _Propagator(params, drive, h)
    a0 = np.empty((n_steps + 1, m), dtype=complex)
    a1 = np.empty_like(a0)
    a0[0], a1[0] = _initial_amplitudes(params, drive, config, m, rng)
    for j in range(n_steps):
        s = int(signs[j])
        a0[j + 1] = prop.decay[s][0] * a0[j] + prop.forced[s][0]
        a1[j + 1] = prop.decay[s][1] * a1[j] + prop.forced[s][1]
        if prop.noisy:
            L = prop.chol[s]
            z = rng.standard_normal((4, m))
            w0 = (z[0] + 1j * z[1]) / math.sqrt(2)
            w1 = (z[2] + 1j * z[3]) / math.sqrt(2)
            a0[j + 1] += L[0, 0] * w0
            a1[j + 1] += L[1, 0] * w0 + L[1, 1] * w1
    return grid, a0, a1, signs


def phase_integral(t, alpha0, alpha1, signs, chi: float):
    """Cumulative trapezoid of 2i chi~ alpha_0 alpha_1^* along given paths.

    ``signs[j]`` is chi-tilde/chi on ``[t[j], t[j+1]]``.  Returns an array of
    shape ``alpha0.shape`` with the exponent at every grid point.
    """
    prod = alpha0 * np.conj(alpha1)
    dt = np.diff(t)
    shape = (-1,) + (1,) * (prod.ndim - 1)
    inc = 1j * chi * (np.asarray(signs) * dt).reshape(shape) * (prod[:-1] + prod[1:])
    out = np.zeros_like(prod)
    out[1:] = np.cumsum(inc, axis=0)
    return out


# --------------------------------------------------------------------------
# ensembles
# --------------------------------------------------------------------------

@dataclass
class EnsembleResult:
    """Ensemble averages at a set of record times.

    ``coherence``, ``std_error`` and ``phase`` are arrays over
    ``record_times``; ``correlator_A`` holds <alpha_0 alpha_1^*> at
    ``correlator_times``.  ``chunk_means`` keeps averages of exp(exponent)
    over consecutive blocks of ``block_size`` realisations (sizes in
    ``chunk_sizes``) for resampling error estimates.
    """

    record_times: np.ndarray
    coherence: np.ndarray
    std_error: np.ndarray
    phase: np.ndarray
    correlator_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    correlator_A: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))
    correlator_se: np.ndarray = field(default_factory=lambda: np.empty(0))
    chunk_means: np.ndarray = field(default_factory=lambda: np.empty((0, 0), dtype=complex))
    chunk_sizes: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))


def _n_workers(config: TrajectoryConfig) -> int:
    if config.workers is not None:
        return max(1, int(config.workers))
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def _chunk_stats(params, drive, config, t_end, record_times, correlator_times, m, seed_seq, block):
    rng = np.random.default_rng(seed_seq)
    X, P = integrate_pair(params, drive, config, t_end, rng, record_times, m,
                          correlator_times=correlator_times)
    w = np.exp(X)
    edges = np.arange(0, m, block)
    blocks = np.add.reduceat(w, edges, axis=1).T
    return (w.sum(axis=1), (w.real ** 2).sum(axis=1), (w.imag ** 2).sum(axis=1),
            (w.real * w.imag).sum(axis=1), P.sum(axis=1), (np.abs(P) ** 2).sum(axis=1), blocks, np.diff(np.append(edges, m)))


def run_ensemble(params: ResonatorQubitParams, drive: DriveSpec, config: TrajectoryConfig,
                 record_times: Sequence[float], correlator_times: Sequence[float] = ()) -> EnsembleResult:
    """Average exp(exponent) over ``config.ensemble_size`` realisations.

    The ensemble is split into fixed chunks with independent seed streams
    spawned from ``config.seed``; chunk results are reduced in chunk order
    with compensated summation, so serial and threaded runs agree.
    Without thermal noise the dynamics are deterministic and a single
    realisation is integrated.
    """
    record_times = np.asarray(record_times, dtype=float)
    correlator_times = np.asarray(correlator_times, dtype=float)
    t_end = float(max(record_times.max(), correlator_times.max(initial=0.0)))
    deterministic = drive.n_th == 0
    total = 1 if deterministic else config.ensemble_size
    sizes = [min(config.chunk_size, total - i) for i in range(0, total, config.chunk_size)]
    seeds = np.random.SeedSequence(config.seed).spawn(len(sizes))
    jobs = [(params, drive, config, t_end, record_times, correlator_times, m, s, config.block_size)
            for m, s in zip(sizes, seeds)]
    workers = _n_workers(config)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            stats = list(pool.map(lambda a: _chunk_stats(*a), jobs))
    else:
        stats = [_chunk_stats(*a) for a in jobs]

    def fsum_c(arrs):
        arr = np.stack(arrs)
        return np.array([complex(math.fsum(col.real), math.fsum(col.imag)) for col in arr.T])

    def fsum_r(arrs):
        arr = np.stack(arrs)
        return np.array([math.fsum(col) for col in arr.T])

    M = float(total)
    mean = fsum_c([s[0] for s in stats]) / M
    err2 = fsum_r([s[1] for s in stats]) / M
    eii2 = fsum_r([s[2] for s in stats]) / M
    eri = fsum_r([s[3] for s in stats]) / M
    C = np.abs(mean)
    if deterministic:
        se = np.zeros_like(C)
    else:
        # variance of the projection of exp(X) on the direction of the mean
        u = np.where(C > 0, mean / np.where(C > 0, C, 1), 1.0)
        var_rr = err2 - mean.real ** 2
        var_ii = eii2 - mean.imag ** 2
        cov_ri = eri - mean.real * mean.imag
        var_proj = u.real ** 2 * var_rr + u.imag ** 2 * var_ii + 2 * u.real * u.imag * cov_ri
        se = np.sqrt(np.maximum(var_proj, 0.0) * M / max(M - 1, 1) / M)
    A = fsum_c([s[4] for s in stats]) / M if correlator_times.size else np.empty(0, dtype=complex)
    if correlator_times.size and not deterministic:
        a2 = fsum_r([s[5] for s in stats]) / M
        A_se = np.sqrt(np.maximum(a2 - np.abs(A) ** 2, 0.0) / max(M - 1, 1))
    else:
        A_se = np.zeros(correlator_times.size)
    block_sums = np.concatenate([s[6] for s in stats])
    block_sizes = np.concatenate([s[7] for s in stats])
    return EnsembleResult(record_times, C, se, np.angle(mean), correlator_times, A, A_se,
                          block_sums / block_sizes[:, None], block_sizes)


def coherence_curve(params: ResonatorQubitParams, drive: DriveSpec, schedule: CpmgSchedule,
                    config: TrajectoryConfig, n_values: Sequence[int] | None = None,
                    return_ensemble: bool = False):
    """Coherence C(N dt) for each N in ``n_values`` from one ensemble.

    A sequence with N pulses is the prefix of the one with ``max(n_values)``
    pulses, so all N share the same trajectories.  ``config.pulse_times`` is
    replaced by the schedule's pulse centres.
    """
    if schedule.pulse_duration != 0:
        raise ConfigurationError("the trajectory route models instantaneous pulses only")
    n_values = np.arange(1, schedule.n_pulses + 1) if n_values is None else np.asarray(sorted(n_values))
    if n_values.min() < 1 or n_values.max() > schedule.n_pulses:
        raise ConfigurationError("n_values must lie in 1..schedule.n_pulses")
    cfg = config.with_pulses(schedule.pulse_centers())
    cfg.validate_step(params, schedule.dt)
    times = n_values * schedule.dt
    ens = run_ensemble(params, drive, cfg, times)
    trace = CoherenceTrace(times, ens.coherence, ens.std_error, Route.TRAJECTORY,
                           metadata={"seed": config.seed, "ensemble_size": config.ensemble_size,
                                     "time_step": cfg.time_step, "dt": schedule.dt,
                                     "n_values": [int(n) for n in n_values],
                                     "kappa": params.kappa})
    return (trace, ens) if return_ensemble else trace


# --------------------------------------------------------------------------
# rate extraction
# --------------------------------------------------------------------------

class RateEstimate(NamedTuple):
    gamma: float
    sigma: float


def _loglinear_fit(t, c, se, weighted):
    y = np.log(c)
    X = np.column_stack([np.ones_like(t), t])
    if weighted:
        sig = se / c
        W = 1.0 / sig ** 2
    else:
        W = np.ones_like(t)
    XtW = X.T * W
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    resid = y - X @ beta
    if not weighted:
        dof = max(len(t) - 2, 1)
        cov = cov * float(resid @ resid) / dof
    return beta, cov


def extract_rate(trace: CoherenceTrace, t_min: float | None = None, kappa: float | None = None) -> RateEstimate:
    """Dephasing rate from a weighted straight-line fit of ln C vs t_cpmg.

    Points with t < ``t_min`` (default 4/kappa, with kappa taken from the
    argument or ``trace.metadata``) and non-positive coherences are dropped.
    Points are weighted by their standard errors when all are positive;
    otherwise unit weights with a residual-scaled covariance are used.
    The returned rate is minus the fitted slope.
    """
    if t_min is None:
        kappa = kappa if kappa is not None else trace.metadata.get("kappa")
        t_min = 4.0 / kappa if kappa else 0.0
    t, c, se = trace.t_cpmg, trace.coherence, trace.std_err
    bad = c <= 0
    if np.any(bad):
        log.warning("dropping %d non-positive coherence points", int(bad.sum()))
    use = (t >= t_min * (1 - 1e-9)) & ~bad
    if use.sum() < 3:
        raise InsufficientDataError(f"need >= 3 points with t >= {t_min:.3g} s, have {int(use.sum())}")
    t, c, se = t[use], c[use], se[use]
    weighted = bool(np.all(se > 0))
    beta, cov = _loglinear_fit(t, c, se, weighted)
    return RateEstimate(float(-beta[1]), float(math.sqrt(max(cov[1, 1], 0.0))))


def jackknife_rate(ens: EnsembleResult, t_min: float) -> RateEstimate:
    """Rate with a delete-one-block jackknife error.

    All record times share the same trajectories, so per-point errors are
    correlated and the straight-line covariance understates the slope
    error; resampling whole blocks accounts for that.
    """
    t = ens.record_times
    use = t >= t_min * (1 - 1e-9)
    if use.sum() < 3:
        raise InsufficientDataError("need >= 3 points past t_min")
    t = t[use]
    sizes = ens.chunk_sizes.astype(float)
    sums = ens.chunk_means[:, use] * sizes[:, None]
    total = sums.sum(axis=0)
    M = sizes.sum()

    def rate(mean):
        c = np.abs(mean)
        beta, _ = _loglinear_fit(t, c, np.zeros_like(c), False)
        return -beta[1]

    full = rate(total / M)
    k = len(sizes)
    if k < 2:
        return RateEstimate(float(full), float("nan"))
    loo = np.array([rate((total - sums[i]) / (M - sizes[i])) for i in range(k)])
    var = (k - 1) / k * np.sum((loo - loo.mean()) ** 2)
    return RateEstimate(float(full), float(math.sqrt(var)))


def fit_window(drive: DriveSpec) -> tuple[float, float]:
    """Range of kappa t_cpmg used for rate fits.

    Thermal coherence is exponential from about 3/kappa on; with a coherent
    tone the transient lasts beyond 6/kappa (longer at large 2 chi/kappa),
    so the window starts later.
    """
    return (10.0, 30.0) if drive.F_dc != 0 else (4.0, 12.0)


def default_n_values(dt: float, kappa: float, t_min_kappa: float = 4.0, t_max_kappa: float = 12.0,
                     min_points: int = 4) -> np.ndarray:
    """Pulse numbers with kappa N dt spanning [t_min_kappa, t_max_kappa] (at least ``min_points``)."""
    x = kappa * dt
    n_lo = max(1, math.ceil(t_min_kappa / x * (1 - 1e-12)))
    n_hi = max(n_lo + min_points - 1, math.floor(t_max_kappa / x * (1 + 1e-12)))
    return np.arange(n_lo, n_hi + 1)


def simulate_rate(params: ResonatorQubitParams, drive: DriveSpec, dt: float,
                  config: TrajectoryConfig | None = None, n_values: Sequence[int] | None = None,
                  t_min: float | None = None, **config_kw):
    """Monte-Carlo CPMG rate at one interpulse period.

    Returns ``(RateEstimate, CoherenceTrace)``; the error is the block
    jackknife for noisy drives and zero for deterministic ones.
    """
    lo, hi = fit_window(drive)
    if n_values is None:
        n_values = default_n_values(dt, params.kappa, lo, hi)
    n_values = np.asarray(n_values)
    if config is None:
        config = cpmg_config(params, dt, int(n_values.max()), **config_kw)
    t_min = lo / params.kappa if t_min is None else t_min
    sched = CpmgSchedule(int(n_values.max()), dt)
    trace, ens = coherence_curve(params, drive, sched, config, n_values, return_ensemble=True)
    if drive.n_th == 0:
        est = extract_rate(trace, t_min)
    else:
        est = jackknife_rate(ens, t_min)
    return est, trace


def echo_curve(params: ResonatorQubitParams, drive: DriveSpec, dts: Sequence[float],
               ensemble_size: int = 10_000, seed: int = 0, per: int = 40) -> CoherenceTrace:
    """Single-pi-pulse (echo) coherence C(dt) for a list of periods.

    Each period is an independent ensemble with its own spawned seed.
    """
    dts = np.asarray(sorted(dts), dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(len(dts))
    C, se = [], []
    for dt, ss in zip(dts, seeds):
        h = aligned_time_step(dt, params, per)
        cfg = TrajectoryConfig(h, ensemble_size, int(ss.generate_state(1)[0]), (dt / 2,))
        ens = run_ensemble(params, drive, cfg, [dt])
        C.append(ens.coherence[0])
        se.append(ens.std_error[0])
    return CoherenceTrace(dts, np.array(C), np.array(se), Route.TRAJECTORY,
                          metadata={"seed": seed, "ensemble_size": ensemble_size,
                                    "kappa": params.kappa, "n_pulses": 1})
