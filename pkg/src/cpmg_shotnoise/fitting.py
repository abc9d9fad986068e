"""Estimation of photon populations from dephasing-rate curves.

A rate curve is modelled as the photon-induced CPMG rate plus a constant
pedestal from all other dephasing channels,

    Gamma_2(f_s) = Gamma_photon(dt = 1/(2 f_s), n) + pedestal,

and several curves taken at different populations are fitted jointly with
one shared pedestal.  Also here: the spin-echo power calibration, fits of
single coherence decays, and synthetic datasets for closed-loop checks.
"""
from __future__ import annotations

import enum
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from . import analytic
from .core import CoherenceTrace, ConfigurationError, RateCurve, ResonatorQubitParams, interpulse_period
from .trajectory import InsufficientDataError, extract_rate

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class FitError(RuntimeError):
    """Base class for fitting failures."""


class ConvergenceError(FitError):
    """The optimiser did not converge; ``best`` holds the best point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class RankDeficiencyError(FitError):
    """The data cannot separate the fit parameters (e.g. one f_s only)."""


class ModelKind(str, enum.Enum):
    THERMAL = "thermal"
    COHERENT = "coherent"
    COHERENT_DETUNED = "coherent_detuned"


@dataclass(frozen=True)
class FitModelSpec:
    """Which analytic rate to fit and how parameters are shared.

    For ``coherent_detuned`` the fitted population of each dataset is the
    on-resonance population 4|F|^2/kappa of the drive, with the detuning
    taken from ``fixed_params.delta_omega_d``.  ``ambient_thermal`` adds
    one thermal population shared by all datasets (coherent kinds only).
    """

    kind: ModelKind
    fixed_params: ResonatorQubitParams
    shared_pedestal: bool = True
    ambient_thermal: bool = False
    fixed_pedestal: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.ambient_thermal and self.kind is ModelKind.THERMAL:
            raise ConfigurationError("ambient_thermal applies to coherent models only")
        if self.kind is ModelKind.COHERENT and self.fixed_params.delta_omega_d != 0:
            raise ConfigurationError("use kind='coherent_detuned' for a detuned drive")

    def unit_rate(self, f_s) -> np.ndarray:
        """Photon-induced rate per unit population at each CPMG frequency."""
        dt = interpulse_period(np.asarray(f_s, dtype=float))
        p = self.fixed_params
        if self.kind is ModelKind.THERMAL:
            return np.asarray(analytic.gamma_thermal(dt, 1.0, p), dtype=float)
        if self.kind is ModelKind.COHERENT:
            return np.asarray(analytic.gamma_coherent(dt, 1.0, p), dtype=float)
        F = math.sqrt(p.kappa / 4)  # on-resonance population 1
        return np.asarray(analytic.gamma_coherent_detuned(dt, F, p.delta_omega_d, p), dtype=float)

    def rate(self, f_s, population: float, pedestal: float = 0.0, ambient: float = 0.0):
        out = population * self.unit_rate(f_s) + pedestal
        if ambient:
            dt = interpulse_period(np.asarray(f_s, dtype=float))
            out = out + np.asarray(analytic.gamma_thermal(dt, ambient, self.fixed_params.with_detuning(0.0)))
        return out


@dataclass
class Estimate:
    value: float
    sigma: float


@dataclass
class FitReport:
    """Result of :func:`fit_rate_curves`.

    ``pedestal`` is one estimate when shared, otherwise one per dataset.
    ``residuals`` are data minus model, per dataset, in 1/s.
    """

    populations: list
    pedestal: object
    residuals: list
    chi_square_reduced: float
    convergence: dict
    ambient_population: Estimate | None = None
    model: str = ""
    labels: list = field(default_factory=list)
    covariance: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        d["residuals"] = [list(map(float, r)) for r in self.residuals]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        ped = d["pedestal"]
        ped = [Estimate(**p) for p in ped] if isinstance(ped, list) else Estimate(**ped)
        amb = d.get("ambient_population")
        return cls([Estimate(**p) for p in d["populations"]], ped,
                   [np.asarray(r) for r in d["residuals"]], d["chi_square_reduced"], d["convergence"],
                   Estimate(**amb) if amb else None, d.get("model", ""), d.get("labels", []),
                   d.get("covariance", []), d.get("schema_version", SCHEMA_VERSION))

    def population_values(self) -> np.ndarray:
        return np.array([p.value for p in self.populations])

    def population_sigmas(self) -> np.ndarray:
        return np.array([p.sigma for p in self.populations])


# --------------------------------------------------------------------------
# rate-curve fits
# --------------------------------------------------------------------------

class _Layout:
    """Parameter vector: populations, then ambient, then pedestal(s)."""

    def __init__(self, n_sets: int, model: FitModelSpec):
        self.n_sets = n_sets
        self.ambient = n_sets if model.ambient_thermal else None
        start = n_sets + (1 if model.ambient_thermal else 0)
        if model.fixed_pedestal is not None:
            self.pedestal = [None] * n_sets
            self.size = start
        elif model.shared_pedestal:
            self.pedestal = [start] * n_sets
            self.size = start + 1
        else:
            self.pedestal = list(range(start, start + n_sets))
            self.size = start + n_sets


def _central_jacobian(fun, x, typical, rel_step: float = 1e-6) -> np.ndarray:
    cols = []
    for k in range(x.size):
        h = rel_step * max(abs(x[k]), typical[k])
        e = np.zeros_like(x)
        e[k] = h
        cols.append((fun(x + e) - fun(x - e)) / (2 * h))
    return np.column_stack(cols)


def _workers() -> int:
    return max(1, int(os.environ.get("CPMG_SHOTNOISE_THREADS", "1")))


def fit_rate_curves(datasets: Sequence[RateCurve], model: FitModelSpec, *,
                    weighted: bool | None = None, n_starts: int = 5) -> FitReport:
    """Joint weighted least-squares fit of rate curves.

    Populations are bounded below by zero.  Uncertainties come from the
    Gauss-Newton covariance (J^T J)^-1 scaled by the reduced chi-square.
    ``weighted`` defaults to inverse-variance weights when every dataset
    carries sigmas, unit weights otherwise.
    """
    datasets = list(datasets)
    if not datasets:
        raise ConfigurationError("at least one dataset is required")
    for d in datasets:
        if len(d) < 3:
            raise InsufficientDataError(f"dataset {d.label!r} has fewer than 3 points")
    if weighted is None:
        weighted = all(d.has_sigma for d in datasets)
    if weighted and not all(d.has_sigma for d in datasets):
        raise ConfigurationError("weighted fit needs positive sigma on every point")
    layout = _Layout(len(datasets), model)
    units = [model.unit_rate(d.f_s) for d in datasets]
    if model.ambient_thermal:
        amb_units = [np.asarray(analytic.gamma_thermal(d.dt, 1.0, model.fixed_params.with_detuning(0.0)))
                     for d in datasets]
    weights = [1.0 / d.sigma_gamma2 if weighted else np.ones(len(d)) for d in datasets]
    fixed_ped = model.fixed_pedestal

    def predict(x, i):
        m = x[i] * units[i]
        if layout.ambient is not None:
            m = m + x[layout.ambient] * amb_units[i]
        j = layout.pedestal[i]
        return m + (fixed_ped if j is None else x[j])

    def resid(x):
        return np.concatenate([(predict(x, i) - d.gamma2) * w
                               for i, (d, w) in enumerate(zip(datasets, weights))])

    n_pts = sum(len(d) for d in datasets)
    if n_pts <= layout.size:
        raise InsufficientDataError(f"{n_pts} points cannot determine {layout.size} parameters")
    lower = np.full(layout.size, -np.inf)
    lower[:layout.n_sets] = 0.0
    if layout.ambient is not None:
        lower[layout.ambient] = 0.0
    ped_guess = float(min(np.min(d.gamma2) for d in datasets))
    typical = np.full(layout.size, max(abs(ped_guess), 1.0))
    typical[:layout.n_sets] = 1e-3
    if layout.ambient is not None:
        typical[layout.ambient] = 1e-3
    starts = []
    for seed in np.logspace(-6, -2, max(5, n_starts)):
        x0 = np.zeros(layout.size)
        x0[:layout.n_sets] = seed
        if layout.ambient is not None:
            x0[layout.ambient] = seed / 10
        for j in set(p for p in layout.pedestal if p is not None):
            x0[j] = ped_guess
        starts.append(x0)

    def solve(x0):
        return optimize.least_squares(resid, x0, bounds=(lower, np.inf), method="trf",
                                      jac="3-point", diff_step=1e-6, x_scale="jac",
                                      ftol=1e-15, xtol=1e-15, gtol=1e-15, max_nfev=2000)

    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(solve, starts))
    else:
        results = [solve(x0) for x0 in starts]
    # best objective; ties resolved by the lowest start index
    best_i = min(range(len(results)), key=lambda i: (2 * results[i].cost, i))
    res = results[best_i]
    if res.status <= 0:
        raise ConvergenceError(f"least squares did not converge: {res.message}", best=res.x)

    # the optimiser's Jacobian is modified at active bounds; recompute it plainly
    J = _central_jacobian(resid, res.x, typical)
    # populations and rates differ by ~8 orders of magnitude; judge rank on unit columns
    norms = np.linalg.norm(J, axis=0)
    if np.any(norms == 0):
        raise RankDeficiencyError("a fit parameter does not influence the model")
    Js = J / norms
    s = np.linalg.svd(Js, compute_uv=False)
    if s[-1] <= s[0] * 1e-8:
        raise RankDeficiencyError("fit parameters are not identifiable from these data "
                                  "(are all points at a single f_s?)")
    dof = n_pts - layout.size
    chi2_red = 2 * res.cost / dof
    cov = np.linalg.inv(Js.T @ Js) / np.outer(norms, norms) * chi2_red
    sig = np.sqrt(np.clip(np.diag(cov), 0, None))
    x = res.x
    pops = [Estimate(float(x[i]), float(sig[i])) for i in range(layout.n_sets)]
    if fixed_ped is not None:
        ped = Estimate(float(fixed_ped), 0.0)
    elif model.shared_pedestal:
        j = layout.pedestal[0]
        ped = Estimate(float(x[j]), float(sig[j]))
    else:
        ped = [Estimate(float(x[j]), float(sig[j])) for j in layout.pedestal]
    amb = None if layout.ambient is None else Estimate(float(x[layout.ambient]), float(sig[layout.ambient]))
    residuals = [d.gamma2 - predict(x, i) for i, d in enumerate(datasets)]
    grad = J.T @ res.fun
    return FitReport(pops, ped, residuals, float(chi2_red),
                     {"iterations": int(res.nfev), "gradient_norm": float(np.linalg.norm(grad, np.inf)),
                      "status": int(res.status), "start_index": int(best_i)},
                     amb, model.kind.value, [d.label for d in datasets], cov.tolist())


def bootstrap(datasets: Sequence[RateCurve], model: FitModelSpec, n_resamples: int = 500,
              seed: int = 0) -> np.ndarray:
    """Residual-bootstrap standard deviations of the fitted parameters.

    Returns an array ordered as populations, then ambient (if any), then
    pedestal(s).  Resamples that fail to fit are skipped.
    """
    base = fit_rate_curves(datasets, model)
    rng = np.random.default_rng(seed)
    fitted = [d.gamma2 - r for d, r in zip(datasets, base.residuals)]
    scaled = [r / (d.sigma_gamma2 if d.has_sigma else 1.0) for d, r in zip(datasets, base.residuals)]
    draws = []
    for _ in range(n_resamples):
        new = []
        for d, f, z in zip(datasets, fitted, scaled):
            pick = rng.choice(z, size=len(z), replace=True)
            noise = pick * (d.sigma_gamma2 if d.has_sigma else 1.0)
            new.append(RateCurve(d.f_s, f + noise, d.sigma_gamma2 if d.has_sigma else None, d.label))
        try:
            rep = fit_rate_curves(new, model)
        except FitError:
            continue
        row = list(rep.population_values())
        if rep.ambient_population is not None:
            row.append(rep.ambient_population.value)
        ped = rep.pedestal if isinstance(rep.pedestal, list) else [rep.pedestal]
        if model.fixed_pedestal is None:
            row += [p.value for p in ped]
        draws.append(row)
    if len(draws) < 2:
        raise FitError("too few successful bootstrap resamples")
    return np.std(np.asarray(draws), axis=0, ddof=1)


def synthesize_rate_curve(model: FitModelSpec, population: float, pedestal: float, f_s,
                          sigma=0.0, seed: int = 0, *, rel_sigma: float = 0.0,
                          ambient: float = 0.0, label: str = "") -> RateCurve:
    """Model rates on ``f_s`` plus seeded Gaussian noise.

    The noise standard deviation per point is ``sigma`` (scalar or array,
    1/s) combined in quadrature with ``rel_sigma`` times the model rate.
    """
    f_s = np.atleast_1d(np.asarray(f_s, dtype=float))
    if f_s.size == 0:
        raise ConfigurationError("f_s grid is empty")
    clean = model.rate(f_s, population, pedestal, ambient)
    sd = np.sqrt(np.broadcast_to(np.asarray(sigma, dtype=float), f_s.shape) ** 2 + (rel_sigma * clean) ** 2)
    rng = np.random.default_rng(seed)
    noisy = clean + sd * rng.standard_normal(f_s.size)
    return RateCurve(f_s, noisy, sd if np.all(sd > 0) else None, label,
                     metadata={"truth": {"population": population, "pedestal": pedestal,
                                         "ambient": ambient, "model": model.kind.value},
                               "seed": seed})


# --------------------------------------------------------------------------
# coherence-decay fits
# --------------------------------------------------------------------------

class DecayForm(str, enum.Enum):
    EXPONENTIAL = "exponential"
    EXP_TIMES_GAUSSIAN = "exp_times_gaussian"


@dataclass
class DecayFit:
    """C(t) = a exp(-gamma t - (t/T_g)^2); ``t_gauss`` is inf for no Gaussian part."""

    amplitude: Estimate
    gamma: Estimate
    t_gauss: Estimate | None = None
    gauss_coefficient: Estimate | None = None


def fit_coherence_decay(trace: CoherenceTrace, form: DecayForm | str = DecayForm.EXPONENTIAL,
                        t_min: float = 0.0) -> DecayFit:
    """Fit ln C with a straight line or a line plus a t^2 term.

    The exponential form is the same estimator as :func:`extract_rate`.
    Points are weighted by their standard errors when all are positive.
    """
    form = DecayForm(form)
    t, c, se = trace.t_cpmg, trace.coherence, trace.std_err
    keep = (t >= t_min * (1 - 1e-9)) & (c > 0)
    if np.any(c <= 0):
        log.warning("dropping %d non-positive coherence points", int(np.sum(c <= 0)))
    need = 3 if form is DecayForm.EXPONENTIAL else 4
    if keep.sum() < need:
        raise InsufficientDataError(f"{form.value} fit needs >= {need} usable points")
    t, c, se = t[keep], c[keep], se[keep]
    cols = [np.ones_like(t), -t] + ([-t ** 2] if form is DecayForm.EXP_TIMES_GAUSSIAN else [])
    X = np.column_stack(cols)
    y = np.log(c)
    weighted = bool(np.all(se > 0))
    w = (c / se) ** 2 if weighted else np.ones_like(t)
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    beta = cov @ (XtW @ y)
    if not weighted:
        r = y - X @ beta
        dof = len(t) - X.shape[1]
        cov = cov * (float(r @ r) / dof if dof > 0 else 0.0)
    sd = np.sqrt(np.clip(np.diag(cov), 0, None))
    a = math.exp(beta[0])
    out = DecayFit(Estimate(a, a * sd[0]), Estimate(float(beta[1]), float(sd[1])))
    if form is DecayForm.EXP_TIMES_GAUSSIAN:
        q, sq = float(beta[2]), float(sd[2])
        out.gauss_coefficient = Estimate(q, sq)
        if q > 0:
            out.t_gauss = Estimate(q ** -0.5, 0.5 * q ** -1.5 * sq)
        else:
            out.t_gauss = Estimate(math.inf, math.inf)
    return out


# --------------------------------------------------------------------------
# spin-echo power calibration
# --------------------------------------------------------------------------

@dataclass
class CalibrationResult:
    """Population = slope * power + intercept, with standard errors."""

    slope: float
    intercept: float
    slope_sigma: float
    intercept_sigma: float
    kind: str = "thermal"
    populations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = SCHEMA_VERSION
        return d


def population_from_lowfreq_rate(gamma, kind: ModelKind | str, params: ResonatorQubitParams):
    """Invert the low-frequency (long-dt) rate for the population."""
    kind = ModelKind(kind)
    unit = analytic.gamma_lowfreq_thermal(1.0, params)
    if kind is not ModelKind.THERMAL:
        unit = analytic.gamma_lowfreq_coherent(1.0, params)
    return np.asarray(gamma, dtype=float) / unit


def calibrate_population_vs_power(echo_rates, kind: ModelKind | str,
                                  params: ResonatorQubitParams) -> CalibrationResult:
    """Straight-line fit of the population implied by each echo rate vs drive power.

    ``echo_rates`` is a sequence of (power, gamma) pairs, with gamma the
    photon-induced long-time echo rate in 1/s.  Standard errors are NaN
    when there are only two points.
    """
    arr = np.asarray(echo_rates, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigurationError("echo_rates must be (power, gamma) pairs")
    power, gamma = arr[:, 0], arr[:, 1]
    if np.unique(power).size < 2:
        raise RankDeficiencyError("calibration needs at least two distinct powers")
    n = population_from_lowfreq_rate(gamma, kind, params)
    X = np.column_stack([power, np.ones_like(power)])
    coef, *_ = np.linalg.lstsq(X, n, rcond=None)
    dof = len(power) - 2
    if dof > 0:
        r = n - X @ coef
        cov = np.linalg.inv(X.T @ X) * float(r @ r) / dof
        s_slope, s_int = math.sqrt(max(cov[0, 0], 0)), math.sqrt(max(cov[1, 1], 0))
    else:
        s_slope = s_int = math.nan
    return CalibrationResult(float(coef[0]), float(coef[1]), s_slope, s_int,
                             ModelKind(kind).value, n.tolist())
