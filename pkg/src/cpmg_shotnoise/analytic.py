r"""Closed-form photon shot-noise dephasing rates under CPMG.

Exact (non-Gaussian) rates for thermal and coherent intracavity photons
with arbitrary :math:`2\chi/\kappa`, the moderate-population thermal rate
obtained from a Gaussian Wigner ansatz, and the Gaussian filter-function
baseline they are compared against.

Every function takes the interpulse period ``dt`` in seconds and a
:class:`~cpmg_shotnoise.core.ResonatorQubitParams`; rates are returned in 1/s.
Functions accept scalar or array ``dt`` unless stated otherwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np
from scipy import integrate, optimize

from .core import DomainError, ResonatorQubitParams, coherent_population


class SolverError(RuntimeError):
    """Iterative solver failed to converge."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual


# --------------------------------------------------------------------------
# overflow-safe hyperbolic helpers
# --------------------------------------------------------------------------

def _inv_sinh(x):
    """1/sinh(x) for x > 0 without overflow."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.minimum(x, 745.0))
    small = x < 30.0
    with np.errstate(divide="ignore", over="ignore"):
        direct = 1.0 / np.sinh(np.where(small, x, 1.0))
    return np.where(small, direct, 2.0 * e / (1.0 - e * e))


def _one_minus_tanhc(u):
    """1 - tanh(u)/u, accurate for small u."""
    u = np.asarray(u, dtype=float)
    tiny = u < 1e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = 1.0 - np.tanh(u) / u
    series = u * u / 3.0 - 2.0 * u ** 4 / 15.0
    return np.where(tiny, series, direct)


def _check_dt(dt):
    dt = np.asarray(dt, dtype=float)
    if np.any(~(dt > 0)):
        raise DomainError("interpulse period dt must be positive")
    return dt


def _scalar_or_array(x, like):
    return float(x) if np.ndim(like) == 0 else x


# --------------------------------------------------------------------------
# short-period evaluation in extended precision
# --------------------------------------------------------------------------
#
# All reduction factors are 1 - (ratio that tends to 1) and vanish like
# (kappa dt)^2 for short periods.  The thermal and resonant forms lose about
# two digits per decade of kappa*dt, the detuned form about four, so below
# a per-form threshold the same expressions are re-evaluated with mpmath.

_MP_BELOW_SIMPLE = 0.05
_MP_BELOW_DETUNED = 2.0


def _thermal_one_minus_r(dt, k, chi, d):
    x, y, r = k * dt, 2 * chi * dt, 2 * chi / k
    return (mpmath.tanh(x / 2) + 2 * mpmath.sin(y / 2) ** 2 / mpmath.sinh(x)) / (x / 2 * (1 + r * r))


def _coherent_one_minus_r(dt, k, chi, d):
    x, y, r = k * dt, chi * dt, 2 * chi / k
    inv_sh = 1 / mpmath.sinh(x / 2)
    ratio = (mpmath.tanh(x / 4) + 2 * mpmath.sin(y / 2) ** 2 * inv_sh) / (x / 4 * (1 + r * r))
    return ratio * (1 + (chi / k) * mpmath.sin(y) * inv_sh - 2 * (chi / k) ** 2)


def _mp_reduction(one_minus_r, dt: float, k: float, chi: float, d: float) -> float:
    # about four digits are lost per decade of kappa*dt below one (detuned form)
    dps = 30 + int(4 * max(0.0, -math.log10(k * dt)))
    with mpmath.workdps(dps):
        args = [mpmath.mpf(v) for v in (dt, k, chi, d)]
        return float(1 - one_minus_r(*args))


def _patch_short_periods(out, dt, params: ResonatorQubitParams, one_minus_r, d: float = 0.0,
                         below: float = _MP_BELOW_SIMPLE):
    """Replace entries with kappa*dt < ``below`` by their mpmath evaluation."""
    small = np.asarray(params.kappa * dt < below)
    if not small.any():
        return out
    out = np.array(out, dtype=float, ndmin=1)
    dts = np.broadcast_to(np.asarray(dt, dtype=float), out.shape)
    for i in np.flatnonzero(np.broadcast_to(small, out.shape)):
        out.flat[i] = _mp_reduction(one_minus_r, float(dts.flat[i]), params.kappa, params.chi, d)
    return out.reshape(np.shape(dt))


# --------------------------------------------------------------------------
# thermal photons, small population
# --------------------------------------------------------------------------

def gamma_lowfreq_thermal(n_th, params: ResonatorQubitParams):
    """Low-frequency thermal rate 4 chi^2 n / (kappa [1 + (2chi/kappa)^2])."""
    k, r = params.kappa, params.ratio
    return 4.0 * params.chi ** 2 * np.asarray(n_th, dtype=float) / (k * (1.0 + r * r))


def reduction_factor_thermal(dt, params: ResonatorQubitParams):
    r"""CPMG reduction factor of the thermal rate, between 0 and 1.

    Uses :math:`\cosh x - \cos y = 2\sinh^2(x/2) + 2\sin^2(y/2)` so that
    neither the short-period cancellation nor the long-period overflow of
    the textbook form bites.
    """
    dt = _check_dt(dt)
    x = params.kappa * dt
    r = params.ratio
    y = 2.0 * params.chi * dt
    ratio = (np.tanh(x / 2) + 2.0 * np.sin(y / 2) ** 2 * _inv_sinh(x)) / (0.5 * x * (1.0 + r * r))
    out = _patch_short_periods(1.0 - ratio, dt, params, _thermal_one_minus_r)
    return _scalar_or_array(out, dt)


def gamma_thermal(dt, n_th, params: ResonatorQubitParams):
    """Thermal-photon CPMG dephasing rate to leading order in ``n_th``."""
    return _scalar_or_array(
        gamma_lowfreq_thermal(n_th, params) * reduction_factor_thermal(dt, params),
        np.broadcast(np.asarray(dt), np.asarray(n_th)))


def gamma_lowfreq_thermal_exact(n_th, params: ResonatorQubitParams):
    r"""Ramsey-limit thermal rate valid for any population.

    :math:`(\kappa/2)\,\mathrm{Re}[\sqrt{(1-2i\chi/\kappa)^2 - 8i\chi\bar n/\kappa} - 1]`,
    principal root.  ``sqrt(z) - 1`` is evaluated as ``(z-1)/(sqrt(z)+1)``.
    """
    n = np.asarray(n_th, dtype=float)
    if np.any(n < 0):
        raise DomainError("n_th must be nonnegative")
    r = params.ratio
    zm1 = -2j * r - r * r - 4j * r * n
    root = np.sqrt(1.0 + zm1 + 0j)
    out = 0.5 * params.kappa * np.real(zm1 / (root + 1.0))
    return _scalar_or_array(out, n)


# --------------------------------------------------------------------------
# quasi-steady correlator <alpha_0 alpha_1^*>
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyCorrelator:
    """Quasi-steady correlator on one interpulse interval (chi-tilde = +chi).

    Callable on the elapsed time ``s = t - t_p`` in ``[0, dt]``.
    """

    A_tp: complex
    dt: float
    kappa_minus: complex
    forcing: complex  # kappa n_th / kappa_minus

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.exp(-self.kappa_minus * s) * (self.A_tp - self.forcing) + self.forcing

    def integral(self) -> complex:
        """Integral of A over the interval."""
        km, dt = self.kappa_minus, self.dt
        return (self.A_tp - self.forcing) * (-np.expm1(-km * dt)) / km + self.forcing * dt


def correlator_steady_state(dt: float, n_th: float, params: ResonatorQubitParams):
    """Quasi-steady solution of dA/dt = -(kappa - 2i chi) A + kappa n_th.

    Returns ``(A_tp, A_of_s)`` where ``A_of_s`` is a :class:`SteadyCorrelator`
    satisfying the role-exchange condition A(t_p + dt) = conj(A(t_p)).
    """
    dt = float(_check_dt(dt))
    k, chi = params.kappa, params.chi
    km = k - 2j * chi
    c = k * n_th / km
    # sinh(k dt) exp(-k dt) = (1 - exp(-2 k dt)) / 2
    denom = -0.5 * math.expm1(-2 * k * dt)
    one_minus = -np.expm1(-km * dt)
    A_tp = c - 1j * k * n_th * (1.0 / km).imag * np.conj(one_minus) / denom
    corr = SteadyCorrelator(complex(A_tp), dt, km, complex(c))
    return corr.A_tp, corr


def gamma_from_correlator(corr: SteadyCorrelator, chi: float) -> float:
    """Rate -Re[2i chi int A dt] / dt over one quasi-steady interval."""
    return float(-np.real(2j * chi * corr.integral()) / corr.dt)


# --------------------------------------------------------------------------
# thermal photons, moderate population (Wigner ansatz)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ModerateThermalSolution:
    V_tp: complex
    vartheta: complex
    zeta: complex
    gamma: float
    residual: float = 0.0
    iterations: int = 0


def _vartheta(n_th: float, params: ResonatorQubitParams) -> complex:
    k, chi = params.kappa, params.chi
    th = 0.5 * np.sqrt(complex(k * k - 4 * chi * chi, -4 * chi * k * (2 * n_th + 1)))
    return -th if th.real < 0 else th


def _tanh_c(z: complex) -> complex:
    e = np.exp(-2 * z)
    return (1 - e) / (1 + e)


def _v_after_interval(V_tp, vartheta, dt, params):
    k, chi = params.kappa, params.chi
    zeta = (k - 4j * chi * V_tp) / (2 * vartheta)
    T = _tanh_c(vartheta * dt)
    return 1j * vartheta / (2 * chi) * (T + zeta) / (1 + zeta * T) - k * 1j / (4 * chi)


def _moderate_gamma(vartheta, zeta, dt, n_th, params):
    # ln[cosh(th dt) + zeta sinh(th dt)] = th dt + ln[(1+zeta)/2 + (1-zeta)/2 e^{-2 th dt}],
    # and Re(th) - kappa/2 is the exact low-frequency rate
    tail = 0.5 * (1 + zeta) + 0.5 * (1 - zeta) * np.exp(-2 * vartheta * dt)
    if tail == 0:
        raise SolverError("logarithm argument vanished in the moderate-population rate")
    return float(gamma_lowfreq_thermal_exact(n_th, params) + math.log(abs(tail)) / dt)


def gamma_thermal_moderate(dt: float, n_th: float, params: ResonatorQubitParams, *,
                           tol: float = 1e-13, max_iter: int = 400,
                           damping: float = 0.5) -> ModerateThermalSolution:
    """Thermal CPMG rate for moderate populations from the Wigner ansatz.

    The Wigner variance at a pulse time, V(t_p), solves
    conj(V(t_p)) = V(t_p + dt).  It is found by damped fixed-point iteration
    seeded with 1/2 + A(t_p) (the small-population correlator), with a 2-D
    Newton-type fallback on (Re V, Im V).
    """
    dt = float(_check_dt(dt))
    if n_th < 0:
        raise DomainError("n_th must be nonnegative")
    k, chi = params.kappa, params.chi
    if chi == 0:
        return ModerateThermalSolution(complex(n_th + 0.5), complex(k / 2), complex(1.0), 0.0)

    vartheta = _vartheta(n_th, params)
    assert vartheta.real > 0

    def resid(V):
        return np.conj(V) - _v_after_interval(V, vartheta, dt, params)

    def rel(V):
        return abs(resid(V)) / max(abs(V), 1e-300)

    A_tp, _ = correlator_steady_state(dt, n_th, params)
    V = complex(0.5 + A_tp)
    it = 0
    for it in range(1, max_iter + 1):
        V_new = (1 - damping) * V + damping * np.conj(_v_after_interval(V, vartheta, dt, params))
        V = complex(V_new)
        if rel(V) < tol:
            break
    if not rel(V) < tol:
        def f(x):
            r_ = resid(complex(x[0], x[1]))
            return [r_.real, r_.imag]
        sol = optimize.root(f, [V.real, V.imag], method="hybr", options={"xtol": 1e-15})
        V = complex(sol.x[0], sol.x[1])
        it += int(sol.nfev)
        if not rel(V) < max(tol, 1e-10):
            raise SolverError("moderate-population fixed point did not converge", rel(V))
    zeta = (k - 4j * chi * V) / (2 * vartheta)
    gamma = _moderate_gamma(vartheta, zeta, dt, n_th, params)
    return ModerateThermalSolution(V, complex(vartheta), complex(zeta), gamma, rel(V), it)


# --------------------------------------------------------------------------
# coherent photons
# --------------------------------------------------------------------------

def gamma_lowfreq_coherent(n_coh, params: ResonatorQubitParams):
    """Low-frequency coherent rate 8 chi^2 n / (kappa [1 + (2chi/kappa)^2])."""
    return 2.0 * gamma_lowfreq_thermal(n_coh, params)


def reduction_factor_coherent(dt, params: ResonatorQubitParams):
    """CPMG reduction factor of the resonant coherent rate (may exceed 1)."""
    dt = _check_dt(dt)
    k, chi, r = params.kappa, params.chi, params.ratio
    x = k * dt
    y = chi * dt
    inv_sh = _inv_sinh(x / 2)
    ratio = (np.tanh(x / 4) + 2.0 * np.sin(y / 2) ** 2 * inv_sh) / (0.25 * x * (1.0 + r * r))
    bracket = 1.0 + (chi / k) * np.sin(y) * inv_sh - 2.0 * (chi / k) ** 2
    out = _patch_short_periods(1.0 - ratio * bracket, dt, params, _coherent_one_minus_r)
    return _scalar_or_array(out, dt)


def gamma_coherent(dt, n_coh, params: ResonatorQubitParams):
    """Resonant coherent-photon CPMG dephasing rate.

    Meaningful while the result is small compared with 1/dt and kappa.
    """
    if params.delta_omega_d != 0:
        raise DomainError("gamma_coherent assumes a resonant drive; use gamma_coherent_detuned")
    return _scalar_or_array(
        gamma_lowfreq_coherent(n_coh, params) * reduction_factor_coherent(dt, params),
        np.broadcast(np.asarray(dt), np.asarray(n_coh)))


def _gamma_q(params, delta):
    k, chi = params.kappa, params.chi
    return k / 2 - 1j * (delta + chi), k / 2 - 1j * (delta - chi)


def _detuned_one_minus_r(dt, k, chi, d, lib=mpmath):
    g0 = k / 2 - 1j * (d + chi)
    g1 = k / 2 - 1j * (d - chi)
    g0c, g1c = lib.conj(g0), lib.conj(g1)

    def om(g):
        return -lib.expm1(-g * dt)

    B = lib.re(om(g0) * om(g1) * om(g0c + g1c) / (g1 * dt)
               + om(g0c) * om(g1c) * om(g0 + g1) / (g0c * dt)
               - om(g0) * om(g1c) * om(g0c + g1) / ((g0c + g1) * dt))
    x = k * dt
    # cosh(x/2) sinh(x/2) e^{-x} and sinh(x/2) e^{-x} in decaying form
    e = lib.exp(-x)
    ch_sh = 0.25 * (1 - e * e)
    sh = 0.5 * (lib.exp(-x / 2) - lib.exp(-1.5 * x))
    num = B - 4 / x * (ch_sh - lib.cos(chi * dt) * lib.cos(d * dt) * sh)
    den = 0.5 * (1 + e * e) - lib.cos(2 * d * dt) * e
    return num / den


class _NumpyOps:
    conj = staticmethod(np.conj)
    re = staticmethod(np.real)
    expm1 = staticmethod(np.expm1)
    exp = staticmethod(np.exp)
    cos = staticmethod(np.cos)


def reduction_factor_coherent_detuned(dt, delta_omega_d: float, params: ResonatorQubitParams):
    """CPMG reduction factor for a coherent drive detuned by ``delta_omega_d``."""
    dt = _check_dt(dt)
    k, chi, d = params.kappa, params.chi, delta_omega_d
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        out = 1.0 - _detuned_one_minus_r(dt, k, chi, d, _NumpyOps)
    out = _patch_short_periods(out, dt, params, _detuned_one_minus_r, d, _MP_BELOW_DETUNED)
    return _scalar_or_array(out, dt)


def gamma_coherent_detuned(dt, F_dc: complex, delta_omega_d: float, params: ResonatorQubitParams):
    """Coherent-photon CPMG rate for arbitrary drive detuning.

    ``params.delta_omega_d`` is ignored in favour of the explicit argument.
    """
    p = params.with_detuning(delta_omega_d)
    if F_dc == 0 or params.chi == 0:
        return _scalar_or_array(np.zeros_like(np.asarray(dt, dtype=float)), np.asarray(dt))
    if delta_omega_d == 0:
        n = coherent_population(p, F_dc)
        pref = 8 * params.chi ** 2 * n * n / (params.kappa * (4 * abs(F_dc) ** 2 / params.kappa))
    else:
        n0, n1, n_max = coherent_population(p, F_dc)
        pref = 8 * params.chi ** 2 * n0 * n1 / (params.kappa * n_max)
    return pref * reduction_factor_coherent_detuned(dt, delta_omega_d, params)


# --------------------------------------------------------------------------
# filter functions (Gaussian approximation)
# --------------------------------------------------------------------------

class SequenceKind(str, enum.Enum):
    CPMG_EVEN = "cpmg_even_N"
    CPMG_ODD = "cpmg_odd_N"
    ECHO = "echo_N1"
    RAMSEY = "ramsey"


@dataclass(frozen=True)
class FilterFunctionSpec:
    """Pulse sequence for the filter-function formalism.

    For ``ramsey`` ``n_pulses`` must be 0 and ``dt`` is the total free
    evolution time.  Otherwise the sequence lasts ``n_pulses * dt``.
    """

    sequence_kind: SequenceKind
    n_pulses: int
    dt: float

    def __post_init__(self):
        kind = SequenceKind(self.sequence_kind)
        object.__setattr__(self, "sequence_kind", kind)
        n = self.n_pulses
        ok = {
            SequenceKind.CPMG_EVEN: n >= 2 and n % 2 == 0,
            SequenceKind.CPMG_ODD: n >= 1 and n % 2 == 1,
            SequenceKind.ECHO: n == 1,
            SequenceKind.RAMSEY: n == 0,
        }[kind]
        if not ok:
            raise DomainError(f"n_pulses={n} inconsistent with {kind.value}")
        if not self.dt > 0:
            raise DomainError("dt must be positive")

    @classmethod
    def cpmg(cls, n_pulses: int, dt: float) -> "FilterFunctionSpec":
        kind = SequenceKind.CPMG_EVEN if n_pulses % 2 == 0 else SequenceKind.CPMG_ODD
        return cls(kind, n_pulses, dt)

    @property
    def total_time(self) -> float:
        return self.dt if self.sequence_kind is SequenceKind.RAMSEY else self.n_pulses * self.dt

    @property
    def phase_scale(self) -> float:
        """Time s such that the response is G(omega s / 2) / omega^2."""
        return self.dt


def _sin_ratio_even(theta, n):
    # sin(2M theta)/cos(theta) = 2 sum_{j=1}^{M} (-1)^{j-1} sin((2M-2j+1) theta)
    M = n // 2
    out = np.zeros_like(theta)
    for j in range(1, M + 1):
        out += (-1) ** (j - 1) * np.sin((2 * M - 2 * j + 1) * theta)
    return 2 * out


def _cos_ratio_odd(theta, n):
    # cos((2M+1) theta)/cos(theta) = (-1)^M [1 + 2 sum_{j=1}^{M} (-1)^j cos(2 j theta)]
    M = (n - 1) // 2
    out = np.ones_like(theta)
    for j in range(1, M + 1):
        out += 2 * (-1) ** j * np.cos(2 * j * theta)
    return (-1) ** M * out


def _response(spec: FilterFunctionSpec, theta):
    """omega^2 F(omega) as a function of theta = omega * dt / 2."""
    kind = spec.sequence_kind
    if kind is SequenceKind.RAMSEY:
        return 2.0 * np.sin(theta) ** 2
    if kind is SequenceKind.ECHO:
        return 8.0 * np.sin(theta / 2) ** 4
    n = spec.n_pulses
    c = np.cos(theta)
    near = np.abs(c) < 1e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind is SequenceKind.CPMG_EVEN:
            ratio = np.where(near, 0.0, np.sin(n * theta) / c)
            if np.any(near):
                ratio = np.where(near, _sin_ratio_even(theta, n), ratio)
        else:
            ratio = np.where(near, 0.0, np.cos(n * theta) / c)
            if np.any(near):
                ratio = np.where(near, _cos_ratio_odd(theta, n), ratio)
    return 8.0 * np.sin(theta / 2) ** 4 * ratio ** 2


def filter_function(spec: FilterFunctionSpec, omega):
    """Filter function F(omega) in s^2, such that N dt / T_phi = int F S dw/2pi.

    The removable singularities at cos(omega dt / 2) = 0 are evaluated
    through a finite trigonometric sum, so the result is finite everywhere.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("omega must be positive")
    theta = 0.5 * omega * spec.phase_scale
    return _scalar_or_array(_response(spec, np.atleast_1d(theta)).reshape(theta.shape) / omega ** 2, omega)


def filter_function_integral(spec: FilterFunctionSpec, lower: float = 0.0,
                             upper: float = math.inf, n_periods: int = 400) -> float:
    r"""Adaptive quadrature of :math:`\int F\,d\omega/2\pi` over ``[lower, upper]``.

    With the default bounds this is the normalisation integral, equal to a
    quarter of the sequence duration.  Beyond ``n_periods`` periods of the
    response the slowly varying 1/omega^2 envelope is integrated against the
    period-averaged response.
    """
    s = spec.phase_scale
    period = 2 * math.pi

    def integrand(th):
        th = max(th, 1e-300)
        return float(_response(spec, np.array([th]))[0]) / th ** 2

    th_lo = 0.5 * lower * s
    th_hi = 0.5 * upper * s if math.isfinite(upper) else n_periods * period
    edges = np.arange(0.0, th_hi + period, period / 4)
    edges = np.unique(np.clip(np.concatenate([edges, [th_lo, th_hi]]), th_lo, th_hi))
    pts_per_piece = max(spec.n_pulses, 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, a, b, limit=50 + 10 * pts_per_piece,
                                epsabs=0.0, epsrel=1e-10)
        total += val
    if not math.isfinite(upper):
        mean_g, _ = integrate.quad(lambda th: float(_response(spec, np.array([th]))[0]),
                                   0.0, period, limit=50 + 10 * pts_per_piece, epsrel=1e-12)
        mean_g /= period
        total += mean_g / th_hi
    return total * s / (4 * math.pi)


def spectral_density_thermal(omega, n_th, params: ResonatorQubitParams):
    """Single-sided qubit-frequency noise spectrum from thermal photons."""
    k = params.kappa
    return 16 * params.chi ** 2 * k * n_th / (k * k + np.asarray(omega, dtype=float) ** 2)


def spectral_density_coherent(omega, n_coh, params: ResonatorQubitParams):
    """Single-sided qubit-frequency noise spectrum from a resonant drive."""
    k = params.kappa
    return 8 * params.chi ** 2 * k * n_coh / ((k / 2) ** 2 + np.asarray(omega, dtype=float) ** 2)


class NoiseKind(str, enum.Enum):
    THERMAL = "thermal"
    COHERENT_RESONANT = "coherent_resonant"


def gamma_filterfunction(dt, population, params: ResonatorQubitParams,
                         kind: NoiseKind | str = NoiseKind.THERMAL, *,
                         phenomenological: bool = False):
    """Gaussian filter-function CPMG rate (valid only for |2 chi| << kappa).

    ``phenomenological=True`` multiplies by 1/[1 + (2chi/kappa)^2], the
    ad hoc correction that fixes the low-frequency limit only.
    """
    dt = _check_dt(dt)
    kind = NoiseKind(kind)
    k, chi = params.kappa, params.chi
    if kind is NoiseKind.THERMAL:
        out = 4 * chi ** 2 * population / k * _one_minus_tanhc(k * dt / 2)
    else:
        out = 8 * chi ** 2 * population / k * _one_minus_tanhc(k * dt / 4)
    if phenomenological:
        out = out / (1 + params.ratio ** 2)
    return _scalar_or_array(out, np.broadcast(dt, np.asarray(population)))


def gamma_filterfunction_sum(dt: float, population: float, params: ResonatorQubitParams,
                             kind: NoiseKind | str = NoiseKind.THERMAL, *,
                             rtol: float = 1e-12, max_terms: int = 10_000_000) -> float:
    """Harmonic-sum form (2/pi^2) sum_m S((2m+1) pi/dt) / (2m+1)^2."""
    dt = float(_check_dt(dt))
    kind = NoiseKind(kind)
    S: Callable = spectral_density_thermal if kind is NoiseKind.THERMAL else spectral_density_coherent
    total = 0.0
    block = 1024
    m0 = 0
    while m0 < max_terms:
        odd = 2 * np.arange(m0, m0 + block) + 1.0
        terms = S(odd * math.pi / dt, population, params) / odd ** 2
        # terms decrease monotonically; add smallest last for accuracy
        total += math.fsum(terms)
        if total == 0 or terms[-1] < rtol * total:
            break
        m0 += block
        block *= 2
    return 2.0 / math.pi ** 2 * total
