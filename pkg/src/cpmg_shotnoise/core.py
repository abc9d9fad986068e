"""Shared value types, unit conversions and elementary conversions.

All rates and angular frequencies are stored in rad/s and all times in
seconds.  Conversions to the lab-facing units (MHz, ns, 1/us) happen only
at the I/O boundary through the helpers defined here.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import constants

TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Input outside the domain of a physical formula."""


class ConfigurationError(ValueError):
    """Invalid simulation or run configuration."""


class ScheduleError(ConfigurationError):
    """Inconsistent pulse schedule (overlapping pulses, bad pulse times...)."""


# --------------------------------------------------------------------------
# unit conversions
# --------------------------------------------------------------------------

def mhz_to_rad_s(f_mhz):
    """Cyclic frequency in MHz to angular frequency in rad/s."""
    return np.multiply(f_mhz, TWO_PI * 1e6)


def rad_s_to_mhz(omega):
    return np.divide(omega, TWO_PI * 1e6)


def per_us_to_per_s(rate):
    return np.multiply(rate, 1e6)


def per_s_to_per_us(rate):
    return np.divide(rate, 1e6)


def ns_to_s(t_ns):
    return np.multiply(t_ns, 1e-9)


def s_to_ns(t):
    return np.divide(t, 1e-9)


def cpmg_frequency(dt):
    """CPMG sequence frequency f_s = 1/(2 dt) in Hz."""
    return 0.5 / np.asarray(dt, dtype=float)


def interpulse_period(f_s):
    """Inverse of :func:`cpmg_frequency`."""
    return 0.5 / np.asarray(f_s, dtype=float)


# --------------------------------------------------------------------------
# value types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ResonatorQubitParams:
    """Dispersive resonator-qubit constants.

    Parameters
    ----------
    kappa : float
        Resonator energy decay rate (rad/s).
    chi : float
        Half the dispersive shift (rad/s); one photon shifts the qubit by 2*chi.
    delta_omega_d : float
        Drive detuning omega_d - omega_res (rad/s).
    """

    kappa: float
    chi: float
    delta_omega_d: float = 0.0

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError(f"kappa must be positive and finite, got {self.kappa!r}")
        if not math.isfinite(self.chi) or not math.isfinite(self.delta_omega_d):
            raise DomainError("chi and delta_omega_d must be finite")

    @property
    def ratio(self) -> float:
        """Dimensionless coupling 2*chi/kappa."""
        return 2.0 * self.chi / self.kappa

    @classmethod
    def from_lab_units(cls, kappa_inv_ns: float, two_chi_mhz: float,
                       detuning_mhz: float = 0.0) -> "ResonatorQubitParams":
        """Build from kappa^-1 in ns and 2*chi/2pi, detuning/2pi in MHz."""
        return cls(kappa=1.0 / ns_to_s(kappa_inv_ns),
                   chi=0.5 * float(mhz_to_rad_s(two_chi_mhz)),
                   delta_omega_d=float(mhz_to_rad_s(detuning_mhz)))

    def with_chi(self, chi: float) -> "ResonatorQubitParams":
        return ResonatorQubitParams(self.kappa, chi, self.delta_omega_d)

    def with_detuning(self, delta_omega_d: float) -> "ResonatorQubitParams":
        return ResonatorQubitParams(self.kappa, self.chi, delta_omega_d)


class DriveKind(str, enum.Enum):
    NONE = "none"
    THERMAL = "thermal"
    COHERENT = "coherent"


@dataclass(frozen=True)
class DriveSpec:
    """Resonator drive: thermal white noise and/or a constant coherent tone.

    ``F_dc`` is in s^(-1/2): for resonant drive the intracavity population is
    kappa |F_dc|^2 / ((kappa/2)^2 + chi^2).
    """

    kind: DriveKind = DriveKind.NONE
    n_th: float = 0.0
    F_dc: complex = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", DriveKind(self.kind))
        object.__setattr__(self, "F_dc", complex(self.F_dc))
        if not (self.n_th >= 0 and math.isfinite(self.n_th)):
            raise DomainError(f"n_th must be >= 0, got {self.n_th!r}")
        if self.kind is DriveKind.NONE and (self.n_th != 0 or self.F_dc != 0):
            raise DomainError("drive kind 'none' requires n_th = 0 and F_dc = 0")
        if self.kind is DriveKind.THERMAL and self.F_dc != 0:
            raise DomainError("thermal drive cannot carry a coherent amplitude")

    @classmethod
    def thermal(cls, n_th: float) -> "DriveSpec":
        return cls(DriveKind.THERMAL, n_th=n_th)

    @classmethod
    def coherent(cls, F_dc: complex, n_th: float = 0.0) -> "DriveSpec":
        return cls(DriveKind.COHERENT, n_th=n_th, F_dc=F_dc)

    @classmethod
    def coherent_population(cls, params: ResonatorQubitParams, n_coh: float,
                            n_th: float = 0.0) -> "DriveSpec":
        """Coherent drive with real amplitude tuned to a resonant population."""
        return cls(DriveKind.COHERENT, n_th=n_th,
                   F_dc=drive_amplitude_for_population(params, n_coh))


class PulseShape(str, enum.Enum):
    INSTANTANEOUS = "instantaneous"
    RAISED_COSINE = "raised_cosine"


@dataclass(frozen=True)
class CpmgSchedule:
    """N pi-pulses centred at (k + 1/2) dt, total duration N dt."""

    n_pulses: int
    dt: float
    pulse_duration: float = 0.0
    pulse_shape: PulseShape = PulseShape.INSTANTANEOUS

    def __post_init__(self):
        object.__setattr__(self, "pulse_shape", PulseShape(self.pulse_shape))
        if int(self.n_pulses) != self.n_pulses or self.n_pulses < 1:
            raise ScheduleError(f"n_pulses must be a positive integer, got {self.n_pulses!r}")
        if not self.dt > 0:
            raise ScheduleError(f"dt must be positive, got {self.dt!r}")
        if self.pulse_duration < 0:
            raise ScheduleError("pulse_duration must be >= 0")
        if self.pulse_duration >= self.dt:
            raise ScheduleError(
                f"pulse duration {self.pulse_duration:g} s must be shorter than "
                f"the interpulse period {self.dt:g} s")
        if self.pulse_shape is PulseShape.RAISED_COSINE and self.pulse_duration == 0:
            raise ScheduleError("raised-cosine pulses need pulse_duration > 0")
        if self.pulse_shape is PulseShape.INSTANTANEOUS and self.pulse_duration != 0:
            raise ScheduleError("instantaneous pulses must have pulse_duration = 0")

    @property
    def total_time(self) -> float:
        return self.n_pulses * self.dt

    @property
    def f_s(self) -> float:
        return 0.5 / self.dt

    def pulse_centers(self) -> np.ndarray:
        return (np.arange(self.n_pulses) + 0.5) * self.dt

    def chi_sign(self, t):
        """Sign of chi-tilde(t): +1 before the first pulse, flipping at each centre.

        At a pulse centre the post-flip value is returned.
        """
        t = np.asarray(t, dtype=float)
        flips = np.searchsorted(self.pulse_centers(), t, side="right")
        return np.where(flips % 2 == 0, 1.0, -1.0)

    def chi_tilde(self, t, chi: float):
        return chi * self.chi_sign(t)


class Route(str, enum.Enum):
    ANALYTIC = "analytic"
    TRAJECTORY = "trajectory"
    LINDBLAD = "lindblad"


@dataclass(frozen=True)
class CoherenceTrace:
    """Coherence C(t_cpmg) sampled by one of the routes.

    ``std_err`` is zero for deterministic routes.
    """

    t_cpmg: np.ndarray
    coherence: np.ndarray
    std_err: np.ndarray | None = None
    route: Route = Route.ANALYTIC
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t_cpmg, dtype=float)
        c = np.asarray(self.coherence, dtype=float)
        se = np.zeros_like(c) if self.std_err is None else np.asarray(self.std_err, dtype=float)
        if t.ndim != 1 or t.shape != c.shape or se.shape != c.shape:
            raise ValueError("t_cpmg, coherence and std_err must be 1-D and equally long")
        if np.any(np.diff(t) <= 0):
            raise ValueError("t_cpmg must be strictly increasing")
        if not np.all(np.isfinite(c)) or np.any(c < 0):
            raise ValueError("coherence values must be finite and nonnegative")
        if np.any(se < 0):
            raise ValueError("std_err must be nonnegative")
        # Monte-Carlo estimates may overshoot 1 by statistical noise only
        if np.any(c > 1.0 + 5.0 * se + 1e-9):
            raise ValueError("coherence exceeds 1 beyond 5 standard errors")
        object.__setattr__(self, "t_cpmg", t)
        object.__setattr__(self, "coherence", c)
        object.__setattr__(self, "std_err", se)
        object.__setattr__(self, "route", Route(self.route))

    def __len__(self):
        return len(self.t_cpmg)


@dataclass(frozen=True)
class RateCurve:
    """Dephasing rate vs CPMG frequency (Hz, 1/s, 1/s)."""

    f_s: np.ndarray
    gamma2: np.ndarray
    sigma_gamma2: np.ndarray | None = None
    label: str = ""
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        f = np.asarray(self.f_s, dtype=float)
        g = np.asarray(self.gamma2, dtype=float)
        s = np.zeros_like(g) if self.sigma_gamma2 is None else np.asarray(self.sigma_gamma2, dtype=float)
        if f.ndim != 1 or f.shape != g.shape or s.shape != g.shape:
            raise ValueError("f_s, gamma2 and sigma_gamma2 must be 1-D and equally long")
        if np.any(f <= 0):
            raise ValueError("f_s must be positive")
        if np.any(s < 0):
            raise ValueError("sigma_gamma2 must be nonnegative")
        object.__setattr__(self, "f_s", f)
        object.__setattr__(self, "gamma2", g)
        object.__setattr__(self, "sigma_gamma2", s)

    def __len__(self):
        return len(self.f_s)

    @property
    def dt(self) -> np.ndarray:
        return interpulse_period(self.f_s)

    @property
    def has_sigma(self) -> bool:
        return bool(np.all(self.sigma_gamma2 > 0))


# --------------------------------------------------------------------------
# elementary conversions
# --------------------------------------------------------------------------

def thermal_occupation(omega_res: float, temperature: float) -> float:
    """Bose-Einstein occupation 1/(exp(hbar w / kB T) - 1)."""
    if not omega_res > 0:
        raise DomainError(f"omega_res must be positive, got {omega_res!r}")
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature!r}")
    x = constants.hbar * omega_res / (constants.k * temperature)
    return 1.0 / math.expm1(x) if x < 745.0 else 0.0


class DetunedPopulations(NamedTuple):
    n0: float
    n1: float
    n_max: float


def coherent_population(params: ResonatorQubitParams, F_dc: complex):
    """Steady-state intracavity population of a constant coherent drive.

    For resonant drive returns the population common to both qubit states,
    kappa |F|^2 / ((kappa/2)^2 + chi^2).  For nonzero detuning returns
    ``DetunedPopulations(n0, n1, n_max)`` with the qubit-state-resolved
    populations and the bare (no dispersive shift) peak population.
    """
    k = params.kappa
    f2 = abs(complex(F_dc)) ** 2
    if params.delta_omega_d == 0:
        return k * f2 / ((k / 2) ** 2 + params.chi ** 2)
    n0 = k * f2 / ((k / 2) ** 2 + (params.delta_omega_d + params.chi) ** 2)
    n1 = k * f2 / ((k / 2) ** 2 + (params.delta_omega_d - params.chi) ** 2)
    return DetunedPopulations(n0, n1, 4.0 * f2 / k)


def drive_amplitude_for_population(params: ResonatorQubitParams, n_coh: float) -> float:
    """Real drive amplitude giving resonant population ``n_coh``."""
    if n_coh < 0:
        raise DomainError("population must be nonnegative")
    k = params.kappa
    return math.sqrt(n_coh * ((k / 2) ** 2 + params.chi ** 2) / k)


def stationary_amplitude(params: ResonatorQubitParams, F_dc: complex, qubit_state: int = 0) -> complex:
    """Coherent-state amplitude reached under constant drive for a fixed qubit state."""
    sign = 1 if qubit_state == 0 else -1
    gamma = params.kappa / 2 - 1j * (params.delta_omega_d + sign * params.chi)
    return math.sqrt(params.kappa) * complex(F_dc) / gamma


def as_array(x: Sequence[float] | float) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))
