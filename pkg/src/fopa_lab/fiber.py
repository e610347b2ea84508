"""Fiber, pump, and nonlinearity parameters with their pointwise scalar functions.

Unit conventions (everything internal is SI):
    - lengths in m, attenuation in 1/m (power), wavelengths in m
    - detuning Omega is the *angular* offset from the pump in rad/s; spectra
      are keyed by Omega and the CLI converts from Hz-like inputs
    - nonlinear coefficient gamma in 1/(W m); the photon-flux rescaled
      version gamma*hbar*omega (units J/(W m) = s/m) is produced by
      :func:`to_photon_flux_units` and used only by the quantum-noise layer
    - dispersion slope S0 in s/m^3 (1 ps/(nm^2 km) = 1e3 s/m^3)

The complex nonlinear coefficient is gamma(Omega) = gamma0 + dRe(|Omega|)
+ i*sign(Omega)*Im(|Omega|), conjugate-symmetric by construction:
gamma(-Omega) = conj(gamma(Omega)).  The imaginary part is tabulated and
interpolated with a monotone (shape-preserving) cubic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT, hbar as HBAR, k as K_BOLTZMANN
from scipy.interpolate import PchipInterpolator

from .errors import InvalidProfile, NonPositiveDetuning, OutOfRange

__all__ = [
    "FiberSpec",
    "PumpSpec",
    "Environment",
    "RamanProfile",
    "alpha_from_db_per_km",
    "alpha_to_db_per_km",
    "gamma_at",
    "delta_k",
    "beta2_at_pump",
    "thermal_occupation",
    "effective_length",
    "to_photon_flux_units",
    "from_photon_flux_units",
    "silica_like_profile",
    "load_raman_table",
]

# dB/km -> 1/m for power attenuation
_DB_KM_TO_PER_M = math.log(10.0) / 1.0e4


def alpha_from_db_per_km(alpha_db_km: float) -> float:
    """Convert a power attenuation coefficient from dB/km to 1/m."""
    return alpha_db_km * _DB_KM_TO_PER_M


def alpha_to_db_per_km(alpha_per_m: float) -> float:
    return alpha_per_m / _DB_KM_TO_PER_M


@dataclass(frozen=True)
class FiberSpec:
    """Geometry, attenuation, and dispersion of one fiber span.

    Attenuation coefficients are power coefficients in 1/m (convert dB/km
    with :func:`alpha_from_db_per_km`).  Dispersion is defined by the zero
    dispersion wavelength and the slope S0 only; the phase mismatch is the
    pure second-order law delta_k = beta2 * Omega**2.
    """

    length_m: float
    alpha_p: float = 0.0           # 1/m at the pump
    alpha_a: float = 0.0           # 1/m at the anti-Stokes sideband
    alpha_s: float = 0.0           # 1/m at the Stokes sideband
    zero_dispersion_wavelength_m: float = 1550e-9
    dispersion_slope: float = 57.0  # s/m^3  (= 0.057 ps/(nm^2 km))
    effective_area_m2: float | None = None

    def __post_init__(self):
        if not self.length_m > 0:
            raise ValueError(f"fiber length must be positive, got {self.length_m}")
        for name in ("alpha_p", "alpha_a", "alpha_s"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.zero_dispersion_wavelength_m > 0:
            raise ValueError("zero dispersion wavelength must be positive")

    @property
    def lossless(self) -> bool:
        return self.alpha_p == 0.0 and self.alpha_a == 0.0 and self.alpha_s == 0.0


@dataclass(frozen=True)
class PumpSpec:
    """CW pump. The input pump phase is the global phase reference (zero)."""

    power_w: float
    wavelength_m: float

    def __post_init__(self):
        if self.power_w < 0:
            raise ValueError("pump power must be >= 0")
        if not self.wavelength_m > 0:
            raise ValueError("pump wavelength must be positive")

    @property
    def omega(self) -> float:
        """Angular optical frequency of the pump, rad/s."""
        return 2.0 * math.pi * SPEED_OF_LIGHT / self.wavelength_m


@dataclass(frozen=True)
class Environment:
    temperature_k: float = 300.0

    def __post_init__(self):
        if not self.temperature_k > 0:
            raise ValueError("temperature must be positive")


def _as_table(table) -> np.ndarray:
    arr = np.asarray(table, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidProfile("table must be a sequence of (Omega, value) pairs")
    return arr


@dataclass(frozen=True)
class RamanProfile:
    """Complex nonlinear coefficient spectrum gamma(Omega).

    ``imag_table`` holds (Omega_k > 0, Im gamma(Omega_k) > 0) pairs with a
    strictly increasing first column; negative detunings are answered through
    the enforced conjugate symmetry.  An empty table models a purely
    electronic (instantaneous, Raman-free) response with no detuning limit.

    ``imag_slope_at_zero`` is d Im(gamma)/d Omega at Omega -> 0+ in s/(W m);
    if supplied it must agree with the interpolated table slope within 1%.
    """

    gamma0: float                                   # 1/(W m), Re gamma at Omega=0
    imag_table: tuple = ()                          # ((rad/s, 1/(W m)), ...)
    real_deviation_table: tuple = ()                # ((rad/s, 1/(W m)), ...), optional
    imag_slope_at_zero: float | None = None         # s/(W m)
    _im_interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)
    _re_interp: PchipInterpolator | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        im = _as_table(self.imag_table)
        object.__setattr__(self, "imag_table", tuple(map(tuple, im)))
        if im.size:
            om, val = im[:, 0], im[:, 1]
            if om[0] <= 0 or np.any(np.diff(om) <= 0):
                raise InvalidProfile("imag_table detunings must be strictly increasing and > 0")
            if np.any(val <= 0):
                raise InvalidProfile("Im gamma must be positive for all tabulated Omega > 0")
            interp = PchipInterpolator(np.concatenate(([0.0], om)),
                                       np.concatenate(([0.0], val)), extrapolate=False)
            object.__setattr__(self, "_im_interp", interp)
            slope = float(interp.derivative()(0.0))
            if self.imag_slope_at_zero is None:
                object.__setattr__(self, "imag_slope_at_zero", slope)
            elif abs(self.imag_slope_at_zero - slope) > 0.01 * abs(slope):
                raise InvalidProfile(
                    f"declared imag_slope_at_zero {self.imag_slope_at_zero:g} disagrees with "
                    f"table slope {slope:g} by more than 1%")
        else:
            if self.imag_slope_at_zero is None:
                object.__setattr__(self, "imag_slope_at_zero", 0.0)
        re = _as_table(self.real_deviation_table)
        object.__setattr__(self, "real_deviation_table", tuple(map(tuple, re)))
        if re.size:
            om = re[:, 0]
            if om[0] <= 0 or np.any(np.diff(om) <= 0):
                raise InvalidProfile("real_deviation_table detunings must be strictly increasing and > 0")
            interp = PchipInterpolator(np.concatenate(([0.0], om)),
                                       np.concatenate(([0.0], re[:, 1])), extrapolate=False)
            object.__setattr__(self, "_re_interp", interp)

    @classmethod
    def electronic_only(cls, gamma0: float) -> "RamanProfile":
        """Instantaneous-response profile: gamma(Omega) = gamma0 for all Omega."""
        return cls(gamma0=gamma0)

    @property
    def max_detuning(self) -> float:
        """Largest tabulated |Omega| (inf for an electronic-only profile)."""
        if not self.imag_table:
            return math.inf
        return self.imag_table[-1][0]

    @property
    def raman_active(self) -> bool:
        return bool(self.imag_table)


def gamma_at(profile: RamanProfile, omega: float) -> complex:
    """Complex nonlinear coefficient at signed detuning ``omega`` (rad/s).

    Conjugate-symmetric: gamma_at(p, -w) == conj(gamma_at(p, w)).
    Raises OutOfRange beyond the tabulated detuning span.
    """
    w = abs(omega)
    re = profile.gamma0
    im = 0.0
    if profile._im_interp is not None:
        if w > profile.max_detuning:
            raise OutOfRange(
                f"|Omega| = {w:g} rad/s exceeds the tabulated Raman span "
                f"{profile.max_detuning:g} rad/s")
        im = float(profile._im_interp(w))
    if profile._re_interp is not None:
        top = profile.real_deviation_table[-1][0]
        if w > top:
            raise OutOfRange(
                f"|Omega| = {w:g} rad/s exceeds the real-deviation table span {top:g} rad/s")
        re += float(profile._re_interp(w))
    return complex(re, math.copysign(im, omega) if omega != 0.0 else 0.0)


def gamma_pair(profile: RamanProfile, omega: float) -> tuple[complex, complex]:
    """(gamma(+Omega), gamma(-Omega)) for a signed detuning."""
    gp = gamma_at(profile, omega)
    return gp, gp.conjugate()


def beta2_at_pump(fiber: FiberSpec, pump: PumpSpec) -> float:
    """Group-velocity dispersion coefficient at the pump wavelength, s^2/m.

    Uses D(lambda_p) = S0 (lambda_p - lambda_0) and beta2 = -lambda^2 D/(2 pi c).
    Pumping on the long-wavelength (anomalous) side of lambda_0 gives beta2 < 0.
    """
    d_disp = fiber.dispersion_slope * (pump.wavelength_m - fiber.zero_dispersion_wavelength_m)
    return -pump.wavelength_m**2 * d_disp / (2.0 * math.pi * SPEED_OF_LIGHT)


def delta_k(fiber: FiberSpec, pump: PumpSpec, omega: float) -> float:
    """Linear phase mismatch beta2 * Omega**2 in 1/m."""
    if not math.isfinite(omega):
        raise ValueError("omega must be finite")
    return beta2_at_pump(fiber, pump) * omega * omega


def thermal_occupation(omega: float, env: Environment) -> float:
    """Bose-Einstein phonon occupation at detuning ``omega`` (> 0) and T."""
    if omega <= 0:
        raise NonPositiveDetuning("thermal occupation requires Omega > 0")
    x = HBAR * omega / (K_BOLTZMANN * env.temperature_k)
    if x < 1e-6:
        # series of 1/(e^x - 1); avoids cancellation at tiny x
        return 1.0 / x - 0.5 + x / 12.0
    return 1.0 / math.expm1(x)


def effective_length(alpha_p: float, z) -> float:
    """Loss-weighted interaction length [1 - exp(-alpha_p z)]/alpha_p."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("z must be >= 0")
    if alpha_p == 0.0:
        out = z.copy()
    else:
        out = -np.expm1(-alpha_p * z) / alpha_p
    return float(out) if out.ndim == 0 else out


def to_photon_flux_units(gamma: complex, pump_wavelength: float) -> complex:
    """Rescale gamma [1/(W m)] to the photon-flux convention gamma*hbar*omega."""
    if not pump_wavelength > 0:
        raise ValueError("wavelength must be positive")
    omega = 2.0 * math.pi * SPEED_OF_LIGHT / pump_wavelength
    return gamma * (HBAR * omega)


def from_photon_flux_units(gamma_bar: complex, pump_wavelength: float) -> complex:
    if not pump_wavelength > 0:
        raise ValueError("wavelength must be positive")
    omega = 2.0 * math.pi * SPEED_OF_LIGHT / pump_wavelength
    return gamma_bar / (HBAR * omega)


# ---------------------------------------------------------------------------
# Built-in silica-like Raman response
# ---------------------------------------------------------------------------
# Damped-oscillator response h(t) ~ exp(-t/tau2) sin(t/tau1) (Blow & Wood):
# Im H(Omega) = C (2 Omega/tau2) / [(R - Omega^2)^2 + (2 Omega/tau2)^2],
# linear in Omega near zero and peaked near 13 THz.  The frequency axis is
# stretched a few percent so the peak sits exactly at 13.2 THz.

_TAU1 = 12.2e-15
_TAU2 = 32.0e-15
_R_BW = 1.0 / _TAU1**2 + 1.0 / _TAU2**2
_PEAK_THZ = 13.2


def _imh_raw(omega):
    num = 2.0 * omega / _TAU2
    return (_TAU1**2 + _TAU2**2) / (_TAU1**2 * _TAU2**2) * num / ((_R_BW - omega**2) ** 2 + num**2)


def _imh_peak_omega() -> float:
    b = 4.0 / _TAU2**2
    u = ((2.0 * _R_BW - b) + math.sqrt((2.0 * _R_BW - b) ** 2 + 12.0 * _R_BW**2)) / 6.0
    return math.sqrt(u)


_OMEGA_PK_RAW = _imh_peak_omega()
_STRETCH = _OMEGA_PK_RAW / (2.0 * math.pi * _PEAK_THZ * 1e12)
_IMH_PK = _imh_raw(_OMEGA_PK_RAW)


def _imh_shape(omega):
    """Normalized silica-like Im response: peak value 1 at 13.2 THz."""
    return _imh_raw(np.asarray(omega) * _STRETCH) / _IMH_PK


_SHAPE_SLOPE = 2.0 * _TAU1**2 * _TAU2 / (_TAU1**2 + _TAU2**2) * _STRETCH / _IMH_PK


def silica_like_profile(gamma0: float,
                        peak_im: float | None = None,
                        slope_at_zero: float | None = None,
                        max_thz: float = 18.0) -> RamanProfile:
    """Built-in silica-like Raman profile, peak at 13.2 THz detuning.

    Exactly one of ``peak_im`` (value of Im gamma at the peak, 1/(W m)) or
    ``slope_at_zero`` (d Im gamma/d Omega at 0, s/(W m)) fixes the scale.
    The first two tabulated points are kept collinear with the origin so the
    interpolant is exactly linear at small detuning and its slope at zero is
    the requested value to machine precision.
    """
    if (peak_im is None) == (slope_at_zero is None):
        raise ValueError("specify exactly one of peak_im or slope_at_zero")
    scale = peak_im if peak_im is not None else slope_at_zero / _SHAPE_SLOPE
    f_thz = np.concatenate([
        [0.1, 0.2],
        np.arange(0.4, 3.01, 0.2),
        np.arange(3.25, 10.01, 0.25),
        np.arange(10.2, 15.81, 0.2),
        np.arange(16.25, max_thz + 1e-9, 0.25),
    ])
    om = 2.0 * math.pi * 1e12 * f_thz
    vals = scale * _imh_shape(f_thz)
    vals[0] = scale * _SHAPE_SLOPE * om[0]   # collinear leading points:
    vals[1] = scale * _SHAPE_SLOPE * om[1]   # interpolant slope at 0 is exact
    return RamanProfile(gamma0=gamma0, imag_table=tuple(zip(om.tolist(), vals.tolist())))


def load_raman_table(path, gamma0: float) -> RamanProfile:
    """Load a two-column (Omega/2pi in THz, Im gamma in 1/(W m)) text table.

    Lines starting with '#' are comments; the first column must be strictly
    increasing.
    """
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise InvalidProfile(f"{path}: expected two columns, got {data.shape[1]}")
    om = 2.0 * math.pi * 1e12 * data[:, 0]
    return RamanProfile(gamma0=gamma0, imag_table=tuple(zip(om.tolist(), data[:, 1].tolist())))
