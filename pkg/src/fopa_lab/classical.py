"""Classical two-frequency phase-sensitive gain and its input optimization.

A coherent input is a pair of amplitudes (zeta_a, zeta_s) in photon-flux
units (|zeta|^2 in photons/s; any common scale cancels in the gain ratio).
The gain depends on the input phases only through the sum theta_a + theta_s
measured against the pump phase.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .errors import DegenerateExtremum, ZeroInput
from .meanfield import TransferMatrix

__all__ = [
    "SignalInput",
    "PsaMode",
    "phase_sensitive_gain",
    "optimal_sum_phase",
    "optimal_power_split",
    "max_psa_gain",
    "min_psd_gain",
    "gain_optimal_input",
]

_TINY = 1e-300


@dataclass(frozen=True)
class SignalInput:
    """Coherent Stokes/anti-Stokes input amplitudes (photon-flux units)."""

    zeta_a: complex
    zeta_s: complex

    @property
    def total_flux(self) -> float:
        return abs(self.zeta_a) ** 2 + abs(self.zeta_s) ** 2


class PsaMode(enum.Enum):
    AMPLIFY = "amplify"
    DEAMPLIFY = "deamplify"


def _wrap_angle(x: float) -> float:
    """Wrap to (-pi, pi]."""
    w = (x + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if w == -math.pi else w


def _cross(tm: TransferMatrix) -> complex:
    return tm.mu_s * tm.nu_s.conjugate() + tm.mu_a * tm.nu_a.conjugate()


def phase_sensitive_gain(tm: TransferMatrix, sig: SignalInput) -> float:
    """Total output/input power ratio for the given two-frequency input."""
    denom = sig.total_flux
    if denom <= 0.0:
        raise ZeroInput("phase-sensitive gain requires nonzero input power")
    pa = abs(sig.zeta_a)
    ps = abs(sig.zeta_s)
    theta = cmath.phase(sig.zeta_a) + cmath.phase(sig.zeta_s) if pa and ps else 0.0
    num = ((abs(tm.mu_a) ** 2 + abs(tm.nu_s) ** 2) * pa * pa
           + (abs(tm.nu_a) ** 2 + abs(tm.mu_s) ** 2) * ps * ps
           + 2.0 * (_cross(tm) * pa * ps * cmath.exp(1j * theta)).real)
    return num / denom


def optimal_sum_phase(tm: TransferMatrix, mode: PsaMode = PsaMode.AMPLIFY) -> float:
    """Input sum phase theta_a + theta_s extremizing the gain, wrapped to (-pi, pi]."""
    cross = _cross(tm)
    if abs(cross) < _TINY:
        raise DegenerateExtremum("mu_s nu_s* + mu_a nu_a* vanishes; no phase sensitivity")
    theta = -cmath.phase(cross)
    if mode is PsaMode.DEAMPLIFY:
        theta += math.pi
    return _wrap_angle(theta)


def optimal_power_split(tm: TransferMatrix, mode: PsaMode = PsaMode.AMPLIFY) -> float:
    """Anti-Stokes power fraction x = |zeta_a|^2/(|zeta_a|^2+|zeta_s|^2) at the extremum.

    The amplification optimum takes the negative root, deamplification the
    positive one; the result lies in [0, 1].
    """
    cross = _cross(tm)
    dmu = abs(tm.mu_s) ** 2 - abs(tm.mu_a) ** 2
    radical = 4.0 * abs(cross) ** 2 + dmu * dmu
    if radical < _TINY:
        raise DegenerateExtremum("both |mu_s|-|mu_a| and the cross magnitude vanish")
    root = dmu / math.sqrt(radical)
    x = 0.5 * (1.0 - root) if mode is PsaMode.AMPLIFY else 0.5 * (1.0 + root)
    return min(1.0, max(0.0, x))


def max_psa_gain(tm: TransferMatrix) -> float:
    """Gain at the jointly optimal sum phase and power split (closed form)."""
    cross = _cross(tm)
    dmu = abs(tm.mu_s) ** 2 - abs(tm.mu_a) ** 2
    radical = 4.0 * abs(cross) ** 2 + dmu * dmu
    if radical < _TINY:
        raise DegenerateExtremum("gain extremum undefined for this transfer matrix")
    rad = math.sqrt(radical)
    total = (abs(tm.mu_a) ** 2 + abs(tm.mu_s) ** 2
             + abs(tm.nu_a) ** 2 + abs(tm.nu_s) ** 2)
    dnu = abs(tm.nu_a) ** 2 - abs(tm.nu_s) ** 2
    return 0.5 * total + 0.5 * rad + dmu * dnu / rad


def min_psd_gain(tm: TransferMatrix) -> float:
    """Gain at the optimal deamplification phase and split.

    No independent closed form; evaluates the gain at the positive-root split
    with the pi-shifted sum phase.
    """
    sig = gain_optimal_input(tm, PsaMode.DEAMPLIFY)
    return phase_sensitive_gain(tm, sig)


def gain_optimal_input(tm: TransferMatrix, mode: PsaMode = PsaMode.AMPLIFY,
                       total_flux: float = 1.0) -> SignalInput:
    """SignalInput realizing the optimal sum phase and power split."""
    theta = optimal_sum_phase(tm, mode)
    x = optimal_power_split(tm, mode)
    half = cmath.exp(0.5j * theta)
    return SignalInput(zeta_a=math.sqrt(x * total_flux) * half,
                       zeta_s=math.sqrt((1.0 - x) * total_flux) * half)
