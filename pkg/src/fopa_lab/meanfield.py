"""Transfer coefficients mu/nu of the pump-driven two-sideband coupled-mode system.

The four complex coefficients map input Stokes/anti-Stokes amplitudes (and
conjugates) at a start point z to the fiber end L:

    A_a(L) = mu_a(z,L) A_a(z) + nu_a(z,L) A_s*(z)
    A_s(L) = mu_s(z,L) A_s(z) + nu_s(z,L) A_a*(z)

Conventions (kept consistently through the noise layer):
    - the pump phase at the fiber input is the global phase reference;
    - nu carries the local pump phase at the segment start through an
      A_p(z)^2 factor but *not* the exp(-i delta_k z) mismatch phase of the
      stationary frame.  The frame-true map is recovered by
      :func:`bogoliubov`; only that representation composes by matmul.

Three routes cover the solution regimes: a closed form for lossless fiber,
its delta_k = 0 reduction (linear in span length), and a power series in the
local effective length for distributed loss.  The plain series converges
usefully only while (|Gamma| + |xi| + |Lambda|) L_eff is order one, so longer
or strongly mismatched spans are split into subsegments, each solved by the
series and composed as Bogoliubov maps; for a short span this reduces to the
single textbook expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, OutOfRange
from .fiber import FiberSpec, PumpSpec, RamanProfile, delta_k as dispersion_delta_k, gamma_pair

__all__ = [
    "TransferMatrix",
    "SeriesControl",
    "pump_at",
    "transfer",
    "transfer_series",
    "transfer_lossless",
    "transfer_matched",
    "transfer_profile",
    "bogoliubov",
]

# Per-subsegment magnitude budget for the series: terms then decay
# factorially within ~20 iterations and the largest term stays ~e^1.5.
_SEGMENT_SCALE = 1.5
# Validity guard for a single expansion interval.
_ALPHA_LEFF_GUARD = 0.5
# Dispatcher threshold below which the matched (delta_k = 0) form applies.
_MATCHED_PHASE_TOL = 1e-12


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the distributed-loss series."""

    max_terms: int = 200
    rel_tolerance: float = 1e-12

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if not self.rel_tolerance > 0:
            raise ValueError("rel_tolerance must be positive")


_DEFAULT_CTL = SeriesControl()


@dataclass(frozen=True)
class TransferMatrix:
    """Transfer coefficients from z_start to z_end at one detuning."""

    mu_a: complex
    mu_s: complex
    nu_a: complex
    nu_s: complex
    z_start: float
    z_end: float
    delta_k: float = 0.0

    @classmethod
    def identity(cls, z: float = 0.0, delta_k: float = 0.0) -> "TransferMatrix":
        return cls(1.0 + 0j, 1.0 + 0j, 0j, 0j, z, z, delta_k)


def bogoliubov(tm: TransferMatrix) -> np.ndarray:
    """Stationary-frame 2x2 map acting on [A_a; A_s*]; composes by matmul."""
    ph = np.exp(-1j * tm.delta_k * tm.z_start)
    return np.array([[tm.mu_a, tm.nu_a * ph],
                     [np.conj(tm.nu_s * ph), np.conj(tm.mu_s)]])


def _from_true(T, z, span_end, dk) -> TransferMatrix:
    ph = np.exp(1j * dk * z)
    return TransferMatrix(mu_a=complex(T[0, 0]),
                          mu_s=complex(np.conj(T[1, 1])),
                          nu_a=complex(T[0, 1] * ph),
                          nu_s=complex(np.conj(T[1, 0]) * ph),
                          z_start=float(z), z_end=float(span_end), delta_k=float(dk))


def _zeff(alpha_p, z):
    z = np.asarray(z, dtype=float)
    if alpha_p == 0.0:
        return z
    return -np.expm1(-alpha_p * z) / alpha_p


def pump_at(pump: PumpSpec, fiber: FiberSpec, profile: RamanProfile, z):
    """Pump amplitude at z in sqrt(W): SPM phase gamma0 Ip(0) z_eff, decay alpha_p z/2.

    Vectorized over z; the input phase is the global reference (zero).
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z > fiber.length_m):
        raise OutOfRange("z outside the fiber span")
    out = np.sqrt(pump.power_w) * np.exp(
        1j * profile.gamma0 * pump.power_w * _zeff(fiber.alpha_p, z) - fiber.alpha_p * z / 2.0)
    return complex(out) if out.ndim == 0 else out


def _shc(x):
    """sinh(x)/x for complex x, stable through x = 0."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    out = np.sinh(safe) / safe
    return np.where(small, 1.0 + x * x / 6.0, out)


def _resolve_dk(fiber, pump, omega, delta_k):
    return dispersion_delta_k(fiber, pump, omega) if delta_k is None else float(delta_k)


# ---------------------------------------------------------------------------
# closed forms (lossless)
# ---------------------------------------------------------------------------

def _lossless_rows(gp, gm, gamma0, dk, power_w, z, span_end):
    """Closed-form coefficients (z -> span_end), lossless; vectorized in z."""
    z = np.asarray(z, dtype=float)
    ip = power_w
    dz = span_end - z
    kappa = dk + (gp + np.conj(gm)) * ip
    g = np.sqrt(-(kappa / 2.0) ** 2 + gp * np.conj(gm) * ip * ip + 0j)
    x = g * dz
    shc = _shc(x)
    pref_a = np.exp(-0.5j * (dk - (2.0 * gamma0 + gp - np.conj(gm)) * ip) * dz)
    pref_s = np.exp(-0.5j * (dk - (2.0 * gamma0 + gm - np.conj(gp)) * ip) * dz)
    ap2 = ip * np.exp(2j * gamma0 * ip * z)          # A_p(z)^2, lossless
    mu_a = pref_a * (np.cosh(x) + 0.5j * kappa * dz * shc)
    nu_a = pref_a * 1j * gp * ap2 * dz * shc
    xs = np.conj(g) * dz
    shcs = _shc(xs)
    mu_s = pref_s * (np.cosh(xs) + 0.5j * np.conj(kappa) * dz * shcs)
    nu_s = pref_s * 1j * gm * ap2 * dz * shcs
    return mu_a, mu_s, nu_a, nu_s


def _matched_rows(gp, gm, gamma0, power_w, z, span_end):
    """delta_k = 0 lossless coefficients, linear in span length; vectorized in z."""
    z = np.asarray(z, dtype=float)
    ip = power_w
    dz = span_end - z
    pref_a = np.exp(0.5j * (2.0 * gamma0 + gp - np.conj(gm)) * ip * dz)
    pref_s = np.exp(0.5j * (2.0 * gamma0 + gm - np.conj(gp)) * ip * dz)
    ap2 = ip * np.exp(2j * gamma0 * ip * z)
    mu_a = pref_a * (1.0 + 1j * gp * ip * dz)
    nu_a = pref_a * 1j * gp * dz * ap2
    mu_s = pref_s * (1.0 + 1j * gm * ip * dz)
    nu_s = pref_s * 1j * gm * dz * ap2
    return mu_a, mu_s, nu_a, nu_s


def transfer_lossless(fiber: FiberSpec, pump: PumpSpec, profile: RamanProfile,
                      omega: float, z: float = 0.0, span_end: float | None = None,
                      *, delta_k: float | None = None) -> TransferMatrix:
    """Closed-form transfer for lossless fiber, any delta_k."""
    _require_lossless(fiber)
    span_end = fiber.length_m if span_end is None else span_end
    _check_span(fiber, z, span_end)
    dk = _resolve_dk(fiber, pump, omega, delta_k)
    gp, gm = gamma_pair(profile, omega)
    mu_a, mu_s, nu_a, nu_s = _lossless_rows(gp, gm, profile.gamma0, dk,
                                            pump.power_w, z, span_end)
    return TransferMatrix(complex(mu_a), complex(mu_s), complex(nu_a), complex(nu_s),
                          z, span_end, dk)


def transfer_matched(fiber: FiberSpec, pump: PumpSpec, profile: RamanProfile,
                     omega: float, z: float = 0.0, span_end: float | None = None,
                     *, delta_k: float | None = None) -> TransferMatrix:
    """Linear-in-length transfer for lossless, phase-matched (delta_k = 0) fiber."""
    _require_lossless(fiber)
    span_end = fiber.length_m if span_end is None else span_end
    _check_span(fiber, z, span_end)
    dk = _resolve_dk(fiber, pump, omega, delta_k)
    if abs(dk) * (span_end - z) > 1e-6:
        raise ValueError("transfer_matched requires |delta_k|*(L-z) ~ 0; use transfer_lossless")
    gp, gm = gamma_pair(profile, omega)
    mu_a, mu_s, nu_a, nu_s = _matched_rows(gp, gm, profile.gamma0, pump.power_w, z, span_end)
    return TransferMatrix(complex(mu_a), complex(mu_s), complex(nu_a), complex(nu_s),
                          z, span_end, 0.0)


# ---------------------------------------------------------------------------
# distributed-loss series
# ---------------------------------------------------------------------------

def _series_batch(gp, gm, gamma0, fiber, power_w, dk, z0, z1, ctl):
    """True-frame 2x2 maps for a batch of short spans [z0_k, z1_k] via the series.

    Spans must already satisfy the convergence budget (callers split first).
    Returns an (K, 2, 2) complex array.
    """
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    z1 = np.atleast_1d(np.asarray(z1, dtype=float))
    ap, aa, as_ = fiber.alpha_p, fiber.alpha_a, fiber.alpha_s
    dz = z1 - z0
    ip = power_w * np.exp(-ap * z0)
    leff = _zeff(ap, dz)
    ap_leff = ap * leff
    if np.any(ap_leff > _ALPHA_LEFF_GUARD):
        raise NoConvergence("alpha_p * L_eff exceeds the series validity guard per segment")
    gam_l = 0.5j * (gp + np.conj(gm)) * ip * leff
    lam_l = 0.5 * (as_ / 2.0 - aa / 2.0 + 1j * dk) * leff
    xi1_l = 1j * gp * ip * leff
    xi2_l = -1j * np.conj(gm) * ip * leff

    # coefficients pre-multiplied by L_eff^n; two seedings run in lockstep
    shape = z0.shape
    a1 = np.ones(shape, dtype=complex); s1 = np.zeros(shape, dtype=complex)
    a2 = np.zeros(shape, dtype=complex); s2 = np.ones(shape, dtype=complex)
    sum_a1, sum_s1 = a1.copy(), s1.copy()
    sum_a2, sum_s2 = a2.copy(), s2.copy()
    conv_a1 = np.zeros(shape, dtype=complex); conv_s1 = np.zeros(shape, dtype=complex)
    conv_a2 = np.zeros(shape, dtype=complex); conv_s2 = np.zeros(shape, dtype=complex)
    consec = np.zeros(shape, dtype=np.int64)
    converged = False
    for n in range(1, ctl.max_terms + 1):
        conv_a1 = a1 + ap_leff * conv_a1
        conv_s1 = s1 + ap_leff * conv_s1
        conv_a2 = a2 + ap_leff * conv_a2
        conv_s2 = s2 + ap_leff * conv_s2
        a1, s1 = ((gam_l * a1 + xi1_l * s1 + lam_l * conv_a1) / n,
                  (-gam_l * s1 + xi2_l * a1 - lam_l * conv_s1) / n)
        a2, s2 = ((gam_l * a2 + xi1_l * s2 + lam_l * conv_a2) / n,
                  (-gam_l * s2 + xi2_l * a2 - lam_l * conv_s2) / n)
        sum_a1 += a1; sum_s1 += s1
        sum_a2 += a2; sum_s2 += s2
        term = np.maximum(np.maximum(np.abs(a1), np.abs(s1)),
                          np.maximum(np.abs(a2), np.abs(s2)))
        scale = np.maximum.reduce([np.abs(sum_a1), np.abs(sum_s1),
                                   np.abs(sum_a2), np.abs(sum_s2), np.full(shape, 1e-300)])
        consec = np.where(term < ctl.rel_tolerance * scale, consec + 1, 0)
        if np.all(consec >= 2):
            converged = True
            break
    if not converged:
        worst = float(np.max(term / scale))
        raise NoConvergence(
            f"series did not satisfy the truncation rule within {ctl.max_terms} terms "
            f"(worst residual term {worst:.3e})")

    p = (1j * (gamma0 + (gp - np.conj(gm)) / 2.0) * ip * leff
         - 0.5j * dk * dz - (aa + as_) * dz / 4.0)
    ps = (1j * (-gamma0 + (gp - np.conj(gm)) / 2.0) * ip * leff
          + 0.5j * dk * dz - (aa + as_) * dz / 4.0)
    mu_a = np.exp(p) * sum_a1
    nu_a0 = np.exp(p) * sum_a2
    mu_s = np.conj(np.exp(ps) * sum_s2)
    nu_s0 = np.conj(np.exp(ps) * sum_s1)
    # local pump phase and mismatch phase of the stationary frame
    phase = np.exp(2j * gamma0 * power_w * _zeff(ap, z0) - 1j * dk * z0)
    T = np.empty(shape + (2, 2), dtype=complex)
    T[..., 0, 0] = mu_a
    T[..., 0, 1] = nu_a0 * phase
    T[..., 1, 0] = np.conj(nu_s0 * phase)
    T[..., 1, 1] = np.conj(mu_s)
    return T


def _split_counts(gp, gm, fiber, power_w, dk, z0, dz, max_total=5_000_000):
    """Number of series subsegments per span so each stays within budget."""
    ap, aa, as_ = fiber.alpha_p, fiber.alpha_a, fiber.alpha_s
    ip = power_w * np.exp(-ap * np.asarray(z0, dtype=float))
    leff = _zeff(ap, np.asarray(dz, dtype=float))
    coupling = (0.5 * abs(gp + np.conj(gm)) + max(abs(gp), abs(gm))) * ip * leff
    mismatch = 0.5 * abs(as_ / 2.0 - aa / 2.0 + 1j * dk) * np.asarray(dz, dtype=float)
    n = np.ceil((coupling + mismatch) / _SEGMENT_SCALE)
    n = np.maximum(n, np.ceil(ap * leff / (0.5 * _ALPHA_LEFF_GUARD)))
    n = np.maximum(n, 1).astype(np.int64)
    if int(np.sum(n)) > max_total:
        raise NoConvergence("span requires an unreasonable number of series subsegments")
    return n


def _suffix_products(mats):
    """S[k] = M[-1] @ ... @ M[k] for an (N,2,2) stack (later factors on the left)."""
    S = mats.copy()
    n = S.shape[0]
    t = 1
    while t < n:
        S[: n - t] = np.matmul(S[t:], S[: n - t])
        t *= 2
    return S


def _series_rows(gp, gm, gamma0, fiber, pump, dk, zs, span_end, ctl):
    """Paper-convention coefficient rows (z -> span_end) for sorted zs, lossy route."""
    zs = np.asarray(zs, dtype=float)
    bounds = np.concatenate([zs, [span_end]])
    z0 = bounds[:-1]
    dz = np.diff(bounds)
    counts = _split_counts(gp, gm, fiber, pump.power_w, dk, z0, dz)
    total = int(np.sum(counts))
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    step = np.repeat(dz / counts, counts)
    intra = np.arange(total) - np.repeat(starts, counts)
    sub_z0 = np.repeat(z0, counts) + intra * step
    sub_z1 = sub_z0 + step
    # zero-length guard for coincident nodes
    sub_z1 = np.maximum(sub_z1, sub_z0)
    mats = _series_batch(gp, gm, gamma0, fiber, pump.power_w, dk, sub_z0, sub_z1, ctl)
    suff = _suffix_products(mats)
    T = suff[starts]
    ph = np.exp(1j * dk * zs)
    mu_a = T[:, 0, 0]
    nu_a = T[:, 0, 1] * ph
    mu_s = np.conj(T[:, 1, 1])
    nu_s = np.conj(T[:, 1, 0]) * ph
    return mu_a, mu_s, nu_a, nu_s


def transfer_series(fiber: FiberSpec, pump: PumpSpec, profile: RamanProfile,
                    omega: float, z: float = 0.0, span_end: float | None = None,
                    ctl: SeriesControl | None = None,
                    *, delta_k: float | None = None) -> TransferMatrix:
    """Distributed-loss transfer via the effective-length power series.

    Long or strongly phase-mismatched spans are split into subsegments that
    each respect the series budget and are composed as Bogoliubov maps.
    """
    span_end = fiber.length_m if span_end is None else span_end
    _check_span(fiber, z, span_end)
    ctl = ctl or _DEFAULT_CTL
    dk = _resolve_dk(fiber, pump, omega, delta_k)
    gp, gm = gamma_pair(profile, omega)
    mu_a, mu_s, nu_a, nu_s = _series_rows(gp, gm, profile.gamma0, fiber, pump, dk,
                                          np.array([z]), span_end, ctl)
    return TransferMatrix(complex(mu_a[0]), complex(mu_s[0]),
                          complex(nu_a[0]), complex(nu_s[0]), z, span_end, dk)


# ---------------------------------------------------------------------------
# dispatcher
# ---------------------------------------------------------------------------

def transfer(fiber: FiberSpec, pump: PumpSpec, profile: RamanProfile,
             omega: float, z: float = 0.0, span_end: float | None = None,
             ctl: SeriesControl | None = None,
             *, delta_k: float | None = None) -> TransferMatrix:
    """Route to the matched, lossless, or series solution for the given span."""
    span_end = fiber.length_m if span_end is None else span_end
    dk = _resolve_dk(fiber, pump, omega, delta_k)
    if fiber.lossless:
        if abs(dk) * (span_end - z) < _MATCHED_PHASE_TOL:
            return transfer_matched(fiber, pump, profile, omega, z, span_end, delta_k=0.0)
        return transfer_lossless(fiber, pump, profile, omega, z, span_end, delta_k=dk)
    return transfer_series(fiber, pump, profile, omega, z, span_end, ctl, delta_k=dk)


def transfer_profile(fiber: FiberSpec, pump: PumpSpec, profile: RamanProfile,
                     omega: float, zs, span_end: float | None = None,
                     ctl: SeriesControl | None = None,
                     *, delta_k: float | None = None):
    """Coefficient arrays (mu_a, mu_s, nu_a, nu_s) from each z in sorted ``zs`` to the end.

    This is the bulk evaluation the noise quadrature runs on; the lossy route
    shares one segment sweep across all rows.
    """
    span_end = fiber.length_m if span_end is None else span_end
    zs = np.asarray(zs, dtype=float)
    if zs.size and (zs[0] < 0 or zs[-1] > span_end or np.any(np.diff(zs) < 0)):
        raise OutOfRange("zs must be sorted within [0, span_end]")
    dk = _resolve_dk(fiber, pump, omega, delta_k)
    gp, gm = gamma_pair(profile, omega)
    if fiber.lossless:
        if abs(dk) * span_end < _MATCHED_PHASE_TOL:
            return _matched_rows(gp, gm, profile.gamma0, pump.power_w, zs, span_end)
        return _lossless_rows(gp, gm, profile.gamma0, dk, pump.power_w, zs, span_end)
    return _series_rows(gp, gm, profile.gamma0, fiber, pump, dk, zs, span_end,
                        ctl or _DEFAULT_CTL)


def _require_lossless(fiber: FiberSpec):
    if not fiber.lossless:
        raise ValueError("closed forms require a lossless fiber (all alpha = 0)")


def _check_span(fiber: FiberSpec, z: float, span_end: float):
    if not 0.0 <= z <= span_end <= fiber.length_m + 1e-9:
        raise OutOfRange(
            f"span [{z:g}, {span_end:g}] outside the fiber [0, {fiber.length_m:g}]")
