"""Langevin noise integrals, photocurrent statistics, and the noise figure.

All quantum formulas work in photon-flux units: the pump amplitude is
rescaled by 1/sqrt(hbar*omega_p) and the nonlinear coefficient by
hbar*omega_p, so |amplitude|^2 counts photons/s and the nine integrated
noise quantities are dimensionless.

Phase bookkeeping: with nu carrying the local pump phase (A_p(z)^2 factor)
but not the frame phase exp(-i delta_k z), the amplified-phonon integrands
close over the invariant combinations

    w_j(z) = mu_j(z,L) Ap(z) - nu_j(z,L) Ap*(z),      j = a, s

and every cross integral (r_x, c_x1, c_x2) carries an explicit
exp(-i delta_k z).  This choice, together with B2 = B1*, preserves the
output commutators; it is exercised directly by the verification suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import hbar as HBAR
from scipy.optimize import minimize_scalar

from .classical import SignalInput, gain_optimal_input
from .errors import (FopaNumericalError, NonPositiveDetuning, QuadratureFailure,
                     ZeroInput)
from .fiber import (Environment, FiberSpec, PumpSpec, RamanProfile, gamma_pair,
                    thermal_occupation, to_photon_flux_units)
from .meanfield import (SeriesControl, TransferMatrix, pump_at, transfer,
                        transfer_profile)
from .fiber import delta_k as dispersion_delta_k

__all__ = [
    "NoiseIntegrals",
    "QuadratureControl",
    "VarianceBreakdown",
    "noise_integrals",
    "output_powers",
    "photocurrent_variance",
    "noise_figure",
    "nf_degenerate_limit",
    "minimize_noise_figure",
    "noise_figure_pipeline",
]


@dataclass(frozen=True)
class QuadratureControl:
    """Adaptive-quadrature budget: relative tolerance and max transfer evaluations."""

    rel_tolerance: float = 1e-9
    max_evals: int = 20_000

    def __post_init__(self):
        if not self.rel_tolerance > 0:
            raise ValueError("rel_tolerance must be positive")
        if self.max_evals < 15:
            raise ValueError("max_evals must allow at least one panel")


_DEFAULT_QUAD = QuadratureControl()


@dataclass(frozen=True)
class NoiseIntegrals:
    """The nine z-integrated Langevin noise quantities (dimensionless)."""

    r_a_sq: float = 0.0
    r_s_sq: float = 0.0
    c_a1_sq: float = 0.0
    c_a2_sq: float = 0.0
    c_s1_sq: float = 0.0
    c_s2_sq: float = 0.0
    r_x: complex = 0j
    c_x1: complex = 0j
    c_x2: complex = 0j

    def __post_init__(self):
        for name in ("r_a_sq", "r_s_sq", "c_a1_sq", "c_a2_sq", "c_s1_sq", "c_s2_sq"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def lossless(self) -> bool:
        return (self.c_a1_sq == 0.0 and self.c_a2_sq == 0.0 and self.c_s1_sq == 0.0
                and self.c_s2_sq == 0.0 and self.c_x1 == 0j and self.c_x2 == 0j)


@dataclass(frozen=True)
class VarianceBreakdown:
    """Output photocurrent statistics; nf fields are filled by noise_figure."""

    p_a: float
    p_s: float
    var_pi: float
    var_ps: float
    nf_linear: float | None = None
    nf_db: float | None = None


# 7-15 Gauss-Kronrod pair on [-1, 1]
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
])
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])          # 15 ascending
_W_K = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_W_G = np.zeros(15)
_W_G[1:-1:2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])    # Gauss subset


class _Panel:
    __slots__ = ("a", "b", "k15", "err", "mass")

    def __init__(self, a, b):
        self.a = a
        self.b = b
        self.k15 = None   # per-integrand Kronrod estimate
        self.err = None   # per-integrand |K15-G7|
        self.mass = None  # per-integrand integral of |f|


def _panel_nodes(panels):
    zs = np.empty(len(panels) * 15)
    for i, p in enumerate(panels):
        half = 0.5 * (p.b - p.a)
        zs[i * 15:(i + 1) * 15] = 0.5 * (p.a + p.b) + half * _NODES
    return zs


def _apply_rule(panels, values):
    """Fill K15/err/mass for each panel from stacked integrand values."""
    n_int = values.shape[0]
    for i, p in enumerate(panels):
        half = 0.5 * (p.b - p.a)
        block = values[:, i * 15:(i + 1) * 15]
        k15 = half * block @ _W_K
        g7 = half * block @ _W_G
        p.k15 = k15
        p.err = np.abs(k15 - g7)
        p.mass = half * np.abs(block) @ _W_K


def noise_integrals(fiber: FiberSpec, pump: PumpSpec, profile: RamanProfile,
                    omega: float, span_end: float | None = None,
                    quad: QuadratureControl | None = None,
                    env: Environment | None = None,
                    *, delta_k: float | None = None,
                    ctl: SeriesControl | None = None) -> NoiseIntegrals:
    """Adaptively integrate the nine Langevin noise quantities over [0, span_end].

    ``env`` is accepted for signature uniformity; the integrals themselves do
    not depend on temperature (thermal occupations multiply them later).
    """
    if omega <= 0:
        raise NonPositiveDetuning("noise integrals are defined for Omega > 0")
    span_end = fiber.length_m if span_end is None else span_end
    quad = quad or _DEFAULT_QUAD
    dk = (dispersion_delta_k(fiber, pump, omega) if delta_k is None else float(delta_k))
    gp, gm = gamma_pair(profile, omega)
    gp_bar = to_photon_flux_units(gp, pump.wavelength_m)
    gm_bar = to_photon_flux_units(gm, pump.wavelength_m)
    hw = HBAR * pump.omega

    raman_on = gp_bar.imag != 0.0 and pump.power_w > 0.0
    names = []
    if raman_on:
        names += ["r_a", "r_s", "r_x"]
    if fiber.alpha_a != 0.0:
        names += ["c_a1", "c_s2", "c_x1"]
    if fiber.alpha_s != 0.0:
        names += ["c_s1", "c_a2", "c_x2"]
    if not names or span_end == 0.0:
        return NoiseIntegrals()

    def evaluate(zs_raw):
        order = np.argsort(zs_raw, kind="stable")
        inv = np.empty_like(order)
        inv[order] = np.arange(order.size)
        zs = zs_raw[order]
        mu_a, mu_s, nu_a, nu_s = transfer_profile(fiber, pump, profile, omega, zs,
                                                  span_end, ctl, delta_k=dk)
        ap = pump_at(pump, fiber, profile, zs) / math.sqrt(hw)
        apc = np.conj(ap)
        ph = np.exp(-1j * dk * zs)
        rows = {}
        if raman_on:
            w_a = mu_a * ap - nu_a * apc
            w_s = mu_s * ap - nu_s * apc
            rows["r_a"] = np.abs(w_a) ** 2
            rows["r_s"] = np.abs(w_s) ** 2
            rows["r_x"] = -ph * w_a * w_s
        if fiber.alpha_a != 0.0:
            rows["c_a1"] = np.abs(mu_a) ** 2
            rows["c_s2"] = np.abs(nu_s) ** 2
            rows["c_x1"] = ph * mu_a * nu_s
        if fiber.alpha_s != 0.0:
            rows["c_s1"] = np.abs(mu_s) ** 2
            rows["c_a2"] = np.abs(nu_a) ** 2
            rows["c_x2"] = ph * nu_a * mu_s
        return np.stack([rows[n] for n in names]).astype(complex)

    # seed panels: resolve the mismatch oscillation if present
    periods = abs(dk) * span_end / (2.0 * math.pi)
    n0 = int(min(max(8, math.ceil(periods / 2.0)), quad.max_evals // 15))
    edges = np.linspace(0.0, span_end, n0 + 1)
    panels = [_Panel(edges[i], edges[i + 1]) for i in range(n0)]
    _apply_rule(panels, evaluate(_panel_nodes(panels)))
    used = n0 * 15

    for _round in range(200):
        totals = np.sum([p.k15 for p in panels], axis=0)
        masses = np.sum([p.mass for p in panels], axis=0)
        errs = np.sum([p.err for p in panels], axis=0)
        denom = np.maximum(np.abs(totals), 1e-6 * masses) + 1e-300
        rel = errs / denom
        if np.all(rel <= quad.rel_tolerance):
            break
        # split every panel whose worst normalized error exceeds its fair share
        share = quad.rel_tolerance / (2.0 * len(panels))
        split = [p for p in panels
                 if np.max(p.err / denom) > share and (p.b - p.a) > 1e-9 * span_end]
        if not split:
            split = sorted(panels, key=lambda p: -np.max(p.err / denom))[:1]
        if used + 30 * len(split) > quad.max_evals:
            raise QuadratureFailure(
                f"noise quadrature needs more than max_evals={quad.max_evals} transfer "
                f"evaluations (relative error {np.max(rel):.2e}, target {quad.rel_tolerance:.2e})")
        fresh = []
        for p in split:
            panels.remove(p)
            mid = 0.5 * (p.a + p.b)
            fresh += [_Panel(p.a, mid), _Panel(mid, p.b)]
        _apply_rule(fresh, evaluate(_panel_nodes(fresh)))
        panels += fresh
        used += 30 * len(split)
    else:
        raise QuadratureFailure("noise quadrature failed to settle in 200 rounds")

    got = dict(zip(names, totals))
    out = {}
    out["r_a_sq"] = 2.0 * gp_bar.imag * got.get("r_a", 0j).real if raman_on else 0.0
    out["r_s_sq"] = -2.0 * gm_bar.imag * got.get("r_s", 0j).real if raman_on else 0.0
    out["r_x"] = 2.0 * gp_bar.imag * got.get("r_x", 0j) if raman_on else 0j
    out["c_a1_sq"] = fiber.alpha_a * got.get("c_a1", 0j).real
    out["c_s2_sq"] = fiber.alpha_a * got.get("c_s2", 0j).real
    out["c_x1"] = fiber.alpha_a * got.get("c_x1", 0j)
    out["c_s1_sq"] = fiber.alpha_s * got.get("c_s1", 0j).real
    out["c_a2_sq"] = fiber.alpha_s * got.get("c_a2", 0j).real
    out["c_x2"] = fiber.alpha_s * got.get("c_x2", 0j)
    # clip tiny negative round-off on the non-negative quantities
    for key in ("r_a_sq", "r_s_sq", "c_a1_sq", "c_a2_sq", "c_s1_sq", "c_s2_sq"):
        if out[key] < 0:
            if out[key] < -1e-12:
                raise FopaNumericalError(f"{key} came out significantly negative: {out[key]:g}")
            out[key] = 0.0
    return NoiseIntegrals(**out)


def output_powers(tm: TransferMatrix, sig: SignalInput) -> tuple[float, float]:
    """Mean output photon fluxes (P_a, P_s) for a coherent two-frequency input."""
    aa = tm.mu_a * sig.zeta_a + tm.nu_a * np.conj(sig.zeta_s)
    as_ = tm.mu_s * sig.zeta_s + tm.nu_s * np.conj(sig.zeta_a)
    return abs(aa) ** 2, abs(as_) ** 2


def _b_coefficients(tm: TransferMatrix, ni: NoiseIntegrals, n_th: float):
    b_a = (abs(tm.mu_a) ** 2 + abs(tm.nu_a) ** 2 + (2.0 * n_th + 1.0) * ni.r_a_sq
           + ni.c_a1_sq + ni.c_a2_sq)
    b_s = (abs(tm.mu_s) ** 2 + abs(tm.nu_s) ** 2 + (2.0 * n_th + 1.0) * ni.r_s_sq
           + ni.c_s1_sq + ni.c_s2_sq)
    b_1 = ni.c_x1 + ni.r_x * (n_th + 1.0) + tm.mu_a * tm.nu_s
    b_2 = (np.conj(ni.c_x2) + np.conj(ni.r_x) * n_th
           + np.conj(tm.mu_s) * np.conj(tm.nu_a))
    return b_a, b_s, b_1, b_2


def photocurrent_variance(tm: TransferMatrix, ni: NoiseIntegrals,
                          sig: SignalInput, n_th: float) -> VarianceBreakdown:
    """Phase-insensitive and phase-sensitive parts of the photocurrent variance.

    Assumes direct detection of both sidebands with the 2*Omega beat outside
    the detector bandwidth.
    """
    b_a, b_s, b_1, b_2 = _b_coefficients(tm, ni, n_th)
    aa = tm.mu_a * sig.zeta_a + tm.nu_a * np.conj(sig.zeta_s)
    as_ = tm.mu_s * sig.zeta_s + tm.nu_s * np.conj(sig.zeta_a)
    p_a, p_s = abs(aa) ** 2, abs(as_) ** 2
    var_pi = p_a * b_a + p_s * b_s
    q = aa * as_
    var_ps_c = 2.0 * np.conj(q) * b_1 + 2.0 * q * b_2
    scale = max(abs(var_ps_c), var_pi, 1e-300)
    if abs(var_ps_c.imag) > 1e-10 * scale:
        raise FopaNumericalError(
            f"phase-sensitive variance has imaginary residue {var_ps_c.imag:g} "
            f"(relative {abs(var_ps_c.imag)/scale:g}); inconsistent noise integrals")
    return VarianceBreakdown(p_a=p_a, p_s=p_s, var_pi=var_pi, var_ps=float(var_ps_c.real))


def noise_figure(tm: TransferMatrix, ni: NoiseIntegrals,
                 sig: SignalInput, n_th: float) -> VarianceBreakdown:
    """SNR_in/SNR_out for direct detection of the two-frequency signal."""
    flux_in = sig.total_flux
    if flux_in <= 0.0:
        raise ZeroInput("noise figure requires nonzero input power")
    parts = photocurrent_variance(tm, ni, sig, n_th)
    nf = flux_in * (parts.var_pi + parts.var_ps) / (parts.p_a + parts.p_s) ** 2
    if not nf > 0.0:
        raise FopaNumericalError(f"non-positive noise figure {nf:g}")
    return replace(parts, nf_linear=nf, nf_db=10.0 * math.log10(nf))


def nf_degenerate_limit(phi_nl: float, raman_const: float) -> float:
    """Zero-detuning limit of the gain-optimal phase-sensitive noise figure.

    ``raman_const`` is 4 k T gbar_i'(0) / (hbar gbar_0).  The curve rises from
    NF = 1 at phi_nl = 0 to a maximum slightly above one and falls back to 1
    in the high-gain limit:

        NF = 1 + raman_const * phi * (1 - phi/sqrt(1 + phi^2))

    This is the exact phi-dependence produced by the variance formulas with
    the optimal (equal-split) input as Omega -> 0; the verification suite
    checks the full pipeline against it.
    """
    if phi_nl < 0:
        raise ValueError("phi_nl must be >= 0")
    return 1.0 + raman_const * phi_nl * (1.0 - phi_nl / math.hypot(1.0, phi_nl))


def minimize_noise_figure(tm: TransferMatrix, ni: NoiseIntegrals, n_th: float,
                          total_flux: float = 1.0,
                          tol: float = 1e-6) -> tuple[SignalInput, VarianceBreakdown]:
    """Bounded 2-D search for the NF-minimizing input (sum phase x power split).

    Golden-section on each axis in turn; the NF optimum need not coincide with
    the classical gain optimum, which only seeds the search.
    """
    from .classical import PsaMode, optimal_power_split, optimal_sum_phase

    def build(theta, x):
        half = np.exp(0.5j * theta)
        return SignalInput(zeta_a=math.sqrt(max(x, 0.0) * total_flux) * half,
                           zeta_s=math.sqrt(max(1.0 - x, 0.0) * total_flux) * half)

    def nf_of(theta, x):
        return noise_figure(tm, ni, build(theta, x), n_th).nf_linear

    try:
        theta = optimal_sum_phase(tm, PsaMode.AMPLIFY)
        x = optimal_power_split(tm, PsaMode.AMPLIFY)
    except Exception:
        theta, x = 0.0, 0.5
    best = nf_of(theta, x)
    for _ in range(40):
        res = minimize_scalar(lambda t: nf_of(t, x), bounds=(theta - math.pi, theta + math.pi),
                              method="bounded", options={"xatol": tol})
        theta = float(res.x)
        res = minimize_scalar(lambda xx: nf_of(theta, xx), bounds=(0.0, 1.0),
                              method="bounded", options={"xatol": tol})
        x = float(res.x)
        now = nf_of(theta, x)
        if best - now < tol * best:
            best = min(best, now)
            break
        best = now
    sig = build(theta, x)
    return sig, noise_figure(tm, ni, sig, n_th)


def noise_figure_pipeline(fiber: FiberSpec, pump: PumpSpec, profile: RamanProfile,
                          omega: float, span_end: float | None = None,
                          env: Environment | None = None,
                          quad: QuadratureControl | None = None,
                          sig: SignalInput | None = None,
                          *, delta_k: float | None = None,
                          ctl: SeriesControl | None = None) -> VarianceBreakdown:
    """Transfer + integrals + NF in one call; defaults to the gain-optimal input."""
    env = env or Environment()
    span_end = fiber.length_m if span_end is None else span_end
    tm = transfer(fiber, pump, profile, omega, 0.0, span_end, ctl, delta_k=delta_k)
    ni = noise_integrals(fiber, pump, profile, omega, span_end, quad, env,
                         delta_k=delta_k, ctl=ctl)
    n_th = thermal_occupation(omega, env)
    if sig is None:
        sig = gain_optimal_input(tm)
    return noise_figure(tm, ni, sig, n_th)
