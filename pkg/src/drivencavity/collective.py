"""Many-atom regime with the dipoles adiabatically eliminated.

Below saturation the atoms act as a linear medium: the cavity field obeys
a damped, driven harmonic-oscillator master equation with an atom-induced
decay rate gamma' = N s gamma, a Stark-shifted detuning
delta' = delta_c - N s Delta and an effective drive xi mediated by the
collective dipole.  Everything here is closed-form in those quantities.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import (
    K_WAVENUMBER,
    RegimeWarning,
    SystemParams,
    coupling_profile,
)

HBAR = 1.0


@dataclass(frozen=True)
class EffectiveFieldParams:
    """Coefficients of the field master equation after eliminating the atoms."""

    s_n: tuple[float, ...]
    s_mean: float
    gamma_prime: float
    delta_prime: float
    xi: complex
    regime_valid: bool

    @property
    def linewidth(self) -> float:
        # total field decay rate; kappa is folded in by the caller
        return self.gamma_prime


@dataclass(frozen=True)
class PatternSpec:
    """In-phase atomic pattern: N atoms at equivalent antinode positions."""

    n_atoms: int
    parity: int = 0  # 0 -> even pattern (cos kx = +1), 1 -> odd

    def __post_init__(self):
        if self.n_atoms < 1:
            raise ValueError("pattern needs at least one atom")
        if self.parity not in (0, 1):
            raise ValueError("parity must be 0 (even) or 1 (odd)")

    def positions(self) -> np.ndarray:
        # integer multiples of lambda keep g(x_n) = +-g0 exactly
        base = 0.0 if self.parity == 0 else 0.5
        return base + np.arange(self.n_atoms, dtype=float)


def _saturation_ok(params: SystemParams) -> bool:
    n = params.n_atoms
    lhs = math.hypot(params.gamma / 2, params.delta)
    return lhs > 3 * math.sqrt(n) * max(abs(params.g0), abs(params.omega))


def effective_field_params(params: SystemParams) -> EffectiveFieldParams:
    """Adiabatic-elimination coefficients for an arbitrary set of positions."""
    prof = coupling_profile(params)
    g = prof.g_n
    denom = (params.gamma / 2) ** 2 + params.delta ** 2
    s_n = g ** 2 / denom
    s = float(np.mean(s_n))
    n = params.n_atoms
    gsq = float(np.sum(g ** 2))
    if gsq == 0:
        raise ValueError("all atoms sit at nodes; the medium does not couple")
    drive = params.omega * np.sum(g * np.exp(1j * prof.phi_n))
    xi = n * s * (params.delta - 0.5j * params.gamma) * drive / gsq
    return EffectiveFieldParams(
        s_n=tuple(float(v) for v in s_n),
        s_mean=s,
        gamma_prime=n * s * params.gamma,
        delta_prime=params.delta_c - n * s * params.delta,
        xi=complex(xi),
        regime_valid=_saturation_ok(params),
    )


def adiabatic_alpha(params: SystemParams,
                    eff: EffectiveFieldParams | None = None) -> complex:
    """Steady coherent amplitude of the eliminated-atom field equation."""
    if eff is None:
        eff = effective_field_params(params)
    if not eff.regime_valid:
        warnings.warn("atoms are not driven well below saturation",
                      RegimeWarning, stacklevel=2)
    return -1j * eff.xi / (
        (eff.gamma_prime + params.kappa) / 2 - 1j * eff.delta_prime)


def _pattern_params(pattern: PatternSpec, g0: float, omega: float,
                    kappa: float, delta: float, delta_c: float,
                    gamma: float) -> SystemParams:
    return SystemParams(positions=tuple(pattern.positions()),
                        g0=g0, omega=omega, kappa=kappa, delta=delta,
                        delta_c=delta_c, gamma=gamma)


def in_phase_alpha(pattern: PatternSpec, params: SystemParams) -> complex:
    """Cavity amplitude when all atoms scatter in phase (periodic pattern).

    alpha_0 = -(Omega/g) N s (gamma/2 + i Delta)
              / [N s (gamma/2 + i Delta) + kappa/2 - i delta_c]
    with g the common coupling at the pattern sites.  For kappa = 0 and
    delta_c = 0 this reduces to -Omega/g independent of N and Delta.
    """
    gbar = params.g0 if pattern.parity == 0 else -params.g0
    n = pattern.n_atoms
    s = gbar ** 2 / ((params.gamma / 2) ** 2 + params.delta ** 2)
    num = n * s * (params.gamma / 2 + 1j * params.delta)
    return -(params.omega / gbar) * num / (
        num + params.kappa / 2 - 1j * params.delta_c)


def excited_population(pattern: PatternSpec, params: SystemParams) -> float:
    """Excited-state population of one atom in the in-phase pattern.

    Vanishes at kappa = 0, delta_c = 0: the cavity field interferes
    destructively with the pump at every atom.
    """
    gbar = params.g0
    n = pattern.n_atoms
    denom0 = (params.gamma / 2) ** 2 + params.delta ** 2
    s = gbar ** 2 / denom0
    gp = n * s * params.gamma
    dp = params.delta_c - n * s * params.delta
    return (params.omega ** 2 / denom0) \
        * (params.kappa ** 2 / 4 + params.delta_c ** 2) \
        / ((gp + params.kappa) ** 2 / 4 + dp ** 2)


def emission_rates(pattern: PatternSpec, params: SystemParams
                   ) -> tuple[float, float]:
    """(I_cav, total I_at) for the in-phase pattern, from the closed forms."""
    alpha = in_phase_alpha(pattern, params)
    i_cav = params.kappa * abs(alpha) ** 2
    i_at = pattern.n_atoms * params.gamma * excited_population(pattern, params)
    return i_cav, i_at


def critical_atom_number(params: SystemParams) -> float:
    """Crossover atom number between the free-space-like and the
    cavity-dominated regime.

    The atoms dominate once their contribution to the field response,
    N s sqrt(gamma^2 + Delta^2), exceeds the bare cavity rate kappa.  At
    Delta = 0 this reduces to kappa/(s gamma) = 1/(2 C_1) with
    C_1 = 2 g0^2 / (kappa gamma); for |Delta| >> gamma it tends to
    |Delta| kappa / g0^2.
    """
    if params.g0 == 0:
        raise ValueError("g0 must be nonzero")
    s = params.g0 ** 2 / ((params.gamma / 2) ** 2 + params.delta ** 2)
    return params.kappa / (s * math.hypot(params.gamma, params.delta))


@dataclass(frozen=True)
class ForceCoefficients:
    """Semiclassical light forces on atom n along the cavity axis."""

    u0: float          # cavity light shift g0^2 Delta / (Delta^2 + gamma^2/4)
    gamma0: float      # dissipation rate g0^2 (gamma/2) / (Delta^2 + gamma^2/4)
    eta_eff: complex   # pump-mediated drive Omega g0 / (-i Delta + gamma/2)


def force_coefficients(params: SystemParams) -> ForceCoefficients:
    denom = params.delta ** 2 + params.gamma ** 2 / 4
    return ForceCoefficients(
        u0=params.g0 ** 2 * params.delta / denom,
        gamma0=params.g0 ** 2 * (params.gamma / 2) / denom,
        eta_eff=params.omega * params.g0 / (-1j * params.delta
                                            + params.gamma / 2),
    )


def _sin_turns(u: float) -> float:
    """sin(2 pi u), exactly zero at the half-integer turns."""
    if 2.0 * u == round(2.0 * u):
        return 0.0
    return math.sin(2.0 * math.pi * u)


def semiclassical_force(x_n: float, alpha: complex,
                        params: SystemParams) -> float:
    """Force on an atom at x_n given the cavity amplitude alpha:

    F = hbar k U0 |alpha|^2 sin(2 k x) + 2 hbar k Im{eta_eff* alpha} sin(k x)

    It vanishes identically at the antinodes kx = 0, pi, which are the
    candidate equilibrium sites of the self-organized patterns.
    """
    c = force_coefficients(params)
    k = K_WAVENUMBER
    return HBAR * k * c.u0 * abs(alpha) ** 2 * _sin_turns(2.0 * x_n) \
        + 2 * HBAR * k * (np.conj(c.eta_eff) * alpha).imag * _sin_turns(x_n)


def restoring_coefficient(pattern: PatternSpec, params: SystemParams) -> float:
    """Linear force coefficient for a small displacement off an antinode:
    delta f ~ 2 hbar k^2 (Omega/g0)^2 (delta_c / N) delta x.

    Negative (restoring) for delta_c < 0, independent of Delta.  Valid when
    |delta_c|/N is small enough that the intracavity field stays pinned at
    -+ Omega/g0.
    """
    if params.g0 == 0:
        raise ValueError("g0 must be nonzero")
    eff = effective_field_params(_pattern_params(
        pattern, params.g0, params.omega, params.kappa, params.delta,
        params.delta_c, params.gamma))
    if abs(params.delta_c) > 0.5 * (eff.gamma_prime + params.kappa):
        warnings.warn("|delta_c| is not small against the field linewidth; "
                      "the linearized force is unreliable",
                      RegimeWarning, stacklevel=2)
    return 2 * HBAR * K_WAVENUMBER ** 2 * (params.omega / params.g0) ** 2 \
        * params.delta_c / pattern.n_atoms


def pattern_field(x: float, params: SystemParams) -> complex:
    """Value of the interference-cancelling amplitude -Omega e^{i phi(x)}/g(x)
    at position x; constant on lambda-periodic patterns when the pump is
    perpendicular to the cavity axis.
    """
    g = params.g0 * math.cos(K_WAVENUMBER * x)
    if g == 0:
        raise ValueError("position is at a node of the cavity mode")
    phi = K_WAVENUMBER * x * math.cos(params.theta)
    return -params.omega * np.exp(1j * phi) / g
