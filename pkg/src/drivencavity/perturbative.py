"""Small-kappa perturbation theory for one atom in a lossy cavity.

Works in the displaced frame where the drive is absorbed into the cavity
field.  The effective non-Hermitian Hamiltonian splits as H0 + kappa*V;
its biorthogonal eigensystem turns every time integral of the Dyson
expansion into a finite sum of terms c * t^p * exp(mu t), which are
integrated in closed form (no numerical quadrature).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .model import RegimeWarning, SystemParams, beta_profile, coupling_profile
from .operators import (
    DensityMatrix,
    Operator,
    SpaceDescriptor,
    annihilation,
    atomic_lowering,
    basis_state,
    displacement,
    identity,
)

# exponents closer than this are merged / treated as resonant
_MU_TOL = 1e-10


class DefectiveMatrixError(ValueError):
    """Left/right eigenvector normalization collapsed; matrix is defective."""


# ---------------------------------------------------------------------------
# exponential polynomials: finite sums  c * t^p * exp(mu t)
# ---------------------------------------------------------------------------

class ExpPoly:
    """Sum of c * t^p * exp(mu t) terms, closed under +, * and int_0^t."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[complex, list[complex]] | None = None):
        # terms maps mu -> polynomial coefficients [c0, c1, ...] in t
        self.terms: dict[complex, list[complex]] = terms or {}

    @staticmethod
    def _key(mu: complex) -> complex:
        return complex(round(mu.real / _MU_TOL) * _MU_TOL,
                       round(mu.imag / _MU_TOL) * _MU_TOL)

    @classmethod
    def term(cls, c: complex, mu: complex = 0.0, power: int = 0) -> "ExpPoly":
        coeffs = [0.0] * power + [c]
        return cls({cls._key(mu): [complex(v) for v in coeffs]})

    @classmethod
    def zero(cls) -> "ExpPoly":
        return cls()

    @classmethod
    def one(cls) -> "ExpPoly":
        return cls.term(1.0)

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        out = {mu: list(c) for mu, c in self.terms.items()}
        for mu, c in other.terms.items():
            if mu in out:
                a = out[mu]
                n = max(len(a), len(c))
                a += [0.0] * (n - len(a))
                for p, v in enumerate(c):
                    a[p] += v
            else:
                out[mu] = list(c)
        return ExpPoly(out)

    def scale(self, s: complex) -> "ExpPoly":
        return ExpPoly({mu: [s * v for v in c] for mu, c in self.terms.items()})

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        out = ExpPoly()
        for mu1, c1 in self.terms.items():
            for mu2, c2 in other.terms.items():
                conv = [0.0j] * (len(c1) + len(c2) - 1)
                for p1, v1 in enumerate(c1):
                    if v1 == 0:
                        continue
                    for p2, v2 in enumerate(c2):
                        conv[p1 + p2] += v1 * v2
                out = out + ExpPoly({self._key(mu1 + mu2): conv})
        return out

    def conj(self) -> "ExpPoly":
        return ExpPoly({self._key(np.conj(mu)): [np.conj(v) for v in c]
                        for mu, c in self.terms.items()})

    def shift(self, dmu: complex) -> "ExpPoly":
        """Multiply by exp(dmu * t)."""
        return ExpPoly({self._key(mu + dmu): list(c) for mu, c in self.terms.items()})

    def integrate(self) -> "ExpPoly":
        """Definite integral from 0 to t, as a function of t."""
        out = ExpPoly()
        for mu, coeffs in self.terms.items():
            for p, c in enumerate(coeffs):
                if c == 0:
                    continue
                if abs(mu) < _MU_TOL:
                    out = out + ExpPoly.term(c / (p + 1), 0.0, p + 1)
                else:
                    # int_0^t tau^p e^{mu tau} dtau, by parts
                    acc = ExpPoly()
                    fact = 1.0
                    for j in range(p + 1):
                        coef = c * (-1) ** j * fact / mu ** (j + 1)
                        acc = acc + ExpPoly.term(coef, mu, p - j)
                        fact *= p - j
                    acc = acc + ExpPoly.term(c * (-1) ** (p + 1) * math.factorial(p)
                                             / mu ** (p + 1))
                    out = out + acc
        return out

    def __call__(self, t: float) -> complex:
        total = 0.0j
        for mu, coeffs in self.terms.items():
            poly = sum(c * t**p for p, c in enumerate(coeffs))
            total += poly * np.exp(mu * t)
        return total


def _propagate(lam: complex, f: ExpPoly) -> ExpPoly:
    """exp(-i lam t) * int_0^t exp(+i lam tau) f(tau) dtau."""
    return f.shift(1j * lam).integrate().shift(-1j * lam)


# ---------------------------------------------------------------------------
# effective Hamiltonian and eigensystem
# ---------------------------------------------------------------------------

def displaced_effective_hamiltonian(params: SystemParams,
                                    space: SpaceDescriptor) -> tuple[Operator, Operator]:
    """(H0, V) with the displaced effective Hamiltonian equal to H0 + kappa V.

    Only defined for one atom with delta_c = 0 and nonzero coupling.
    """
    if params.n_atoms != 1:
        raise ValueError("displaced effective Hamiltonian requires exactly one atom")
    if params.delta_c != 0:
        raise ValueError("displaced effective Hamiltonian requires delta_c = 0")
    prof = coupling_profile(params)
    gbar = float(prof.g_n[0])
    if gbar == 0:
        raise ValueError("atom sits at a node of the mode function")
    beta = beta_profile(params.positions[0], params)
    a = annihilation(space).entries
    sig = atomic_lowering(space, 0).entries
    proj_e = sig.conj().T @ sig
    h0 = gbar * (a @ sig.conj().T + a.conj().T @ sig) \
        - (params.delta + 0.5j * params.gamma) * proj_e
    a_disp = a + beta * np.eye(space.dim)
    v = -0.5j * (a_disp.conj().T @ a_disp)
    return Operator(space, h0), Operator(space, v)


def dressed_eigenvalues(n: int, params: SystemParams) -> tuple[complex, complex]:
    """Eigenvalue pair of the n-excitation block of H0.

    '+' is the root with the larger real part at delta = 0, followed by
    continuity as delta moves to its actual value.
    """
    if n < 1:
        raise ValueError("excitation number must be >= 1")
    prof = coupling_profile(params)
    g = abs(float(prof.g_n[0]))
    gamma = params.gamma

    def root(delta: float) -> complex:
        dt = delta + 0.5j * gamma
        return np.sqrt(dt * dt + 4 * g * g * n)

    # track the branch continuously from delta = 0
    r = root(0.0)
    steps = 64
    for k in range(1, steps + 1):
        cand = root(params.delta * k / steps)
        if abs(cand - r) > abs(-cand - r):
            cand = -cand
        r = cand
    dt = params.delta + 0.5j * gamma
    lam_plus = -0.5 * (dt - r)
    lam_minus = -0.5 * (dt + r)
    return complex(lam_plus), complex(lam_minus)


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Paired left/right eigenvectors with <vbar_i|v_j> = delta_ij."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray = field(repr=False)   # columns |v_i>
    left_vectors: np.ndarray = field(repr=False)    # columns |vbar_i>

    def completeness_residual(self) -> float:
        dim = self.right_vectors.shape[0]
        s = self.right_vectors @ self.left_vectors.conj().T
        return float(np.abs(s - np.eye(dim)).max())


def biorthogonal_eigensystem(h: Operator | np.ndarray) -> BiorthogonalSystem:
    m = h.entries if isinstance(h, Operator) else np.asarray(h, dtype=complex)
    w, vl, vr = scipy.linalg.eig(m, left=True, right=True)
    dim = m.shape[0]
    for i in range(dim):
        d = vl[:, i].conj() @ vr[:, i]
        if abs(d) < 1e-12:
            raise DefectiveMatrixError(
                f"eigenvector pair {i} has <vbar|v| = {abs(d):.3e}; matrix defective")
        vl[:, i] = vl[:, i] / np.conj(d)
    sys = BiorthogonalSystem(eigenvalues=w, right_vectors=vr, left_vectors=vl)
    res = sys.completeness_residual()
    if res > 1e-8:
        raise DefectiveMatrixError(f"completeness residual {res:.3e} exceeds 1e-8")
    return sys


# ---------------------------------------------------------------------------
# perturbative density matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerturbativeState:
    """rho(t) = sum_l kappa^l rho_terms[l], already in the lab frame."""

    order: int
    rho_terms: list[np.ndarray]
    kappa: float
    space: SpaceDescriptor
    time: float

    def assemble(self, kappa: float | None = None) -> DensityMatrix:
        k = self.kappa if kappa is None else kappa
        m = sum(k**l * term for l, term in enumerate(self.rho_terms))
        m = (m + m.conj().T) / 2
        return DensityMatrix.from_matrix(self.space, m, check=False)


def perturbative_state(params: SystemParams, t: float, order: int = 2,
                       n_max: int | None = None) -> PerturbativeState:
    """Density matrix at time t, expanded to the given order in kappa.

    Starts from the kappa = 0 dark state.  All Dyson integrals are done
    in closed form in the biorthogonal eigenbasis of H0.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if params.n_atoms != 1 or params.delta_c != 0:
        raise ValueError("perturbative expansion requires N=1 and delta_c=0")
    from .model import build_space

    space = build_space(params, n_max)
    dim = space.dim
    h0_op, _v_op = displaced_effective_hamiltonian(params, space)
    beta = beta_profile(params.positions[0], params)

    sys = biorthogonal_eigensystem(h0_op)
    lam = sys.eigenvalues.copy()
    right = sys.right_vectors.copy()
    left = sys.left_vectors.copy()

    # |g,0> is an exact zero eigenvector of H0; pin it to remove noise
    e_g0 = basis_state(space, "g", 0)
    i0 = int(np.argmin(np.abs(lam)))
    if abs(lam[i0]) > 1e-8:
        raise RuntimeError("no zero eigenvalue found for the ground eigenvector")
    lam[i0] = 0.0
    right[:, i0] = e_g0
    left[:, i0] = e_g0

    lmat = left.conj().T          # rows <vbar_i|
    a = annihilation(space).entries
    a_disp_eig = lmat @ (a + beta * np.eye(dim)) @ right
    v_eig = lmat @ _v_op.entries @ right
    c0 = lmat @ e_g0              # ~ unit vector on index i0
    v0 = v_eig @ c0

    babs2 = abs(beta) ** 2
    rho0_disp = np.outer(e_g0, e_g0.conj())

    # w(tau) = U1(tau)|g,0> in the eigenbasis
    w = [_propagate(lam[i], ExpPoly.term(-1j * v0[i])) for i in range(dim)]

    rho_terms: list[np.ndarray] = [rho0_disp]

    if order >= 1:
        w_t = right @ np.array([wi(t) for wi in w])
        rho1 = np.outer(w_t, e_g0.conj()) + np.outer(e_g0, w_t.conj())
        rho1 = rho1 + babs2 * t * rho0_disp
        rho_terms.append(rho1)

    if order >= 2:
        # U2(t)|g,0>
        u2 = np.zeros(dim, dtype=complex)
        for i in range(dim):
            acc = 0.0j
            for k in range(dim):
                if v_eig[i, k] == 0 or v0[k] == 0:
                    continue
                inner = _propagate(lam[k], ExpPoly.term(v0[k]))
                acc += -v_eig[i, k] * _propagate(lam[i], inner)(t)
            u2[i] = acc
        u2_t = right @ u2

        # W(t) = int_0^t w
        bigw_t = right @ np.array([wi.integrate()(t) for wi in w])

        # z(t) = int_0^t U0(t-tau) a_disp w(tau) dtau
        z = np.zeros(dim, dtype=complex)
        for i in range(dim):
            f = ExpPoly.zero()
            for j in range(dim):
                if a_disp_eig[i, j] == 0:
                    continue
                f = f + w[j].scale(a_disp_eig[i, j])
            z[i] = _propagate(lam[i], f)(t)
        z_t = right @ z

        # spontaneous-jump contribution: gamma int |<e,0|U1(tau)|g,0>|^2 dtau
        idx_e0 = space.fock_dim  # |e,0> in the atoms-first layout
        ce0 = ExpPoly.zero()
        for i in range(dim):
            if right[idx_e0, i] == 0:
                continue
            ce0 = ce0 + w[i].scale(right[idx_e0, i])
        j_integral = (ce0 * ce0.conj()).integrate()(t).real

        rho2 = np.outer(u2_t, e_g0.conj()) + np.outer(e_g0, u2_t.conj())
        rho2 = rho2 + np.outer(w_t, w_t.conj())
        rho2 = rho2 + babs2 * (np.outer(bigw_t, e_g0.conj())
                               + np.outer(e_g0, bigw_t.conj()))
        rho2 = rho2 + np.conj(beta) * np.outer(z_t, e_g0.conj()) \
            + beta * np.outer(e_g0, z_t.conj())
        rho2 = rho2 + (babs2**2 * t**2 / 2) * rho0_disp
        rho2 = rho2 + params.gamma * j_integral * rho0_disp
        rho_terms.append(rho2)

    # the omitted J-terms of the expansion must vanish identically
    sig = atomic_lowering(space, 0).entries
    assert np.abs(sig @ e_g0).max() < 1e-14

    # back to the lab frame
    d = displacement(space, beta).entries
    lab_terms = [d @ m @ d.conj().T for m in rho_terms]
    return PerturbativeState(order=order, rho_terms=lab_terms,
                             kappa=params.kappa, space=space, time=float(t))


class SmallKappaRates(NamedTuple):
    i_at: float
    i_cav: float
    c1: float


def small_kappa_rates(params: SystemParams) -> SmallKappaRates:
    """Closed-form leading-order scattering rates at Delta = 0, g >> gamma.

    I_at = kappa (Omega/g)^2 / (2 C1), I_cav = kappa (Omega/g)^2 (1 - 1/(2 C1)),
    with cooperativity C1 = 2 g^2 / (gamma kappa).
    """
    prof = coupling_profile(params)
    gbar = abs(float(prof.g_n[0]))
    if gbar == 0:
        raise ValueError("coupling vanishes; closed-form rates undefined")
    if params.delta != 0 or gbar < 5 * params.gamma:
        warnings.warn("small-kappa rates are derived for Delta=0 and g >> gamma",
                      RegimeWarning, stacklevel=2)
    c1 = 2 * gbar**2 / (params.gamma * params.kappa)
    drive = params.kappa * params.omega**2 / gbar**2
    return SmallKappaRates(i_at=drive / (2 * c1), i_cav=drive * (1 - 1 / (2 * c1)),
                           c1=c1)
