import math

import numpy as np
import pytest

from drivencavity.model import (
    NodePositionError,
    SystemParams,
    apply_superoperator,
    beta_profile,
    build_hamiltonian,
    build_liouvillian,
    build_space,
    coupling_profile,
    free_space_fluorescence,
)
from drivencavity.operators import DensityMatrix, basis_state, coherent_state


def _params(**kw):
    base = dict(positions=(0.0,), g0=1.0, omega=0.0, kappa=0.0)
    base.update(kw)
    return SystemParams(**base)


def test_jaynes_cummings_coupling_element():
    p = _params()
    space = build_space(p, n_max=2)
    h = build_hamiltonian(p, space).entries
    i_e0 = space.fock_dim  # |e, n=0> follows the |g, n> block
    i_g1 = 1
    assert h[i_e0, i_g1] == pytest.approx(1.0)


def test_perpendicular_pump_has_zero_phases():
    p = SystemParams(positions=(0.13, 0.77, 0.5), g0=1.0, omega=1.0,
                     kappa=0.0, theta=math.pi / 2)
    prof = coupling_profile(p)
    assert np.allclose(prof.phi_n, 0.0, atol=1e-12)
    assert np.all(np.abs(prof.g_n) <= p.g0 + 1e-15)


def test_hamiltonian_hermitian_random_params():
    rng = np.random.default_rng(3)
    for _ in range(5):
        p = SystemParams(
            positions=tuple(rng.uniform(0, 1, size=2)),
            g0=rng.uniform(0.1, 5), omega=rng.uniform(0, 3),
            kappa=rng.uniform(0, 1), delta=rng.normal(),
            delta_c=rng.normal(), theta=rng.uniform(0, math.pi))
        space = build_space(p, n_max=3)
        h = build_hamiltonian(p, space).entries
        assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_translation_by_one_wavelength():
    p1 = SystemParams(positions=(0.1, 0.6), g0=2.0, omega=1.0, kappa=0.3)
    p2 = SystemParams(positions=(1.1, 1.6), g0=2.0, omega=1.0, kappa=0.3)
    space = build_space(p1, n_max=3)
    h1 = build_hamiltonian(p1, space).entries
    h2 = build_hamiltonian(p2, space).entries
    assert np.max(np.abs(h1 - h2)) < 1e-12


def test_liouvillian_preserves_trace_and_hermiticity():
    p = _params(omega=0.7, kappa=0.4, delta=0.5, delta_c=-0.2)
    space = build_space(p, n_max=2)
    l = build_liouvillian(p, space)
    rng = np.random.default_rng(11)
    dim = space.dim
    for _ in range(100):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = m + m.conj().T
        drho = apply_superoperator(l, rho)
        assert abs(np.trace(drho)) < 1e-10
        assert np.max(np.abs(drho - drho.conj().T)) < 1e-12


def test_undriven_ground_state_is_stationary():
    p = _params(omega=0.0, kappa=0.5, g0=2.0)
    space = build_space(p, n_max=3)
    l = build_liouvillian(p, space)
    rho = np.outer(basis_state(space, "g", 0),
                   basis_state(space, "g", 0).conj())
    assert np.max(np.abs(apply_superoperator(l, rho))) < 1e-14


def test_bare_cavity_decay_rate():
    p = _params(g0=0.0, omega=0.0, kappa=1.0)
    space = build_space(p, n_max=3)
    l = build_liouvillian(p, space)
    one = basis_state(space, "g", 1)
    rho = np.outer(one, one.conj())
    drho = apply_superoperator(l, rho)
    n_op = np.zeros((space.dim, space.dim))
    for n in range(space.fock_dim):
        n_op[n, n] = n
        n_op[space.fock_dim + n, space.fock_dim + n] = n
    dn_dt = np.trace(n_op @ drho).real
    assert dn_dt == pytest.approx(-1.0, abs=1e-12)


def test_dark_state_is_stationary():
    p = _params(omega=1.0, g0=10.0)
    space = build_space(p, n_max=10)
    l = build_liouvillian(p, space)
    beta = beta_profile(0.0, p)
    ket = coherent_state(space, beta, atoms="g")
    rho = np.outer(ket, ket.conj())
    assert np.max(np.abs(apply_superoperator(l, rho))) < 1e-9


def test_beta_profile_values_and_periodicity():
    p = _params(omega=1.0, g0=10.0)
    assert beta_profile(0.0, p) == pytest.approx(-0.1)
    x = 0.37
    assert beta_profile(x, p) == pytest.approx(beta_profile(x + 1.0, p))
    with pytest.raises(NodePositionError):
        beta_profile(0.25, p)


def test_node_atoms_allowed_in_builder():
    p = SystemParams(positions=(0.25,), g0=1.0, omega=1.0, kappa=0.1)
    space = build_space(p, n_max=2)
    h = build_hamiltonian(p, space).entries
    assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_free_space_fluorescence():
    p = _params(omega=1.0, delta=0.0)
    # gamma * (Omega^2/2) / (Delta^2 + gamma^2/4 + Omega^2/2)
    assert free_space_fluorescence(p) == pytest.approx(0.5 / 0.75)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(positions=(), g0=1.0, omega=1.0, kappa=0.0)
    with pytest.raises(ValueError):
        SystemParams(positions=(0.0,), g0=1.0, omega=1.0, kappa=-0.1)
    with pytest.raises(ValueError):
        SystemParams(positions=(0.0,), g0=1.0, omega=1.0, kappa=0.0,
                     omega_n=(1.0, 2.0))
