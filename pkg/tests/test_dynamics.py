import numpy as np
import pytest
import scipy.sparse as sp

from drivencavity.dynamics import (
    DegenerateSteadyStateError,
    evolve,
    ground_state,
    observables,
    solve_steady,
    steady_state,
)
from drivencavity.model import (
    SystemParams,
    Superoperator,
    beta_profile,
    build_liouvillian,
    build_space,
)
from drivencavity.operators import (
    DensityMatrix,
    basis_state,
    coherent_state,
    fidelity_with_pure,
    trace_distance,
)


def _params(**kw):
    base = dict(positions=(0.0,), g0=1.0, omega=1.0, kappa=0.1)
    base.update(kw)
    return SystemParams(**base)


def test_undriven_steady_state_is_ground():
    p = _params(omega=0.0, kappa=0.3, g0=2.0)
    sol = solve_steady(p, n_max=4)
    ket = basis_state(sol.space, "g", 0)
    assert fidelity_with_pure(sol.rho, ket) == pytest.approx(1.0, abs=1e-12)


def test_dark_state_fidelity():
    p = _params(omega=1.0, g0=10.0, kappa=0.0)
    sol = solve_steady(p)
    ket = coherent_state(sol.space, beta_profile(0.0, p), atoms="g")
    assert fidelity_with_pure(sol.rho, ket) > 0.999
    assert sol.residual < 1e-9 * sol.space.dim


def test_emission_ratio_tracks_cooperativity():
    # closed forms give I_cav/I_at = 2 C1 - 1; the exact solution should
    # land within a factor of two at strong coupling
    p = _params(omega=1.0, g0=10.0, kappa=0.1)
    sol = solve_steady(p)
    obs = observables(sol.rho, p)
    c1 = 2 * p.g0**2 / (p.kappa * p.gamma)
    assert c1 == 2000
    ratio = obs.i_cav / obs.i_at_total
    assert (2 * c1 - 1) / 2 < ratio < (2 * c1 - 1) * 2


def test_degenerate_steady_state_detected():
    # no drive, no coupling, no cavity decay: every Fock diagonal is a
    # fixed point, so the null space is multi-dimensional
    p = _params(omega=0.0, g0=0.0, kappa=0.0)
    space = build_space(p, n_max=2)
    l = build_liouvillian(p, space)
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(l)


def test_evolve_zero_generator_is_identity_map():
    p = _params()
    space = build_space(p, n_max=2)
    l = Superoperator(space=space,
                      matrix=sp.csr_matrix((space.dim**2, space.dim**2)))
    rho0 = DensityMatrix.pure(space, coherent_state(space, 0.4, atoms="g"))
    rho_t = evolve(rho0, l, 3.0)
    assert trace_distance(rho0, rho_t) < 1e-10


def test_free_cavity_decay_exponential():
    p = _params(omega=0.0, g0=0.0, kappa=0.7)
    space = build_space(p, n_max=6)
    l = build_liouvillian(p, space)
    rho0 = DensityMatrix.pure(space, coherent_state(space, 1.0, atoms="g"))
    t = 1.3
    rho_t = evolve(rho0, l, t)
    n0 = observables(rho0, p).mean_n
    nt = observables(rho_t, p).mean_n
    assert nt == pytest.approx(n0 * np.exp(-p.kappa * t), rel=1e-6)


def test_long_time_evolution_matches_steady_state():
    p = _params(omega=1.0, g0=1.0, kappa=0.5)
    sol = solve_steady(p)
    l = build_liouvillian(p, sol.space)
    rho_t = evolve(ground_state(sol.space), l, 60.0)
    assert trace_distance(rho_t, sol.rho) < 1e-6


def test_g2_of_coherent_and_fock_states():
    p = _params()
    space = build_space(p, n_max=8)
    coh = DensityMatrix.pure(space, coherent_state(space, -0.1, atoms="g"))
    assert observables(coh, p).g2_zero == pytest.approx(1.0, abs=1e-6)
    one = DensityMatrix.pure(space, basis_state(space, "g", 1))
    assert observables(one, p).g2_zero == pytest.approx(0.0, abs=1e-12)
    vac = ground_state(space)
    assert observables(vac, p).g2_zero is None


def test_emission_scaling_with_kappa():
    p0 = _params(omega=1.0, g0=10.0)
    kappas = np.array([0.01, 0.03, 0.1, 0.3])
    i_at, i_cav = [], []
    for k in kappas:
        p = _params(omega=1.0, g0=10.0, kappa=float(k))
        obs = observables(solve_steady(p).rho, p)
        i_at.append(obs.i_at_total)
        i_cav.append(obs.i_cav)
    slope_at = np.polyfit(np.log(kappas), np.log(i_at), 1)[0]
    slope_cav = np.polyfit(np.log(kappas), np.log(i_cav), 1)[0]
    assert slope_at == pytest.approx(2.0, abs=0.1)
    assert slope_cav == pytest.approx(1.0, abs=0.1)


def test_truncation_escalation():
    # beta = 1 needs far more than 4 Fock levels; the solver must escalate
    p = _params(omega=1.0, g0=1.0, kappa=0.1)
    sol = solve_steady(p, n_max=4)
    assert sol.escalations >= 1
    assert sol.n_max > 4
