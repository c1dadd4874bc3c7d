import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from josephson_qrc import validation
from josephson_qrc.errors import IntegratorDivergenceError, InvalidSpecificationError, PositivityViolationError
from josephson_qrc.fock import FockSpec, basis_state, dagger, number, vacuum
from josephson_qrc.lindblad import LindbladProblem, evolve_segment, lindblad_rhs, steady_state
from josephson_qrc.mixer import MixerConfig, collapse_operators, problem_for

KA, KB, G = 2 * math.pi * 17e6, 2 * math.pi * 21e6, 2 * math.pi * 20e6


def kron_liouvillian(H, ops):
    """Column-stacking superoperator built independently of the package."""
    d = H.shape[0]
    eye = np.eye(d)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    for c in ops:
        cdc = dagger(c) @ c
        L += np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye)
    return L


def random_state(dim, seed):
    return validation.random_density_matrix(dim, np.random.default_rng(seed))


def test_rhs_vacuum_joint_dissipator_is_zero():
    spec = FockSpec()
    problem = LindbladProblem(np.zeros((64, 64)), [math.sqrt(KA) * spec.a + math.sqrt(KB) * spec.b])
    np.testing.assert_array_equal(lindblad_rhs(problem, vacuum(spec)), 0)


def test_rhs_single_photon_decay_rate():
    spec = FockSpec(2, 2)
    problem = LindbladProblem(np.zeros((9, 9)), [math.sqrt(KA) * spec.a, math.sqrt(KB) * spec.b])
    drho = lindblad_rhs(problem, basis_state(1, 0, spec))
    assert np.trace(drho @ number("a", spec)).real == pytest.approx(-KA, rel=1e-12)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_rhs_traceless_and_matches_superoperator(seed):
    spec = FockSpec(2, 2)
    cfg = MixerConfig(drive_scale=0.005, spec=spec)
    problem = problem_for(0.3, cfg)
    rho = random_state(spec.dim, seed)
    drho = lindblad_rhs(problem, rho)
    assert abs(np.trace(drho)) < 1e-12 * np.abs(drho).max()
    L = kron_liouvillian(problem.hamiltonian, problem.collapse_ops)
    oracle = (L @ rho.reshape(-1, order="F")).reshape(spec.dim, spec.dim, order="F")
    np.testing.assert_allclose(drho, oracle, atol=1e-9 * np.abs(oracle).max())


def test_rhs_dimension_mismatch():
    problem = LindbladProblem(np.zeros((4, 4)), [])
    with pytest.raises(InvalidSpecificationError):
        lindblad_rhs(problem, np.eye(3))


def test_problem_rejects_non_hermitian_and_large_step():
    with pytest.raises(InvalidSpecificationError):
        LindbladProblem(np.array([[0, 1], [0, 0]]), [])
    with pytest.raises(InvalidSpecificationError):
        LindbladProblem(np.zeros((2, 2)), [], dt=0.0)
    with pytest.raises(InvalidSpecificationError):
        LindbladProblem(np.diag([0.0, 1e9]), [], dt=1e-9)


def test_zero_duration_is_identity():
    spec = FockSpec(2, 2)
    problem = problem_for(1.0, MixerConfig(drive_scale=0.005, spec=spec))
    rho = random_state(9, 3)
    np.testing.assert_array_equal(evolve_segment(problem, rho, 0.0), rho)
    with pytest.raises(InvalidSpecificationError):
        evolve_segment(problem, rho, -1e-9)


@pytest.mark.parametrize("mode", ["joint", "separate"])
def test_segment_matches_exact_exponential(mode):
    spec = FockSpec(2, 2)
    cfg = MixerConfig(drive_scale=0.005, spec=spec, dissipator_mode=mode)
    problem = problem_for(-0.8, cfg)
    rho = random_state(9, 4)
    duration = 37.3e-9  # not a multiple of dt: exercises the short final step
    out = evolve_segment(problem, rho, duration)
    L = kron_liouvillian(problem.hamiltonian, problem.collapse_ops)
    exact = (scipy.linalg.expm(L * duration) @ rho.reshape(-1, order="F")).reshape(9, 9, order="F")
    np.testing.assert_allclose(out, exact, atol=1e-10)


def test_swap_half_period_transfers_photon():
    spec = FockSpec(3, 3)
    problem = validation.conversion_problem(G, spec)
    out = evolve_segment(problem, basis_state(1, 0, spec), math.pi / (2 * G))
    idx = spec.joint_index(0, 1)
    assert out[idx, idx].real == pytest.approx(1.0, abs=1e-6)


def test_swap_period_oracle():
    period, expected = validation.swap_period()
    assert period == pytest.approx(expected, rel=5e-3)


def test_single_photon_decay_law():
    assert validation.decay_error() < 1e-4


def test_excitation_number_conserved_without_loss():
    assert validation.excitation_drift() < 1e-8


def test_relaxation_follows_binomial_death_process():
    """Without drive or coupling, populations thin binomially in each mode."""
    spec = FockSpec(3, 3)
    cfg = MixerConfig(spec=spec, g=0.0, dissipator_mode="separate", drive_scale=0.005)
    rho = random_state(spec.dim, 5)
    t = 10 / KA
    out = evolve_segment(problem_for(0.0, cfg), rho, t)
    sa, sb = math.exp(-KA * t), math.exp(-KB * t)
    p0 = np.real(np.diag(rho)).reshape(4, 4)
    expected = np.zeros((4, 4))
    for ma in range(4):
        for mb in range(4):
            for na in range(ma + 1):
                for nb in range(mb + 1):
                    expected[na, nb] += (p0[ma, mb] * math.comb(ma, na) * sa ** na * (1 - sa) ** (ma - na)
                                         * math.comb(mb, nb) * sb ** nb * (1 - sb) ** (mb - nb))
    np.testing.assert_allclose(np.real(np.diag(out)).reshape(4, 4), expected, atol=1e-10)


def test_unique_vacuum_in_separate_mode():
    assert validation.relaxation_residue(seed=1) < 1e-6
    cfg = MixerConfig(drive_scale=0.005, dissipator_mode="separate", spec=FockSpec(2, 2))
    np.testing.assert_allclose(steady_state(problem_for(0.0, cfg)), vacuum(cfg.spec), atol=1e-12)


def test_joint_mode_has_dark_state_when_rates_match():
    """Equal rates decouple a-b from the single collapse operator: the undriven state is not unique."""
    spec = FockSpec(1, 1)
    cfg = MixerConfig(kappa_a=KA, kappa_b=KA, g=0.0, drive_scale=0.005, spec=spec)
    dark = np.zeros(4, dtype=complex)
    dark[spec.joint_index(1, 0)] = 1 / math.sqrt(2)
    dark[spec.joint_index(0, 1)] = -1 / math.sqrt(2)
    rho = np.outer(dark, dark.conj())
    np.testing.assert_allclose(lindblad_rhs(problem_for(0.0, cfg), rho), 0, atol=1e-3)


def test_trace_hermiticity_positivity_after_segments():
    cfg = MixerConfig(drive_scale=0.005)
    checks = validation.segment_invariants(cfg, n_segments=5)
    assert all(c.passed for c in checks), [c.line() for c in checks]


def test_divergence_detected():
    H = np.diag([0.0, 1.0])
    problem = LindbladProblem(H, [np.array([[0, 3e5], [0, 0]])], dt=1e-7, max_rate=1.0)
    with pytest.raises((IntegratorDivergenceError, PositivityViolationError)):
        evolve_segment(problem, np.diag([0.0, 1.0]), 1e-4)


def test_step_halving_convergence():
    cfg = MixerConfig(drive_scale=0.005)
    rho_a = evolve_segment(problem_for(1.0, cfg), vacuum(cfg.spec), 100e-9)
    rho_b = evolve_segment(problem_for(1.0, cfg.with_(dt=2.5e-11)), vacuum(cfg.spec), 100e-9)
    assert np.abs(np.diag(rho_a) - np.diag(rho_b)).max() < 1e-6


def test_collapse_operator_modes():
    spec = FockSpec(2, 2)
    joint = collapse_operators(MixerConfig(spec=spec))
    separate = collapse_operators(MixerConfig(spec=spec, dissipator_mode="separate"))
    assert len(joint) == 1 and len(separate) == 2
    np.testing.assert_allclose(joint[0], separate[0] + separate[1])
