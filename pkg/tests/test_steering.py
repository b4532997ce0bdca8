import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lhvlab import linalg
from lhvlab.errors import (
    CapacityError,
    DomainError,
    IndeterminateError,
    NotEntangledError,
    SolverError,
)
from lhvlab.quantum import (
    Assemblage,
    Basis,
    DensityMatrix,
    MeasurementAssemblage,
    Povm,
    apply_local_unitary,
    assemblage_of,
    conjugate_assemblage,
    fourier_basis,
    maximally_entangled,
    product_state,
    pure_from_schmidt,
    random_density,
    random_projective,
    random_pure,
    random_separable,
    random_unitary,
    smear_parent_povm,
    swap_parties,
)
from lhvlab.steering import (
    SteeringWitness,
    _check_monotone,
    criterion_disjoint_bases,
    decide_unsteerable,
    evaluate_steering_witness,
    nearest_lhs_model,
    steering_bound,
    steering_measurements_for_pure,
    witness_from_gradient,
)
from lhvlab.strategies import enumerate_strategies

from .oracles.lhs_sdp import bell_state_computational_hadamard, seeded_pure_case

Z = Povm.from_basis(Basis.computational(2))
H = Povm.from_basis(fourier_basis(2))
ZH = MeasurementAssemblage.from_povms([Z, H])

# distances from the cvxpy/Clarabel SDP oracle (tests/oracles/lhs_sdp.py),
# accurate to roughly 1e-8
SDP_BELL_ZH = 0.2071067794621021
SDP_SEEDED = {
    (1, 2, 2): 0.12090866548844273,
    (2, 2, 2): 0.13377355071227215,
    (3, 2, 3): 0.17053197233520745,
    (4, 3, 2): 0.11551807833540716,
    (5, 2, 2): 0.011554539648969806,
}
SDP_ACCURACY = 1e-7


def sigma_for(rho, povms):
    return assemblage_of(rho, MeasurementAssemblage.from_povms(povms))


def exhaustive_bound(functionals, m, o):
    """Independent sweep: largest eigenvalue of sum_x F[x, J(x)] over all J via LAPACK."""
    best = -np.inf
    for j in enumerate_strategies(m, o):
        op = sum(functionals[x, a] for x, a in enumerate(j.assignment))
        best = max(best, np.linalg.eigvalsh(op)[-1])
    return best


# -- nearest model ---------------------------------------------------------------------


def test_product_state_distance():
    rng = np.random.default_rng(0)
    rho = product_state(random_density(2, rng).matrix, random_density(2, rng).matrix)
    sol = nearest_lhs_model(sigma_for(rho, [Z, H, random_projective(2, rng)]))
    assert sol.distance <= 1e-7


def test_single_setting_distance():
    rng = np.random.default_rng(1)
    rho = random_density(9, rng)
    sol = nearest_lhs_model(sigma_for(rho, [random_projective(3, rng)]))
    assert sol.distance <= 1e-7


def test_bell_distance_against_sdp():
    sol = nearest_lhs_model(assemblage_of(maximally_entangled(2), ZH))
    assert sol.distance > 1e-3
    assert sol.fw_gap <= 1e-8
    assert abs(sol.distance - SDP_BELL_ZH) <= SDP_ACCURACY
    assert abs(sol.distance - (np.sqrt(2) - 1) / 2) <= 1e-8


def test_oracle_assemblage_matches_package():
    sigma = assemblage_of(maximally_entangled(2), ZH).members
    assert np.allclose(bell_state_computational_hadamard(), sigma, atol=1e-15)


@pytest.mark.parametrize("case", sorted(SDP_SEEDED))
def test_seeded_distances_against_sdp(case):
    reference = SDP_SEEDED[case]
    sol = nearest_lhs_model(Assemblage(seeded_pure_case(*case)))
    assert sol.fw_gap <= 1e-8
    assert sol.lower_bound <= reference + SDP_ACCURACY
    assert sol.distance >= reference - SDP_ACCURACY
    assert abs(sol.distance - reference) <= 1e-6


def test_frank_wolfe_brackets_the_distance():
    # second route: pairwise Frank-Wolfe with a small budget must bracket the
    # reference distance through its duality gap
    sigma = Assemblage(seeded_pure_case(1, 2, 2))
    sol = nearest_lhs_model(sigma, method="frank-wolfe", max_iters=300)
    reference = SDP_SEEDED[(1, 2, 2)]
    assert sol.distance >= reference - SDP_ACCURACY
    assert sol.lower_bound <= reference + SDP_ACCURACY


def test_frank_wolfe_unsteerable():
    rng = np.random.default_rng(2)
    rho = random_separable(2, 2, 3, rng)
    sigma = sigma_for(rho, [random_projective(2, rng) for _ in range(2)])
    fw = decide_unsteerable(sigma, method="frank-wolfe")
    fast = decide_unsteerable(sigma)
    assert fw.unsteerable and fast.unsteerable


def test_monotone_check():
    _check_monotone(1.0, 1.0)
    _check_monotone(0.5, 1.0)
    with pytest.raises(SolverError):
        _check_monotone(1.0 + 1e-9, 1.0)


def test_unknown_method():
    with pytest.raises(DomainError):
        nearest_lhs_model(assemblage_of(maximally_entangled(2), ZH), method="newton")


def test_capacity():
    sigma = sigma_for(maximally_entangled(2), [Z, H, Z, H, Z])
    with pytest.raises(CapacityError):
        nearest_lhs_model(sigma, cap=16)


def test_thread_count_does_not_change_result():
    sigma = Assemblage(seeded_pure_case(4, 3, 2))
    one = nearest_lhs_model(sigma, threads=1)
    four = nearest_lhs_model(sigma, threads=4)
    assert np.array_equal(one.model.tau, four.model.tau)
    assert one.distance == four.distance and one.iterations == four.iterations


def test_model_is_feasible():
    sol = nearest_lhs_model(Assemblage(seeded_pure_case(2, 2, 2)))
    tau = sol.model.tau
    assert np.sum(np.trace(tau, axis1=1, axis2=2).real) == pytest.approx(1.0, abs=1e-12)
    for block in tau:
        assert np.linalg.eigvalsh(block)[0] >= -1e-12


# -- decisions -----------------------------------------------------------------------------


def test_bell_state_steerable():
    verdict = decide_unsteerable(assemblage_of(maximally_entangled(2), ZH))
    assert verdict.tag == "Steerable"
    w = verdict.witness
    assert w.value_on_target - w.lhs_bound > 0
    assert exhaustive_bound(w.functionals, 2, 2) == pytest.approx(w.lhs_bound, abs=1e-12)


def test_swapped_bell_state_steerable():
    psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    verdict = decide_unsteerable(assemblage_of(DensityMatrix.from_vector(psi), ZH))
    assert verdict.tag == "Steerable"


def test_separable_unsteerable():
    rng = np.random.default_rng(3)
    for _ in range(5):
        rho = random_separable(2, 3, 4, rng)
        sigma = sigma_for(rho, [random_projective(2, rng) for _ in range(3)])
        verdict = decide_unsteerable(sigma)
        assert verdict.unsteerable
        residual = np.linalg.norm(verdict.model.reconstruct() - sigma.members)
        assert residual <= 1e-6 + verdict.fw_gap


def test_smeared_parent_unsteerable():
    rng = np.random.default_rng(4)
    parent = random_projective(3, rng)
    response = rng.dirichlet(np.ones(2), size=(3, 3)).transpose(0, 2, 1)
    ma = smear_parent_povm(parent, response)
    verdict = decide_unsteerable(assemblage_of(maximally_entangled(3), ma))
    assert verdict.unsteerable


def test_indeterminate_on_tiny_budget():
    with pytest.raises(IndeterminateError):
        decide_unsteerable(Assemblage(seeded_pure_case(3, 2, 3)), max_iters=3)


def test_reverse_direction():
    rho = swap_parties(maximally_entangled(2), 2, 2)
    assert decide_unsteerable(assemblage_of(rho, ZH)).tag == "Steerable"


# -- witnesses --------------------------------------------------------------------------


def test_witness_rejects_lhs_point():
    rng = np.random.default_rng(5)
    rho = product_state(random_density(2, rng).matrix, random_density(2, rng).matrix)
    sigma = sigma_for(rho, [Z, H])
    sol = nearest_lhs_model(sigma)
    exact = Assemblage(sol.model.reconstruct())
    with pytest.raises(DomainError):
        witness_from_gradient(exact, sol.model)


def test_witness_bounds_lhs_reconstructions():
    sigma = assemblage_of(maximally_entangled(2), ZH)
    w = decide_unsteerable(sigma).witness
    rng = np.random.default_rng(6)
    space = enumerate_strategies(2, 2)
    for _ in range(50):
        tau = np.stack([random_density(2, rng).matrix for _ in range(4)])
        tau = tau * rng.dirichlet(np.ones(4))[:, None, None]
        recon = np.einsum("kxa,kij->xaij", space.selector, tau)
        assert evaluate_steering_witness(w, recon) <= w.lhs_bound + 1e-12


def test_witness_identity_shift():
    sigma = assemblage_of(maximally_entangled(2), ZH)
    w = decide_unsteerable(sigma).witness
    shifts = np.array([0.3, -1.7])
    f = w.functionals + shifts[:, None, None, None] * np.eye(2)
    shifted = SteeringWitness(f, steering_bound(f, enumerate_strategies(2, 2)), 0.0)
    value = evaluate_steering_witness(shifted, sigma)
    assert shifted.lhs_bound - w.lhs_bound == pytest.approx(shifts.sum(), abs=1e-12)
    assert value - w.value_on_target == pytest.approx(shifts.sum(), abs=1e-12)
    assert value - shifted.lhs_bound == pytest.approx(w.margin, abs=1e-12)


def test_witness_dimension_error():
    w = SteeringWitness(np.zeros((1, 2, 2, 2)), 0.0, 0.0)
    with pytest.raises(DomainError):
        evaluate_steering_witness(w, assemblage_of(maximally_entangled(2), ZH))


# -- disjoint-bases criterion ----------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_criterion_maximally_entangled(n):
    rng = np.random.default_rng(n)
    u = random_unitary(n, rng)
    p = Povm.from_basis(u)
    q = Povm.from_basis(u @ fourier_basis(n).columns)
    cert = criterion_disjoint_bases(maximally_entangled(n), p, q)
    assert cert is not None
    assert np.allclose(cert.c, 1 / n, atol=1e-10)
    assert np.allclose(cert.d, 1 / n, atol=1e-10)


def test_criterion_product_state_none():
    rng = np.random.default_rng(7)
    rho = product_state(random_density(2, rng).matrix, random_density(2, rng).matrix)
    assert criterion_disjoint_bases(rho, Z, H) is None


def test_criterion_non_maximal_schmidt():
    comp = Basis.computational(2)
    rho = pure_from_schmidt([0.9, np.sqrt(1 - 0.81)], comp, comp)
    cert = criterion_disjoint_bases(rho, Z, H)
    assert cert is not None
    # conditional states of the Fourier measurement are not orthogonal here
    assert abs(np.vdot(cert.f[:, 0], cert.f[:, 1])) > 0.1


def test_criterion_wrong_outcome_count():
    three = Povm.from_basis(Basis.computational(3))
    assert criterion_disjoint_bases(maximally_entangled(3), three, Povm(np.array([np.eye(3)]))) is None


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_criterion_agrees_with_solver(seed, n):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix.from_vector(random_pure(n * n, rng))
    p = random_projective(n, rng)
    q = random_projective(n, rng)
    cert = criterion_disjoint_bases(rho, p, q)
    if cert is not None:
        verdict = decide_unsteerable(sigma_for(rho, [p, q]))
        assert verdict.tag == "Steerable"


# -- constructed measurements ----------------------------------------------------------------


def projector_set(povm):
    return sorted(np.round(e, 10).tobytes() for e in povm.effects)


def test_construction_bell_state():
    p, q = steering_measurements_for_pure(maximally_entangled(2))
    assert projector_set(p) == projector_set(Z)
    assert projector_set(q) == projector_set(H)


def test_construction_swapped_bell_state():
    psi = np.array([0, 1, 1, 0]) / np.sqrt(2)
    rho = DensityMatrix.from_vector(psi)
    p, q = steering_measurements_for_pure(rho)
    assert decide_unsteerable(sigma_for(rho, [p, q])).tag == "Steerable"
    assert criterion_disjoint_bases(rho, p, q) is not None


def test_construction_rank_two_in_three():
    rng = np.random.default_rng(8)
    ba = Basis(random_unitary(3, rng))
    bb = Basis(random_unitary(3, rng))
    rho = pure_from_schmidt([0.9, np.sqrt(1 - 0.81)], ba, bb)
    p, q = steering_measurements_for_pure(rho)
    assert decide_unsteerable(sigma_for(rho, [p, q])).tag == "Steerable"


def test_construction_product_rejected():
    comp = Basis.computational(2)
    with pytest.raises(NotEntangledError):
        steering_measurements_for_pure(pure_from_schmidt([1.0], comp, comp))


def test_construction_rectangular():
    rng = np.random.default_rng(9)
    rho = DensityMatrix.from_vector(random_pure(6, rng))
    p, q = steering_measurements_for_pure(rho, dims=(2, 3))
    assert p.dim == 2
    assert decide_unsteerable(sigma_for(rho, [p, q])).tag == "Steerable"


# -- invariance and convexity (small versions of the acceptance suites) -----------------------------


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(4, rng)
    ma = MeasurementAssemblage.from_povms([random_projective(2, rng) for _ in range(2)])
    u = random_unitary(2, rng)
    v = random_unitary(2, rng)
    a = nearest_lhs_model(assemblage_of(rho, ma), gap_tol=1e-12)
    b = nearest_lhs_model(assemblage_of(apply_local_unitary(rho, u, v), conjugate_assemblage(ma, u)), gap_tol=1e-12)
    assert abs(a.distance - b.distance) <= 1e-6


def test_mixture_of_unsteerable_states():
    rng = np.random.default_rng(10)
    ma = MeasurementAssemblage.from_povms([random_projective(2, rng) for _ in range(2)])
    r1 = random_separable(2, 2, 3, rng).matrix
    r2 = random_separable(2, 2, 3, rng).matrix
    for t in (0.25, 0.5, 0.75):
        mix = DensityMatrix(t * r1 + (1 - t) * r2)
        assert decide_unsteerable(assemblage_of(mix, ma)).unsteerable
