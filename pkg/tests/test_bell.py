from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lhvlab.bell import (
    BellWitness,
    decide_bell_local,
    evaluate_witness,
    local_vertices,
    reconstruct,
    witness_bound,
)
from lhvlab.errors import CapacityError, DimensionError
from lhvlab.quantum import (
    Basis,
    CorrelationTensor,
    MeasurementAssemblage,
    Povm,
    correlations_of,
    fourier_basis,
    maximally_entangled,
    product_state,
    random_density,
    random_projective,
    random_separable,
)
from lhvlab.simplex import independent_rows, phase_one

from .oracles import exact_lp

# exact optimum of the oracle LP: 0 + (1/2) sqrt 2
VSTAR_EXACT = (Fraction(0), Fraction(1, 2))
VSTAR = float(VSTAR_EXACT[0]) + float(VSTAR_EXACT[1]) * np.sqrt(2)


def chsh_correlations() -> CorrelationTensor:
    z = Povm.from_basis(Basis.computational(2))
    x = Povm.from_basis(fourier_basis(2))
    c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
    b0 = Povm.from_basis(np.array([[c, -s], [s, c]]))
    b1 = Povm.from_basis(np.array([[c, s], [-s, c]]))
    return correlations_of(
        maximally_entangled(2),
        MeasurementAssemblage.from_povms([z, x]),
        MeasurementAssemblage.from_povms([b0, b1]),
    )


def noisy(p: CorrelationTensor, v: float) -> CorrelationTensor:
    o_a, o_b = p.shape[:2]
    return CorrelationTensor(v * p.probabilities + (1 - v) / (o_a * o_b))


def random_scenario_correlations(rng, state, m=2, d=2):
    ma = MeasurementAssemblage.from_povms([random_projective(d, rng) for _ in range(m)])
    nb = MeasurementAssemblage.from_povms([random_projective(d, rng) for _ in range(m)])
    return correlations_of(state, ma, nb)


# -- simplex ------------------------------------------------------------------------


def test_phase_one_feasible():
    a = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 1.0])
    res = phase_one(a, b)
    assert res.infeasibility <= 1e-12
    assert np.all(res.x >= 0)
    assert np.allclose(a @ res.x, b)


def test_phase_one_farkas():
    # q1 + q2 = 1 and q1 + q2 = 2 cannot both hold
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 2.0])
    res = phase_one(a, b)
    assert res.infeasibility > 0.5
    y = res.farkas
    assert np.all(y @ a <= 1e-12)
    assert y @ b > 0


def test_phase_one_negative_rhs():
    a = np.array([[1.0, 0.0], [0.0, 1.0]])
    res = phase_one(a, np.array([-1.0, 1.0]))
    assert res.infeasibility > 0
    assert np.all(res.farkas @ a <= 1e-12) and res.farkas @ np.array([-1.0, 1.0]) > 0


def test_independent_rows():
    a = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert independent_rows(a) == [0, 2]


# -- vertices --------------------------------------------------------------------------


def test_chsh_vertex_count_and_normalization():
    v = local_vertices(2, 2, 2, 2)
    assert v.shape == (16, 2, 2, 2, 2)
    assert np.allclose(v.sum(axis=(1, 2)), 1.0)
    assert len({tuple(x.reshape(-1)) for x in v}) == 16


def test_single_setting_vertices():
    v = local_vertices(1, 2, 1, 2)
    assert v.shape == (4, 2, 2, 1, 1)
    expected = {(a, b) for a in range(2) for b in range(2)}
    found = set()
    for vert in v:
        (a, b) = np.argwhere(vert[:, :, 0, 0] == 1.0)[0]
        assert vert.sum() == 1.0
        found.add((int(a), int(b)))
    assert found == expected


def test_vertex_capacity():
    with pytest.raises(CapacityError):
        local_vertices(4, 4, 4, 4, cap=10000)


def test_reconstruct_matches_vertices():
    rng = np.random.default_rng(0)
    w = rng.dirichlet(np.ones(16))
    direct = np.tensordot(w, local_vertices(2, 2, 2, 2), axes=1)
    assert np.allclose(reconstruct(w.reshape(4, 4), (2, 2, 2, 2)), direct, atol=1e-15)


# -- decisions -----------------------------------------------------------------------------


def test_product_state_is_local():
    rng = np.random.default_rng(1)
    for _ in range(10):
        ra = random_density(2, rng).matrix
        rb = random_density(2, rng).matrix
        p = random_scenario_correlations(rng, product_state(ra, rb))
        verdict = decide_bell_local(p)
        assert verdict.tag == "Local"
        recon = verdict.model.correlations()
        assert np.max(np.abs(recon - p.probabilities)) <= 1e-7


def test_uniform_is_local_with_uniform_weights():
    p = CorrelationTensor(np.full((2, 3, 2, 2), 1 / 6))
    verdict = decide_bell_local(p)
    assert verdict.local
    assert np.max(np.abs(verdict.model.correlations() - p.probabilities)) <= 1e-12


def test_chsh_is_nonlocal_with_chsh_witness():
    p = chsh_correlations()
    verdict = decide_bell_local(p)
    assert verdict.tag == "Nonlocal"
    w = verdict.witness
    assert np.max(np.abs(w.coefficients)) == pytest.approx(1.0)
    # exhaustive re-check of the bound
    values = np.tensordot(local_vertices(2, 2, 2, 2), w.coefficients, axes=4)
    assert np.min(values) == pytest.approx(w.local_bound, abs=1e-12)
    assert w.local_bound - w.value_on_target >= 1e-7
    # equivalent to CHSH: along the noise line the witness reaches its local
    # bound at v = 2 / (2 sqrt 2), i.e. local 2 versus quantum 2 sqrt 2
    u = evaluate_witness(w, noisy(p, 0.0))
    crossing = (w.local_bound - u) / (w.value_on_target - u)
    assert abs(crossing - 2 / (2 * np.sqrt(2))) <= 1e-6


def test_signalling_tensor_gets_witness():
    probs = np.zeros((2, 2, 2, 2))
    # Bob's outcome copies Alice's setting
    for x in range(2):
        for y in range(2):
            probs[0, x, x, y] = 1.0
    verdict = decide_bell_local(CorrelationTensor(probs))
    assert verdict.tag == "Nonlocal"
    assert witness_bound(verdict.witness.coefficients) - evaluate_witness(verdict.witness, probs) >= 1e-7


def test_capacity_error():
    p = CorrelationTensor(np.full((2, 2, 12, 12), 0.25))
    with pytest.raises(CapacityError):
        decide_bell_local(p, cap=1000)


def test_witness_examples():
    p = chsh_correlations()
    w = decide_bell_local(p).witness
    verts = local_vertices(2, 2, 2, 2)
    for v in verts:
        assert evaluate_witness(w, v) >= w.local_bound - 1e-12
    assert evaluate_witness(w, p) == pytest.approx(w.value_on_target, abs=1e-15)
    best = verts[int(np.argmin(np.tensordot(verts, w.coefficients, axes=4)))]
    mid = 0.5 * (p.probabilities + best)
    assert abs(evaluate_witness(w, mid) - 0.5 * (w.value_on_target + w.local_bound)) <= 1e-12


def test_witness_dimension_error():
    w = BellWitness(np.zeros((2, 2, 2, 2)), 0.0, 0.0)
    with pytest.raises(DimensionError):
        evaluate_witness(w, np.zeros((2, 2, 1, 1)))


def test_exact_oracle_value():
    value = exact_lp.critical_visibility()
    assert (value.r, value.s) == VSTAR_EXACT


def test_transition_matches_oracle():
    p = chsh_correlations()
    assert decide_bell_local(noisy(p, VSTAR - 2e-3)).local
    assert not decide_bell_local(noisy(p, VSTAR + 2e-3)).local


def test_boundary_reports_local_with_checked_model():
    p = chsh_correlations()
    verdict = decide_bell_local(noisy(p, VSTAR + 3e-8))
    assert verdict.local
    assert np.max(np.abs(verdict.model.correlations() - noisy(p, VSTAR + 3e-8).probabilities)) <= 1e-7


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_soundness_property(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(4, rng)
    p = random_scenario_correlations(rng, rho)
    verdict = decide_bell_local(p)
    if verdict.local:
        assert np.max(np.abs(verdict.model.correlations() - p.probabilities)) <= 1e-7
        assert np.all(verdict.model.weights >= 0)
        assert verdict.model.weights.sum() == pytest.approx(1.0)
    else:
        w = verdict.witness
        assert witness_bound(w.coefficients) - evaluate_witness(w, p) >= 1e-7


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_witness_shift_invariance(seed):
    # adding a multiple of the all-ones tensor shifts bound and value equally
    rng = np.random.default_rng(seed)
    p = noisy(chsh_correlations(), rng.uniform(0.75, 1.0))
    w = decide_bell_local(p).witness
    c = rng.normal()
    shifted = w.coefficients + c
    bound = witness_bound(shifted)
    value = float(np.sum(shifted * p.probabilities))
    assert bound - value == pytest.approx(w.margin, abs=1e-12)


def test_separable_states_are_local():
    rng = np.random.default_rng(2)
    for _ in range(10):
        rho = random_separable(2, 2, 4, rng)
        assert decide_bell_local(random_scenario_correlations(rng, rho, m=3)).local
