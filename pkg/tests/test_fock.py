import numpy as np
import pytest

from bosonicqec.fock import (
    FockDimensionError,
    Operator,
    StateVector,
    displacement,
    displacement_truncation_defect,
    expectation,
    fock_state,
    identity,
    mode_operators,
    operator_power,
    overlap,
    parity_projector,
    tensor_product,
    two_mode_fock_state,
)
from bosonicqec.codes import binomial_code


def test_lowering_operator_matrix_elements():
    ops = mode_operators(10)
    a = ops["annihilation"].entries
    out = a @ fock_state(10, 8).amplitudes
    assert abs(out[7] - np.sqrt(8)) < 1e-14
    assert np.sum(np.abs(out)) == pytest.approx(np.sqrt(8), abs=1e-14)


def test_vacuum_annihilation_is_zero():
    a = mode_operators(6)["annihilation"]
    out = a.apply(fock_state(6, 0))
    assert np.max(np.abs(out.amplitudes)) == 0.0


def test_number_operator_eigenstate():
    n = mode_operators(8)["number"]
    state = fock_state(8, 5)
    assert expectation(state, n) == pytest.approx(5.0, abs=1e-14)
    assert np.allclose(n.entries @ state.amplitudes, 5.0 * np.asarray(state.amplitudes))


def test_creation_is_adjoint_of_annihilation_exactly():
    ops = mode_operators(12)
    assert np.array_equal(ops["creation"].entries, ops["annihilation"].entries.conj().T)


def test_number_equals_creation_times_annihilation():
    ops = mode_operators(9)
    prod = ops["creation"].entries @ ops["annihilation"].entries
    assert np.allclose(prod, ops["number"].entries, atol=1e-13)


def test_commutator_holds_below_truncation_level():
    cutoff = 14
    ops = mode_operators(cutoff)
    a, adag = ops["annihilation"].entries, ops["creation"].entries
    comm = a @ adag - adag @ a
    block = comm[:cutoff, :cutoff]
    assert np.allclose(block, np.eye(cutoff), atol=1e-13)
    # truncation corrupts only the top diagonal entry
    assert comm[cutoff, cutoff] == pytest.approx(-cutoff, abs=1e-12)


def test_cutoff_zero_rejected():
    with pytest.raises(ValueError):
        mode_operators(0)


def test_displacement_zero_is_identity():
    d = displacement(0.0, 12)
    assert np.allclose(d.entries, np.eye(13), atol=1e-14)


def test_displacement_coherent_state_amplitudes():
    # oracle: direct power series of the coherent-state expansion
    beta, cutoff = 0.5, 20
    facts = np.cumprod([1.0] + list(range(1, cutoff + 1)))
    ref = np.exp(-abs(beta) ** 2 / 2) * beta ** np.arange(cutoff + 1) / np.sqrt(facts)
    coh = displacement(beta, cutoff).entries @ fock_state(cutoff, 0).amplitudes
    assert np.max(np.abs(coh - ref)) < 1e-10


def test_displacement_unitary_on_protected_block():
    cutoff = 30
    for beta in (0.3, 0.7 + 0.2j, 1.0):
        d = displacement(beta, cutoff).entries
        gram = d.conj().T @ d
        block = gram[: cutoff // 2, : cutoff // 2]
        assert np.max(np.abs(block - np.eye(cutoff // 2))) < 1e-8


def test_displacement_block_convergence_monotone():
    defects = [
        displacement_truncation_defect(0.8, c, 60, block=6) for c in (12, 20, 30)
    ]
    assert defects[0] > defects[1] > defects[2]


def test_displacement_rejects_nonfinite():
    with pytest.raises(ValueError):
        displacement(complex(np.inf, 0.0), 10)


def test_displacement_warns_when_cutoff_small():
    with pytest.warns(UserWarning):
        displacement(3.0, 8)


def test_tensor_identity():
    two = tensor_product(identity(4), identity(4))
    assert two.modes == 2
    assert np.array_equal(np.asarray(two.entries), np.eye(25))


def test_tensor_state_index_convention():
    state = tensor_product(fock_state(4, 0), fock_state(4, 4))
    assert state.occupations() == [4]
    assert state.amplitudes[4] == 1.0
    alt = two_mode_fock_state(4, 0, 4)
    assert np.array_equal(np.asarray(state.amplitudes), np.asarray(alt.amplitudes))


def test_tensor_single_mode_action():
    cutoff = 4
    a1 = tensor_product(mode_operators(cutoff)["annihilation"], identity(cutoff))
    state = two_mode_fock_state(cutoff, 2, 2)
    out = a1.entries @ state.amplitudes
    expected = np.sqrt(2) * two_mode_fock_state(cutoff, 1, 2).amplitudes
    assert np.allclose(out, expected, atol=1e-14)


def test_tensor_rejects_mismatched_cutoffs_and_kinds():
    with pytest.raises(FockDimensionError):
        tensor_product(identity(4), identity(5))
    with pytest.raises(TypeError):
        tensor_product(identity(4), fock_state(4, 0))


def test_expectation_code_word_mean_photon():
    code = binomial_code(1, 1)
    n = mode_operators(code.cutoff)["number"]
    assert expectation(code.words[0], n).real == pytest.approx(2.0, abs=1e-12)
    assert expectation(code.words[1], n).real == pytest.approx(2.0, abs=1e-12)


def test_expectation_trivial_cases():
    vac = fock_state(6, 0)
    assert expectation(vac, mode_operators(6)["number"]) == 0.0
    psi = StateVector(np.ones(7) / np.sqrt(7), 6)
    assert expectation(psi, identity(6)).real == pytest.approx(1.0, abs=1e-14)


def test_expectation_dimension_mismatch():
    with pytest.raises(FockDimensionError):
        expectation(fock_state(5, 0), identity(6))


def test_expectation_factorizes_over_tensor_products():
    rng = np.random.default_rng(11)
    cutoff = 5
    for _ in range(5):
        v1 = rng.normal(size=cutoff + 1) + 1j * rng.normal(size=cutoff + 1)
        v2 = rng.normal(size=cutoff + 1) + 1j * rng.normal(size=cutoff + 1)
        s1 = StateVector(v1 / np.linalg.norm(v1), cutoff)
        s2 = StateVector(v2 / np.linalg.norm(v2), cutoff)
        n = mode_operators(cutoff)["number"]
        a = mode_operators(cutoff)["annihilation"]
        joint = expectation(tensor_product(s1, s2), tensor_product(n, a))
        split = expectation(s1, n) * expectation(s2, a)
        assert abs(joint - split) < 1e-12


def test_statevector_validation():
    with pytest.raises(FockDimensionError):
        StateVector(np.ones(5), cutoff=5)
    with pytest.raises(ValueError):
        StateVector(np.ones(6), cutoff=5)  # unnormalized but tagged normalized
    ok = StateVector(np.ones(6), cutoff=5, normalized=False)
    assert ok.norm() == pytest.approx(np.sqrt(6))


def test_operator_hermitian_hint_checked():
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 1] = 1.0
    with pytest.raises(ValueError):
        Operator(mat, cutoff=3, hermitian_hint=True)


def test_parity_projector_partitions_identity():
    ps = [parity_projector(10, 3, r) for r in range(3)]
    total = sum(p.entries for p in ps)
    assert np.array_equal(total, np.eye(11))
    assert np.array_equal(ps[1].entries @ fock_state(10, 4).amplitudes,
                          fock_state(10, 4).amplitudes)


def test_operator_power():
    a = mode_operators(6)["annihilation"]
    a2 = operator_power(a, 2).entries
    assert np.allclose(a2, a.entries @ a.entries)
    assert np.array_equal(operator_power(a, 0).entries, np.eye(7))


def test_overlap_conjugate_symmetry():
    rng = np.random.default_rng(3)
    v1 = rng.normal(size=6) + 1j * rng.normal(size=6)
    v2 = rng.normal(size=6) + 1j * rng.normal(size=6)
    s1 = StateVector(v1 / np.linalg.norm(v1), 5)
    s2 = StateVector(v2 / np.linalg.norm(v2), 5)
    assert overlap(s1, s2) == pytest.approx(np.conj(overlap(s2, s1)))
