import numpy as np
import pytest

from bosonicqec import channels as ch
from bosonicqec import metrics as mt
from bosonicqec import qec
from bosonicqec.codes import (
    binomial_code,
    cat_code,
    naive_code,
    optimized_codes,
    two_mode_code,
)
from bosonicqec.fock import (
    Operator,
    fock_state,
    identity,
    mode_operators,
    operator_power,
    tensor_product,
)


# --- Knill-Laflamme verification ----------------------------------------------

def test_kl_smallest_code_single_loss():
    code = binomial_code(1, 1)
    report = qec.kl_matrix(code, ch.discrete_error_set(1, 0, 0, code.cutoff))
    assert report.passed
    assert np.max(np.abs(report.alpha - np.diag(np.diag(report.alpha)))) < 1e-12
    assert report.alpha[1, 1].real == pytest.approx(2.0, abs=1e-12)


def test_kl_order_two_code_with_dephasing():
    code = binomial_code(2, 2)
    report = qec.kl_matrix(code, ch.discrete_error_set(2, 0, 1, code.cutoff))
    assert report.passed
    # the number-error row mixes with the identity row: Hermitian, not diagonal
    assert abs(report.alpha[0, 3]) > 1.0
    assert np.max(np.abs(report.alpha - report.alpha.conj().T)) < 1e-10


def test_kl_gain_protected_code():
    code = binomial_code(2, 2)
    errors = [identity(code.cutoff),
              mode_operators(code.cutoff)["annihilation"],
              mode_operators(code.cutoff)["creation"],
              mode_operators(code.cutoff)["number"]]
    assert qec.kl_matrix(code, errors).passed


def test_kl_trivial_code_fails_with_unit_defect():
    code = naive_code()
    report = qec.kl_matrix(code, ch.discrete_error_set(1, 0, 0, code.cutoff))
    assert not report.passed
    assert report.worddep_defect == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("L,G,D", [(1, 0, 0), (2, 0, 0), (1, 1, 0), (2, 1, 0), (2, 0, 1), (3, 0, 1)])
def test_kl_passes_on_matching_binomial_grid(L, G, D):
    N, S = max(L, G, 2 * D), L + G
    code = binomial_code(N, S)
    report = qec.kl_matrix(code, ch.discrete_error_set(L, G, D, code.cutoff))
    assert report.passed, (L, G, D, report.defect())


@pytest.mark.parametrize("N,S", [(1, 2), (2, 3)])
def test_kl_fails_when_loss_order_exceeds_n(N, S):
    code = binomial_code(N, S)
    report = qec.kl_matrix(code, ch.discrete_error_set(S, 0, 0, code.cutoff))
    assert not report.passed
    assert report.worddep_defect > 1e-3


def test_kl_two_mode_code_single_losses():
    code = two_mode_code(1, 1)
    c = code.cutoff
    a = mode_operators(c)["annihilation"]
    errors = [identity(c, modes=2), tensor_product(a, identity(c)),
              tensor_product(identity(c), a)]
    assert qec.kl_matrix(code, errors).passed


def test_kl_optimized_codes():
    c17 = optimized_codes("sqrt17")
    assert qec.kl_matrix(c17, ch.discrete_error_set(1, 0, 0, c17.cutoff)).passed
    c21 = optimized_codes("sqrt21")
    assert qec.kl_matrix(c21, ch.discrete_error_set(1, 1, 0, c21.cutoff)).passed


def test_kl_small_displacement_correctable():
    # second-order Taylor of the displacement on an order-two code
    code = binomial_code(2, 2)
    beta = 0.05
    a = mode_operators(code.cutoff)["annihilation"].entries
    gen = beta * a.conj().T - beta * a
    d2 = np.eye(code.dim) + gen + gen @ gen / 2
    report = qec.kl_matrix(code, [identity(code.cutoff), Operator(d2, code.cutoff)])
    assert report.passed


# --- error words ---------------------------------------------------------------

def test_error_words_single_loss():
    code = binomial_code(1, 1)
    ew = qec.error_words(code, mode_operators(code.cutoff)["annihilation"])
    assert ew.images[0].occupations() == [3]
    assert ew.images[1].occupations() == [1]
    assert not any(ew.annihilated)
    assert abs(ew.overlap_matrix[0, 1]) < 1e-12


def test_error_words_first_order_no_jump():
    code = binomial_code(1, 1)
    levels = np.arange(code.dim)
    b0 = Operator(np.diag(1.0 - 0.01 * levels / 2).astype(complex), code.cutoff)
    ew = qec.error_words(code, b0)
    up = ew.orthogonalized[0].as_complex128()
    expected = np.zeros(code.dim, dtype=complex)
    expected[0], expected[4] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    assert np.max(np.abs(up - expected)) < 1e-10
    # the single-level word is invariant under any diagonal error
    assert ew.orthogonalized[1] is None
    assert ew.code_overlap[1] == pytest.approx(1.0, abs=1e-12)


def test_error_words_dephasing_on_order_two_code():
    code = binomial_code(2, 2)
    ew = qec.error_words(code, mode_operators(code.cutoff)["number"])
    up = ew.orthogonalized[0].as_complex128()
    dn = ew.orthogonalized[1].as_complex128()
    expected_up = np.zeros(code.dim, dtype=complex)
    expected_up[0], expected_up[6] = np.sqrt(3) / 2, -0.5
    expected_dn = np.zeros(code.dim, dtype=complex)
    expected_dn[3], expected_dn[9] = 0.5, -np.sqrt(3) / 2
    assert np.max(np.abs(up - expected_up)) < 1e-12
    assert np.max(np.abs(dn - expected_dn)) < 1e-12


def test_error_words_flags_annihilated_word():
    code = naive_code()
    ew = qec.error_words(code, mode_operators(code.cutoff)["annihilation"])
    assert ew.annihilated[0] and not ew.annihilated[1]
    with pytest.raises(ValueError):
        zero = Operator(np.zeros((code.dim, code.dim)), code.cutoff)
        qec.error_words(code, zero)


# --- unitary completion ---------------------------------------------------------

def test_unitary_completion_empty_pairs_is_identity():
    u = qec.unitary_completion([], 6)
    assert np.array_equal(u.entries, np.eye(6))


def test_unitary_completion_executes_state_transfer():
    code = binomial_code(1, 1)
    dim = code.dim
    up = code.words[0].as_complex128()
    dn = code.words[1].as_complex128()
    e_up = fock_state(code.cutoff, 3).as_complex128()
    e_dn = fock_state(code.cutoff, 1).as_complex128()
    u = qec.unitary_completion([(e_up, up), (e_dn, dn)], dim)
    assert np.max(np.abs(u.entries @ e_up - up)) < 1e-12
    assert np.max(np.abs(u.entries @ e_dn - dn)) < 1e-12


def test_unitary_completion_random_property():
    rng = np.random.default_rng(42)
    for _ in range(100):
        dim = int(rng.integers(4, 12))
        n_pairs = int(rng.integers(1, dim // 2 + 1))
        raw_s = rng.normal(size=(dim, n_pairs)) + 1j * rng.normal(size=(dim, n_pairs))
        raw_t = rng.normal(size=(dim, n_pairs)) + 1j * rng.normal(size=(dim, n_pairs))
        qs, _ = np.linalg.qr(raw_s)
        qt, _ = np.linalg.qr(raw_t)
        pairs = [(qs[:, i], qt[:, i]) for i in range(n_pairs)]
        u = qec.unitary_completion(pairs, dim).entries
        assert np.max(np.abs(u.conj().T @ u - np.eye(dim))) < 1e-12


def test_unitary_completion_rejects_non_orthonormal():
    v = np.zeros(5, dtype=complex)
    v[0] = 1.0
    w = np.zeros(5, dtype=complex)
    w[0], w[1] = 1 / np.sqrt(2), 1 / np.sqrt(2)
    with pytest.raises(ValueError):
        qec.unitary_completion([(v, v), (w, w)], 5)
    with pytest.raises(ValueError):
        qec.unitary_completion([(2.0 * v, v)], 5)


def test_unitary_completion_identity_like_on_untouched_levels():
    dim = 8
    src = np.zeros(dim, dtype=complex)
    src[2] = 1.0
    dst = np.zeros(dim, dtype=complex)
    dst[3] = 1.0
    u = qec.unitary_completion([(src, dst)], dim).entries
    for j in (0, 1, 5, 6, 7):
        e = np.zeros(dim)
        e[j] = 1.0
        assert np.max(np.abs(u @ e - e)) < 1e-12


# --- recovery maps --------------------------------------------------------------

def test_recovery_at_zero_strength():
    code = binomial_code(1, 1)
    rec = qec.build_recovery(code, 0.0)
    proj = code.projector()
    # branch 0 acts as the identity on the code space
    assert np.max(np.abs(rec.operators[0].entries @ proj - proj)) < 1e-12
    # branch 1 transfers the loss words back
    up = code.words[0].as_complex128()
    e_up = fock_state(code.cutoff, 3).as_complex128()
    assert np.max(np.abs(rec.operators[1].entries @ e_up - up)) < 1e-12


@pytest.mark.parametrize("L", [1, 2, 3])
def test_recovery_completeness(L):
    code = binomial_code(L, L)
    for t in (0.0, 1e-3, 0.1):
        rec = qec.build_recovery(code, t)
        assert rec.completeness_excess() <= 1e-9
        total = rec.completeness_matrix()
        assert np.max(np.abs(total - np.eye(code.dim))) < 1e-9


@pytest.mark.parametrize("L,floor", [(1, 1.9), (2, 2.9)])
def test_recovery_residual_scaling(L, floor):
    code = binomial_code(L, L)
    expo = mt.residual_exponent(code)
    assert expo >= floor


def test_recovery_scaling_on_random_pure_states():
    rng = np.random.default_rng(5)
    grid = np.geomspace(1e-4, 1e-2, 5)
    for L in (1, 2, 3):
        code = binomial_code(L, L)
        dtype = np.clongdouble if L >= 3 else complex
        states = []
        for _ in range(20):
            c = rng.normal(size=2) + 1j * rng.normal(size=2)
            c /= np.linalg.norm(c)
            psi = c[0] * code.words[0].as_complex128() + c[1] * code.words[1].as_complex128()
            states.append(np.outer(psi, psi.conj()))
        worst = 0.0
        residuals = np.zeros((len(states), grid.size))
        for j, t in enumerate(grid):
            rec = qec.build_recovery(code, t, dtype=dtype)
            ell, _ = ch.suggest_ell_max(t, code.cutoff, min_ell=L + 3)
            eops = [ch.loss_kraus_operator(t, k, code.cutoff, dtype=dtype)
                    for k in range(ell + 1)]
            for i, rho in enumerate(states):
                mid = ch.apply_channel(np.asarray(rho, dtype=dtype), eops)
                out = ch.apply_channel(mid, rec.operators)
                residuals[i, j] = np.max(np.abs(out - rho))
        for i in range(len(states)):
            expo = np.polyfit(np.log(grid), np.log(residuals[i]), 1)[0]
            worst = max(worst, abs(expo - (L + 1)))
            assert expo >= L + 1 - 0.1, (L, i, expo)


def test_recovery_requires_binomial_family():
    with pytest.raises(ValueError):
        qec.build_recovery(cat_code(2.0), 0.01)


def test_recovery_spacing_precondition():
    code = binomial_code(1, 1)
    with pytest.raises(ValueError):
        qec.build_recovery(code, 0.01, L=2)


def test_recovery_echo_variant():
    code = binomial_code(1, 1)
    t = 1e-3
    rec = qec.build_recovery(code, t, echo=True)
    assert rec.completeness_excess() <= 1e-9
    # echo swaps the words after recovery: X R(E(rho)) X^dag ~ rho
    gates = qec.logical_gates(code)
    ell, _ = ch.suggest_ell_max(t, code.cutoff, min_ell=4)
    eops = [ch.loss_kraus_operator(t, k, code.cutoff) for k in range(ell + 1)]
    rho = code.mixed_state()
    out = ch.apply_channel(ch.apply_channel(rho, eops), rec.operators)
    undone = gates.X.entries.conj().T @ out @ gates.X.entries
    assert np.max(np.abs(undone - rho)) < 1e-4


def test_truncated_jump_image_mode_matches_exact_at_leading_order():
    code = binomial_code(2, 2)
    exact = qec.build_recovery(code, 1e-5, jump_images="exact")
    trunc = qec.build_recovery(code, 1e-5, jump_images="truncated")
    for a, b in zip(exact.operators, trunc.operators):
        assert np.max(np.abs(a.entries - b.entries)) < 1e-4


def test_measurement_recovery_structure_and_scaling():
    code = binomial_code(1, 1)
    rec = qec.measurement_recovery(code)
    assert rec.scheme == "word-projective"
    assert rec.completeness_excess() <= 1e-12
    # a code-space state at zero loss strength is untouched
    rho = code.mixed_state()
    out = ch.apply_channel(rho, rec.operators)
    assert np.max(np.abs(out - rho)) < 1e-13
    grid = np.geomspace(1e-4, 1e-2, 5)
    vals = []
    for t in grid:
        ell, _ = ch.suggest_ell_max(t, code.cutoff, min_ell=4)
        eops = [ch.loss_kraus_operator(t, k, code.cutoff) for k in range(ell + 1)]
        out = ch.apply_channel(ch.apply_channel(rho, eops), rec.operators)
        vals.append(np.max(np.abs(out - rho)))
    expo = np.polyfit(np.log(grid), np.log(vals), 1)[0]
    assert expo >= 1.9


def test_measurement_and_parity_recovery_agree_at_first_order():
    code = binomial_code(1, 1)
    grid = np.geomspace(1e-4, 1e-2, 5)
    for builder in (lambda t: qec.build_recovery(code, t),
                    lambda t: qec.measurement_recovery(code)):
        vals = []
        for t in grid:
            rec = builder(t)
            ell, _ = ch.suggest_ell_max(t, code.cutoff, min_ell=4)
            eops = [ch.loss_kraus_operator(t, k, code.cutoff) for k in range(ell + 1)]
            rho = code.mixed_state()
            out = ch.apply_channel(ch.apply_channel(rho, eops), rec.operators)
            vals.append(np.max(np.abs(out - rho)))
        expo = np.polyfit(np.log(grid), np.log(vals), 1)[0]
        assert expo >= 1.9


def test_sqrt17_recovery_residual_scaling():
    code = optimized_codes("sqrt17")
    grid = np.geomspace(1e-4, 1e-2, 7)
    vals = []
    for t in grid:
        rec = qec.sqrt17_recovery(t, cutoff=code.cutoff)
        ell, _ = ch.suggest_ell_max(t, code.cutoff, min_ell=4)
        eops = [ch.loss_kraus_operator(t, k, code.cutoff) for k in range(ell + 1)]
        rho = code.mixed_state()
        out = ch.apply_channel(ch.apply_channel(rho, eops), rec.operators)
        vals.append(np.max(np.abs(out - rho)))
    expo = np.polyfit(np.log(grid), np.log(vals), 1)[0]
    assert expo >= 1.9
    rec = qec.sqrt17_recovery(1e-3, cutoff=code.cutoff)
    assert rec.completeness_excess() <= 1e-12


def test_sqrt17_error_words_overlap():
    code = optimized_codes("sqrt17")
    a = mode_operators(code.cutoff)["annihilation"]
    loss = qec.error_words(code, a)
    levels = np.arange(code.dim)
    e0 = Operator(np.diag(1.0 - 1e-3 * levels / 2).astype(complex), code.cutoff)
    nojump = qec.error_words(code, e0)
    # the loss image of the down word and the no-jump deformation of the up
    # word share one direction
    inner = np.vdot(loss.images[1].as_complex128(),
                    nojump.orthogonalized[0].as_complex128())
    assert abs(inner) == pytest.approx(1.0, abs=1e-10)


def test_sqrt17_recovery_identity_at_zero():
    rec = qec.sqrt17_recovery(0.0)
    code = optimized_codes("sqrt17")
    rho = code.mixed_state()
    out = ch.apply_channel(rho, rec.operators)
    assert np.max(np.abs(out - rho)) < 1e-12


# --- logical gates ---------------------------------------------------------------

def test_z_gate_diagonal_pattern():
    code = binomial_code(1, 1)
    z = qec.logical_gates(code).Z.entries
    sub = z[np.ix_([0, 2, 4], [0, 2, 4])]
    assert np.allclose(sub, np.diag([1.0, -1.0, 1.0]), atol=1e-12)


def test_x_gate_squares_to_identity_on_code_space():
    code = binomial_code(2, 2)
    gates = qec.logical_gates(code)
    xx = gates.X.entries @ gates.X.entries
    proj = code.projector()
    assert np.max(np.abs(xx @ proj - proj)) < 1e-12
    assert np.max(np.abs(gates.X.entries @ code.words[0].as_complex128()
                         - code.words[1].as_complex128())) < 1e-12


def test_phase_gate_family():
    code = binomial_code(1, 1)
    gates = qec.logical_gates(code)
    assert np.max(np.abs(gates.phase(0.0).entries - np.eye(code.dim))) < 1e-14
    theta = 0.77
    ph = gates.phase(theta).entries
    up = code.words[0].as_complex128()
    dn = code.words[1].as_complex128()
    assert np.max(np.abs(ph @ up - np.exp(-1j * theta / 2) * up)) < 1e-12
    assert np.max(np.abs(ph @ dn - np.exp(+1j * theta / 2) * dn)) < 1e-12
    assert np.max(np.abs(ph.conj().T @ ph - np.eye(code.dim))) < 1e-12


def test_logical_gates_require_qubit_codes():
    from bosonicqec.codes import qudit_binomial_code

    with pytest.raises(ValueError):
        qec.logical_gates(qudit_binomial_code(1, 1, 3))


# --- worst-case error classification ---------------------------------------------

def test_classification_mixed_generator_example():
    # A_1 = n a + a^dag once, A_2 = a twice
    params = qec.required_code_params([([(1, 2), (1, 0)], 1), ([(0, 1)], 2)])
    assert (params.L, params.G, params.N) == (2, 1, 3)
    assert params.S == 3


def test_classification_no_jump_dominated_example():
    # A = a + a^2 twice: the no-jump combination raises G and N
    params = qec.required_code_params([([(0, 1), (0, 2)], 2)])
    assert (params.L, params.G, params.N) == (4, 1, 4)


def test_classification_single_loss():
    params = qec.required_code_params([([(0, 1)], 1)])
    assert (params.L, params.G, params.N) == (1, 0, 1)


def test_classification_rejects_empty():
    with pytest.raises(ValueError):
        qec.required_code_params([])
    with pytest.raises(ValueError):
        qec.required_code_params([([(0, 1)], 0)])


def test_classification_monotone_under_added_monomials():
    rng = np.random.default_rng(9)
    for _ in range(25):
        n_mono = int(rng.integers(1, 4))
        monos = [(int(rng.integers(0, 3)), int(rng.integers(0, 3))) for _ in range(n_mono)]
        order = int(rng.integers(1, 4))
        base = qec.required_code_params([(monos, order)])
        extra = monos + [(int(rng.integers(0, 3)), int(rng.integers(0, 3)))]
        grown = qec.required_code_params([(extra, order)])
        assert grown.N >= base.N
        assert grown.L >= base.L
        assert grown.G >= base.G
