import numpy as np
import pytest

from bosonicqec import channels as ch
from bosonicqec import metrics as mt
from bosonicqec import qec
from bosonicqec.codes import binomial_code, mean_photon_number, naive_code, optimized_codes
from bosonicqec.fock import mode_operators
from bosonicqec.optimizer import (
    OptimizationProblem,
    kl_penalty,
    optimize_code,
    timestep_adjusted_words,
)


def test_kl_penalty_vanishes_on_exact_code():
    code = binomial_code(1, 1)
    errors = ch.discrete_error_set(1, 0, 0, code.cutoff)
    assert kl_penalty(code.words, errors) < 1e-18


def test_kl_penalty_vanishes_on_sqrt17():
    code = optimized_codes("sqrt17")
    errors = ch.discrete_error_set(1, 0, 0, code.cutoff)
    assert kl_penalty(code.words, errors) < 1e-15


def test_kl_penalty_counts_all_violations_of_trivial_code():
    # |0>,|1> under {I, a}: the loss maps one word onto the other
    # (cross element 1) and the mean occupations differ by 1, so the
    # squared-violation sum is 2.
    code = naive_code()
    errors = ch.discrete_error_set(1, 0, 0, code.cutoff)
    assert kl_penalty(code.words, errors) == pytest.approx(2.0, abs=1e-12)


def test_problem_validation():
    with pytest.raises(ValueError):
        OptimizationProblem(L=1, cutoff=3)
    with pytest.raises(ValueError):
        OptimizationProblem(L=1, cutoff=5, tolerance_kl=0.0)
    with pytest.raises(ValueError):
        OptimizationProblem(L=0, cutoff=5)


def test_small_search_finds_feasible_code():
    problem = OptimizationProblem(L=1, G=0, cutoff=5, restarts=3, seed=11)
    result = optimize_code(problem)
    assert result.converged
    assert result.kl_defect <= problem.tolerance_kl
    # never worse than the matching binomial code (warm start)
    assert result.objective <= mt.uncorrectable_leading(binomial_code(1, 1, cutoff=5), 1) + 1e-9
    # independent re-check at the problem tolerance
    errors = ch.discrete_error_set(1, 0, 0, 5)
    report = qec.kl_matrix(result.code, errors, tolerance=problem.tolerance_kl)
    assert report.passed


def test_search_is_deterministic_for_fixed_seed():
    problem = OptimizationProblem(L=1, G=0, cutoff=4, restarts=2, seed=21)
    a = optimize_code(problem)
    b = optimize_code(problem)
    assert a.objective == b.objective
    assert a.kl_defect == b.kl_defect
    assert np.array_equal(a.code.words[0].as_complex128(), b.code.words[0].as_complex128())
    assert np.array_equal(a.code.words[1].as_complex128(), b.code.words[1].as_complex128())


def test_parity_masked_search_recovers_binomial_code():
    problem = OptimizationProblem(
        L=1, G=0, cutoff=4, restarts=4, seed=3, level_masks=((0, 2, 4), (2,))
    )
    result = optimize_code(problem)
    assert result.converged
    assert mean_photon_number(result.code) == pytest.approx(2.0, abs=1e-6)
    assert result.objective == pytest.approx(2.0, abs=1e-6)


def test_restart_log_records_every_restart():
    problem = OptimizationProblem(L=1, G=0, cutoff=4, restarts=3, seed=1)
    result = optimize_code(problem)
    assert len(result.restart_log) == 3
    assert [rec.restart for rec in result.restart_log] == [0, 1, 2]


def test_level_mask_validation():
    with pytest.raises(ValueError):
        optimize_code(OptimizationProblem(L=1, cutoff=4, restarts=1,
                                          level_masks=((0, 9), (2,))))


def test_timestep_adjusted_words_invert_no_jump():
    code = binomial_code(2, 2)
    t = 0.05
    adjusted = timestep_adjusted_words(code, t)
    # e^(-t n / 2) maps the adjusted words back onto the originals
    damp = np.diag(np.exp(-t * np.arange(code.dim) / 2))
    for orig, adj in zip(code.words, adjusted.words):
        img = damp @ adj.as_complex128()
        img /= np.linalg.norm(img)
        ref = orig.as_complex128()
        assert np.max(np.abs(img - ref)) < 1e-12


def test_gain_protected_search_smoke():
    problem = OptimizationProblem(L=1, G=1, cutoff=6, restarts=2, seed=5)
    result = optimize_code(problem)
    assert result.converged
    binom = binomial_code(1, 2, cutoff=6)
    assert result.objective <= mt.uncorrectable_leading(binom, 1) + 1e-9
