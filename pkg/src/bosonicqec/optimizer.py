"""Numerical search for codes minimizing the leading uncorrectable-loss rate.

The words are parametrized directly by their Fock amplitudes (real by
default: the known analytic optima are real up to sign) and descended with
penalty-augmented Nelder-Mead from many restarts.  The objective is the
leading coefficient of the (L+1)-photon-loss probability on the maximally
mixed code state; quadratic penalties enforce orthonormality and the full
error-correction equalities for {I, a..a^L, a^dag..a^dag^G}.  The binomial
code of matching (L, G) is always the first restart, so the search can never
return anything worse than the analytic family.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.optimize import least_squares, minimize

from . import qec
from .channels import discrete_error_set
from .codes import Code, CodeParams, binomial_code, custom_code
from .fock import StateVector, mode_operators, operator_power


@dataclass(frozen=True)
class OptimizationProblem:
    """Search configuration for an order-(L, G) loss/gain code."""

    L: int
    G: int = 0
    cutoff: int = 0
    tolerance_kl: float = 1e-8
    restarts: int = 32
    seed: int = 0
    complex_amplitudes: bool = False
    level_masks: tuple[tuple[int, ...], tuple[int, ...]] | None = None
    penalty_weight: float = 1e3
    anneal_rounds: int = 3
    maxfev_per_round: int = 30000

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.G < 0:
            raise ValueError("G must be >= 0")
        if self.cutoff < 2 * (self.L + 1):
            raise ValueError(f"cutoff must be >= 2(L+1) = {2 * (self.L + 1)}")
        if self.tolerance_kl <= 0:
            raise ValueError("tolerance_kl must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass(frozen=True)
class RestartRecord:
    restart: int
    objective: float
    kl_defect: float
    feasible: bool


@dataclass(frozen=True)
class OptResult:
    """Best code found, its leading-loss objective, and the restart trail."""

    code: Code
    objective: float
    kl_defect: float
    converged: bool
    restart_log: tuple[RestartRecord, ...] = field(repr=False, default=())
    seed: int = 0


def kl_penalty(words, error_set) -> float:
    """Sum of squared error-correction violations for a word pair.

    Off-diagonal (cross-word) elements of every E_l^dag E_k must vanish and
    the diagonal elements must be word-independent; both enter squared.
    """
    mats = [e.entries if hasattr(e, "entries") else np.asarray(e) for e in error_set]
    vecs = []
    for w in words:
        v = w.as_complex128() if isinstance(w, StateVector) else np.asarray(w, dtype=complex)
        vecs.append(v)
    if len(vecs) != 2:
        raise ValueError("kl_penalty expects exactly two words")
    w0, w1 = vecs
    total = 0.0
    images0 = [m @ w0 for m in mats]
    images1 = [m @ w1 for m in mats]
    for i in range(len(mats)):
        for j in range(len(mats)):
            cross = np.vdot(images0[i], images1[j])
            total += abs(cross) ** 2
            diag0 = np.vdot(images0[i], images0[j])
            diag1 = np.vdot(images1[i], images1[j])
            total += abs(diag0 - diag1) ** 2
    return float(total)


def _leading_loss_objective(w0: np.ndarray, w1: np.ndarray, a_pow: np.ndarray,
                            L: int) -> float:
    val = 0.0
    for w in (w0, w1):
        img = a_pow @ w
        val += float(np.real(np.vdot(img, img)))
    return val / (2.0 * factorial(L + 1))


def _project_pair(w0: np.ndarray, w1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w0 = w0 / np.linalg.norm(w0)
    w1 = w1 - w0 * np.vdot(w0, w1)
    w1 = w1 / np.linalg.norm(w1)
    return w0, w1


def timestep_adjusted_words(code: Code, kappa_dt: float) -> Code:
    """Inverse-no-jump transformation of a code's words.

    Applies exp(+kappa_dt n/2) to each word and renormalizes, producing the
    timestep-dependent words whose loss-channel images match the bare-loss
    optimum at the given step.  Exposed as a documented transformation only;
    it is not a search target.
    """
    amps = []
    for w in code.words:
        occ = np.arange(w.dim, dtype=np.longdouble)
        scaled = np.asarray(w.amplitudes, dtype=np.clongdouble) * np.exp(
            np.longdouble(kappa_dt) * occ / 2.0
        )
        scaled /= np.sqrt(np.sum(np.abs(scaled) ** 2))
        amps.append(StateVector(scaled, w.cutoff))
    return custom_code(amps, code.params, tag="custom", modes=code.modes)


def _binomial_warm_start(problem: OptimizationProblem, dim: int) -> np.ndarray | None:
    L, G = problem.L, problem.G
    N, S = max(L, G), L + G
    if (N + 1) * (S + 1) > problem.cutoff:
        return None
    bc = binomial_code(N, S, cutoff=problem.cutoff)
    return np.concatenate([
        np.real(bc.words[0].as_complex128()),
        np.real(bc.words[1].as_complex128()),
    ])


def optimize_code(problem: OptimizationProblem) -> OptResult:
    """Penalty-annealed Nelder-Mead search over word amplitudes.

    Runs ``problem.restarts`` independent descents (restart 0 warm-started
    from the matching binomial code when it fits the cutoff), anneals the
    penalty weight tenfold per outer round, re-projects the best point of
    each restart to an exactly orthonormal pair and re-checks the
    error-correction equalities independently.  Deterministic for a fixed
    seed; ties in the objective break toward the lower restart index.
    """
    dim = problem.cutoff + 1
    L, G = problem.L, problem.G
    masks = problem.level_masks
    if masks is None:
        masks = (tuple(range(dim)), tuple(range(dim)))
    masks = (tuple(masks[0]), tuple(masks[1]))
    for mask in masks:
        if any(not 0 <= lvl <= problem.cutoff for lvl in mask):
            raise ValueError("level mask outside the truncated space")
    n0, n1 = len(masks[0]), len(masks[1])
    width = 2 if problem.complex_amplitudes else 1
    n_params = (n0 + n1) * width

    ladder = mode_operators(problem.cutoff)
    a_pow = operator_power(ladder["annihilation"], L + 1).entries
    error_set = discrete_error_set(L, G, 0, problem.cutoff)
    err_mats = [e.entries for e in error_set]

    def unpack(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w0 = np.zeros(dim, dtype=complex)
        w1 = np.zeros(dim, dtype=complex)
        if problem.complex_amplitudes:
            w0[list(masks[0])] = x[:n0] + 1j * x[n0 : 2 * n0]
            w1[list(masks[1])] = x[2 * n0 : 2 * n0 + n1] + 1j * x[2 * n0 + n1 :]
        else:
            w0[list(masks[0])] = x[:n0]
            w1[list(masks[1])] = x[n0:]
        return w0, w1

    def penalized(x: np.ndarray, weight: float) -> float:
        w0, w1 = unpack(x)
        nrm0 = np.real(np.vdot(w0, w0))
        nrm1 = np.real(np.vdot(w1, w1))
        if nrm0 < 1e-12 or nrm1 < 1e-12:
            return 1e6
        pen = (nrm0 - 1.0) ** 2 + (nrm1 - 1.0) ** 2 + abs(np.vdot(w0, w1)) ** 2
        pen += kl_penalty((w0, w1), err_mats)
        return _leading_loss_objective(w0, w1, a_pow, L) + weight * pen

    def constraint_residuals(x: np.ndarray) -> np.ndarray:
        w0, w1 = unpack(x)
        res = [
            np.real(np.vdot(w0, w0)) - 1.0,
            np.real(np.vdot(w1, w1)) - 1.0,
        ]
        cross = np.vdot(w0, w1)
        res += [cross.real, cross.imag]
        images0 = [m @ w0 for m in err_mats]
        images1 = [m @ w1 for m in err_mats]
        for i in range(len(err_mats)):
            for j in range(len(err_mats)):
                off = np.vdot(images0[i], images1[j])
                dep = np.vdot(images0[i], images0[j]) - np.vdot(images1[i], images1[j])
                res += [off.real, off.imag, dep.real, dep.imag]
        return np.asarray(res, dtype=float)

    rng = np.random.default_rng(problem.seed)
    starts = []
    warm = _binomial_warm_start(problem, dim)
    for r in range(problem.restarts):
        if r == 0 and warm is not None and masks[0] == tuple(range(dim)) \
                and masks[1] == tuple(range(dim)) and not problem.complex_amplitudes:
            starts.append(warm)
            continue
        x = rng.normal(size=n_params)
        w0, w1 = unpack(x)
        x = x / max(np.linalg.norm(w0), np.linalg.norm(w1), 1e-9)
        starts.append(x)

    log = []
    best = None
    for r, x0 in enumerate(starts):
        x = np.asarray(x0, dtype=float)
        weight = problem.penalty_weight
        for _ in range(problem.anneal_rounds):
            res = minimize(
                penalized,
                x,
                args=(weight,),
                method="Nelder-Mead",
                options={
                    "maxfev": problem.maxfev_per_round,
                    "fatol": 1e-13,
                    "xatol": 1e-10,
                },
            )
            x = res.x
            weight *= 10.0
        # Feasibility projection: Gauss-Newton onto the constraint manifold
        # (nearest feasible point; the objective moves only at second order),
        # then exact orthonormalization of the pair.
        ls = least_squares(constraint_residuals, x, xtol=3e-16, ftol=3e-16,
                           gtol=3e-16, max_nfev=400 * n_params)
        x = ls.x
        w0, w1 = unpack(x)
        if np.linalg.norm(w0) < 1e-9 or np.linalg.norm(w1) < 1e-9:
            log.append(RestartRecord(r, np.inf, np.inf, False))
            continue
        w0, w1 = _project_pair(w0, w1)
        objective = _leading_loss_objective(w0, w1, a_pow, L)
        code = _wrap_code(problem, w0, w1)
        defect = qec.kl_matrix(code, error_set, tolerance=problem.tolerance_kl).defect()
        feasible = defect <= problem.tolerance_kl
        log.append(RestartRecord(r, objective, defect, feasible))
        candidate = (not feasible, objective, r, code, defect)
        if best is None or candidate[:3] < best[:3]:
            best = candidate
    infeasible, objective, _, code, defect = best
    return OptResult(
        code=code,
        objective=float(objective),
        kl_defect=float(defect),
        converged=not infeasible,
        restart_log=tuple(log),
        seed=problem.seed,
    )


def _wrap_code(problem: OptimizationProblem, w0: np.ndarray, w1: np.ndarray) -> Code:
    params = CodeParams(
        N=max(problem.L, problem.G),
        S=problem.L + problem.G,
        L=problem.L,
        G=problem.G,
        D=0,
        d=2,
        cutoff=problem.cutoff,
    )
    words = []
    for w in (w0, w1):
        idx = np.nonzero(np.abs(w) > 1e-14)[0]
        if idx.size:
            lead = w[idx[0]]
            w = w * (abs(lead) / lead)
        words.append(StateVector(w, problem.cutoff))
    return custom_code(words, params, tag="custom")
