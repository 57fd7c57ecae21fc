"""Loss channels in exact Kraus form, discrete error sets and a Lindblad oracle.

The amplitude-damping channel over a step of dimensionless strength
``kappa_dt`` decomposes into jump-count Kraus operators

    E_l = sqrt((1 - exp(-kappa_dt))^l / l!) * exp(-kappa_dt n/2) * a^l,

built here exactly per Fock level.  The fixed-step RK4 Lindblad integrator is
the independent ground truth every Kraus-side quantity is checked against;
it never renormalizes, so trace drift is an honest error signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .fock import Operator, identity, mode_operators, operator_power, tensor_product


class LindbladIntegrationError(RuntimeError):
    """Trace drift exceeded tolerance; rerun with more steps."""


class FitError(RuntimeError):
    """A log-log scaling fit did not produce a clean power law."""


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density matrix with its intended trace recorded for drift checks."""

    entries: np.ndarray
    trace_tag: float = 1.0

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex).copy()
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got {mat.shape}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-9,
                 psd_floor: float = -1e-9) -> None:
        mat = self.entries
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > herm_tol:
            raise ValueError(f"not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        drift = abs(self.trace() - self.trace_tag)
        if drift > trace_tol:
            raise ValueError(f"trace {self.trace():.12f} != tag {self.trace_tag}")
        eigs = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
        if eigs.min() < psd_floor:
            raise ValueError(f"not positive semidefinite: min eigenvalue {eigs.min():.3e}")

    @classmethod
    def from_vector(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()), trace_tag=float(np.vdot(psi, psi).real))


@dataclass(frozen=True)
class KrausChannel:
    """Ordered Kraus operators of a loss channel with a completeness measure.

    ``completeness_defect`` is max |sum E^dag E - I| over the protected block
    (total occupation <= ell_max), where the retained jump terms account for
    every loss path.  Operator count is (ell_max + 1) per mode.
    """

    operators: tuple[Operator, ...]
    kappa_dt: float
    ell_max: int
    modes: int = 1
    completeness_defect: float = 0.0
    tail_bound: float = 0.0

    def __post_init__(self):
        expected = (self.ell_max + 1) ** self.modes
        if len(self.operators) != expected:
            raise ValueError(
                f"{len(self.operators)} operators, expected {expected} "
                f"(ell_max={self.ell_max}, modes={self.modes})"
            )
        object.__setattr__(
            self, "completeness_defect", _completeness_defect(self.operators, self.ell_max)
        )

    @property
    def cutoff(self) -> int:
        return self.operators[0].cutoff

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(rho, self.operators)


def _completeness_defect(operators, ell_max: int) -> float:
    first = operators[0]
    dim = first.dim
    acc = np.zeros((dim, dim), dtype=first.entries.dtype)
    for op in operators:
        acc += op.entries.conj().T @ op.entries
    acc -= np.eye(dim, dtype=acc.dtype)
    if first.modes == 1:
        occ = np.arange(first.cutoff + 1)
    else:
        ns = np.arange(first.cutoff + 1)
        occ = (ns[:, None] + ns[None, :]).reshape(-1)
    block = occ <= ell_max
    return float(np.max(np.abs(acc[np.ix_(block, block)]))) if block.any() else 0.0


def apply_channel(rho: np.ndarray, operators) -> np.ndarray:
    """sum_k A_k rho A_k^dag for a list of Operators or matrices."""
    mats = [op.entries if isinstance(op, Operator) else np.asarray(op) for op in operators]
    out = np.zeros_like(np.asarray(rho))
    for m in mats:
        out = out + m @ rho @ m.conj().T
    return out


def loss_kraus_operator(kappa_dt: float, ell: int, cutoff: int, dtype=complex) -> Operator:
    """Single Kraus operator E_ell of the loss channel, exact per Fock level."""
    if kappa_dt < 0:
        raise ValueError(f"kappa_dt must be >= 0, got {kappa_dt}")
    if not np.isfinite(kappa_dt):
        raise ValueError("kappa_dt must be finite")
    ld = np.longdouble
    t = ld(kappa_dt)
    dim = cutoff + 1
    mat = np.zeros((dim, dim), dtype=dtype)
    if ell > cutoff:
        return Operator(mat, cutoff)
    gamma = (1 - np.exp(-t)) ** ell / ld(factorial(ell))
    root_gamma = np.sqrt(gamma)
    for m in range(dim - ell):
        # <m| E_ell |m+ell> = sqrt(gamma_ell) e^(-t m / 2) sqrt((m+ell)! / m!)
        ladder = np.sqrt(np.prod(np.arange(m + 1, m + ell + 1, dtype=ld))) if ell else ld(1)
        mat[m, m + ell] = root_gamma * np.exp(-t * m / 2) * ladder
    return Operator(mat, cutoff)


def loss_kraus(kappa_dt: float, ell_max: int, cutoff: int, dtype=complex) -> KrausChannel:
    """Loss channel restricted to at most ell_max quantum jumps.

    With ell_max = cutoff the decomposition is complete on the whole space
    (a level m state can lose at most m photons).
    """
    if ell_max > cutoff:
        raise ValueError(f"ell_max {ell_max} exceeds cutoff {cutoff}")
    if ell_max < 0:
        raise ValueError("ell_max must be >= 0")
    ops = tuple(
        loss_kraus_operator(kappa_dt, ell, cutoff, dtype=dtype)
        for ell in range(ell_max + 1)
    )
    return KrausChannel(
        ops, kappa_dt=float(kappa_dt), ell_max=ell_max,
        tail_bound=loss_tail_bound(kappa_dt, ell_max + 1, cutoff),
    )


def two_mode_loss_kraus(kappa_dt: float, ell_max: int, cutoff: int) -> KrausChannel:
    """Independent equal-rate loss on two modes: operators E_l1 (x) E_l2.

    Operators are ordered row-major in (l1, l2).  The zero-jump operator acts
    on fixed-total-excitation words as the scalar exp(-Ntot kappa_dt / 2).
    """
    singles = [loss_kraus_operator(kappa_dt, ell, cutoff) for ell in range(ell_max + 1)]
    ops = tuple(
        tensor_product(e1, e2) for e1 in singles for e2 in singles
    )
    return KrausChannel(ops, kappa_dt=float(kappa_dt), ell_max=ell_max, modes=2)


def loss_tail_bound(kappa_dt: float, ell: int, cutoff: int) -> float:
    """Crude bound gamma_ell cutoff^ell / ell! on the first dropped jump term."""
    t = float(kappa_dt)
    g = (1.0 - np.exp(-t)) ** ell / factorial(ell)
    return float(g * cutoff**ell / factorial(ell))


def suggest_ell_max(kappa_dt: float, cutoff: int, min_ell: int = 0,
                    tol: float = 1e-14) -> tuple[int, float]:
    """Smallest jump count whose dropped tail bound falls below ``tol``.

    ``min_ell`` forces retention of physically required terms (for fidelity
    work the leading uncorrectable jump L+1 must stay in the sum even when
    the absolute bound is already tiny).  Returns (ell_max, tail_bound).
    """
    for ell in range(max(0, min_ell), cutoff + 1):
        bound = loss_tail_bound(kappa_dt, ell + 1, cutoff)
        if bound < tol:
            return ell, bound
    return cutoff, 0.0


def discrete_error_set(L: int, G: int, D: int, cutoff: int) -> list[Operator]:
    """{I, a..a^L, a^dag..(a^dag)^G, n..n^D} as dense operators."""
    if min(L, G, D) < 0:
        raise ValueError("L, G, D must be nonnegative")
    ops = mode_operators(cutoff)
    out = [identity(cutoff)]
    out += [operator_power(ops["annihilation"], k) for k in range(1, L + 1)]
    out += [operator_power(ops["creation"], k) for k in range(1, G + 1)]
    out += [operator_power(ops["number"], k) for k in range(1, D + 1)]
    return out


def _lindblad_rhs(rho: np.ndarray, jumps) -> np.ndarray:
    drho = np.zeros_like(rho)
    for c, cdag, cdc, rate in jumps:
        drho += rate * (c @ rho @ cdag - 0.5 * (cdc @ rho + rho @ cdc))
    return drho


def lindblad_evolve(rho0, jump_ops, t: float, steps: int = 1000) -> DensityMatrix:
    """Fixed-step RK4 integration of d rho = sum_i D(sqrt(k_i) A_i) rho dt.

    This is the independent oracle for channel-side results: no
    renormalization is applied, and a trace drift beyond 1e-7 raises
    :class:`LindbladIntegrationError` (rerun with more steps).
    """
    if steps < 100:
        raise ValueError("steps must be >= 100 for the fixed-step oracle")
    if t < 0:
        raise ValueError("t must be >= 0")
    if isinstance(rho0, DensityMatrix):
        rho = np.array(rho0.entries, dtype=complex)
        tag = rho0.trace_tag
    else:
        rho = np.array(rho0, dtype=complex)
        tag = float(np.real(np.trace(rho)))
    jumps = []
    for op, rate in jump_ops:
        if rate < 0:
            raise ValueError("jump rates must be >= 0")
        c = op.entries if isinstance(op, Operator) else np.asarray(op, dtype=complex)
        cdag = c.conj().T
        jumps.append((c, cdag, cdag @ c, float(rate)))
    if t == 0.0:
        return DensityMatrix(rho, trace_tag=tag)
    dt = t / steps
    for _ in range(steps):
        k1 = _lindblad_rhs(rho, jumps)
        k2 = _lindblad_rhs(rho + 0.5 * dt * k1, jumps)
        k3 = _lindblad_rhs(rho + 0.5 * dt * k2, jumps)
        k4 = _lindblad_rhs(rho + dt * k3, jumps)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(float(np.real(np.trace(rho))) - tag)
    if not drift <= 1e-7:  # catches NaN from blown-up stiff integrations
        raise LindbladIntegrationError(
            f"trace drift {drift:.3e} > 1e-7 after {steps} steps; raise steps"
        )
    return DensityMatrix(rho, trace_tag=tag)


def lindblad_oracle(rho0, jump_ops, t: float, steps: int = 100,
                    rtol: float = 1e-9, max_doublings: int = 8) -> DensityMatrix:
    """Step-halving wrapper: doubles the step count until two successive
    integrations agree below ``rtol`` in max-entry norm."""
    prev = lindblad_evolve(rho0, jump_ops, t, steps=steps)
    for _ in range(max_doublings):
        steps *= 2
        cur = lindblad_evolve(rho0, jump_ops, t, steps=steps)
        if np.max(np.abs(cur.entries - prev.entries)) < rtol:
            return cur
        prev = cur
    raise LindbladIntegrationError(
        f"no convergence below {rtol} within {steps} steps"
    )


def _loglog_slope(x: np.ndarray, y: np.ndarray, max_residual: float) -> float:
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    if residual > max_residual:
        raise FitError(f"log-log fit residual {residual:.3e} exceeds {max_residual}")
    return float(slope)


@dataclass(frozen=True)
class KrausScalingFit:
    """Fitted small-kappa_dt exponents of one jump operator."""

    ell: int
    norm_exponent: float
    deviation_exponent: float
    grid: tuple[float, ...]


def kraus_taylor_leading(ell: int, cutoff: int, kappa_dt_grid=None,
                         max_residual: float = 0.05) -> KrausScalingFit:
    """Scaling fits separating E_ell into its leading jump term and corrections.

    Fits (i) the max-entry norm of E_ell, which scales as (kappa_dt)^(ell/2),
    and (ii) the norm of E_ell - sqrt(kappa_dt^ell / ell!) a^ell, whose fitted
    exponent must exceed ell/2 (the no-jump corrections are subleading).  For
    ell = 0 the deviation is taken from the identity.
    """
    if kappa_dt_grid is None:
        kappa_dt_grid = np.geomspace(1e-4, 1e-2, 7)
    grid = np.asarray(kappa_dt_grid, dtype=float)
    if grid.size < 5 or grid.max() > 1e-2 + 1e-15:
        raise ValueError("need >= 5 log-spaced kappa_dt values <= 1e-2")
    a_ell = operator_power(mode_operators(cutoff)["annihilation"], ell).entries
    norms, devs = [], []
    for t in grid:
        e = loss_kraus_operator(t, ell, cutoff).entries
        leading = np.sqrt(t**ell / factorial(ell)) * a_ell
        norms.append(np.max(np.abs(e)))
        devs.append(np.max(np.abs(e - leading)))
    fit = KrausScalingFit(
        ell=ell,
        norm_exponent=_loglog_slope(grid, np.array(norms), max_residual) if ell else 0.0,
        deviation_exponent=_loglog_slope(grid, np.array(devs), max_residual),
        grid=tuple(float(t) for t in grid),
    )
    if fit.deviation_exponent <= ell / 2:
        raise FitError(
            f"deviation exponent {fit.deviation_exponent:.3f} does not exceed ell/2"
        )
    return fit


def jump_probability_exponent(code, ell: int, kappa_dt_grid=None,
                              max_residual: float = 0.05) -> float:
    """Fitted exponent of <E_ell^dag E_ell> on the mixed code state vs kappa_dt."""
    if kappa_dt_grid is None:
        kappa_dt_grid = np.geomspace(1e-4, 1e-2, 7)
    grid = np.asarray(kappa_dt_grid, dtype=float)
    rho = code.mixed_state()
    probs = []
    for t in grid:
        e = loss_kraus_operator(t, ell, code.cutoff).entries
        probs.append(float(np.real(np.trace(e.conj().T @ e @ rho))))
    return _loglog_slope(grid, np.array(probs), max_residual)
