"""Fidelity measures, uncorrectable-error rates, and infidelity-rate sweeps.

Rates follow the loss-channel convention kappa = 1: timesteps are in units of
1/kappa and rates in units of kappa.

The entanglement infidelity of a recovered memory is
1 - sum_{k,l} |Tr(R_k E_l rho_c)|^2 on the maximally mixed code state.  For a
trace-preserving recovery this equals the sum over composite Kraus operators
M = R_k E_l of Tr[rho_c (M - m I)^dag (M - m I)] with m = Tr(M rho_c), a sum
of nonnegative variance terms.  That form is used whenever the recovery is
complete: it stays accurate down to infidelities ~1e-25, far below where the
direct 1 - F form dies by cancellation, which matters for slope fits of
high-order codes at small timesteps.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from . import channels as ch
from . import codes as cd
from . import qec
from .fock import Operator


@dataclass(frozen=True)
class SweepRow:
    """Infidelity rates (units of kappa) of several codes at one timestep."""

    kappa_dt: float
    rates: dict[str, float]


def entanglement_infidelity(recovery: qec.RecoveryMap, channel: ch.KrausChannel,
                            code: cd.Code) -> float:
    """1 - sum |Tr(R_k E_l rho_c)|^2 on the maximally mixed code state."""
    rho_c = code.mixed_state()
    dim = rho_c.shape[0]
    if channel.operators[0].dim != dim:
        raise ValueError("channel dimension does not match the code space")
    r_mats = [np.asarray(r.entries, dtype=complex) for r in recovery.operators]
    e_mats = [np.asarray(e.entries, dtype=complex) for e in channel.operators]
    complete = recovery.completeness_excess() > -1e-9 and np.max(np.abs(
        recovery.completeness_matrix() - np.eye(dim))) < 1e-9
    words = [w.as_complex128() for w in code.words]
    d = code.d
    if complete:
        total = 0.0
        for r in r_mats:
            for e in e_mats:
                m_mat = r @ e
                m = np.trace(m_mat @ rho_c)
                dev = m_mat - m * np.eye(dim)
                total += sum(
                    float(np.real(np.vdot(dev @ w, dev @ w))) for w in words
                ) / d
        return total
    fe = 0.0
    for r in r_mats:
        for e in e_mats:
            fe += abs(np.trace(r @ e @ rho_c)) ** 2
    return max(0.0, 1.0 - float(fe))


def process_infidelity(recovery: qec.RecoveryMap, channel: ch.KrausChannel,
                       code: cd.Code) -> float:
    """1 - chi_II via the action of R(E(.)) on the code-space matrix units.

    Independent of the trace formula: the composite channel is applied to all
    d^2 outer products |W_i><W_j| and the identity-process element assembled
    from the results.
    """
    words = [w.as_complex128() for w in code.words]
    d = code.d
    ops = [r.entries @ e.entries for r in recovery.operators for e in channel.operators]
    chi_ii = 0.0
    for i in range(d):
        for j in range(d):
            unit = np.outer(words[i], words[j].conj())
            out = ch.apply_channel(unit, ops)
            chi_ii += complex(words[i].conj() @ out @ words[j])
    return float(1.0 - np.real(chi_ii) / d**2)


def uncorrectable_rate(code: cd.Code, L: int, kappa_dt: float) -> float:
    """Exact rate <E_{L+1}^dag E_{L+1}> / dt of losing L+1 photons."""
    e = ch.loss_kraus_operator(kappa_dt, L + 1, code.cutoff).entries
    rho = code.mixed_state()
    p = float(np.real(np.trace(e.conj().T @ e @ rho)))
    return p / kappa_dt


def uncorrectable_leading(code: cd.Code, L: int) -> float:
    """Leading coefficient of P_{L+1}: Tr[a^{L+1} rho_c a^dag^{L+1}] / (L+1)!.

    Equals the limit of P_{L+1} / (kappa_dt)^{L+1}; evaluated exactly from
    the word amplitudes via falling factorials in extended precision.
    """
    k = L + 1
    total = np.longdouble(0.0)
    for w in code.words:
        weights = np.abs(np.asarray(w.amplitudes, dtype=np.clongdouble)) ** 2
        occ = np.arange(w.dim, dtype=np.longdouble)
        falling = np.ones_like(occ)
        for i in range(k):
            falling = falling * np.clip(occ - i, 0, None)
        total += np.sum(weights * falling)
    return float(total / (code.d * factorial(k)))


def two_mode_uncorrectable_ratio(kappa_dt: float, N: int = 1, S: int = 1) -> float:
    """Two-photon-loss rate of the two-mode code over the one-mode code.

    Loss acts on both modes of the entangled code with equal strength; all
    (2,0), (1,1), (0,2) double-jump paths count.  Approaches 3 for the
    (N=1, S=1) pair as kappa_dt -> 0.
    """
    single = cd.binomial_code(N, S)
    double = cd.two_mode_code(N, S)
    e2 = ch.loss_kraus_operator(kappa_dt, 2, single.cutoff).entries
    rho1 = single.mixed_state()
    p_single = float(np.real(np.trace(e2.conj().T @ e2 @ rho1)))
    cutoff2 = double.cutoff
    singles = [ch.loss_kraus_operator(kappa_dt, ell, cutoff2).entries for ell in range(3)]
    rho2 = double.mixed_state()
    p_double = 0.0
    for l1, l2 in ((2, 0), (1, 1), (0, 2)):
        e = np.kron(singles[l1], singles[l2])
        p_double += float(np.real(np.trace(e.conj().T @ e @ rho2)))
    return p_double / p_single


@dataclass(frozen=True)
class CatViolation:
    """First-order loss-rate imbalance of the four-legged cat words."""

    beta: float
    closed_form: float
    numeric: float


def cat_violation(beta: float, cutoff: int | None = None) -> CatViolation:
    """Photon-number imbalance <n>_down - <n>_up of the cat words.

    Returns both the closed form 4 |b|^2 e^{-|b|^2} (sin |b|^2 + cos |b|^2)
    (which neglects O(e^{-2|b|^2}) terms) and the direct Fock-space value.
    """
    x = float(beta) ** 2
    closed = 4.0 * x * np.exp(-x) * (np.sin(x) + np.cos(x))
    code = cd.cat_code(beta, cutoff=cutoff)
    numeric = cd.word_moment(code.words[1], 1) - cd.word_moment(code.words[0], 1)
    return CatViolation(beta=float(beta), closed_form=float(closed), numeric=float(numeric))


def cat_minimal_nbar(search_max_x: float = 12.0) -> tuple[float, float]:
    """Smallest beta with vanishing first-order violation, and its n_bar.

    The closed-form violation vanishes where sin x + cos x = 0 (x = |beta|^2);
    the mean photon number grows with beta, so the smallest root minimizes
    n_bar among exactly balanced cat codes.
    """
    from scipy.optimize import brentq

    f = lambda x: np.sin(x) + np.cos(x)
    root = None
    xs = np.linspace(0.05, search_max_x, 400)
    for lo, hi in zip(xs[:-1], xs[1:]):
        if f(lo) * f(hi) < 0:
            root = brentq(f, lo, hi)
            break
    if root is None:
        raise RuntimeError("no violation zero found in the search window")
    beta = float(np.sqrt(root))
    code = cd.cat_code(beta)
    nbar = cd.mean_photon_number(code)
    return beta, nbar


@dataclass(frozen=True)
class UnfaithfulOptimum:
    """Optimal timestep trading recovery infidelity against loss errors."""

    dt_opt: float
    rate_opt: float
    dt_grid_opt: float
    rate_grid_opt: float


def unfaithful_recovery_optimum(eta: float, L: int, N_prefactor: float) -> UnfaithfulOptimum:
    """Optimal timestep for total rate N kappa (kappa dt)^L L^{L+1} + eta/dt.

    Closed form: dt_opt = kappa^-1 (eta / (N L^{L+2}))^{1/(L+1)}, with optimal
    rate eta^{L/(L+1)} (1+L) (N L)^{1/(L+1)} kappa.  A grid-search minimum of
    the same rate function is returned alongside as a cross-check.
    """
    if eta < 0:
        raise ValueError("recovery infidelity eta must be >= 0")
    if L < 1:
        raise ValueError("L must be >= 1")
    if N_prefactor <= 0:
        raise ValueError("N_prefactor must be positive")
    if eta == 0.0:
        return UnfaithfulOptimum(0.0, 0.0, 0.0, 0.0)
    dt_opt = (eta / (N_prefactor * L ** (L + 2))) ** (1.0 / (L + 1))
    rate_opt = eta ** (L / (L + 1)) * (1 + L) * (N_prefactor * L) ** (1.0 / (L + 1))
    rate = lambda dt: N_prefactor * dt**L * L ** (L + 1) + eta / dt
    grid = np.geomspace(dt_opt / 50.0, dt_opt * 50.0, 20001)
    values = rate(grid)
    i = int(np.argmin(values))
    return UnfaithfulOptimum(
        dt_opt=float(dt_opt),
        rate_opt=float(rate_opt),
        dt_grid_opt=float(grid[i]),
        rate_grid_opt=float(values[i]),
    )


DEFAULT_DT_GRID = np.geomspace(1e-4, 1.0, 40)


def matched_channel(code: cd.Code, kappa_dt: float, L: int | None = None) -> ch.KrausChannel:
    """Loss channel truncated by the tail rule but keeping the jumps an
    order-L code's fidelity is sensitive to (at least L+3 terms)."""
    if L is None:
        L = code.params.L
    ell, _ = ch.suggest_ell_max(kappa_dt, code.cutoff, min_ell=min(L + 3, code.cutoff))
    return ch.loss_kraus(kappa_dt, ell, code.cutoff)


def infidelity_rate(code: cd.Code, kappa_dt: float, L: int | None = None) -> float:
    """F_e-tilde / dt with the code's own matched recovery, in units of kappa."""
    if L is None:
        L = code.params.L
    recovery = qec.build_recovery(code, kappa_dt, L=L)
    channel = matched_channel(code, kappa_dt, L=L)
    return entanglement_infidelity(recovery, channel, code) / kappa_dt


def sweep_infidelity(codes, dt_grid=None) -> list[SweepRow]:
    """Infidelity-rate rows over a timestep grid, matched recovery per code."""
    if dt_grid is None:
        dt_grid = DEFAULT_DT_GRID
    rows = []
    for t in sorted(float(x) for x in dt_grid):
        rates = {}
        for code in codes:
            rates[code.label] = infidelity_rate(code, t)
        rows.append(SweepRow(kappa_dt=t, rates=rates))
    return rows


def fit_rate_slope(rows, label: str, dt_window=(1e-3, 1e-2)) -> float:
    """Log-log slope of a rate column over a timestep window."""
    ts, ys = [], []
    for row in rows:
        if dt_window[0] * (1 - 1e-9) <= row.kappa_dt <= dt_window[1] * (1 + 1e-9):
            y = row.rates[label]
            if y > 0:
                ts.append(row.kappa_dt)
                ys.append(y)
    if len(ts) < 3:
        raise ValueError(f"not enough points in window for {label}")
    slope, _ = np.polyfit(np.log(ts), np.log(ys), 1)
    return float(slope)


def crossover(rows, label_a: str, label_b: str) -> float:
    """Timestep where curve a crosses below curve b (log-log interpolation)."""
    ts = np.array([row.kappa_dt for row in rows])
    diff = np.array([
        np.log(row.rates[label_a]) - np.log(row.rates[label_b]) for row in rows
    ])
    sign = np.sign(diff)
    for i in range(len(ts) - 1):
        if sign[i] != sign[i + 1] and sign[i] != 0:
            lt = np.log(ts[i]) + (np.log(ts[i + 1]) - np.log(ts[i])) * (
                -diff[i] / (diff[i + 1] - diff[i])
            )
            return float(np.exp(lt))
    raise ValueError(f"no crossover between {label_a} and {label_b} on the grid")


def recovery_residual(code: cd.Code, kappa_dt: float, L: int | None = None,
                      rho0: np.ndarray | None = None, dtype=complex) -> float:
    """Max-entry norm of R(E(rho)) - rho for the code's matched recovery.

    Defaults to the maximally mixed code state.  Pass dtype=np.clongdouble
    for order-3 codes at kappa_dt ~ 1e-4, where the residual ~1e-14 sits near
    the double-precision noise floor.
    """
    if L is None:
        L = code.params.L
    if rho0 is None:
        rho0 = code.mixed_state()
    rho = np.asarray(rho0, dtype=dtype)
    recovery = qec.build_recovery(code, kappa_dt, L=L, dtype=dtype)
    ell, _ = ch.suggest_ell_max(kappa_dt, code.cutoff, min_ell=min(L + 3, code.cutoff))
    e_ops = [
        ch.loss_kraus_operator(kappa_dt, k, code.cutoff, dtype=dtype)
        for k in range(ell + 1)
    ]
    after_e = ch.apply_channel(rho, e_ops)
    after_r = ch.apply_channel(after_e, recovery.operators)
    return float(np.max(np.abs(after_r - rho)))


def residual_exponent(code: cd.Code, L: int | None = None, grid=None,
                      rho0: np.ndarray | None = None, dtype=complex) -> float:
    """Fitted power of the recovery residual versus kappa_dt."""
    if grid is None:
        grid = np.geomspace(1e-4, 1e-2, 7)
    grid = np.asarray(grid, dtype=float)
    values = np.array([
        recovery_residual(code, t, L=L, rho0=rho0, dtype=dtype) for t in grid
    ])
    slope, _ = np.polyfit(np.log(grid), np.log(values), 1)
    return float(slope)
