"""Error-correction machinery: KL checks, error words, recovery maps, gates.

Recovery synthesis follows the generalized-parity scheme: the syndrome is the
photon number modulo S+1, measurement outcome k (k photons lost) projects
onto the sector reached from the code sector by k losses, and a correction
unitary transfers the normalized truncated no-jump images of the code words
back onto the words.  The truncated jump operators keep the scalar
Taylor tail of each Kraus prefactor only up to the order that matters for an
order-L code: per output Fock level, powers of kappa_dt up to L for the
zero-jump operator and up to (L - k)/2 beyond the leading (kappa_dt)^(k/2)
for k >= 1 jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .codes import BINOMIAL_FAMILY_TAGS, Code, CodeParams, default_cutoff, optimized_codes
from .fock import Operator, StateVector, mode_operators, parity_projector


class DegenerateRecoveryError(ValueError):
    """kappa_dt so large that a recovery branch lost its image direction."""


@dataclass(frozen=True)
class QecReport:
    """Result of a Knill-Laflamme verification.

    ``alpha`` is the word-averaged Hermitian matrix of error overlaps;
    ``offdiag_defect`` the largest cross-word element and ``worddep_defect``
    the largest spread of a diagonal-block element across words.
    """

    alpha: np.ndarray
    offdiag_defect: float
    worddep_defect: float
    passed: bool
    tolerance: float
    per_word_alpha: tuple[np.ndarray, ...] = field(default=(), repr=False)

    def defect(self) -> float:
        return max(self.offdiag_defect, self.worddep_defect)


@dataclass(frozen=True)
class RecoveryMap:
    """Ordered recovery Kraus operators R_k = U_k P_k.

    ``scheme`` records the measurement that generates the projectors:
    generalized parity for the spaced codes, projections onto word or error
    subspaces otherwise.  The map may be trace-decreasing on subspaces no
    branch claims, but never trace-increasing.
    """

    operators: tuple[Operator, ...]
    scheme: str
    order: int
    kappa_dt: float
    notes: tuple[str, ...] = ()

    @property
    def cutoff(self) -> int:
        return self.operators[0].cutoff

    def completeness_matrix(self) -> np.ndarray:
        dim = self.operators[0].dim
        acc = np.zeros((dim, dim), dtype=complex)
        for op in self.operators:
            m = np.asarray(op.entries, dtype=complex)
            acc += m.conj().T @ m
        return acc

    def completeness_excess(self) -> float:
        """Largest eigenvalue of sum R^dag R - I (must be <= ~1e-9)."""
        acc = self.completeness_matrix() - np.eye(self.operators[0].dim)
        return float(np.linalg.eigvalsh(0.5 * (acc + acc.conj().T)).max())


def kl_matrix(code: Code, errors, tolerance: float = 1e-9) -> QecReport:
    """Verify <W_s|E_l^dag E_k|W_s'> = alpha_lk delta_ss' for an error list."""
    mats = [e.entries if isinstance(e, Operator) else np.asarray(e) for e in errors]
    dim = code.dim
    for m in mats:
        if m.shape != (dim, dim):
            raise ValueError(f"error operator shape {m.shape} != code dim {dim}")
    words = [w.as_complex128() for w in code.words]
    images = [[m @ w for w in words] for m in mats]
    n_err = len(mats)
    d = code.d
    per_word = []
    for s in range(d):
        a = np.empty((n_err, n_err), dtype=complex)
        for i in range(n_err):
            for j in range(n_err):
                a[i, j] = np.vdot(images[i][s], images[j][s])
        per_word.append(a)
    offdiag = 0.0
    for s in range(d):
        for s2 in range(d):
            if s == s2:
                continue
            for i in range(n_err):
                for j in range(n_err):
                    offdiag = max(offdiag, abs(np.vdot(images[i][s], images[j][s2])))
    worddep = 0.0
    for s in range(d):
        for s2 in range(s + 1, d):
            worddep = max(worddep, float(np.max(np.abs(per_word[s] - per_word[s2]))))
    alpha = np.mean(per_word, axis=0)
    passed = offdiag <= tolerance and worddep <= tolerance
    return QecReport(
        alpha=alpha,
        offdiag_defect=float(offdiag),
        worddep_defect=float(worddep),
        passed=bool(passed),
        tolerance=tolerance,
        per_word_alpha=tuple(per_word),
    )


@dataclass(frozen=True)
class ErrorWords:
    """Normalized images of code words under one error operator.

    ``orthogonalized`` holds the component orthogonal to the code space
    (None when the image stays inside it, e.g. a number error on a
    single-level word); ``annihilated`` flags words the error kills, which
    need no correction branch.
    """

    images: tuple[StateVector | None, ...]
    orthogonalized: tuple[StateVector | None, ...]
    code_overlap: tuple[float, ...]
    annihilated: tuple[bool, ...]
    overlap_matrix: np.ndarray


def _phase_fixed(vec: np.ndarray, cutoff: int, modes: int) -> StateVector:
    idx = np.nonzero(np.abs(vec) > 1e-12)[0]
    lead = vec[idx[0]]
    vec = vec * (abs(lead) / lead)
    return StateVector(vec, cutoff, modes=modes)


def error_words(code: Code, error) -> ErrorWords:
    """Per-word normalized error images plus code-space overlap report."""
    mat = error.entries if isinstance(error, Operator) else np.asarray(error)
    words = [w.as_complex128() for w in code.words]
    proj = code.projector()
    images, ortho, overlaps, annihilated = [], [], [], []
    raw = []
    for w in words:
        img = mat @ w
        n = np.linalg.norm(img)
        if n < 1e-12:
            images.append(None)
            ortho.append(None)
            overlaps.append(0.0)
            annihilated.append(True)
            raw.append(np.zeros_like(img))
            continue
        unit = img / n
        raw.append(unit)
        images.append(_phase_fixed(unit, code.cutoff, code.modes))
        inside = proj @ unit
        out = unit - inside
        out_norm = np.linalg.norm(out)
        overlaps.append(float(np.linalg.norm(inside)))
        if out_norm < 1e-10:
            ortho.append(None)
        else:
            ortho.append(_phase_fixed(out / out_norm, code.cutoff, code.modes))
        annihilated.append(False)
    if all(annihilated):
        raise ValueError("error operator annihilates every code word")
    d = code.d
    overlap_matrix = np.array(
        [[np.vdot(raw[i], raw[j]) for j in range(d)] for i in range(d)]
    )
    return ErrorWords(
        images=tuple(images),
        orthogonalized=tuple(ortho),
        code_overlap=tuple(overlaps),
        annihilated=tuple(annihilated),
        overlap_matrix=overlap_matrix,
    )


def _gram_schmidt_complement(vectors: list[np.ndarray], dim: int, dtype) -> list[np.ndarray]:
    """Deterministic orthonormal complement, favoring low Fock levels."""
    basis = [np.asarray(v, dtype=dtype) for v in vectors]
    out = []
    for j in range(dim):
        v = np.zeros(dim, dtype=dtype)
        v[j] = 1.0
        for _ in range(2):  # re-orthogonalize for numerical hygiene
            for b in basis:
                v = v - b * np.vdot(b, v)
            for b in out:
                v = v - b * np.vdot(b, v)
        norm = np.sqrt(np.real(np.vdot(v, v)))
        if norm > 1e-6:
            out.append(v / norm)
        if len(out) == dim - len(basis):
            break
    return out


def unitary_completion(pairs, dim: int, dtype=complex, atol: float = 1e-8) -> Operator:
    """Unitary mapping each orthonormal source to its orthonormal target.

    The completion on the complementary subspace is deterministic: ordered
    Gram-Schmidt over standard basis vectors, so levels untouched by the
    pairs are acted on identity-like.  Empty pairs give the identity.
    """
    sources = []
    targets = []
    for s, t in pairs:
        s = s.as_complex128() if isinstance(s, StateVector) else np.asarray(s)
        t = t.as_complex128() if isinstance(t, StateVector) else np.asarray(t)
        sources.append(np.asarray(s, dtype=dtype))
        targets.append(np.asarray(t, dtype=dtype))
    for vecs, name in ((sources, "sources"), (targets, "targets")):
        for i, v in enumerate(vecs):
            if abs(np.vdot(v, v) - 1.0) > atol:
                raise ValueError(f"{name}[{i}] is not normalized")
            for j in range(i):
                if abs(np.vdot(vecs[j], v)) > atol:
                    raise ValueError(f"{name}[{i}] not orthogonal to {name}[{j}]")
    mat = np.zeros((dim, dim), dtype=dtype)
    for s, t in zip(sources, targets):
        mat += np.outer(t, s.conj())
    dom = _gram_schmidt_complement(sources, dim, dtype)
    ran = _gram_schmidt_complement(targets, dim, dtype)
    if len(dom) != len(ran):
        raise ValueError("source/target complements have different dimensions")
    for d_vec, r_vec in zip(dom, ran):
        mat += np.outer(r_vec, d_vec.conj())
    defect = np.max(np.abs(mat.conj().T @ mat - np.eye(dim, dtype=dtype)))
    if defect > 1e-10:
        raise ValueError(f"unitarity defect {defect:.3e} > 1e-10")
    # Labeled as a flat space of the given dimension; callers on two-mode
    # spaces re-wrap the entries with their own (cutoff, modes).
    return Operator(mat, cutoff=dim - 1, modes=1)


# --- truncated jump operators ------------------------------------------------

def _series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1, dtype=np.longdouble)
    for i, ai in enumerate(a[: order + 1]):
        jmax = order - i
        out[i : i + jmax + 1] += ai * b[: jmax + 1]
    return out


def _series_power(a: np.ndarray, p: float, order: int) -> np.ndarray:
    """(1 + u)^p as a truncated series, for a with a[0] = 1."""
    u = np.array(a[: order + 1], dtype=np.longdouble)
    u[0] = 0.0
    out = np.zeros(order + 1, dtype=np.longdouble)
    out[0] = 1.0
    term = np.zeros(order + 1, dtype=np.longdouble)
    term[0] = 1.0
    coeff = np.longdouble(1.0)
    for j in range(1, order + 1):
        coeff *= np.longdouble(p - (j - 1)) / j
        term = _series_mul(term, u, order)
        out += coeff * term
    return out


def truncated_jump_operator(kappa_dt: float, k: int, L: int, cutoff: int,
                            dtype=complex) -> np.ndarray:
    """Leading part of the k-jump Kraus operator for an order-L code.

    The scalar prefactor of E_k is Taylor-truncated per output Fock level:
    integer powers of kappa_dt up to L for k = 0, and up to
    floor((L - k)/2) beyond the leading (kappa_dt)^(k/2) for k >= 1.
    """
    if k < 0 or k > max(L, 0):
        raise ValueError(f"jump count k={k} outside 0..L={L}")
    ld = np.longdouble
    t = ld(kappa_dt)
    dim = cutoff + 1
    levels = np.arange(dim, dtype=ld)
    if k == 0:
        coeff = np.zeros(dim, dtype=ld)
        term = np.ones(dim, dtype=ld)
        coeff += term
        for j in range(1, L + 1):
            term = term * (-t * levels / 2) / j
            coeff += term
        return np.diag(coeff.astype(dtype))
    order = (L - k) // 2
    # phi(t) = (1 - e^-t)/t, then phi^(k/2), both as short Taylor series.
    phi = np.array(
        [(-1) ** i / ld(factorial(i + 1)) for i in range(order + 1)], dtype=ld
    )
    phi_pow = _series_power(phi, k / 2.0, order)
    mat = np.zeros((dim, dim), dtype=dtype)
    for m in range(dim - k):
        exp_series = np.array(
            [(-t * m / 2) ** j / ld(factorial(j)) for j in range(order + 1)],
            dtype=ld,
        )
        full = _series_mul(phi_pow, exp_series, order)
        scalar = sum(full[j] * t**j for j in range(order + 1))
        scalar *= t ** (ld(k) / 2) / np.sqrt(ld(factorial(k)))
        ladder = np.sqrt(np.prod(np.arange(m + 1, m + k + 1, dtype=ld)))
        mat[m, m + k] = scalar * ladder
    return mat


def damped_lowering_power(kappa_dt: float, k: int, cutoff: int, dtype=complex) -> np.ndarray:
    """exp(-kappa_dt n/2) a^k without the jump-probability scalar.

    This is the k-jump Kraus operator stripped of its sqrt(gamma_k) factor,
    i.e. exactly the direction of E_k; at kappa_dt = 0 it degrades gracefully
    to the bare a^k instead of vanishing.
    """
    ld = np.longdouble
    t = ld(kappa_dt)
    dim = cutoff + 1
    mat = np.zeros((dim, dim), dtype=dtype)
    for m in range(dim - k):
        ladder = np.sqrt(np.prod(np.arange(m + 1, m + k + 1, dtype=ld))) if k else ld(1)
        mat[m, m + k] = np.exp(-t * m / 2) * ladder
    return mat


def _no_jump_rotation(words: list[np.ndarray], b0: np.ndarray, dim: int, dtype) -> np.ndarray:
    """Unitary sending each normalized B_0 image back to its word.

    Acts as a rotation inside each plane span{word, orthogonal image
    component}; words whose image stays parallel (single-level words) get the
    identity.
    """
    u = np.eye(dim, dtype=dtype)
    for w in words:
        w = np.asarray(w, dtype=dtype)
        v = b0 @ w
        c = np.vdot(w, v)
        r = v - c * w
        s = np.sqrt(np.real(np.vdot(r, r)))
        norm_v = np.sqrt(np.real(np.vdot(v, v)))
        if norm_v < 1e-14:
            raise DegenerateRecoveryError("no-jump image vanished; kappa_dt too large")
        if s < 1e-14 * norm_v:
            continue
        b = r / s
        beta0 = np.real(np.vdot(v, v))
        root = np.sqrt(beta0)
        u += (np.conj(c) / root - 1.0) * np.outer(w, w.conj())
        u += (c / root - 1.0) * np.outer(b, b.conj())
        u += (s / root) * (np.outer(w, b.conj()) - np.outer(b, w.conj()))
    return u


def build_recovery(code: Code, kappa_dt: float, L: int | None = None,
                   echo: bool = False, dtype=complex,
                   jump_images: str = "exact") -> RecoveryMap:
    """Generalized-parity recovery for a binomial-family code.

    Branch k projects onto photon number == -k (mod S+1), the sector reached
    from the code sector by k losses, then applies the unitary transferring
    the normalized k-jump images of the words back onto the words.  Branch 0
    is the no-jump rotation that inverts the measurement backaction within
    each word's plane.

    ``jump_images`` selects the image operators the transfer unitaries are
    built from: ``"exact"`` (default) uses exp(-kappa_dt n/2) a^k, the exact
    direction of the Kraus operator E_k, which leaves a residual O(kappa_dt
    ^ (L+1)) in max-entry norm; ``"truncated"`` uses the Taylor-truncated
    split of E_k, whose leftover interference with the dropped tail shows up
    at second order in the density matrix (though not in fidelity) for codes
    of order L >= 2.
    """
    if code.tag not in BINOMIAL_FAMILY_TAGS:
        raise ValueError(f"recovery synthesis requires a binomial-family code, got {code.tag!r}")
    if jump_images not in ("exact", "truncated"):
        raise ValueError(f"unknown jump_images mode {jump_images!r}")
    params = code.params
    if L is None:
        L = params.L
    if params.S < L:
        raise ValueError(f"spacing S+1={params.S + 1} must be >= L+1={L + 1}")
    modulus = params.S + 1
    dim = code.dim
    words = [np.asarray(w.amplitudes, dtype=dtype) for w in code.words]
    notes = []
    ops = []
    for k in range(L + 1):
        proj = parity_projector(code.cutoff, modulus, (-k) % modulus, dtype=dtype)
        if jump_images == "exact":
            bk = damped_lowering_power(kappa_dt, k, code.cutoff, dtype=dtype)
        else:
            bk = truncated_jump_operator(kappa_dt, k, L, code.cutoff, dtype=dtype)
        if k == 0:
            u = _no_jump_rotation(words, bk, dim, dtype)
        else:
            pairs = []
            for s, w in enumerate(words):
                img = bk @ w
                norm = np.sqrt(np.real(np.vdot(img, img)))
                if norm < 1e-14:
                    notes.append(f"branch k={k}: word {s} image vanished; branch dropped")
                    continue
                img = img / norm
                pairs.append((img, w))
                pairs.append((w, -img))
            if not pairs:
                raise DegenerateRecoveryError(
                    f"all k={k} images vanished at kappa_dt={kappa_dt}"
                )
            u = unitary_completion(pairs, dim, dtype=dtype).entries
        ops.append(Operator(u @ proj.entries, code.cutoff, code.modes))
    if echo:
        gates = logical_gates(code)
        ops = [Operator(gates.X.entries.astype(dtype) @ op.entries, code.cutoff) for op in ops]
        notes.append("echo: logical X composed onto every branch")
    return RecoveryMap(
        operators=tuple(ops),
        scheme="parity-projective",
        order=L,
        kappa_dt=float(kappa_dt),
        notes=tuple(notes),
    )


def measurement_recovery(code: Code) -> RecoveryMap:
    """Word-projective recovery {P_W, U_1 (I - P_W)}.

    Projecting into the code space undoes first-order no-jump evolution by
    measurement backaction alone; the complementary outcome is treated as a
    photon loss and corrected by the loss-word transfer unitary.
    """
    dim = code.dim
    proj = code.projector()
    ops_fock = mode_operators(code.cutoff)
    ew = error_words(code, ops_fock["annihilation"])
    pairs = []
    notes = []
    for s, img in enumerate(ew.images):
        if img is None:
            notes.append(f"loss annihilates word {s}; branch dropped")
            continue
        v = img.as_complex128()
        w = code.words[s].as_complex128()
        pairs.append((v, w))
        pairs.append((w, -v))
    u1 = unitary_completion(pairs, dim).entries
    r0 = Operator(proj, code.cutoff, code.modes)
    r1 = Operator(u1 @ (np.eye(dim) - proj), code.cutoff, code.modes)
    return RecoveryMap(
        operators=(r0, r1),
        scheme="word-projective",
        order=1,
        kappa_dt=0.0,
        notes=tuple(notes),
    )


def sqrt17_recovery(kappa_dt: float, cutoff: int = 5, dtype=complex) -> RecoveryMap:
    """First-order recovery for the sqrt17-optimized code.

    The code has no parity structure, so loss detection projects onto the
    span of the loss-error words; the two loss images share a direction with
    the no-jump deformation of the up word, which the projective branch
    absorbs.  The complementary branch applies the no-jump rotation, which
    acts only in the plane of the down word.
    """
    code = optimized_codes("sqrt17", cutoff=cutoff)
    dim = code.dim
    words = [np.asarray(w.amplitudes, dtype=dtype) for w in code.words]
    a_mat = mode_operators(cutoff, dtype=dtype)["annihilation"].entries
    loss_words = []
    for w in words:
        img = a_mat @ w
        loss_words.append(img / np.sqrt(np.real(np.vdot(img, img))))
    p1 = np.zeros((dim, dim), dtype=dtype)
    for v in loss_words:
        p1 += np.outer(v, v.conj())
    pairs = []
    for v, w in zip(loss_words, words):
        pairs.append((v, w))
        pairs.append((w, -v))
    u1 = unitary_completion(pairs, dim, dtype=dtype).entries
    # First-order no-jump generator; only the down word needs the rotation,
    # the up word's deformation lies inside the loss subspace.
    levels = np.arange(dim, dtype=np.longdouble)
    b0 = np.diag((1.0 - np.longdouble(kappa_dt) * levels / 2.0).astype(dtype))
    u0 = _no_jump_rotation([words[1]], b0, dim, dtype)
    r0 = Operator(u0 @ (np.eye(dim, dtype=dtype) - p1), cutoff)
    r1 = Operator(u1 @ p1, cutoff)
    return RecoveryMap(
        operators=(r0, r1),
        scheme="word-projective",
        order=1,
        kappa_dt=float(kappa_dt),
    )


@dataclass(frozen=True)
class LogicalGates:
    Z: Operator
    X: Operator
    words: tuple[np.ndarray, np.ndarray]

    def phase(self, theta: float) -> Operator:
        """exp(-i theta Z / 2) on the code space, identity elsewhere."""
        dim = self.Z.dim
        w_up, w_dn = self.words
        u = np.eye(dim, dtype=complex)
        u += (np.exp(-1j * theta / 2) - 1.0) * np.outer(w_up, w_up.conj())
        u += (np.exp(+1j * theta / 2) - 1.0) * np.outer(w_dn, w_dn.conj())
        return Operator(u, self.Z.cutoff, self.Z.modes)


def logical_gates(code: Code) -> LogicalGates:
    """Z, X and the phase-gate family for a two-word code.

    Z fixes the up word and negates the down word; X swaps them.  Both are
    completed deterministically outside the code space.
    """
    if code.d != 2:
        raise ValueError("logical gates are defined for d=2 codes")
    dim = code.dim
    w_up = code.words[0].as_complex128()
    w_dn = code.words[1].as_complex128()
    z = unitary_completion([(w_up, w_up), (w_dn, -w_dn)], dim)
    x = unitary_completion([(w_up, w_dn), (w_dn, w_up)], dim)
    z = Operator(z.entries, code.cutoff, code.modes)
    x = Operator(x.entries, code.cutoff, code.modes)
    return LogicalGates(Z=z, X=x, words=(w_up, w_dn))


# --- worst-case error classification -----------------------------------------

def _monomial_products(monomials, power: int):
    """All (creation, annihilation) totals of power-fold monomial products."""
    if power == 0:
        return set()
    sums = {(0, 0)}
    for _ in range(power):
        sums = {(j + mj, k + mk) for (j, k) in sums for (mj, mk) in monomials}
    return sums


def required_code_params(generators) -> CodeParams:
    """Minimal binomial-code orders correcting a set of Lindblad generators.

    Each generator is (monomials, order) where monomials are (creation power,
    annihilation power) pairs of the operator's terms and the order x is the
    number of tolerated error events.  The worst-case set consists of the
    x-fold products of each generator together with the floor(x/2)-fold
    products of its no-jump combination A^dag A; L is the largest net
    annihilation excess, G the largest net creation excess, and N the largest
    total degree over that set.
    """
    gens = list(generators)
    if not gens:
        raise ValueError("at least one error generator is required")
    worst: set[tuple[int, int]] = set()
    for monomials, order in gens:
        monos = [(int(j), int(k)) for j, k in monomials]
        if not monos:
            raise ValueError("generator with no monomials")
        if order < 1:
            raise ValueError("generator order must be >= 1")
        worst |= _monomial_products(monos, order)
        adag_a = {(kj + j2, jj + k2) for (jj, kj) in monos for (j2, k2) in monos}
        worst |= _monomial_products(adag_a, order // 2)
    L = max(0, max(k - j for j, k in worst))
    G = max(0, max(j - k for j, k in worst))
    N = max(j + k for j, k in worst)
    return CodeParams(
        N=N, S=L + G, L=L, G=G, D=0, d=2, cutoff=default_cutoff(N, L + G, G)
    )
