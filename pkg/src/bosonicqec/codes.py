"""Constructors for bosonic code families and moment diagnostics.

All single-mode code words are stored with a deterministic global phase: the
first nonzero amplitude of every word is real and positive.  Words of the
binomial family are built in extended precision (longdouble) so that the
photon-number moment identities hold to ~1e-13 even at N = S = 5, where the
moments themselves reach ~1e7.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import comb

import numpy as np

from .fock import StateVector

BINOMIAL_FAMILY_TAGS = ("binomial", "naive")


@dataclass(frozen=True)
class CodeParams:
    """Protection parameters of a code.

    N is the maximum error order, S = L + G the Fock-level spacing minus one,
    L/G/D the numbers of correctable loss/gain/dephasing events, d the logical
    dimension.
    """

    N: int
    S: int
    L: int = 0
    G: int = 0
    D: int = 0
    d: int = 2
    cutoff: int = 0

    def __post_init__(self):
        for name in ("N", "S", "L", "G", "D"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.d < 2:
            raise ValueError("logical dimension d must be >= 2")

    @classmethod
    def from_orders(cls, L: int, G: int, D: int, cutoff: int, d: int = 2) -> "CodeParams":
        """Derive (N, S) from the requested loss/gain/dephasing orders."""
        return cls(
            N=max(L, G, 2 * D), S=L + G, L=L, G=G, D=D, d=d, cutoff=cutoff
        )


@dataclass(frozen=True)
class Code:
    """An ordered set of d orthonormal logical words plus construction metadata."""

    words: tuple[StateVector, ...]
    params: CodeParams
    tag: str
    modes: int = 1

    def __post_init__(self):
        if len(self.words) != self.params.d:
            raise ValueError(
                f"{len(self.words)} words but logical dimension d={self.params.d}"
            )
        dims = {w.dim for w in self.words}
        if len(dims) != 1:
            raise ValueError("code words live on different spaces")

    @property
    def cutoff(self) -> int:
        return self.words[0].cutoff

    @property
    def dim(self) -> int:
        return self.words[0].dim

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def label(self) -> str:
        p = self.params
        if self.tag == "binomial":
            return f"binomial_N{p.N}_S{p.S}"
        if self.tag == "qudit":
            return f"qudit_d{p.d}_N{p.N}_S{p.S}"
        return self.tag

    def word_array(self) -> np.ndarray:
        """Words stacked as columns of a (dim, d) complex128 matrix."""
        return np.column_stack([w.as_complex128() for w in self.words])

    def projector(self) -> np.ndarray:
        """Projector onto the code space (complex128)."""
        v = self.word_array()
        return v @ v.conj().T

    def mixed_state(self) -> np.ndarray:
        """Maximally mixed code state (1/d) sum |W><W| as a dense matrix."""
        return self.projector() / self.d

    def gram(self) -> np.ndarray:
        v = self.word_array()
        return v.conj().T @ v

    def orthonormality_defect(self) -> float:
        g = self.gram()
        return float(np.max(np.abs(g - np.eye(self.d))))


class CutoffError(ValueError):
    """The requested cutoff cannot hold the code words."""


def default_cutoff(N: int, S: int, G: int = 0) -> int:
    """Default truncation for a code space.

    Loss-only channels never increase occupation, so (N+1)(S+1) levels are
    lossless for loss; the extra margin covers gain/displacement tests, which
    must additionally pass an explicit convergence check.
    """
    return (N + 1) * (S + 1) + max(G, 1) * 4


def _fix_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the first nonzero amplitude is real positive."""
    idx = np.nonzero(np.abs(amps) > 1e-14)[0]
    if idx.size == 0:
        return amps
    lead = amps[idx[0]]
    phase = lead / abs(lead)
    out = amps / phase
    out[idx[0]] = abs(out[idx[0]])
    return out


def _word(amps: np.ndarray, cutoff: int, modes: int = 1) -> StateVector:
    amps = _fix_phase(np.asarray(amps))
    return StateVector(amps, cutoff, modes=modes)


def binomial_code(N: int, S: int, cutoff: int | None = None) -> Code:
    """Two-word code with sqrt-binomial amplitudes on every (S+1)-th Fock level.

    Word sigma = up (down) occupies levels p(S+1) with p even (odd),
    p = 0..N+1, with amplitude sqrt(C(N+1, p) / 2^N).
    """
    if cutoff is None:
        cutoff = default_cutoff(N, S)
    top = (N + 1) * (S + 1)
    if cutoff < top:
        raise CutoffError(f"cutoff {cutoff} < (N+1)(S+1) = {top}")
    ld = np.longdouble
    words = []
    for parity in (0, 1):
        amps = np.zeros(cutoff + 1, dtype=np.clongdouble)
        for p in range(parity, N + 2, 2):
            amps[p * (S + 1)] = np.sqrt(ld(comb(N + 1, p)) / ld(2) ** N)
        words.append(_word(amps, cutoff))
    params = CodeParams(N=N, S=S, L=S, G=0, D=N // 2, d=2, cutoff=cutoff)
    return Code(tuple(words), params, tag="binomial")


def binomial_dual_basis(N: int, S: int, cutoff: int | None = None) -> Code:
    """Normalized sum/difference basis of the binomial words.

    Both words occupy all levels p(S+1) with signed amplitudes
    (+-1)^p sqrt(C(N+1, p) / 2^(N+1)).
    """
    if cutoff is None:
        cutoff = default_cutoff(N, S)
    top = (N + 1) * (S + 1)
    if cutoff < top:
        raise CutoffError(f"cutoff {cutoff} < (N+1)(S+1) = {top}")
    ld = np.longdouble
    words = []
    for sign in (1, -1):
        amps = np.zeros(cutoff + 1, dtype=np.clongdouble)
        for p in range(N + 2):
            amps[p * (S + 1)] = (sign**p) * np.sqrt(
                ld(comb(N + 1, p)) / ld(2) ** (N + 1)
            )
        words.append(_word(amps, cutoff))
    params = CodeParams(N=N, S=S, L=S, G=0, D=N // 2, d=2, cutoff=cutoff)
    return Code(tuple(words), params, tag="binomial-dual")


def extended_binomial(n: int, m: int, d: int) -> int:
    """Coefficient of x^m in (1 + x + ... + x^(d-1))^n, exact integer.

    Reduces to the ordinary binomial coefficient for d = 2; for d = 1 the
    polynomial is 1, so the value is 1 when m = 0 and 0 otherwise.
    """
    if n < 0 or m < 0:
        raise ValueError("n and m must be nonnegative")
    if d < 1:
        raise ValueError("d must be >= 1")
    # Expand the polynomial with exact integer arithmetic.
    coeffs = [1]
    base = [1] * d
    for _ in range(n):
        out = [0] * (len(coeffs) + d - 1)
        for i, ci in enumerate(coeffs):
            if ci:
                for j, bj in enumerate(base):
                    out[i + j] += ci * bj
        coeffs = out
    return coeffs[m] if m < len(coeffs) else 0


def qudit_binomial_code(N: int, S: int, d: int, cutoff: int | None = None) -> Code:
    """d-word code with extended-binomial amplitudes and d-th root-of-unity phases.

    Word mu carries amplitude w^(mu p) sqrt(extbinom(N+1, p, d) / d^(N+1)) on
    level p(S+1), p = 0..(d-1)(N+1), with w = exp(i 2 pi / d).
    """
    if d < 2:
        raise ValueError("qudit dimension d must be >= 2")
    p_max = (d - 1) * (N + 1)
    top = p_max * (S + 1)
    if cutoff is None:
        cutoff = top + 4
    if cutoff < top:
        raise CutoffError(f"cutoff {cutoff} < (d-1)(N+1)(S+1) = {top}")
    ld = np.longdouble
    norm = ld(d) ** (N + 1)
    mags = np.array(
        [np.sqrt(ld(extended_binomial(N + 1, p, d)) / norm) for p in range(p_max + 1)]
    )
    words = []
    for mu in range(d):
        amps = np.zeros(cutoff + 1, dtype=np.clongdouble)
        for p in range(p_max + 1):
            angle = 2.0 * np.pi * ((mu * p) % d) / ld(d)
            amps[p * (S + 1)] = mags[p] * (np.cos(angle) + 1j * np.sin(angle))
        words.append(_word(amps, cutoff))
    params = CodeParams(N=N, S=S, L=S, G=0, D=N // 2, d=d, cutoff=cutoff)
    return Code(tuple(words), params, tag="qudit")


def cat_code(beta: float, S: int = 1, cutoff: int | None = None) -> Code:
    """Four-legged cat code in its Fock-amplitude form.

    Word up (down) occupies levels 2p with p even (odd), i.e. n = 0, 4, 8, ...
    (n = 2, 6, 10, ...), with Poisson-tail amplitudes beta^n / sqrt(n!).  Each
    word is normalized exactly after truncation; the two words have disjoint
    Fock support, so their overlap vanishes identically, while their photon
    moments differ by O(exp(-|beta|^2)).

    Only the four-legged S = 1 structure is implemented.
    """
    if S != 1:
        raise NotImplementedError("cat_code implements the four-legged S=1 case only")
    beta = float(beta)
    if not beta > 0:
        raise ValueError("beta must be > 0 (beta = 0 gives degenerate legs)")
    x = beta * beta
    min_cutoff = int(np.ceil(x + 6.0 * np.sqrt(x + 1.0)))
    if cutoff is None:
        # Ten-sigma Poisson margin: moment diagnostics need the discarded
        # tail well below the O(e^(-2|beta|^2)) effects being measured.
        cutoff = int(np.ceil(x + 10.0 * np.sqrt(x + 1.0))) + 4
    ld = np.longdouble
    # Unnormalized Poisson amplitudes c_n = beta^n / sqrt(n!), built iteratively.
    c = np.zeros(cutoff + 1, dtype=ld)
    c[0] = 1.0
    for n in range(1, cutoff + 1):
        c[n] = c[n - 1] * ld(beta) / np.sqrt(ld(n))
    # Convergence: the discarded tail must be negligible against the retained
    # norm (geometric estimate of the first omitted weights).
    ratio = ld(x) / (cutoff + 1)
    tail = c[cutoff] ** 2 * ratio / max(1.0 - ratio, 0.5)
    if tail / np.sum(c**2) > 1e-6:
        raise CutoffError(
            f"cutoff {cutoff} does not converge for beta={beta}; need >= {min_cutoff}"
        )
    words = []
    for residue in (0, 2):
        amps = np.zeros(cutoff + 1, dtype=np.clongdouble)
        idx = np.arange(residue, cutoff + 1, 4)
        amps[idx] = c[idx]
        norm = np.sqrt(np.sum(np.abs(amps) ** 2))
        words.append(_word(amps / norm, cutoff))
    params = CodeParams(N=1, S=1, L=1, G=0, D=0, d=2, cutoff=cutoff)
    return Code(tuple(words), params, tag="cat")


def two_mode_code(N: int, S: int, cutoff: int | None = None) -> Code:
    """Binomial-amplitude words entangled across two modes.

    Every occupied basis state |p(S+1), Ntot - p(S+1)> carries total
    excitation Ntot = (N+1)(S+1), so the two-mode no-jump evolution acts as a
    scalar on the code space.
    """
    n_tot = (N + 1) * (S + 1)
    if cutoff is None:
        cutoff = n_tot
    if cutoff < n_tot:
        raise CutoffError(f"cutoff {cutoff} < (N+1)(S+1) = {n_tot} per mode")
    ld = np.longdouble
    dim = (cutoff + 1) ** 2
    words = []
    for parity in (0, 1):
        amps = np.zeros(dim, dtype=np.clongdouble)
        for p in range(parity, N + 2, 2):
            n1 = p * (S + 1)
            n2 = n_tot - n1
            amps[n1 * (cutoff + 1) + n2] = np.sqrt(ld(comb(N + 1, p)) / ld(2) ** N)
        words.append(_word(amps, cutoff, modes=2))
    params = CodeParams(N=N, S=S, L=S, G=0, D=N // 2, d=2, cutoff=cutoff)
    return Code(tuple(words), params, tag="two-mode", modes=2)


_SQRT17 = np.sqrt(np.longdouble(17))
_SQRT21 = np.sqrt(np.longdouble(21))


def optimized_codes(which: str, cutoff: int | None = None) -> Code:
    """Numerically optimized two-word codes with closed-form amplitudes.

    ``sqrt17`` corrects one loss with mean photon number (sqrt(17)-1)/2;
    ``sqrt21`` additionally corrects one gain, with mean (sqrt(21)-1)/2.
    Neither has the generalized-parity spacing of the binomial family.
    """
    ld = np.longdouble
    if which == "sqrt17":
        min_cutoff = 5
        cutoff = min_cutoff if cutoff is None else cutoff
        if cutoff < min_cutoff:
            raise CutoffError(f"cutoff {cutoff} < {min_cutoff} required for sqrt17")
        up_levels, up_mags = (0, 3), (7 - _SQRT17, _SQRT17 - 1)
        dn_levels, dn_mags = (1, 4), (9 - _SQRT17, _SQRT17 - 3)
        dn_signs = (1, -1)
        norm = ld(6)
        L, G = 1, 0
    elif which == "sqrt21":
        min_cutoff = 6
        cutoff = min_cutoff if cutoff is None else cutoff
        if cutoff < min_cutoff:
            raise CutoffError(f"cutoff {cutoff} < {min_cutoff} required for sqrt21")
        up_levels, up_mags = (0, 4), (9 - _SQRT21, _SQRT21 - 1)
        dn_levels, dn_mags = (1, 5), (11 - _SQRT21, _SQRT21 - 3)
        dn_signs = (1, -1)
        norm = ld(8)
        L, G = 1, 1
    else:
        raise ValueError(f"unknown optimized code {which!r}; use sqrt17 or sqrt21")
    up = np.zeros(cutoff + 1, dtype=np.clongdouble)
    for lvl, mag in zip(up_levels, up_mags):
        up[lvl] = np.sqrt(mag / norm)
    dn = np.zeros(cutoff + 1, dtype=np.clongdouble)
    for lvl, mag, sign in zip(dn_levels, dn_mags, dn_signs):
        dn[lvl] = sign * np.sqrt(mag / norm)
    params = CodeParams(N=1, S=L + G, L=L, G=G, D=0, d=2, cutoff=cutoff)
    return Code((_word(up, cutoff), _word(dn, cutoff)), params, tag=f"opt-{which}")


def naive_code(cutoff: int = 4) -> Code:
    """The trivial encoding |0>, |1> (no protection; L = 0)."""
    if cutoff < 1:
        raise CutoffError("cutoff must be >= 1 for the naive code")
    up = np.zeros(cutoff + 1, dtype=np.clongdouble)
    up[0] = 1.0
    dn = np.zeros(cutoff + 1, dtype=np.clongdouble)
    dn[1] = 1.0
    params = CodeParams(N=0, S=0, L=0, G=0, D=0, d=2, cutoff=cutoff)
    return Code((_word(up, cutoff), _word(dn, cutoff)), params, tag="naive")


def custom_code(words, params: CodeParams, tag: str = "custom", modes: int = 1) -> Code:
    """Wrap externally supplied words (deserialization, optimizer output)."""
    return Code(tuple(words), params, tag=tag, modes=modes)


def _occupation_numbers(word: StateVector) -> np.ndarray:
    if word.modes == 1:
        return np.arange(word.dim)
    ns = np.arange(word.cutoff + 1)
    return (ns[:, None] + ns[None, :]).reshape(-1)


def word_moment(word: StateVector, ell: int) -> float:
    """<n^ell> of a word, computed diagonally in extended precision."""
    weights = np.abs(np.asarray(word.amplitudes, dtype=np.clongdouble)) ** 2
    occ = _occupation_numbers(word).astype(np.longdouble)
    return float(np.sum(weights * occ**ell))


def moment_matrix(code: Code, ell: int) -> np.ndarray:
    """Matrix of cross moments <W_i| n^ell |W_j> (extended precision)."""
    occ = _occupation_numbers(code.words[0]).astype(np.longdouble)
    powers = occ**ell
    d = code.d
    out = np.zeros((d, d), dtype=complex)
    amps = [np.asarray(w.amplitudes, dtype=np.clongdouble) for w in code.words]
    for i in range(d):
        for j in range(d):
            out[i, j] = complex(np.sum(np.conj(amps[i]) * powers * amps[j]))
    return out


def moment_difference(code: Code, ell: int) -> float:
    """Max over word pairs of |<W_i|n^ell|W_i> - <W_j|n^ell|W_j>|.

    Vanishes for binomial-family codes whenever ell <= N; the first nonzero
    difference appears at ell = N + 1.
    """
    if code.modes != 1:
        raise ValueError("moment_difference is defined for single-mode codes")
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    moments = [word_moment(w, ell) for w in code.words]
    return float(max(moments) - min(moments))


def mean_photon_number(code: Code) -> float:
    """Mean occupation of the maximally mixed code state."""
    return float(np.mean([word_moment(w, 1) for w in code.words]))


def with_cutoff(code: Code, cutoff: int) -> Code:
    """Embed a single-mode code into a larger truncated space."""
    if cutoff < code.cutoff:
        raise CutoffError("cannot shrink a code's space")
    if code.modes != 1:
        raise NotImplementedError("with_cutoff supports single-mode codes")
    if cutoff == code.cutoff:
        return code
    words = []
    for w in code.words:
        amps = np.zeros(cutoff + 1, dtype=w.amplitudes.dtype)
        amps[: w.dim] = w.amplitudes
        words.append(StateVector(amps, cutoff))
    return Code(
        tuple(words), replace(code.params, cutoff=cutoff), tag=code.tag, modes=1
    )
