"""Dense linear algebra over one- and two-mode truncated Fock spaces.

Everything downstream (codes, channels, recovery maps, metrics) is built on
the two value types defined here: :class:`StateVector` and :class:`Operator`.
Both are immutable after construction and all operations are pure functions,
so values can be shared freely across threads.

Conventions
-----------
* A single mode with cutoff ``c`` has dimension ``c + 1`` (occupations
  ``0 .. c``).
* Two-mode objects are flattened row-major with mode 1 as the outer index:
  the basis state ``|n1, n2>`` sits at flat index ``n1 * (c + 1) + n2``.
* Default absolute tolerance for equality checks is ``ATOL = 1e-10``;
  operations that compare values accept an ``atol`` override.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

ATOL = 1e-10

_HERMITIAN_TOL = 1e-12


class FockDimensionError(ValueError):
    """Dimension or cutoff mismatch between Fock-space values."""


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over a truncated Fock basis (one or two modes).

    ``amplitudes`` has length ``(cutoff + 1) ** modes``.  States tagged
    ``normalized=True`` (the default) must have unit norm within ``ATOL``;
    unnormalized intermediates carry ``normalized=False`` explicitly.
    """

    amplitudes: np.ndarray
    cutoff: int
    modes: int = 1
    normalized: bool = True

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes))
        if not np.iscomplexobj(amps):
            amps = amps.astype(complex)
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.modes not in (1, 2):
            raise FockDimensionError(f"modes must be 1 or 2, got {self.modes}")
        if self.cutoff < 0:
            raise FockDimensionError(f"cutoff must be nonnegative, got {self.cutoff}")
        expected = (self.cutoff + 1) ** self.modes
        if amps.shape != (expected,):
            raise FockDimensionError(
                f"amplitude vector has shape {amps.shape}, expected ({expected},) "
                f"for cutoff={self.cutoff}, modes={self.modes}"
            )
        if self.normalized and abs(self.norm() - 1.0) > 1e-8:
            raise ValueError(
                f"state tagged normalized has norm {self.norm():.3e}; "
                "construct with normalized=False for intermediates"
            )

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        a = self.amplitudes
        return float(np.sqrt(np.real(np.sum(a.conj() * a))))

    def unit(self) -> "StateVector":
        """Return the normalized version of this state."""
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.cutoff, self.modes)

    def as_complex128(self) -> np.ndarray:
        """Amplitudes cast to complex128 (constructors may store clongdouble)."""
        return np.asarray(self.amplitudes, dtype=complex)

    def occupations(self, tol: float = 1e-12):
        """Indices of Fock-basis states carrying amplitude above ``tol``."""
        return [int(i) for i in np.nonzero(np.abs(self.amplitudes) > tol)[0]]


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix on a truncated Fock space."""

    entries: np.ndarray
    cutoff: int
    modes: int = 1
    hermitian_hint: bool = False

    def __post_init__(self):
        mat = np.asarray(self.entries)
        if not np.iscomplexobj(mat):
            mat = mat.astype(complex)
        mat = mat.copy()
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)
        dim = (self.cutoff + 1) ** self.modes
        if mat.shape != (dim, dim):
            raise FockDimensionError(
                f"operator has shape {mat.shape}, expected ({dim}, {dim}) "
                f"for cutoff={self.cutoff}, modes={self.modes}"
            )
        if self.hermitian_hint:
            defect = np.max(np.abs(mat - mat.conj().T))
            if defect >= _HERMITIAN_TOL:
                raise ValueError(
                    f"hermitian_hint set but max |M - M^dag| = {defect:.3e}"
                )

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, self.cutoff, self.modes)

    def __matmul__(self, other: "Operator") -> "Operator":
        if not isinstance(other, Operator):
            return NotImplemented
        _check_same_space(self, other)
        return Operator(self.entries @ other.entries, self.cutoff, self.modes)

    def apply(self, state: StateVector) -> StateVector:
        """Apply to a state; the result is generally unnormalized."""
        if state.dim != self.dim or state.modes != self.modes:
            raise FockDimensionError("operator/state dimension mismatch")
        return StateVector(
            self.entries @ state.amplitudes, self.cutoff, self.modes, normalized=False
        )


def _check_same_space(a, b) -> None:
    if a.cutoff != b.cutoff or a.modes != b.modes:
        raise FockDimensionError(
            f"values live on different spaces: "
            f"(cutoff={a.cutoff}, modes={a.modes}) vs (cutoff={b.cutoff}, modes={b.modes})"
        )


def fock_state(cutoff: int, n: int, dtype=complex) -> StateVector:
    """Single-mode basis state |n>."""
    if not 0 <= n <= cutoff:
        raise FockDimensionError(f"occupation {n} outside [0, {cutoff}]")
    amps = np.zeros(cutoff + 1, dtype=dtype)
    amps[n] = 1.0
    return StateVector(amps, cutoff)


def two_mode_fock_state(cutoff: int, n1: int, n2: int, dtype=complex) -> StateVector:
    """Two-mode basis state |n1, n2> (row-major flattening, mode 1 outer)."""
    if not (0 <= n1 <= cutoff and 0 <= n2 <= cutoff):
        raise FockDimensionError(f"occupations ({n1},{n2}) outside [0, {cutoff}]")
    amps = np.zeros((cutoff + 1) ** 2, dtype=dtype)
    amps[n1 * (cutoff + 1) + n2] = 1.0
    return StateVector(amps, cutoff, modes=2)


def identity(cutoff: int, modes: int = 1, dtype=complex) -> Operator:
    dim = (cutoff + 1) ** modes
    return Operator(np.eye(dim, dtype=dtype), cutoff, modes, hermitian_hint=True)


def mode_operators(cutoff: int, dtype=complex) -> dict[str, Operator]:
    """Ladder and number operators for one truncated mode.

    ``annihilation`` maps |n> -> sqrt(n) |n-1>, ``creation`` is its conjugate
    transpose on the truncated space, and ``number = creation @ annihilation``
    is diagonal with entries 0..cutoff.  The truncation corrupts the
    commutator [a, a^dag] = I only at the top Fock level.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1 for a nontrivial ladder")
    dim = cutoff + 1
    a = np.zeros((dim, dim), dtype=dtype)
    root = np.sqrt(np.arange(1, dim, dtype=np.longdouble))
    for n in range(1, dim):
        a[n - 1, n] = root[n - 1]
    adag = a.conj().T
    number = np.diag(np.arange(dim).astype(dtype))
    return {
        "annihilation": Operator(a, cutoff),
        "creation": Operator(adag, cutoff),
        "number": Operator(number, cutoff, hermitian_hint=True),
    }


def displacement(beta: complex, cutoff: int) -> Operator:
    """Displacement operator exp(beta a^dag - beta* a) on the truncated space.

    Built from the eigendecomposition of the anti-Hermitian generator, so the
    returned matrix is unitary to machine precision at any cutoff.  Agreement
    with the infinite-dimensional operator on low Fock levels improves as the
    cutoff grows; a warning is issued when |beta|^2 is not small against the
    cutoff.
    """
    beta = complex(beta)
    if not np.isfinite(beta.real) or not np.isfinite(beta.imag):
        raise ValueError(f"displacement amplitude must be finite, got {beta}")
    if abs(beta) ** 2 > cutoff / 4:
        warnings.warn(
            f"|beta|^2 = {abs(beta) ** 2:.3g} is not small against cutoff={cutoff}; "
            "displaced states may be truncated",
            stacklevel=2,
        )
    ops = mode_operators(cutoff)
    gen = beta * ops["creation"].entries - np.conj(beta) * ops["annihilation"].entries
    # gen is anti-Hermitian: diagonalize 1j * gen (Hermitian), then exp(-1j w).
    w, v = np.linalg.eigh(1j * gen)
    mat = (v * np.exp(-1j * w)) @ v.conj().T
    return Operator(mat, cutoff)


def displacement_truncation_defect(
    beta: complex, cutoff: int, reference_cutoff: int, block: int | None = None
) -> float:
    """Max-entry deviation of D(beta) at ``cutoff`` from a larger-space reference.

    Compares the lowest ``block`` x ``block`` corner (default: half the
    smaller space).  This is the operative truncation-convergence measure:
    exp of the truncated anti-Hermitian generator is exactly unitary at any
    cutoff, so D^dag D - I carries no cutoff information.
    """
    if reference_cutoff <= cutoff:
        raise ValueError("reference_cutoff must exceed cutoff")
    if block is None:
        block = (cutoff + 1) // 2
    small = displacement(beta, cutoff).entries[:block, :block]
    big = displacement(beta, reference_cutoff).entries[:block, :block]
    return float(np.max(np.abs(small - big)))


def tensor_product(a, b):
    """Kronecker composition of two single-mode values (row-major, mode 1 outer)."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        _check_same_space(a, b)
        if a.modes != 1:
            raise FockDimensionError("tensor_product operands must be single-mode")
        amps = np.kron(a.amplitudes, b.amplitudes)
        normalized = a.normalized and b.normalized
        return StateVector(amps, a.cutoff, modes=2, normalized=normalized)
    if isinstance(a, Operator) and isinstance(b, Operator):
        _check_same_space(a, b)
        if a.modes != 1:
            raise FockDimensionError("tensor_product operands must be single-mode")
        return Operator(np.kron(a.entries, b.entries), a.cutoff, modes=2)
    raise TypeError(
        "tensor_product requires two StateVectors or two Operators, got "
        f"{type(a).__name__} and {type(b).__name__}"
    )


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>."""
    if a.dim != b.dim or a.modes != b.modes:
        raise FockDimensionError("state dimension mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(state: StateVector, op: Operator) -> complex:
    """Expectation value <psi|O|psi> for a normalized state."""
    if state.dim != op.dim or state.modes != op.modes:
        raise FockDimensionError("operator/state dimension mismatch")
    psi = state.amplitudes
    return complex(np.vdot(psi, op.entries @ psi))


def parity_projector(cutoff: int, modulus: int, residue: int, modes: int = 1, dtype=complex) -> Operator:
    """Projector onto Fock states with (total) occupation == residue mod modulus.

    For two modes the generalized parity is taken on n1 + n2.
    """
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    residue %= modulus
    if modes == 1:
        occ = np.arange(cutoff + 1)
    else:
        ns = np.arange(cutoff + 1)
        occ = (ns[:, None] + ns[None, :]).reshape(-1)
    diag = (occ % modulus == residue).astype(dtype)
    return Operator(np.diag(diag), cutoff, modes, hermitian_hint=True)


def operator_power(op: Operator, k: int) -> Operator:
    """Integer power of an operator (k >= 0)."""
    if k < 0:
        raise ValueError("power must be nonnegative")
    out = np.eye(op.dim, dtype=op.entries.dtype)
    for _ in range(k):
        out = out @ op.entries
    return Operator(out, op.cutoff, op.modes)
