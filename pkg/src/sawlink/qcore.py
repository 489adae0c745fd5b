"""Dense complex linear algebra over small composite Hilbert spaces.

States, operators, tensor embedding, partial trace and superoperator
assembly for the mode counts this toolkit needs (dimension <= a few
hundred).  Density matrices are vectorized row-major, so a sandwich
A rho B turns into (A kron B^T) vec(rho).

All values are immutable after construction; nothing here keeps shared
mutable state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ValidationError

Coefficient = Callable[[float], complex] | float

# Single-qubit matrices in the {|g>, |e>} basis.
SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
NUMBER = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)


def lowering(dim: int) -> np.ndarray:
    """Bosonic lowering operator truncated to ``dim`` Fock states."""
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = np.sqrt(n)
    return a


@dataclass(frozen=True)
class HilbertSpace:
    """Composite space of labelled modes, optionally excitation-capped.

    Basis kets are occupation vectors in lexicographic order (leftmost
    mode most significant), which coincides with the usual Kronecker
    ordering for uncapped spaces.  With ``excitation_cap`` set, only
    kets with total occupation <= cap are retained, in the same order.
    """

    mode_dims: tuple[int, ...]
    labels: tuple[str, ...]
    excitation_cap: int | None = None
    basis: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __init__(
        self,
        mode_dims: Sequence[int],
        labels: Sequence[str],
        excitation_cap: int | None = None,
    ):
        dims = tuple(int(d) for d in mode_dims)
        labs = tuple(str(x) for x in labels)
        if len(dims) != len(labs):
            raise ValidationError("one label per mode required")
        if any(d < 2 for d in dims):
            raise ValidationError("every mode dimension must be >= 2")
        if len(set(labs)) != len(labs):
            raise ValidationError(f"labels must be unique, got {labs}")
        if excitation_cap is not None and excitation_cap < 0:
            raise ValidationError("excitation_cap must be >= 0")
        object.__setattr__(self, "mode_dims", dims)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "excitation_cap", excitation_cap)
        kets = itertools.product(*(range(d) for d in dims))
        if excitation_cap is not None:
            kets = (k for k in kets if sum(k) <= excitation_cap)
        object.__setattr__(self, "basis", tuple(kets))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    def mode_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown mode label {label!r}; have {self.labels}")

    def basis_index(self, occupation: Sequence[int]) -> int:
        try:
            return self.basis.index(tuple(occupation))
        except ValueError:
            raise ValidationError(f"occupation {tuple(occupation)} not in basis")

    def full_indices(self) -> np.ndarray:
        """Index of each basis ket inside the uncapped tensor space."""
        strides = np.cumprod((1,) + self.mode_dims[::-1][:-1])[::-1]
        occ = np.array(self.basis, dtype=np.int64)
        return occ @ strides

    def basis_array(self) -> np.ndarray:
        return np.array(self.basis, dtype=np.int64)


@dataclass(frozen=True)
class Operator:
    space: HilbertSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.space.dim, self.space.dim):
            raise ValidationError(
                f"matrix shape {m.shape} does not match space dim {self.space.dim}"
            )
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dag(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.space is not self.space and other.space != self.space:
            raise ValidationError("operator spaces differ")
        return Operator(self.space, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        return Operator(self.space, self.matrix + other.matrix)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__


# Validation tolerances for physical density matrices.
HERM_ATOL = 1e-12
TRACE_ATOL = 1e-10
EIG_ATOL = 1e-10


@dataclass(frozen=True)
class QuantumState:
    space: HilbertSpace
    rho: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rho, dtype=complex)
        if r.shape != (self.space.dim, self.space.dim):
            raise ValidationError(
                f"rho shape {r.shape} does not match space dim {self.space.dim}"
            )
        if np.max(np.abs(r - r.conj().T)) > HERM_ATOL:
            raise ValidationError("state is not Hermitian within tolerance")
        if abs(np.trace(r).real - 1.0) > TRACE_ATOL or abs(np.trace(r).imag) > TRACE_ATOL:
            raise ValidationError(f"state trace {np.trace(r)} is not 1 within tolerance")
        if np.min(np.linalg.eigvalsh(r)) < -EIG_ATOL:
            raise ValidationError("state has a negative eigenvalue beyond tolerance")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "rho", r)

    @classmethod
    def from_ket(cls, space: HilbertSpace, ket: np.ndarray) -> "QuantumState":
        v = np.asarray(ket, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(space, np.outer(v, v.conj()))

    @classmethod
    def basis_state(cls, space: HilbertSpace, occupation: Sequence[int]) -> "QuantumState":
        v = np.zeros(space.dim, dtype=complex)
        v[space.basis_index(occupation)] = 1.0
        return cls(space, np.outer(v, v.conj()))

    def expect(self, op: Operator | np.ndarray) -> complex:
        m = op.matrix if isinstance(op, Operator) else np.asarray(op)
        return complex(np.trace(m @ self.rho))


def embed_product(ops: dict[str, np.ndarray], space: HilbertSpace) -> Operator:
    """Tensor product of single-mode operators, identity elsewhere.

    Matrix elements are taken directly between capped-basis kets, which
    equals building the full Kronecker product and projecting onto the
    retained subspace.
    """
    basis = space.basis_array()
    dim = space.dim
    mat = np.ones((dim, dim), dtype=complex)
    seen = set()
    for label, op in ops.items():
        k = space.mode_index(label)
        seen.add(k)
        op = np.asarray(op, dtype=complex)
        d = space.mode_dims[k]
        if op.shape != (d, d):
            raise ValidationError(
                f"operator for mode {label!r} has shape {op.shape}, mode dim is {d}"
            )
        mat *= op[basis[:, k][:, None], basis[None, :, k]]
    for k in range(space.n_modes):
        if k not in seen:
            mat *= basis[:, k][:, None] == basis[None, :, k]
    return Operator(space, mat)


def embed(op: np.ndarray | Operator, target_mode: str, space: HilbertSpace) -> Operator:
    """Lift a single-mode operator onto the composite space."""
    m = op.matrix if isinstance(op, Operator) else op
    return embed_product({target_mode: m}, space)


def partial_trace(state: QuantumState, keep: Sequence[str]) -> QuantumState:
    """Reduced density matrix on the kept modes, in keep-list order."""
    space = state.space
    keep = list(keep)
    keep_idx = [space.mode_index(lbl) for lbl in keep]

    if space.excitation_cap is None:
        rho_full = state.rho
    else:
        full_dim = int(np.prod(space.mode_dims))
        idx = space.full_indices()
        rho_full = np.zeros((full_dim, full_dim), dtype=complex)
        rho_full[np.ix_(idx, idx)] = state.rho

    n = space.n_modes
    tensor = rho_full.reshape(space.mode_dims + space.mode_dims)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValidationError("too many modes for partial trace")
    bra = list(letters[:n])
    ket = list(letters[n : 2 * n])
    for m in range(n):
        if m not in keep_idx:
            ket[m] = bra[m]  # contract this mode
    out = "".join(bra[m] for m in keep_idx) + "".join(ket[m] for m in keep_idx)
    reduced = np.einsum("".join(bra) + "".join(ket) + "->" + out, tensor)
    kept_dims = [space.mode_dims[m] for m in keep_idx]
    d = int(np.prod(kept_dims))
    reduced = reduced.reshape(d, d)
    new_space = HilbertSpace(kept_dims, keep)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return QuantumState(new_space, reduced)


@dataclass(frozen=True)
class SuperOperator:
    """Linear map on vectorized density matrices.

    Stored as a sum of constant dim^2 x dim^2 blocks, each scaled by a
    (possibly time-dependent) scalar coefficient.
    """

    space: HilbertSpace
    terms: tuple[tuple[Coefficient, np.ndarray], ...]

    def __init__(self, space: HilbertSpace, terms: Sequence[tuple[Coefficient, np.ndarray]]):
        d2 = space.dim**2
        frozen = []
        for coeff, mat in terms:
            m = np.asarray(mat, dtype=complex)
            if m.shape != (d2, d2):
                raise ValidationError(f"superoperator block shape {m.shape}, expected {(d2, d2)}")
            m = m.copy()
            m.setflags(write=False)
            frozen.append((coeff, m))
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "terms", tuple(frozen))

    @property
    def is_constant(self) -> bool:
        return all(not callable(c) for c, _ in self.terms)

    def matrix_at(self, t: float = 0.0) -> np.ndarray:
        d2 = self.space.dim**2
        out = np.zeros((d2, d2), dtype=complex)
        for coeff, mat in self.terms:
            c = coeff(t) if callable(coeff) else coeff
            if c != 0.0:
                out += c * mat
        return out

    def apply(self, rho: np.ndarray, t: float = 0.0) -> np.ndarray:
        d = self.space.dim
        return (self.matrix_at(t) @ np.asarray(rho, dtype=complex).reshape(-1)).reshape(d, d)

    def __add__(self, other: "SuperOperator") -> "SuperOperator":
        if other.space != self.space:
            raise ValidationError("superoperator spaces differ")
        return SuperOperator(self.space, self.terms + other.terms)


def _sandwich(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator block for rho -> a rho b (row-major vectorization)."""
    return np.kron(a, b.T)


def commutator_superop(h: Operator) -> SuperOperator:
    """rho -> -i [H, rho]; trace-free and Hermiticity-preserving for Hermitian H."""
    m = h.matrix
    eye = np.eye(m.shape[0])
    block = -1j * (_sandwich(m, eye) - _sandwich(eye, m))
    return SuperOperator(h.space, [(1.0, block)])


def dissipator(x: Operator) -> SuperOperator:
    """Lindblad damping superoperator D[X] rho = X rho X^+ - 1/2 {X^+X, rho}."""
    m = x.matrix
    eye = np.eye(m.shape[0])
    xdx = m.conj().T @ m
    block = _sandwich(m, m.conj().T) - 0.5 * (_sandwich(xdx, eye) + _sandwich(eye, xdx))
    return SuperOperator(x.space, [(1.0, block)])


def cross_dissipator(a: Operator, b: Operator) -> SuperOperator:
    """Interference part of D[A + B]: rho -> A rho B^+ + B rho A^+ - 1/2 {A^+B + B^+A, rho}."""
    if b.space != a.space:
        raise ValidationError("operator spaces differ")
    ma, mb = a.matrix, b.matrix
    eye = np.eye(ma.shape[0])
    anti = ma.conj().T @ mb + mb.conj().T @ ma
    block = (
        _sandwich(ma, mb.conj().T)
        + _sandwich(mb, ma.conj().T)
        - 0.5 * (_sandwich(anti, eye) + _sandwich(eye, anti))
    )
    return SuperOperator(a.space, [(1.0, block)])
