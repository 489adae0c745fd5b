"""State and process tomography with readout-error handling.

Forward direction: exact or sampled basis-state statistics after the
standard pre-rotation settings, convolved with a per-qubit confusion
model.  Inverse direction: linear inversion (least squares over the
informationally complete setting list) followed by eigenvalue clipping.
Scalar figures of merit live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ValidationError
from .qcore import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, HilbertSpace, QuantumState

PAULIS_1Q = {
    "I": IDENTITY_2,
    "X": SIGMA_X,
    "Y": SIGMA_Y,
    "Z": SIGMA_Z,
}

# pre-rotation gates applied before a Z-basis readout
TOMO_GATES = {
    "I": np.eye(2, dtype=complex),
    "Rx90": np.array([[1, -1j], [-1j, 1]], dtype=complex) / np.sqrt(2),
    "Ry90": np.array([[1, -1], [1, 1]], dtype=complex) / np.sqrt(2),
}
SETTING_ORDER = ("I", "Rx90", "Ry90")

# the four preparation states spanning single-qubit density matrices
PREP_KETS = {
    "g": np.array([1.0, 0.0], dtype=complex),
    "e": np.array([0.0, 1.0], dtype=complex),
    "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
    "+i": np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2),
}
PREP_ORDER = ("g", "+", "+i", "e")


def pauli_basis(n_qubits: int) -> dict[str, np.ndarray]:
    """Unnormalized n-qubit Pauli operators keyed by label string."""
    if n_qubits == 1:
        return dict(PAULIS_1Q)
    labels = ["".join(p) for p in product("IXYZ", repeat=n_qubits)]
    out = {}
    for lbl in labels:
        m = np.array([[1.0]], dtype=complex)
        for ch in lbl:
            m = np.kron(m, PAULIS_1Q[ch])
        out[lbl] = m
    return out


@dataclass(frozen=True)
class ReadoutModel:
    """Per-qubit assignment fidelities for the two basis states."""

    fidelities: tuple[tuple[float, float], ...]  # (F_g, F_e) per qubit

    def __post_init__(self):
        for fg, fe in self.fidelities:
            for f in (fg, fe):
                if not 0.5 < f <= 1.0:
                    raise ValidationError("readout fidelities must lie in (0.5, 1]")

    @classmethod
    def perfect(cls, n_qubits: int) -> "ReadoutModel":
        return cls(((1.0, 1.0),) * n_qubits)

    @property
    def n_qubits(self) -> int:
        return len(self.fidelities)

    def confusion(self) -> np.ndarray:
        """Column-stochastic map from true to reported basis statistics."""
        mat = np.array([[1.0]])
        for fg, fe in self.fidelities:
            mat = np.kron(mat, np.array([[fg, 1.0 - fe], [1.0 - fg, fe]]))
        return mat


@dataclass(frozen=True)
class ProcessMatrix:
    """Process representation chi_mn over the unnormalized Pauli basis.

    The map acts as rho -> sum_mn chi_mn P_m rho P_n^+; labels follow
    lexicographic I, X, Y, Z per qubit, leftmost qubit slowest.
    """

    chi: np.ndarray

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=complex)
        d2 = chi.shape[0]
        if chi.ndim != 2 or chi.shape != (d2, d2) or d2 not in (4, 16):
            raise ValidationError("chi must be 4x4 or 16x16")
        if np.max(np.abs(chi - chi.conj().T)) > 1e-9:
            raise ValidationError("chi must be Hermitian")
        object.__setattr__(self, "chi", chi)

    @property
    def n_qubits(self) -> int:
        return 1 if self.chi.shape[0] == 4 else 2

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(pauli_basis(self.n_qubits).keys())


def project_psd(mat: np.ndarray, trace: float | None = 1.0) -> np.ndarray:
    """Nearest positive matrix by eigenvalue clipping, optional retrace."""
    herm = 0.5 * (mat + mat.conj().T)
    vals, vecs = np.linalg.eigh(herm)
    vals = np.clip(vals, 0.0, None)
    out = (vecs * vals) @ vecs.conj().T
    if trace is not None:
        tr = np.trace(out).real
        if tr <= 0:
            raise ValidationError("projection left no positive weight")
        out = out * (trace / tr)
    return out


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, QuantumState):
        return rho.rho
    return np.asarray(rho, dtype=complex)


def simulate_measurement(
    rho,
    readout: ReadoutModel | None = None,
    shots: int | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Joint basis-state statistics of a 1- or 2-qubit state.

    Exact mode (shots None) returns the error-convolved probability
    vector; otherwise multinomial counts from a seeded draw.
    """
    mat = _as_matrix(rho)
    dim = mat.shape[0]
    if dim not in (2, 4):
        raise ValidationError("measurement model covers one or two qubits")
    probs = np.clip(np.diag(mat).real, 0.0, None)
    probs = probs / probs.sum()
    if readout is not None:
        if 2 ** readout.n_qubits != dim:
            raise ValidationError("readout model size mismatch")
        probs = readout.confusion() @ probs
    if shots is None:
        return probs
    rng = np.random.default_rng(seed)
    return rng.multinomial(int(shots), probs).astype(float)


def readout_correct(probs: np.ndarray, readout: ReadoutModel) -> np.ndarray:
    """Invert the confusion model; clip and renormalize the result."""
    probs = np.asarray(probs, dtype=float)
    conf = readout.confusion()
    if conf.shape[0] != probs.shape[0]:
        raise ValidationError("distribution size does not match readout model")
    if abs(np.linalg.det(conf)) < 1e-12:
        raise ValidationError("confusion matrix is singular (F_g + F_e = 1)")
    est = np.linalg.solve(conf, probs)
    est = np.clip(est, 0.0, None)
    total = est.sum()
    if total <= 0:
        raise ValidationError("correction produced an empty distribution")
    return est / total


def _setting_unitary(setting: tuple[str, ...]) -> np.ndarray:
    u = np.array([[1.0]], dtype=complex)
    for name in setting:
        if name not in TOMO_GATES:
            raise ValidationError(f"unknown tomography gate {name!r}")
        u = np.kron(u, TOMO_GATES[name])
    return u


def all_settings(n_qubits: int) -> tuple[tuple[str, ...], ...]:
    return tuple(product(SETTING_ORDER, repeat=n_qubits))


def tomography_data(
    rho,
    readout: ReadoutModel | None = None,
    shots: int | None = None,
    seed: int = 0,
) -> dict[tuple[str, ...], np.ndarray]:
    """Forward-simulate the full pre-rotation measurement set."""
    mat = _as_matrix(rho)
    n = 1 if mat.shape[0] == 2 else 2
    data = {}
    for k, setting in enumerate(all_settings(n)):
        u = _setting_unitary(setting)
        rotated = u @ mat @ u.conj().T
        data[setting] = simulate_measurement(
            rotated, readout, shots, seed=seed + k
        )
    return data


def state_tomo(
    data: dict[tuple[str, ...], np.ndarray],
    readout: ReadoutModel | None = None,
) -> np.ndarray:
    """Reconstruct a density matrix from pre-rotation statistics.

    Counts are normalized per setting; a readout model, when given, is
    inverted before inversion of the measurement map.  The linear
    estimate is clipped to the physical cone and retraced.
    """
    if not data:
        raise ValidationError("no tomography data")
    n = len(next(iter(data.keys())))
    settings = all_settings(n)
    missing = [s for s in settings if s not in data]
    if missing:
        raise ValidationError(f"missing tomography settings: {missing}")
    dim = 2**n
    rows, targets = [], []
    for setting in settings:
        probs = np.asarray(data[setting], dtype=float)
        if probs.shape != (dim,):
            raise ValidationError("statistics vector has the wrong length")
        total = probs.sum()
        if total <= 0:
            raise ValidationError("empty statistics vector")
        probs = probs / total
        if readout is not None:
            probs = readout_correct(probs, readout)
        u = _setting_unitary(setting)
        for b in range(dim):
            proj = np.zeros((dim, dim), dtype=complex)
            proj[b, b] = 1.0
            effect = u.conj().T @ proj @ u
            rows.append(effect.conj().reshape(-1))
            targets.append(probs[b])
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(targets), rcond=None)
    return project_psd(sol.reshape(dim, dim), trace=1.0)


def prep_states(n_qubits: int) -> dict[tuple[str, ...], np.ndarray]:
    """The spanning product preparations, as density matrices."""
    out = {}
    for combo in product(PREP_ORDER, repeat=n_qubits):
        ket = np.array([[1.0]], dtype=complex)
        for name in combo:
            ket = np.kron(ket, PREP_KETS[name])
        out[combo] = np.outer(ket, ket.conj())
    return out


def process_from_states(
    inputs: dict | list,
    outputs: dict | list,
) -> ProcessMatrix:
    """Process matrix from matched prepared/measured state pairs.

    Accepts parallel lists or equal-keyed dicts of density matrices.
    The input set must span operator space (4^n states).
    """
    if isinstance(inputs, dict):
        keys = list(inputs.keys())
        if set(keys) != set(outputs.keys()):
            raise ValidationError("input and output keys differ")
        ins = [_as_matrix(inputs[k]) for k in keys]
        outs = [_as_matrix(outputs[k]) for k in keys]
    else:
        ins = [_as_matrix(m) for m in inputs]
        outs = [_as_matrix(m) for m in outputs]
    if len(ins) != len(outs):
        raise ValidationError("mismatched number of states")
    dim = ins[0].shape[0]
    if dim not in (2, 4) or len(ins) != dim * dim:
        raise ValidationError(f"need {dim*dim} spanning inputs for dimension {dim}")
    in_mat = np.stack([m.reshape(-1) for m in ins], axis=1)
    out_mat = np.stack([m.reshape(-1) for m in outs], axis=1)
    if np.linalg.matrix_rank(in_mat, tol=1e-10) < dim * dim:
        raise ValidationError("input states do not span operator space")
    smap = out_mat @ np.linalg.inv(in_mat)
    n = 1 if dim == 2 else 2
    basis = list(pauli_basis(n).values())
    chi = np.empty((dim * dim, dim * dim), dtype=complex)
    for a, pa in enumerate(basis):
        for b, pb in enumerate(basis):
            block = np.kron(pa, pb.conj())
            chi[a, b] = np.vdot(block.reshape(-1), smap.reshape(-1)) / dim**2
    chi = 0.5 * (chi + chi.conj().T)
    chi = project_psd(chi, trace=np.trace(chi).real)
    return ProcessMatrix(chi)


def chi_ideal(unitary: np.ndarray) -> ProcessMatrix:
    """Rank-one process matrix of a unitary channel."""
    u = np.asarray(unitary, dtype=complex)
    dim = u.shape[0]
    if dim not in (2, 4):
        raise ValidationError("one- or two-qubit unitaries only")
    n = 1 if dim == 2 else 2
    coeffs = np.array(
        [np.trace(p.conj().T @ u) / dim for p in pauli_basis(n).values()]
    )
    return ProcessMatrix(np.outer(coeffs, coeffs.conj()))


def fidelity(a, b) -> float:
    """Overlap figure Tr(A B); agrees with the usual form for pure refs."""
    ma = a.chi if isinstance(a, ProcessMatrix) else _as_matrix(a)
    mb = b.chi if isinstance(b, ProcessMatrix) else _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValidationError("shape mismatch")
    return float(np.real(np.trace(ma @ mb)))


def hs_distance(a, b) -> float:
    """Hilbert-Schmidt distance sqrt(Tr[(A - B)^2])."""
    ma = a.chi if isinstance(a, ProcessMatrix) else _as_matrix(a)
    mb = b.chi if isinstance(b, ProcessMatrix) else _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValidationError("shape mismatch")
    diff = ma - mb
    return float(np.sqrt(abs(np.real(np.trace(diff @ diff)))))


def concurrence(rho) -> float:
    """Two-qubit entanglement monotone via the spin-flip construction."""
    mat = _as_matrix(rho)
    if mat.shape != (4, 4):
        raise ValidationError("concurrence is defined for two qubits")
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    tilde = yy @ mat.conj() @ yy
    vals = np.linalg.eigvals(mat @ tilde)
    lam = np.sort(np.sqrt(np.clip(vals.real, 0.0, None)))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def pauli_expectations(rho) -> dict[str, float]:
    """Real expectation values over the Pauli basis of matching size."""
    mat = _as_matrix(rho)
    n = 1 if mat.shape[0] == 2 else 2
    return {
        lbl: float(np.real(np.trace(p @ mat)))
        for lbl, p in pauli_basis(n).items()
    }
