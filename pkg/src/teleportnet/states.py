"""Dense state-vector primitives: gates, projective and Bell measurements,
partial trace, and fidelity.

Amplitude layout convention: basis index bit ``k`` (least significant bit is
qubit 0) holds the value of qubit ``k``.  Every public state is unit-norm;
constructors normalize and reject zero or non-finite input.
"""

from __future__ import annotations

import enum
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

NORM_ATOL = 1e-12
UNITARY_ATOL = 1e-12
ZERO_BRANCH_ATOL = 1e-14

_SQRT_HALF = 1.0 / np.sqrt(2.0)


def _read_only(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


HADAMARD = _read_only(np.array([[1, 1], [1, -1]], dtype=np.complex128) * _SQRT_HALF)


class PauliOp(enum.Enum):
    """Single-qubit Pauli operators; all four are exactly self-inverse."""

    I = "I"
    X = "X"
    Y = "Y"
    Z = "Z"

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI_MATRICES[self]


_PAULI_MATRICES = {
    PauliOp.I: _read_only(np.eye(2, dtype=np.complex128)),
    PauliOp.X: _read_only(np.array([[0, 1], [1, 0]], dtype=np.complex128)),
    PauliOp.Y: _read_only(np.array([[0, -1j], [1j, 0]], dtype=np.complex128)),
    PauliOp.Z: _read_only(np.array([[1, 0], [0, -1]], dtype=np.complex128)),
}


class BellOutcome(enum.Enum):
    """The four Bell-measurement results for a qubit pair."""

    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"

    @property
    def vector(self) -> np.ndarray:
        """Amplitudes over the pair's joint values (00, 01, 10, 11)."""
        return BELL_VECTORS[self]


BELL_VECTORS = {
    BellOutcome.PHI_PLUS: _read_only(np.array([1, 0, 0, 1], dtype=np.complex128) * _SQRT_HALF),
    BellOutcome.PHI_MINUS: _read_only(np.array([1, 0, 0, -1], dtype=np.complex128) * _SQRT_HALF),
    BellOutcome.PSI_PLUS: _read_only(np.array([0, 1, 1, 0], dtype=np.complex128) * _SQRT_HALF),
    BellOutcome.PSI_MINUS: _read_only(np.array([0, 1, -1, 0], dtype=np.complex128) * _SQRT_HALF),
}

# Row k of this matrix is the (conjugate-free, all-real-or-pure-sign) Bell vector.
_BELL_MATRIX = np.stack([BELL_VECTORS[o] for o in BellOutcome])

Selector = Union[int, "BellOutcome", np.random.Generator]


def _num_qubits_for(size: int) -> int:
    n = int(size).bit_length() - 1
    if size <= 0 or (1 << n) != size:
        raise ValueError(f"amplitude array length {size} is not a power of two")
    return n


class StateVector:
    """Normalized complex amplitudes over ``num_qubits`` labeled qubits."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes: Sequence[complex] | np.ndarray):
        amps = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        n = _num_qubits_for(amps.size)
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValueError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if norm < NORM_ATOL:
            raise ValueError("cannot normalize a zero amplitude vector")
        amps /= norm
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "amplitudes", _read_only(amps))

    def __setattr__(self, name, value):  # states are immutable once built
        raise AttributeError("StateVector is immutable")

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"

    @classmethod
    def _wrap(cls, amps: np.ndarray) -> "StateVector":
        """Trusted fast path for kernel output: amplitudes are already
        finite and unit-norm, so validation is skipped."""
        sv = object.__new__(cls)
        object.__setattr__(sv, "num_qubits", _num_qubits_for(amps.size))
        object.__setattr__(sv, "amplitudes", _read_only(amps))
        return sv

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        return cls.basis(num_qubits, 0)

    @classmethod
    def basis(cls, num_qubits: int, index: int) -> "StateVector":
        if num_qubits < 0 or not 0 <= index < (1 << num_qubits):
            raise ValueError(f"basis index {index} out of range for {num_qubits} qubits")
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "StateVector":
        """Computational basis state; ``bits[k]`` is qubit k's value."""
        index = 0
        for k, b in enumerate(bits):
            index |= (int(b) & 1) << k
        return cls.basis(len(bits), index)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm_error(self) -> float:
        return abs(float(np.linalg.norm(self.amplitudes)) - 1.0)


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator on ``num_qubits``."""

    __slots__ = ("num_qubits", "matrix")

    HERMITIAN_ATOL = 1e-12
    TRACE_ATOL = 1e-12
    EIGENVALUE_FLOOR = -1e-10

    def __init__(self, matrix: np.ndarray):
        mat = np.array(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        n = _num_qubits_for(mat.shape[0])
        if np.max(np.abs(mat - mat.conj().T)) > self.HERMITIAN_ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > self.TRACE_ATOL or abs(np.trace(mat).imag) > self.TRACE_ATOL:
            raise ValueError("density matrix trace is not 1")
        if float(np.linalg.eigvalsh(mat).min()) < self.EIGENVALUE_FLOOR:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "matrix", _read_only(mat))

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    def __repr__(self) -> str:
        return f"DensityMatrix(num_qubits={self.num_qubits})"

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return cls(np.outer(state.amplitudes, state.amplitudes.conj()))

    def max_off_diagonal(self) -> float:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return float(np.max(np.abs(off)))


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.num_qubits}-qubit state")


def apply_single_qubit_gate(state: StateVector, qubit: int, gate: np.ndarray) -> StateVector:
    """Apply a 2x2 unitary to one qubit; touches only that qubit's stride."""
    _check_qubit(state, qubit)
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2):
        raise ValueError(f"gate must be 2x2, got shape {gate.shape}")
    if np.max(np.abs(gate.conj().T @ gate - np.eye(2))) > UNITARY_ATOL:
        raise ValueError("gate matrix is not unitary")
    return StateVector._wrap(_apply_1q(state.amplitudes, qubit, gate))


def _apply_1q(amps: np.ndarray, qubit: int, gate: np.ndarray) -> np.ndarray:
    arr = amps.reshape(-1, 2, 1 << qubit)
    return np.einsum("ab,hbl->hal", gate, arr).reshape(-1)


def apply_pauli(state: StateVector, qubit: int, op: PauliOp) -> StateVector:
    if op is PauliOp.I:
        return state
    return apply_single_qubit_gate(state, qubit, op.matrix)


def apply_hadamard(state: StateVector, qubit: int) -> StateVector:
    return apply_single_qubit_gate(state, qubit, HADAMARD)


def z_probabilities(state: StateVector, qubit: int) -> tuple[float, float]:
    """Born weights of qubit value 0 and 1."""
    _check_qubit(state, qubit)
    arr = state.amplitudes.reshape(-1, 2, 1 << qubit)
    p0 = float(np.sum(np.abs(arr[:, 0, :]) ** 2))
    p1 = float(np.sum(np.abs(arr[:, 1, :]) ** 2))
    return p0, p1


def _pick(selector: Selector, outcomes: Sequence, probs: Sequence[float]):
    if isinstance(selector, np.random.Generator):
        p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
        return outcomes[selector.choice(len(outcomes), p=p / p.sum())]
    if selector not in outcomes:
        raise ValueError(f"invalid branch selector {selector!r}")
    return selector


def measure_z(state: StateVector, qubit: int, selector: Selector) -> tuple[int, float, StateVector]:
    """Measure one qubit in the computational basis.

    ``selector`` is either a ``numpy.random.Generator`` (sample by Born rule)
    or an explicit bit to collapse onto.  Returns (bit, probability,
    renormalized post-measurement state).
    """
    probs = z_probabilities(state, qubit)
    bit = int(_pick(selector, (0, 1), probs))
    p = probs[bit]
    if p < ZERO_BRANCH_ATOL:
        raise ValueError(f"branch bit={bit} on qubit {qubit} has probability {p:.3e}")
    arr = state.amplitudes.reshape(-1, 2, 1 << qubit)
    collapsed = np.zeros_like(arr)
    collapsed[:, bit, :] = arr[:, bit, :] / np.sqrt(p)
    return bit, p, StateVector._wrap(collapsed.reshape(-1))


def measure_x(state: StateVector, qubit: int, selector: Selector) -> tuple[int, float, StateVector]:
    """Measure one qubit directly in the (|0>+|1>, |0>-|1>) basis.

    Bit 0 is the plus outcome.  This is the measurement that replaces a
    Hadamard followed by a computational-basis measurement.
    """
    _check_qubit(state, qubit)
    arr = state.amplitudes.reshape(-1, 2, 1 << qubit)
    overlap = [(arr[:, 0, :] + arr[:, 1, :]) * _SQRT_HALF,
               (arr[:, 0, :] - arr[:, 1, :]) * _SQRT_HALF]
    probs = [float(np.sum(np.abs(o) ** 2)) for o in overlap]
    bit = int(_pick(selector, (0, 1), probs))
    p = probs[bit]
    if p < ZERO_BRANCH_ATOL:
        raise ValueError(f"branch bit={bit} on qubit {qubit} has probability {p:.3e}")
    sign = 1.0 if bit == 0 else -1.0
    scaled = overlap[bit] * (_SQRT_HALF / np.sqrt(p))
    collapsed = np.empty_like(arr)
    collapsed[:, 0, :] = scaled
    collapsed[:, 1, :] = sign * scaled
    return bit, p, StateVector._wrap(collapsed.reshape(-1))


@lru_cache(maxsize=256)
def _pair_indices(num_qubits: int, qa: int, qb: int) -> tuple[np.ndarray, ...]:
    idx = np.arange(1 << num_qubits)
    base = idx[((idx >> qa) & 1 == 0) & ((idx >> qb) & 1 == 0)]
    groups = (base, base | (1 << qb), base | (1 << qa), base | (1 << qa) | (1 << qb))
    for g in groups:
        g.setflags(write=False)
    return groups


def _bell_overlaps(state: StateVector, pair: tuple[int, int]) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    qa, qb = pair
    _check_qubit(state, qa)
    _check_qubit(state, qb)
    if qa == qb:
        raise ValueError("Bell measurement needs two distinct qubits")
    groups = _pair_indices(state.num_qubits, qa, qb)
    stacked = np.stack([state.amplitudes[g] for g in groups])  # (4, rest)
    return _BELL_MATRIX.conj() @ stacked, groups


def bell_probabilities(state: StateVector, pair: tuple[int, int]) -> dict[BellOutcome, float]:
    overlaps, _ = _bell_overlaps(state, pair)
    return {o: float(np.sum(np.abs(overlaps[k]) ** 2)) for k, o in enumerate(BellOutcome)}


def measure_bell(
    state: StateVector, pair: tuple[int, int], selector: Selector
) -> tuple[BellOutcome, float, StateVector]:
    """Project a qubit pair onto the Bell basis.

    Returns (outcome, probability, renormalized post-measurement state); the
    measured pair is left in the corresponding Bell state.
    """
    overlaps, groups = _bell_overlaps(state, pair)
    probs = np.sum(np.abs(overlaps) ** 2, axis=1)
    outcomes = tuple(BellOutcome)
    outcome = _pick(selector, outcomes, probs)
    k = outcomes.index(outcome)
    p = float(probs[k])
    if p < ZERO_BRANCH_ATOL:
        raise ValueError(f"Bell branch {outcome.value} on pair {pair} has probability {p:.3e}")
    collapsed = np.zeros_like(state.amplitudes)
    vec = _BELL_MATRIX[k]
    scale = 1.0 / np.sqrt(p)
    for j, g in enumerate(groups):
        if vec[j] != 0:
            collapsed[g] = (vec[j] * scale) * overlaps[k]
    return outcome, p, StateVector._wrap(collapsed)


def project_onto_qubit_state(
    state: StateVector, qubit: int, ket: Sequence[complex]
) -> tuple[float, StateVector]:
    """Project one qubit onto an arbitrary normalized single-qubit ket.

    Returns (probability, renormalized post-projection state with the qubit
    left in ``ket``).
    """
    _check_qubit(state, qubit)
    v = np.asarray(ket, dtype=np.complex128).reshape(2)
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError("projection target must be normalized")
    v = v / norm
    arr = state.amplitudes.reshape(-1, 2, 1 << qubit)
    overlap = v[0].conjugate() * arr[:, 0, :] + v[1].conjugate() * arr[:, 1, :]
    p = float(np.sum(np.abs(overlap) ** 2))
    if p < ZERO_BRANCH_ATOL:
        raise ValueError(f"projection on qubit {qubit} has probability {p:.3e}")
    scaled = overlap / np.sqrt(p)
    collapsed = np.empty_like(arr)
    collapsed[:, 0, :] = v[0] * scaled
    collapsed[:, 1, :] = v[1] * scaled
    return p, StateVector._wrap(collapsed.reshape(-1))


def partial_trace(source: StateVector | DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix over ``keep`` (ascending order becomes the new
    qubit order), tracing out everything else."""
    kept = sorted(set(int(q) for q in keep))
    if not kept:
        raise ValueError("keep set must be nonempty")
    n = source.num_qubits
    if kept[0] < 0 or kept[-1] >= n:
        raise IndexError(f"keep set {kept} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in kept]
    axis = lambda q: n - 1 - q  # noqa: E731  (axis j of the reshaped tensor is qubit n-1-j)
    if isinstance(source, StateVector):
        psi = source.amplitudes.reshape([2] * n)
        perm = [axis(q) for q in reversed(kept)] + [axis(q) for q in traced]
        mat = np.transpose(psi, perm).reshape(1 << len(kept), -1)
        return DensityMatrix(mat @ mat.conj().T)
    rho = source.matrix.reshape([2] * (2 * n))
    keep_r = [axis(q) for q in reversed(kept)]
    keep_c = [n + a for a in keep_r]
    trace_r = [axis(q) for q in traced]
    trace_c = [n + a for a in trace_r]
    t = np.transpose(rho, keep_r + trace_r + keep_c + trace_c)
    k, d = len(kept), len(traced)
    t = t.reshape(1 << k, 1 << d, 1 << k, 1 << d)
    return DensityMatrix(np.einsum("atbt->ab", t))


def fidelity(a: StateVector | DensityMatrix, b: StateVector) -> float:
    """Overlap of ``a`` with the pure state ``b``: |<a|b>|^2, or <b|rho|b>."""
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"qubit counts differ: {a.num_qubits} vs {b.num_qubits}")
    if isinstance(a, StateVector):
        f = float(np.abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)
    else:
        f = float(np.real(b.amplitudes.conj() @ a.matrix @ b.amplitudes))
    return min(max(f, 0.0), 1.0)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Combined state; ``a`` keeps its qubit indices, ``b`` shifts up by
    ``a.num_qubits``."""
    return StateVector(np.kron(b.amplitudes, a.amplitudes))


def states_close(a: StateVector, b: StateVector, atol: float = 1e-12, up_to_phase: bool = True) -> bool:
    """Amplitude-wise comparison, optionally modulo a global phase."""
    if a.num_qubits != b.num_qubits:
        return False
    u, v = a.amplitudes, b.amplitudes
    if up_to_phase:
        inner = np.vdot(v, u)
        if abs(inner) > atol:
            u = u * (abs(inner) / inner)
    return bool(np.max(np.abs(u - v)) <= atol)
