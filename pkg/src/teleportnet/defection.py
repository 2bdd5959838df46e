"""What a receiver is left with when one agent withholds cooperation.

Enumerates the cooperating parties' measurement branches, traces out the
defector's control qubit, and reports the receiver's reduced operators, their
diagonal structure, and the best fidelity any single-qubit unitary recovery
can still reach.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .protocol import (
    _baseline_copy_branches,
    _enumerate_paths,
    _extract_substate,
    _initial_state,
    measured_fixed_bits,
    protocol_events,
)
from .resources import MessageSpec, NetworkShape
from .states import (
    BellOutcome,
    DensityMatrix,
    StateVector,
    fidelity,
    measure_bell,
    partial_trace,
    project_onto_qubit_state,
)

_PHI = (BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS)


class DiagonalForm(enum.Enum):
    """Which diagonal the receiver's qubit carries after defection."""

    PRESERVED = "preserved"  # diag(|alpha|^2, |beta|^2)
    SWAPPED = "swapped"      # diag(|beta|^2, |alpha|^2)


@dataclass(frozen=True)
class DefectionReport:
    """Receiver-side view of one cooperating-measurement branch."""

    defector: int
    bell_outcomes: tuple[BellOutcome, ...]
    cooperator_bits: tuple[int, ...]
    probability: float
    joint_density: DensityMatrix
    per_qubit_density: tuple[DensityMatrix, ...]
    off_diagonal_norm: float
    max_fidelity: tuple[float, ...]
    conforms_to: tuple[DiagonalForm, ...]
    message_index: int | None = None


@dataclass(frozen=True)
class ConditionalStateReport:
    """Conditional collapse of the second received qubit after projecting the
    first one (Bell outcomes pinned to the plus pair, no agent measurements)."""

    plus_probability: float
    plus_fidelity: float
    minus_probability: float
    minus_fidelity: float


def _clifford_group() -> np.ndarray:
    """The 24 single-qubit Cliffords, generated from H and S, deduplicated up
    to global phase."""
    h = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)
    s = np.array([[1, 0], [0, 1j]], dtype=np.complex128)

    def key(u: np.ndarray) -> tuple:
        flat = u.reshape(-1)
        # first clearly-nonzero entry in row-major order fixes the phase;
        # Clifford entries have magnitude 0, 1/2, 1/sqrt(2), or 1
        pivot = flat[np.flatnonzero(np.abs(flat) > 0.3)[0]]
        canon = flat * (abs(pivot) / pivot)
        return tuple(np.round(canon, 6).tolist())

    group = {key(np.eye(2, dtype=np.complex128)): np.eye(2, dtype=np.complex128)}
    frontier = list(group.values())
    while frontier:
        nxt = []
        for u in frontier:
            for g in (h, s):
                v = g @ u
                k = key(v)
                if k not in group:
                    group[k] = v
                    nxt.append(v)
        frontier = nxt
    return np.stack(list(group.values()))


_CLIFFORDS = _clifford_group()


def recovery_unitaries(num_random: int = 1000, seed: int = 7) -> np.ndarray:
    """Search grid: 24 Cliffords plus Haar-random unitaries (QR of a complex
    Gaussian matrix), stacked as (count, 2, 2)."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((num_random, 2, 2)) + 1j * rng.standard_normal((num_random, 2, 2))
    qs = []
    for mat in raw:
        q, r = np.linalg.qr(mat)
        qs.append(q * (np.diag(r) / np.abs(np.diag(r))))
    return np.concatenate([_CLIFFORDS, np.stack(qs)])


def max_recovery_fidelity(
    rho: DensityMatrix | np.ndarray,
    target: Sequence[complex],
    unitaries: np.ndarray | None = None,
) -> float:
    """Best fidelity <t|U rho U^dag|t> over the recovery grid."""
    mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    t = np.asarray(target, dtype=np.complex128).reshape(2)
    t = t / np.linalg.norm(t)
    us = recovery_unitaries() if unitaries is None else unitaries
    w = np.einsum("gba,b->ga", us.conj(), t)  # w_g = U_g^dag |t>
    values = np.einsum("ga,ab,gb->g", w.conj(), mat, w).real
    return float(values.max())


def _form_for(outcome: BellOutcome) -> DiagonalForm:
    return DiagonalForm.PRESERVED if outcome in _PHI else DiagonalForm.SWAPPED


def _qubit_reports(
    joint: DensityMatrix,
    qubits: Sequence[tuple[complex, complex]],
    outcomes: Sequence[BellOutcome],
    unitaries: np.ndarray,
) -> tuple[tuple[DensityMatrix, ...], float, tuple[float, ...], tuple[DiagonalForm, ...]]:
    per_qubit = tuple(
        partial_trace(joint, [i]) if joint.num_qubits > 1 else joint
        for i in range(len(qubits))
    )
    off = max(d.max_off_diagonal() for d in per_qubit)
    best = tuple(
        max_recovery_fidelity(d, pair, unitaries) for d, pair in zip(per_qubit, qubits)
    )
    forms = tuple(_form_for(o) for o in outcomes)
    return per_qubit, off, best, forms


def analyze_defection(
    spec: MessageSpec | Sequence[MessageSpec],
    shape: NetworkShape,
    defector: int,
    *,
    unitaries: np.ndarray | None = None,
) -> list[DefectionReport]:
    """Enumerate all branches of the cooperating parties while ``defector``
    (0-based agent index) withholds its Hadamard, measurement, and bit.

    Accepts one message spec per receiver (a bare spec for the single-receiver
    network); per-qubit entries are flattened over receivers in block order.
    """
    specs = [spec] if isinstance(spec, MessageSpec) else list(spec)
    if not 0 <= defector < shape.num_agents:
        raise IndexError(f"defector {defector} out of range for {shape.num_agents} agents")
    us = recovery_unitaries() if unitaries is None else unitaries
    state, registry = _initial_state(specs, shape)
    events = tuple(e for e in protocol_events(shape) if e != ("ghz", defector))
    pair_ids = [(r, i) for r, m in enumerate(shape.message_counts) for i in range(m)]
    total = shape.total_messages
    keep = [registry.receiver_epr(r, i) for r, i in pair_ids] + [registry.agent(defector)]
    flat_qubits = [q for s in specs for q in s.qubits]

    reports = []
    for outcomes, prob, final in _enumerate_paths(state, events, registry, "hadamard_z"):
        fixed = measured_fixed_bits(outcomes, registry, "hadamard_z")
        sub = _extract_substate(final.amplitudes, fixed, keep)
        joint = partial_trace(sub, range(total))
        bells = tuple(outcomes[("bell", r, i)] for r, i in pair_ids)
        per_qubit, off, best, forms = _qubit_reports(joint, flat_qubits, bells, us)
        bits = tuple(
            int(outcomes[("ghz", j)]) for j in range(shape.num_agents + 1) if j != defector
        )
        reports.append(DefectionReport(
            defector=defector,
            bell_outcomes=bells,
            cooperator_bits=bits,
            probability=prob,
            joint_density=joint,
            per_qubit_density=per_qubit,
            off_diagonal_norm=off,
            max_fidelity=best,
            conforms_to=forms,
        ))
    return reports


def analyze_two_party_defection(spec: MessageSpec) -> list[DefectionReport]:
    """Single-agent network: the one agent defects, the sender completes all
    of her measurements.  One report per (Bell outcomes, sender bit) branch."""
    return analyze_defection(spec, NetworkShape.single(len(spec), 1), 0)


def analyze_baseline_defection(
    spec: MessageSpec,
    shape: NetworkShape,
    defector: int,
    *,
    unitaries: np.ndarray | None = None,
) -> list[DefectionReport]:
    """Defection in the per-qubit GHZ baseline: the defector withholds all of
    its per-copy bits; reports are per copy and per cooperating branch."""
    if shape.num_receivers != 1:
        raise ValueError("baseline defection covers the single-receiver network")
    if not 0 <= defector < shape.num_agents:
        raise IndexError(f"defector {defector} out of range for {shape.num_agents} agents")
    us = recovery_unitaries() if unitaries is None else unitaries
    n = shape.num_agents
    reports = []
    for index, (alpha, beta) in enumerate(spec.qubits):
        for outcome, bits, prob, state in _baseline_copy_branches(alpha, beta, n, skip=defector):
            fixed = {0: 0, 1: 1 if outcome not in _PHI else 0}
            for j, bit in zip((j for j in range(n) if j != defector), bits):
                fixed[3 + j] = bit
            sub = _extract_substate(state.amplitudes, fixed, [2, 3 + defector])
            rho = partial_trace(sub, [0])
            per_qubit, off, best, forms = _qubit_reports(rho, [(alpha, beta)], (outcome,), us)
            reports.append(DefectionReport(
                defector=defector,
                bell_outcomes=(outcome,),
                cooperator_bits=bits,
                probability=prob,
                joint_density=rho,
                per_qubit_density=per_qubit,
                off_diagonal_norm=off,
                max_fidelity=best,
                conforms_to=forms,
                message_index=index,
            ))
    return reports


def entangled_info_check(spec: MessageSpec, shape: NetworkShape | None = None) -> ConditionalStateReport:
    """Pin both Bell outcomes to the plus pair, skip all agent measurements,
    project the first received qubit onto alpha1|0> +/- beta1|1>, and report
    the second received qubit's fidelity against alpha2|0> +/- beta2|1>."""
    if len(spec) != 2:
        raise ValueError("the entangled-information check needs exactly two message qubits")
    shape = shape or NetworkShape.single(2, 1)
    if shape.num_receivers != 1 or shape.message_counts[0] != 2:
        raise ValueError("shape must carry two message qubits to one receiver")
    state, registry = _initial_state([spec], shape)
    for i in range(2):
        pair = (registry.message(0, i), registry.sender_epr(0, i))
        _, _, state = measure_bell(state, pair, BellOutcome.PHI_PLUS)

    (a1, b1), (a2, b2) = spec.qubits
    first = registry.receiver_epr(0, 0)
    second = registry.receiver_epr(0, 1)
    results = []
    for sign in (+1, -1):
        p, projected = project_onto_qubit_state(state, first, [a1, sign * b1])
        rho = partial_trace(projected, [second])
        target = StateVector([a2, sign * b2])
        results.append((p, fidelity(rho, target)))
    (pp, fp), (pm, fm) = results
    return ConditionalStateReport(
        plus_probability=pp, plus_fidelity=fp,
        minus_probability=pm, minus_fidelity=fm,
    )
