"""Controlled-teleportation protocol engine.

Runs the entangling protocol (one sender, n controlling agents, k receivers)
and the per-copy GHZ baseline, either sampling one branch with a seeded RNG or
exhaustively enumerating every measurement branch.  Transcripts record the
classical traffic, the applied corrections, and the reconstruction fidelity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Literal, Mapping, Sequence

import numpy as np

from .resources import (
    MessageSpec,
    NetworkShape,
    QubitRegistry,
    prepare_control_resource,
    prepare_ghz,
    prepare_message_state,
)
from .states import (
    BellOutcome,
    PauliOp,
    StateVector,
    _apply_1q,
    apply_hadamard,
    fidelity,
    measure_bell,
    measure_x,
    measure_z,
    partial_trace,
    tensor,
)

AgentBasis = Literal["hadamard_z", "plus_minus"]

_BELL_ORDER = tuple(BellOutcome)


class Branch(enum.Enum):
    """Joint parity of all control-qubit measurement bits.

    EVEN selects the first correction column, ODD the second.
    """

    EVEN = "even"
    ODD = "odd"


# outcome -> (correction in the EVEN branch, correction in the ODD branch)
CORRECTIONS: dict[BellOutcome, tuple[PauliOp, PauliOp]] = {
    BellOutcome.PHI_PLUS: (PauliOp.I, PauliOp.Z),
    BellOutcome.PHI_MINUS: (PauliOp.Z, PauliOp.I),
    BellOutcome.PSI_PLUS: (PauliOp.X, PauliOp.Y),
    BellOutcome.PSI_MINUS: (PauliOp.Y, PauliOp.X),
}

FIDELITY_ATOL = 1e-10


def infer_branch(agent_bits: Sequence[int], sender_bit: int) -> Branch:
    """Branch selected by the agents' bits and the sender's GHZ bit."""
    parity = int(sender_bit) & 1
    for b in agent_bits:
        parity ^= int(b) & 1
    return Branch.EVEN if parity == 0 else Branch.ODD


def correction_for(
    outcome: BellOutcome,
    branch: Branch,
    table: Mapping[BellOutcome, tuple[PauliOp, PauliOp]] | None = None,
) -> PauliOp:
    """Receiver-side Pauli correction for one qubit."""
    pair = (table or CORRECTIONS)[outcome]
    return pair[0] if branch is Branch.EVEN else pair[1]


@dataclass(frozen=True)
class ClassicalMessage:
    """One classical transmission: a Bell outcome or a measurement bit."""

    sender: str
    payload: BellOutcome | int
    about: str


@dataclass(frozen=True)
class Party:
    role: str
    held_qubits: tuple[int, ...]


def parties(shape: NetworkShape) -> tuple[Party, ...]:
    """Qubit holdings of the sender, each receiver, and each agent."""
    reg = QubitRegistry(shape)
    sender_held = []
    out = []
    for r, m in enumerate(shape.message_counts):
        sender_held += [reg.message(r, i) for i in range(m)]
        sender_held += [reg.sender_epr(r, i) for i in range(m)]
        out.append(Party(f"receiver{r}", tuple(reg.receiver_epr(r, i) for i in range(m))))
    sender_held.append(reg.sender_ghz)
    out = [Party("sender", tuple(sender_held))] + out
    out += [Party(f"agent{j}", (reg.agent(j),)) for j in range(shape.num_agents)]
    return tuple(out)


@dataclass(frozen=True)
class ProtocolTranscript:
    """Record of one protocol branch as seen by one receiver."""

    receiver: int
    bell_outcomes: tuple[BellOutcome, ...]
    agent_bits: tuple[int, ...]
    sender_ghz_bit: int | None
    branch: Branch
    corrections: tuple[PauliOp, ...]
    fidelity: float
    branch_probability: float
    classical_messages: tuple[ClassicalMessage, ...] = ()
    message_index: int | None = None


Event = tuple  # ("bell", receiver, index) or ("ghz", party) with party == num_agents for the sender


def protocol_events(shape: NetworkShape) -> tuple[Event, ...]:
    """Canonical event order: Bell pairs, then agents, then the sender."""
    events: list[Event] = [
        ("bell", r, i) for r, m in enumerate(shape.message_counts) for i in range(m)
    ]
    events += [("ghz", j) for j in range(shape.num_agents + 1)]
    return tuple(events)


def _event_branches(
    state: StateVector, event: Event, registry: QubitRegistry, basis: AgentBasis
) -> Iterator[tuple[object, float, StateVector]]:
    if event[0] == "bell":
        _, r, i = event
        pair = (registry.message(r, i), registry.sender_epr(r, i))
        for outcome in _BELL_ORDER:
            yield measure_bell(state, pair, outcome)
    else:
        qubit = _ghz_qubit(event[1], registry)
        if basis == "hadamard_z":
            rotated = apply_hadamard(state, qubit)
            for bit in (0, 1):
                yield measure_z(rotated, qubit, bit)
        else:
            for bit in (0, 1):
                yield measure_x(state, qubit, bit)


def _sample_event(
    state: StateVector, event: Event, registry: QubitRegistry, basis: AgentBasis,
    rng: np.random.Generator,
) -> tuple[object, float, StateVector]:
    if event[0] == "bell":
        _, r, i = event
        pair = (registry.message(r, i), registry.sender_epr(r, i))
        return measure_bell(state, pair, rng)
    qubit = _ghz_qubit(event[1], registry)
    if basis == "hadamard_z":
        return measure_z(apply_hadamard(state, qubit), qubit, rng)
    return measure_x(state, qubit, rng)


def _ghz_qubit(party: int, registry: QubitRegistry) -> int:
    if party == registry.shape.num_agents:
        return registry.sender_ghz
    return registry.agent(party)


def _enumerate_paths(
    state: StateVector,
    events: Sequence[Event],
    registry: QubitRegistry,
    basis: AgentBasis,
) -> Iterator[tuple[dict, float, StateVector]]:
    if not events:
        yield {}, 1.0, state
        return
    head, rest = events[0], events[1:]
    for outcome, p, collapsed in _event_branches(state, head, registry, basis):
        for outcomes, prob, final in _enumerate_paths(collapsed, rest, registry, basis):
            outcomes[head] = outcome
            yield outcomes, p * prob, final


def _sample_path(
    state: StateVector,
    events: Sequence[Event],
    registry: QubitRegistry,
    basis: AgentBasis,
    rng: np.random.Generator,
) -> tuple[dict, float, StateVector]:
    outcomes: dict = {}
    prob = 1.0
    for event in events:
        outcome, p, state = _sample_event(state, event, registry, basis, rng)
        outcomes[event] = outcome
        prob *= p
    return outcomes, prob, state


def _initial_state(specs: Sequence[MessageSpec], shape: NetworkShape) -> tuple[StateVector, QubitRegistry]:
    if len(specs) != shape.num_receivers:
        raise ValueError(f"got {len(specs)} message specs for {shape.num_receivers} receivers")
    for spec, m in zip(specs, shape.message_counts):
        if len(spec) != m:
            raise ValueError(f"spec length {len(spec)} does not match shape count {m}")
    resource, _ = prepare_control_resource(shape)
    message = prepare_message_state(MessageSpec(tuple(
        q for spec in specs for q in spec.qubits
    )))
    return tensor(message, resource), QubitRegistry(shape)


def _extract_substate(
    amplitudes: np.ndarray, fixed_bits: Mapping[int, int], keep: Sequence[int]
) -> StateVector:
    """Slice out the qubits in ``keep`` when every other qubit is known to sit
    in a fixed basis component with nonzero amplitude."""
    base = 0
    for q, bit in fixed_bits.items():
        base |= (bit & 1) << q
    size = 1 << len(keep)
    r = np.arange(size)
    idx = np.full(size, base, dtype=np.int64)
    for t, q in enumerate(keep):
        idx += ((r >> t) & 1).astype(np.int64) << q
    return StateVector(amplitudes[idx])


def measured_fixed_bits(
    outcomes: Mapping[Event, object], registry: QubitRegistry, basis: AgentBasis
) -> dict[int, int]:
    """Definite basis component of every measured qubit after collapse.

    Bell pairs rest in a Bell state: component (0,0) for phi outcomes and
    (0,1) for psi outcomes is always populated.  GHZ qubits sit in |bit> after
    a Hadamard round, or in |+/-> (component 0 populated) in plus_minus mode.
    """
    fixed: dict[int, int] = {}
    for event, outcome in outcomes.items():
        if event[0] == "bell":
            _, r, i = event
            fixed[registry.message(r, i)] = 0
            psi = outcome in (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS)
            fixed[registry.sender_epr(r, i)] = 1 if psi else 0
        else:
            qubit = _ghz_qubit(event[1], registry)
            fixed[qubit] = int(outcome) if basis == "hadamard_z" else 0
    return fixed


def _receiver_positions(shape: NetworkShape, receiver: int) -> list[int]:
    start = sum(shape.message_counts[:receiver])
    return list(range(start, start + shape.message_counts[receiver]))


def _finalize_branch(
    outcomes: dict,
    prob: float,
    final: StateVector,
    specs: Sequence[MessageSpec],
    targets: Sequence[StateVector],
    shape: NetworkShape,
    registry: QubitRegistry,
    basis: AgentBasis,
    table: Mapping[BellOutcome, tuple[PauliOp, PauliOp]] | None,
) -> tuple[ProtocolTranscript, ...]:
    n = shape.num_agents
    agent_bits = tuple(int(outcomes[("ghz", j)]) for j in range(n))
    sender_bit = int(outcomes[("ghz", n)])
    branch = infer_branch(agent_bits, sender_bit)

    fixed = measured_fixed_bits(outcomes, registry, basis)
    keep = [
        registry.receiver_epr(r, i)
        for r, m in enumerate(shape.message_counts)
        for i in range(m)
    ]
    received = _extract_substate(final.amplitudes, fixed, keep)

    amps = received.amplitudes
    corrections_by_receiver: list[tuple[PauliOp, ...]] = []
    pos = 0
    for r, spec in enumerate(specs):
        ops = []
        for i in range(len(spec)):
            op = correction_for(outcomes[("bell", r, i)], branch, table)
            if op is not PauliOp.I:
                amps = _apply_1q(amps, pos, op.matrix)
            ops.append(op)
            pos += 1
        corrections_by_receiver.append(tuple(ops))
    corrected = StateVector(amps)

    transcripts = []
    for r, spec in enumerate(specs):
        target = targets[r]
        if shape.num_receivers == 1:
            fid = fidelity(corrected, target)
        else:
            rho = partial_trace(corrected, _receiver_positions(shape, r))
            fid = fidelity(rho, target)
        outs = tuple(outcomes[("bell", r, i)] for i in range(len(spec)))
        messages = tuple(
            [ClassicalMessage("sender", o, f"pair{r}.{i}") for i, o in enumerate(outs)]
            + [ClassicalMessage(f"agent{j}", agent_bits[j], f"agent{j}") for j in range(n)]
            + [ClassicalMessage("sender", sender_bit, "ghz_s")]
        )
        transcripts.append(ProtocolTranscript(
            receiver=r,
            bell_outcomes=outs,
            agent_bits=agent_bits,
            sender_ghz_bit=sender_bit,
            branch=branch,
            corrections=corrections_by_receiver[r],
            fidelity=fid,
            branch_probability=prob,
            classical_messages=messages,
        ))
    return tuple(transcripts)


def _canonical_key(outcomes: Mapping[Event, object], shape: NetworkShape) -> tuple:
    key: list[int] = []
    for r, m in enumerate(shape.message_counts):
        key += [_BELL_ORDER.index(outcomes[("bell", r, i)]) for i in range(m)]
    key += [int(outcomes[("ghz", j)]) for j in range(shape.num_agents + 1)]
    return tuple(key)


def _check_event_order(event_order: Sequence[Event] | None, shape: NetworkShape) -> tuple[Event, ...]:
    canonical = protocol_events(shape)
    if event_order is None:
        return canonical
    order = tuple(tuple(e) for e in event_order)
    if sorted(order) != sorted(canonical):
        raise ValueError("event_order must be a permutation of protocol_events(shape)")
    return order


def _run_network(
    specs: Sequence[MessageSpec],
    shape: NetworkShape,
    mode: str,
    seed: int | None,
    event_order: Sequence[Event] | None,
    agent_basis: AgentBasis,
    table: Mapping[BellOutcome, tuple[PauliOp, PauliOp]] | None,
) -> list[tuple[ProtocolTranscript, ...]] | tuple[ProtocolTranscript, ...]:
    if agent_basis not in ("hadamard_z", "plus_minus"):
        raise ValueError(f"unknown agent basis {agent_basis!r}")
    events = _check_event_order(event_order, shape)
    state, registry = _initial_state(specs, shape)
    targets = [prepare_message_state(spec) for spec in specs]
    if mode == "enumerate":
        branches = [
            (_canonical_key(outs, shape),
             _finalize_branch(outs, prob, final, specs, targets, shape, registry, agent_basis, table))
            for outs, prob, final in _enumerate_paths(state, events, registry, agent_basis)
        ]
        branches.sort(key=lambda kv: kv[0])
        return [t for _, t in branches]
    if mode == "sampled":
        if seed is None:
            raise ValueError("sampled mode needs a seed")
        rng = np.random.default_rng(seed)
        outs, prob, final = _sample_path(state, events, registry, agent_basis, rng)
        return _finalize_branch(outs, prob, final, specs, targets, shape, registry, agent_basis, table)
    raise ValueError(f"unknown mode {mode!r}")


def run_controlled_teleport(
    spec: MessageSpec,
    shape: NetworkShape,
    mode: str = "enumerate",
    *,
    seed: int | None = None,
    event_order: Sequence[Event] | None = None,
    agent_basis: AgentBasis = "hadamard_z",
    correction_table: Mapping[BellOutcome, tuple[PauliOp, PauliOp]] | None = None,
) -> list[ProtocolTranscript] | ProtocolTranscript:
    """Teleport one message string to a single receiver under agent control.

    ``mode="enumerate"`` returns one transcript per measurement branch in
    canonical order; ``mode="sampled"`` draws a single branch with a seeded
    RNG and returns its transcript.
    """
    if shape.num_receivers != 1:
        raise ValueError("run_controlled_teleport is the single-receiver entry point")
    result = _run_network([spec], shape, mode, seed, event_order, agent_basis, correction_table)
    if mode == "enumerate":
        return [branch[0] for branch in result]
    return result[0]


def run_multi_receiver(
    specs: Sequence[MessageSpec],
    shape: NetworkShape,
    mode: str = "enumerate",
    *,
    seed: int | None = None,
    event_order: Sequence[Event] | None = None,
    agent_basis: AgentBasis = "hadamard_z",
) -> list[tuple[ProtocolTranscript, ...]] | tuple[ProtocolTranscript, ...]:
    """Teleport one qubit string to each of k >= 2 receivers in one run.

    The agents measure once; their single bit is shared by every receiver's
    transcript.
    """
    if shape.num_receivers < 2:
        raise ValueError("run_multi_receiver needs at least two receivers")
    return _run_network(list(specs), shape, mode, seed, event_order, agent_basis, None)


def baseline_copy_state(alpha: complex, beta: complex, num_agents: int) -> tuple[StateVector, int]:
    """One baseline copy: the message qubit tensored with an (n+2)-qubit GHZ.

    Layout: message qubit 0, sender GHZ qubit 1, receiver qubit 2, agent
    qubits 3..n+2.  Returns the state and the number of resource qubits.
    """
    ghz = prepare_ghz(num_agents + 2, +1)
    return tensor(StateVector([alpha, beta]), ghz), ghz.num_qubits


def baseline_resource_sizes(shape: NetworkShape) -> list[int]:
    """Resource qubits actually allocated per baseline copy."""
    sizes = []
    for m in shape.message_counts:
        for _ in range(m):
            _, aux = baseline_copy_state(1.0, 0.0, shape.num_agents)
            sizes.append(aux)
    return sizes


def _baseline_copy_branches(
    alpha: complex, beta: complex, num_agents: int, skip: int | None = None
) -> Iterator[tuple[BellOutcome, tuple[int, ...], float, StateVector]]:
    state, _ = baseline_copy_state(alpha, beta, num_agents)
    for outcome in _BELL_ORDER:
        _, p_bell, after_bell = measure_bell(state, (0, 1), outcome)
        stack = [((), p_bell, after_bell)]
        for j in range(num_agents):
            if j == skip:
                continue
            qubit = 3 + j
            nxt = []
            for bits, prob, s in stack:
                rotated = apply_hadamard(s, qubit)
                for bit in (0, 1):
                    _, p, collapsed = measure_z(rotated, qubit, bit)
                    nxt.append((bits + (bit,), prob * p, collapsed))
            stack = nxt
        for bits, prob, s in stack:
            yield outcome, bits, prob, s


def _baseline_transcript(
    index: int,
    alpha: complex,
    beta: complex,
    num_agents: int,
    outcome: BellOutcome,
    bits: tuple[int, ...],
    prob: float,
    state: StateVector,
) -> ProtocolTranscript:
    branch = infer_branch(bits, 0)
    op = correction_for(outcome, branch)
    fixed = {0: 0, 1: 1 if outcome in (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS) else 0}
    for j, bit in enumerate(bits):
        fixed[3 + j] = bit
    received = _extract_substate(state.amplitudes, fixed, [2])
    amps = received.amplitudes
    if op is not PauliOp.I:
        amps = _apply_1q(amps, 0, op.matrix)
    fid = fidelity(StateVector(amps), StateVector([alpha, beta]))
    messages = tuple(
        [ClassicalMessage("sender", outcome, f"pair0.{index}")]
        + [ClassicalMessage(f"agent{j}", bits[j], f"agent{j}") for j in range(num_agents)]
    )
    return ProtocolTranscript(
        receiver=0,
        bell_outcomes=(outcome,),
        agent_bits=bits,
        sender_ghz_bit=None,
        branch=branch,
        corrections=(op,),
        fidelity=fid,
        branch_probability=prob,
        classical_messages=messages,
        message_index=index,
    )


def run_baseline_ghz(
    spec: MessageSpec,
    shape: NetworkShape,
    mode: str = "enumerate",
    *,
    seed: int | None = None,
) -> list[ProtocolTranscript]:
    """Per-qubit GHZ baseline: one (n+2)-qubit GHZ copy per message qubit.

    The copies are independent, so enumeration is per copy: every transcript
    carries its ``message_index``.  Sampled mode returns one transcript per
    copy.  The correction is the usual table with the branch given by the
    parity of that copy's agent bits.
    """
    if shape.num_receivers != 1:
        raise ValueError("the baseline runner covers the single-receiver network")
    if len(spec) != shape.message_counts[0]:
        raise ValueError("spec length does not match shape")
    n = shape.num_agents
    out = []
    if mode == "enumerate":
        for i, (alpha, beta) in enumerate(spec.qubits):
            for outcome, bits, prob, state in _baseline_copy_branches(alpha, beta, n):
                out.append(_baseline_transcript(i, alpha, beta, n, outcome, bits, prob, state))
        return out
    if mode == "sampled":
        if seed is None:
            raise ValueError("sampled mode needs a seed")
        rng = np.random.default_rng(seed)
        for i, (alpha, beta) in enumerate(spec.qubits):
            state, _ = baseline_copy_state(alpha, beta, n)
            outcome, p_bell, state = measure_bell(state, (0, 1), rng)
            bits = []
            prob = p_bell
            for j in range(n):
                qubit = 3 + j
                bit, p, state = measure_z(apply_hadamard(state, qubit), qubit, rng)
                bits.append(bit)
                prob *= p
            out.append(_baseline_transcript(i, alpha, beta, n, outcome, tuple(bits), prob, state))
        return out
    raise ValueError(f"unknown mode {mode!r}")
