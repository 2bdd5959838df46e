"""Independent brute-force oracles used to freeze expected values.

Everything here is written with explicit index loops or literal formulas so
it shares no code path with the library's vectorized kernels.
"""

from __future__ import annotations

import numpy as np

from teleportnet import BellOutcome

SQRT_HALF = 1.0 / np.sqrt(2.0)


def product_state_dense(pairs) -> np.ndarray:
    """Product-state amplitudes, one explicit per-qubit product per index."""
    m = len(pairs)
    amps = np.zeros(2 ** m, dtype=complex)
    for idx in range(2 ** m):
        value = 1.0 + 0.0j
        for q in range(m):
            alpha, beta = pairs[q]
            value *= beta if (idx >> q) & 1 else alpha
        amps[idx] = value
    return amps


def partial_trace_dense(amps: np.ndarray, keep) -> np.ndarray:
    """Entry-by-entry reduced density matrix via explicit basis sums."""
    n = int(np.log2(len(amps)))
    kept = sorted(keep)
    traced = [q for q in range(n) if q not in kept]
    k = len(kept)
    rho = np.zeros((2 ** k, 2 ** k), dtype=complex)
    for row in range(2 ** k):
        for col in range(2 ** k):
            for t in range(2 ** len(traced)):
                ir = ic = 0
                for pos, q in enumerate(kept):
                    ir |= ((row >> pos) & 1) << q
                    ic |= ((col >> pos) & 1) << q
                for pos, q in enumerate(traced):
                    bit = (t >> pos) & 1
                    ir |= bit << q
                    ic |= bit << q
                rho[row, col] += amps[ir] * np.conj(amps[ic])
    return rho


def born_z_probability(amps: np.ndarray, qubit: int, bit: int) -> float:
    """Direct Born-rule sum over the indices whose ``qubit`` value is ``bit``."""
    total = 0.0
    for idx in range(len(amps)):
        if (idx >> qubit) & 1 == bit:
            total += abs(amps[idx]) ** 2
    return total


# Conditional single-qubit states after the sender's Bell measurement, keyed
# by outcome: the plain branch and the primed branch.
def conditional_kets(outcome: BellOutcome, alpha: complex, beta: complex):
    plain = {
        BellOutcome.PHI_PLUS: np.array([alpha, beta]),
        BellOutcome.PHI_MINUS: np.array([alpha, -beta]),
        BellOutcome.PSI_PLUS: np.array([beta, alpha]),
        BellOutcome.PSI_MINUS: np.array([-beta, alpha]),
    }[outcome]
    primed = {
        BellOutcome.PHI_PLUS: np.array([alpha, -beta]),
        BellOutcome.PHI_MINUS: np.array([alpha, beta]),
        BellOutcome.PSI_PLUS: np.array([beta, -alpha]),
        BellOutcome.PSI_MINUS: np.array([-beta, -alpha]),
    }[outcome]
    return plain.astype(complex), primed.astype(complex)


def product_of_kets(kets) -> np.ndarray:
    """Tensor product with explicit index products (qubit 0 = first ket)."""
    m = len(kets)
    amps = np.zeros(2 ** m, dtype=complex)
    for idx in range(2 ** m):
        value = 1.0 + 0.0j
        for q in range(m):
            value *= kets[q][(idx >> q) & 1]
        amps[idx] = value
    return amps


def defection_mixture(outcomes, pairs) -> np.ndarray:
    """Receiver's mixed operator when the control bit is lost: the literal
    (plain+primed)(...) + (plain-primed)(...) combination, normalized."""
    plain = product_of_kets([conditional_kets(o, a, b)[0] for o, (a, b) in zip(outcomes, pairs)])
    primed = product_of_kets([conditional_kets(o, a, b)[1] for o, (a, b) in zip(outcomes, pairs)])
    plus = plain + primed
    minus = plain - primed
    rho = np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
    return rho / np.trace(rho).real


def control_resource_dense(message_counts, num_agents: int) -> np.ndarray:
    """Term-by-term construction of the control resource over
    [sender EPR halves][receiver EPR halves][agent qubits][sender GHZ qubit]."""
    total = sum(message_counts)
    n = num_agents
    size = 2 * total + n + 1
    amps = np.zeros(2 ** size, dtype=complex)
    for sign in (+1, -1):
        for idx in range(2 ** size):
            coeff = 1.0 + 0.0j
            for i in range(total):
                sender_bit = (idx >> i) & 1
                receiver_bit = (idx >> (total + i)) & 1
                if sender_bit != receiver_bit:
                    coeff = 0.0
                    break
                coeff *= (sign if sender_bit else 1.0) * SQRT_HALF
            if coeff == 0.0:
                continue
            ghz_bits = [(idx >> (2 * total + j)) & 1 for j in range(n + 1)]
            if all(b == 0 for b in ghz_bits):
                coeff *= SQRT_HALF
            elif all(b == 1 for b in ghz_bits):
                coeff *= sign * SQRT_HALF
            else:
                continue
            amps[idx] += coeff
    return amps / np.linalg.norm(amps)


def max_eigenvalue(rho: np.ndarray) -> float:
    """Analytic ceiling for any unitary recovery against a pure target."""
    return float(np.linalg.eigvalsh(rho).max())
