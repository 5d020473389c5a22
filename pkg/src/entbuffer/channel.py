"""The buffer-update channel: couple a fresh source Bell pair, trace it out.

A channel application embeds the caching unitary on the combined register,
conjugates, and traces out the source pair. Internally this is organized as
four Kraus operators obtained by sandwiching the unitary between source-pair
basis states, which keeps the memory footprint at the buffer dimension.
Transmission loss enters as a mask: a side whose qubit was lost simply never
interacts before the source pair is discarded.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .gates import BufferSystem, SwapParams, caching_unitary
from .linalg import (ComplexMatrix, DensityMatrix, bell_state, buffer_negativity,
                     projector, tensor)


@dataclass(frozen=True)
class LossMask:
    """Which side's source qubit arrived at the buffer this step."""

    arrived_a: bool
    arrived_b: bool

    BOTH = None  # populated below
    NONE = None

    def as_tuple(self) -> tuple[bool, bool]:
        return (self.arrived_a, self.arrived_b)


LossMask.BOTH = LossMask(True, True)
LossMask.NONE = LossMask(False, False)

ALL_MASKS = (
    LossMask(True, True),
    LossMask(True, False),
    LossMask(False, True),
    LossMask(False, False),
)


@dataclass(frozen=True)
class KrausSet:
    """Four buffer-space Kraus operators indexed by the source Bell state."""

    ops: tuple[ComplexMatrix, ...]

    def completeness_defect(self) -> float:
        d = self.ops[0].shape[0]
        s = sum(m.conj().T @ m for m in self.ops)
        return float(np.abs(s - np.eye(d)).max())

    def apply(self, rho: ComplexMatrix) -> ComplexMatrix:
        return sum(m @ rho @ m.conj().T for m in self.ops)


@lru_cache(maxsize=256)
def _kraus_cached(k: int, alpha: float, beta: float,
                  arrived_a: bool, arrived_b: bool) -> tuple[ComplexMatrix, ...]:
    """Kraus operators <s|U~|psi1> over the computational source basis."""
    sys = BufferSystem(k)
    params = SwapParams(alpha, beta)
    u = caching_unitary(sys, params, interact_a=arrived_a, interact_b=arrived_b)
    d = sys.buffer_dim
    # source qubits are the two most significant bits of the combined index
    u4 = u.reshape(4, d, 4, d)
    psi1 = bell_state(1)
    ops = tuple(np.tensordot(u4[s], psi1, axes=([1], [0])) for s in range(4))
    for m in ops:
        m.flags.writeable = False
    return ops


def channel_kraus(sys: BufferSystem, params: SwapParams,
                  mask: LossMask = LossMask.BOTH) -> tuple[ComplexMatrix, ...]:
    """Cached Kraus operators of the (possibly loss-masked) buffer channel."""
    return _kraus_cached(sys.k, params.alpha, params.beta,
                         mask.arrived_a, mask.arrived_b)


@lru_cache(maxsize=256)
def _appliers_cached(k: int, alpha: float, beta: float,
                     arrived_a: bool, arrived_b: bool) -> tuple:
    """Kraus operators stored sparse when they are (full gates are)."""
    ops = _kraus_cached(k, alpha, beta, arrived_a, arrived_b)
    out = []
    for m in ops:
        nnz = int(np.count_nonzero(np.abs(m) > 1e-14))
        if nnz * 16 < m.size:
            cleaned = np.where(np.abs(m) > 1e-14, m, 0.0)
            out.append((sparse.csr_matrix(cleaned),
                        sparse.csr_matrix(cleaned.conj().T)))
        else:
            out.append((m, m.conj().T))
    return tuple(out)


def apply_channel_mat(rho: ComplexMatrix, sys: BufferSystem, params: SwapParams,
                      mask: LossMask = LossMask.BOTH) -> ComplexMatrix:
    """Channel application on a bare buffer matrix."""
    if rho.shape != (sys.buffer_dim, sys.buffer_dim):
        raise ValueError(
            f"state dimension {rho.shape} does not match the "
            f"{sys.buffer_qubits}-qubit buffer"
        )
    if not mask.arrived_a and not mask.arrived_b:
        return np.array(rho, dtype=complex)
    pairs = _appliers_cached(sys.k, params.alpha, params.beta,
                             mask.arrived_a, mask.arrived_b)
    out = np.zeros_like(rho, dtype=complex)
    for m, mh in pairs:
        out += m @ rho @ mh
    return out


def apply_channel(rho: DensityMatrix, sys: BufferSystem, params: SwapParams,
                  mask: LossMask = LossMask.BOTH) -> DensityMatrix:
    """One caching step on the buffer state under the given loss mask."""
    if rho.n_qubits != sys.buffer_qubits:
        raise ValueError(
            f"state has {rho.n_qubits} qubits, buffer needs {sys.buffer_qubits}"
        )
    out = apply_channel_mat(rho.mat, sys, params, mask)
    return DensityMatrix(out, sys.buffer_ordering, rho.tol)


def kraus_k1(params: SwapParams) -> KrausSet:
    """Bell-basis Kraus operators <psi_j|U|psi_1> of the 1-pair channel."""
    sys = BufferSystem(1)
    u = caching_unitary(sys, params)
    u4 = u.reshape(4, 4, 4, 4)
    psi1 = bell_state(1)
    bells = [bell_state(j) for j in (1, 2, 3, 4)]
    ops = []
    for bj in bells:
        # <psi_j|_src U |psi_1>_src acting on the buffer pair
        m = np.einsum("s,sbtc,t->bc", bj.conj(), u4, psi1)
        ops.append(m)
    return KrausSet(tuple(ops))


def kraus_k1_coefficients(params: SwapParams) -> KrausSet:
    """Second, independent construction of the 1-pair Kraus set.

    Built from closed-form Bell-basis expansion coefficients instead of the
    assembled caching unitary; used to cross-check `kraus_k1`.
    """
    al, be = params.alpha, params.beta
    e = np.exp
    b1, b2, b3, b4 = (bell_state(j) for j in (1, 2, 3, 4))
    ketbra = lambda x, y: np.outer(x, y.conj())
    m1 = (
        0.25 * e(-1j * be) * (1 + e(2j * al) + 2 * e(1j * be)) * ketbra(b1, b1)
        + 0.5 * (1 + e(1j * (al - be))) * ketbra(b2, b2)
        + 0.5 * e(-0.5j * be) * (1 + e(1j * al)) * (ketbra(b3, b3) + ketbra(b4, b4))
    )
    m2 = (
        0.5 * (1 - e(1j * (al - be))) * ketbra(b1, b2)
        + 0.25 * e(-1j * be) * (2 * e(1j * be) - 1 - e(2j * al)) * ketbra(b2, b1)
    )
    m3 = (
        0.5 * e(-0.5j * be) * (1 - e(1j * al)) * ketbra(b1, b3)
        + 0.25 * e(-1j * be) * (1 - e(2j * al)) * ketbra(b3, b1)
    )
    m4 = (
        0.5 * e(-0.5j * be) * (1 - e(1j * al)) * ketbra(b1, b4)
        - 0.25 * e(-1j * be) * (1 - e(2j * al)) * ketbra(b4, b1)
    )
    return KrausSet((m1, m2, m3, m4))


@dataclass(frozen=True)
class ChannelTrace:
    """States and buffer negativities along an iterated channel run."""

    states: tuple[DensityMatrix, ...]
    negativities: tuple[float, ...]


def iterate(rho0: DensityMatrix, sys: BufferSystem, params: SwapParams,
            n: int) -> ChannelTrace:
    """Apply the lossless channel n times, recording state and negativity."""
    if n < 0:
        raise ValueError("step count must be >= 0")
    states = [rho0]
    negs = [buffer_negativity(rho0, sys.k, rho0.tol)]
    cur = rho0
    for _ in range(n):
        cur = apply_channel(cur, sys, params)
        states.append(cur)
        negs.append(buffer_negativity(cur, sys.k, cur.tol))
    return ChannelTrace(tuple(states), tuple(negs))


def generator_apply(rho: DensityMatrix, sys: BufferSystem,
                    params: SwapParams) -> ComplexMatrix:
    """Discrete-time generator: C[rho] - rho. Traceless by construction."""
    return apply_channel_mat(rho.mat, sys, params) - rho.mat


def fresh_source_state() -> ComplexMatrix:
    """Density matrix of the source Bell pair."""
    return projector(bell_state(1))


def maximally_mixed_buffer(sys: BufferSystem) -> DensityMatrix:
    d = sys.buffer_dim
    return DensityMatrix(np.eye(d) / d, sys.buffer_ordering)


def all_zero_buffer(sys: BufferSystem) -> DensityMatrix:
    m = np.zeros((sys.buffer_dim, sys.buffer_dim), dtype=complex)
    m[0, 0] = 1.0
    return DensityMatrix(m, sys.buffer_ordering)
