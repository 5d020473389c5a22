"""Partial swap gates and the buffer caching unitary.

The two-parameter gate S(alpha, beta) interpolates between the identity,
the full SWAP at (pi, 0), and the full iSWAP at (pi, pi) with the -i sign
convention on the off-diagonal block.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (ComplexMatrix, QubitOrdering, apply_two_qubit)


@dataclass(frozen=True)
class SwapParams:
    """Swap angle alpha in [0, pi] and relative phase beta in [0, alpha]."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.beta <= self.alpha <= np.pi + 1e-15):
            raise ValueError(
                f"require 0 <= beta <= alpha <= pi, got alpha={self.alpha}, "
                f"beta={self.beta}"
            )

    @property
    def a(self) -> float:
        """sin^2(alpha/2), the swap weight."""
        return float(np.sin(self.alpha / 2) ** 2)

    @property
    def b(self) -> float:
        """sin^2((alpha-beta)/2), the residual phase weight."""
        return float(np.sin((self.alpha - self.beta) / 2) ** 2)

    @staticmethod
    def swap(alpha: float) -> "SwapParams":
        return SwapParams(alpha, 0.0)

    @staticmethod
    def iswap(alpha: float) -> "SwapParams":
        return SwapParams(alpha, alpha)


@dataclass(frozen=True)
class BufferSystem:
    """A k-pair buffer and the fixed register layout shared by all modules.

    Buffer registers are [A1..Ak, B1..Bk]; the combined register appends the
    source pair [A, B]. Source qubit A interacts with A1 first, then A2, ...
    """

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"buffer size must be >= 1, got {self.k}")
        if 2 * self.k + 2 > 12:
            raise ValueError(f"k={self.k} exceeds the 12-qubit dense limit")

    @property
    def buffer_qubits(self) -> int:
        return 2 * self.k

    @property
    def total_qubits(self) -> int:
        return 2 * self.k + 2

    @property
    def buffer_dim(self) -> int:
        return 4 ** self.k

    @property
    def total_dim(self) -> int:
        return 2 ** self.total_qubits

    @property
    def buffer_ordering(self) -> QubitOrdering:
        return QubitOrdering.buffer(self.k)

    @property
    def combined_ordering(self) -> QubitOrdering:
        return QubitOrdering.combined(self.k)

    @property
    def source_positions(self) -> tuple[int, int]:
        return (2 * self.k, 2 * self.k + 1)


def partial_swap(params: SwapParams) -> ComplexMatrix:
    """4x4 partial swap matrix; corner entries are exactly 1."""
    ep = np.exp(1j * params.alpha)
    ph = np.exp(-0.5j * params.beta)
    c = ph * (1 + ep) / 2
    s = ph * (1 - ep) / 2
    return np.array(
        [
            [1, 0, 0, 0],
            [0, c, s, 0],
            [0, s, c, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def compose(p1: SwapParams, p2: SwapParams) -> ComplexMatrix:
    """Matrix product S(p1) S(p2); the angles must stay composable in range."""
    if p1.alpha + p2.alpha > np.pi + 1e-15:
        raise ValueError(
            f"composed swap angle {p1.alpha + p2.alpha} exceeds pi"
        )
    return partial_swap(p1) @ partial_swap(p2)


def composed_params(p1: SwapParams, p2: SwapParams) -> SwapParams:
    return SwapParams(p1.alpha + p2.alpha, p1.beta + p2.beta)


def caching_unitary(sys: BufferSystem, params: SwapParams,
                    interact_a: bool = True,
                    interact_b: bool = True) -> ComplexMatrix:
    """Unitary coupling the source pair to all k buffer pairs.

    Applies S on (A, A_j) and (B, B_j) for j = 1..k with j = 1 acting first.
    Setting interact_a/interact_b False drops every factor on that side,
    which models a source qubit that never arrived.
    """
    n = sys.total_qubits
    u = np.eye(2 ** n, dtype=complex)
    s = partial_swap(params)
    pa, pb = sys.source_positions
    for j in range(sys.k):
        if interact_a:
            u = apply_two_qubit(s, u, pa, j, n)
        if interact_b:
            u = apply_two_qubit(s, u, pb, sys.k + j, n)
    return u


def side_unitary(k: int, params: SwapParams) -> ComplexMatrix:
    """One-sided factor on the (k+1)-qubit register [buffer_1..buffer_k, source]."""
    n = k + 1
    u = np.eye(2 ** n, dtype=complex)
    s = partial_swap(params)
    for j in range(k):
        u = apply_two_qubit(s, u, k, j, n)
    return u


def phase_aligned_distance(u: ComplexMatrix, v: ComplexMatrix) -> float:
    """min over phi of the Frobenius distance between u and e^{i phi} v.

    The minimizing phase is the argument of tr(v^dag u); the difference is
    then formed explicitly, which stays accurate to machine precision where
    the norm/overlap cancellation formula loses half the digits.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    ov = np.vdot(v, u)  # tr(v^dag u)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v))


def unitarity_defect(u: ComplexMatrix) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())
