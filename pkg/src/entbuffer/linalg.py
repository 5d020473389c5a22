"""Dense complex linear algebra for multi-qubit states and operators.

Index convention used everywhere in this package: qubit orderings are
little-endian. The label at position 0 of a `QubitOrdering` is the least
significant bit of the basis index, so basis index ``i`` assigns bit
``(i >> p) & 1`` to the qubit at position ``p``. All operators and states
exchanged between modules carry their ordering explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tolerances import DEFAULT_TOL, Tolerances

ComplexMatrix = np.ndarray  # dense square complex array; dims are powers of 2 here


def as_complex_matrix(m) -> ComplexMatrix:
    """Validate and return a dense square complex matrix."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def n_qubits_of(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if 2 ** n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


@dataclass(frozen=True)
class QubitOrdering:
    """Ordered qubit labels; position 0 is the least significant bit."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate qubit labels: {self.labels}")

    def __len__(self) -> int:
        return len(self.labels)

    def position(self, label: str) -> int:
        return self.labels.index(label)

    @staticmethod
    def buffer(k: int) -> "QubitOrdering":
        """Buffer register [A1..Ak, B1..Bk]."""
        labels = tuple(f"A{j}" for j in range(1, k + 1)) + tuple(
            f"B{j}" for j in range(1, k + 1)
        )
        return QubitOrdering(labels)

    @staticmethod
    def combined(k: int) -> "QubitOrdering":
        """Buffer plus source register [A1..Ak, B1..Bk, A, B]."""
        return QubitOrdering(QubitOrdering.buffer(k).labels + ("A", "B"))


@dataclass(frozen=True)
class BipartiteCut:
    """Partition of qubit positions into two sides; the transpose acts on side_b."""

    side_a: frozenset[int]
    side_b: frozenset[int]

    def __post_init__(self):
        if self.side_a & self.side_b:
            raise ValueError("cut sides overlap")

    @property
    def n_qubits(self) -> int:
        return len(self.side_a) + len(self.side_b)

    @staticmethod
    def of_buffer(k: int) -> "BipartiteCut":
        """A-side qubits versus B-side qubits of a k-pair buffer."""
        return BipartiteCut(frozenset(range(k)), frozenset(range(k, 2 * k)))

    def validate_for(self, n: int):
        if self.side_a | self.side_b != frozenset(range(n)):
            raise ValueError(f"cut does not cover all {n} qubit positions")


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix with qubit labels."""

    mat: ComplexMatrix
    ordering: QubitOrdering
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        mat = as_complex_matrix(self.mat)
        n = n_qubits_of(mat.shape[0])
        if n != len(self.ordering):
            raise ValueError(
                f"matrix is {n}-qubit but ordering has {len(self.ordering)} labels"
            )
        herm = np.abs(mat - mat.conj().T).max()
        if herm > self.tol.hermiticity:
            raise ValueError(f"not Hermitian: max asymmetry {herm:.3e}")
        tr = mat.trace()
        if abs(tr - 1.0) > self.tol.trace:
            raise ValueError(f"trace {tr} differs from 1 beyond tolerance")
        evals = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
        if evals.min() < -self.tol.psd:
            raise ValueError(f"negative eigenvalue {evals.min():.3e}")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    @property
    def n_qubits(self) -> int:
        return len(self.ordering)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


def tensor(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Tensor product where `a` occupies the lower qubit positions.

    With little-endian indexing the index of `a` varies fastest, which is
    numpy's kron with swapped arguments.
    """
    return np.kron(np.asarray(b, dtype=complex), np.asarray(a, dtype=complex))


def tensor_all(*mats: ComplexMatrix) -> ComplexMatrix:
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = tensor(out, m)
    return out


def basis_state(bits) -> np.ndarray:
    """Computational basis ket for the given per-position bits."""
    idx = 0
    for p, b in enumerate(bits):
        idx |= (int(b) & 1) << p
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[idx] = 1.0
    return v


def bell_state(j: int) -> np.ndarray:
    """Bell kets: 1,2 -> (|00> +- |11>)/sqrt2; 3,4 -> (|01> +- |10>)/sqrt2.

    The first symbol of the ket is the qubit at position 0.
    """
    s = np.sqrt(0.5)
    if j == 1:
        return s * (basis_state([0, 0]) + basis_state([1, 1]))
    if j == 2:
        return s * (basis_state([0, 0]) - basis_state([1, 1]))
    if j == 3:
        return s * (basis_state([0, 1]) + basis_state([1, 0]))
    if j == 4:
        return s * (basis_state([0, 1]) - basis_state([1, 0]))
    raise ValueError(f"Bell index must be 1..4, got {j}")


def projector(ket: np.ndarray) -> ComplexMatrix:
    return np.outer(ket, ket.conj())


def pair_product_state(k: int, pair_ket: np.ndarray) -> np.ndarray:
    """Ket of a k-pair buffer with every pair (A_j, B_j) in `pair_ket`.

    Pairs are interleaved in the [A1..Ak, B1..Bk] register, so amplitudes are
    assembled per pair from the buffer index bits.
    """
    dim = 4 ** k
    out = np.zeros(dim, dtype=complex)
    for idx in range(dim):
        amp = 1.0 + 0j
        for j in range(k):
            aj = (idx >> j) & 1
            bj = (idx >> (k + j)) & 1
            amp *= pair_ket[aj + 2 * bj]
            if amp == 0:
                break
        out[idx] = amp
    return out


def embed_two_qubit(gate: ComplexMatrix, p: int, q: int, n: int) -> ComplexMatrix:
    """Full 2^n matrix of a two-qubit gate on register positions (p, q).

    Gate qubit 0 goes to position p, gate qubit 1 to position q. Built by
    basis-index permutation of gate (x) identity; serves as the slow reference
    for `apply_two_qubit`.
    """
    if p == q or not (0 <= p < n and 0 <= q < n):
        raise ValueError(f"invalid positions ({p}, {q}) for {n} qubits")
    order = [p, q] + [r for r in range(n) if r not in (p, q)]
    gfull = tensor(np.asarray(gate, dtype=complex), np.eye(2 ** (n - 2)))
    idx = np.arange(2 ** n)
    perm = np.zeros(2 ** n, dtype=np.int64)
    for m, pos in enumerate(order):
        perm |= ((idx >> pos) & 1) << m
    return gfull[np.ix_(perm, perm)]


def apply_two_qubit(gate: ComplexMatrix, op, p: int, q: int, n: int):
    """Left-multiply `op` (2^n x m array or 2^n vector) by the embedded gate.

    Contracts the 4x4 gate against the row index bits of positions (p, q)
    without forming the 2^n x 2^n embedding.
    """
    arr = np.asarray(op, dtype=complex)
    vec = arr.ndim == 1
    cols = 1 if vec else arr.shape[1]
    t = arr.reshape([2] * n + [cols])
    ap, aq = n - 1 - p, n - 1 - q  # row axis of each position (C order)
    g = np.asarray(gate, dtype=complex).reshape(2, 2, 2, 2)
    # g axes: [row bit q, row bit p, col bit q, col bit p]
    out = np.tensordot(g, t, axes=([2, 3], [aq, ap]))
    out = np.moveaxis(out, [0, 1], [aq, ap])
    return out.reshape(-1) if vec else out.reshape(2 ** n, cols)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out all qubits not in `keep`; kept labels retain their order."""
    keep = sorted(set(keep))
    n = rho.n_qubits
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[-1] >= n or keep[0] < 0:
        raise ValueError(f"keep positions {keep} out of range for {n} qubits")
    reduced = partial_trace_mat(rho.mat, n, keep)
    labels = tuple(rho.ordering.labels[p] for p in keep)
    return DensityMatrix(reduced, QubitOrdering(labels), rho.tol)


def partial_trace_mat(mat: ComplexMatrix, n: int, keep) -> ComplexMatrix:
    """partial_trace on a bare matrix; `keep` must be sorted positions."""
    t = np.asarray(mat, dtype=complex).reshape([2] * (2 * n))
    remaining = list(range(n))
    for pos in sorted(set(range(n)) - set(keep), reverse=True):
        m = len(remaining)
        ax = m - 1 - remaining.index(pos)
        t = np.trace(t, axis1=ax, axis2=ax + m)
        remaining.remove(pos)
    d = 2 ** len(remaining)
    return t.reshape(d, d)


def partial_transpose(rho: DensityMatrix, cut: BipartiteCut) -> ComplexMatrix:
    """Transpose the side_b indices of a density matrix."""
    cut.validate_for(rho.n_qubits)
    return partial_transpose_mat(rho.mat, rho.n_qubits, cut.side_b)


def partial_transpose_mat(mat: ComplexMatrix, n: int, side_b) -> ComplexMatrix:
    t = np.asarray(mat, dtype=complex).reshape([2] * (2 * n))
    axes = list(range(2 * n))
    for p in side_b:
        r, c = n - 1 - p, 2 * n - 1 - p
        axes[r], axes[c] = axes[c], axes[r]
    return t.transpose(axes).reshape(2 ** n, 2 ** n)


def trace_norm(mat: ComplexMatrix, tol: Tolerances = DEFAULT_TOL) -> float:
    """Sum of |eigenvalues| of the symmetrized matrix."""
    m = np.asarray(mat, dtype=complex)
    evals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.abs(evals).sum())


def log_negativity(rho: DensityMatrix, cut: BipartiteCut,
                   tol: Tolerances = DEFAULT_TOL) -> float:
    """Logarithmic negativity across the cut, in ebits.

    log2 of the trace norm of the partial transpose; tiny negatives from
    eigensolver jitter are clamped to 0, PPT states give 0.
    """
    val = float(np.log2(trace_norm(partial_transpose(rho, cut), tol)))
    if val < 0.0:
        if val < -tol.psd:
            raise ValueError(f"trace norm below 1 beyond tolerance: E={val:.3e}")
        return 0.0
    return val


def buffer_negativity(rho: DensityMatrix, k: int,
                      tol: Tolerances = DEFAULT_TOL) -> float:
    """Negativity of a k-pair buffer state across the A|B cut."""
    return log_negativity(rho, BipartiteCut.of_buffer(k), tol)


def random_density_matrix(n: int, rng: np.random.Generator,
                          rank: int | None = None) -> ComplexMatrix:
    """Random mixed state on n qubits (Ginibre construction)."""
    d = 2 ** n
    r = rank or d
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    m = g @ g.conj().T
    return m / m.trace()


def random_unitary(d: int, rng: np.random.Generator) -> ComplexMatrix:
    """Haar-random unitary via QR of a Ginibre matrix."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_product_ket(n: int, rng: np.random.Generator) -> np.ndarray:
    """Product of independent Haar-random single-qubit pure states."""
    out = np.ones(1, dtype=complex)
    for _ in range(n):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        out = np.kron(v, out)
    return out
