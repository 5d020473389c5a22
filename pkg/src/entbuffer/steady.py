"""Steady states of the repeated caching channel.

The primary solver iterates the channel from a user-supplied initial state
until the step-to-step change falls below tolerance. For small buffers the
fixed-point equation is also solved as a vectorized null-space problem, which
surfaces the kernel dimension instead of assuming uniqueness.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import apply_channel_mat
from .gates import BufferSystem, SwapParams, caching_unitary, phase_aligned_distance
from .linalg import (ComplexMatrix, DensityMatrix, bell_state,
                     buffer_negativity, pair_product_state, projector, tensor)
from .tolerances import DEFAULT_TOL, Tolerances


class DegenerateChannelError(ValueError):
    """Raised when alpha = 0 makes every state a fixed point."""


class ConvergenceError(RuntimeError):
    def __init__(self, residual: float, steps: int):
        self.residual = residual
        self.steps = steps
        super().__init__(
            f"power iteration did not converge within {steps} steps "
            f"(last residual {residual:.3e})"
        )


class SolveMethod(Enum):
    POWER_ITERATION = "power-iteration"
    NULL_SPACE = "null-space"


@dataclass(frozen=True)
class SteadyStateResult:
    rho: DensityMatrix
    negativity: float
    residual: float
    method: SolveMethod
    kernel_dimension: int
    steps: int = 0


def _require_alpha(params: SwapParams):
    if params.alpha <= 0.0:
        raise DegenerateChannelError(
            "alpha = 0 leaves every state fixed; no unique steady state"
        )


def steady_state(sys: BufferSystem, params: SwapParams, rho0: DensityMatrix,
                 tol: Tolerances = DEFAULT_TOL) -> SteadyStateResult:
    """Fixed point of the caching channel by power iteration from rho0.

    For k <= 2 the result is cross-checked against the null-space solver and
    the kernel dimension is reported; for larger buffers the kernel dimension
    defaults to the single fixed point that was found.
    """
    _require_alpha(params)
    if rho0.n_qubits != sys.buffer_qubits:
        raise ValueError("initial state does not match the buffer size")
    cur = np.asarray(rho0.mat, dtype=complex)
    steps = 0
    residual = np.inf
    window = 32
    history: deque[float] = deque(maxlen=window + 1)
    while steps < tol.power_iteration_cap:
        nxt = apply_channel_mat(cur, sys, params)
        nxt /= nxt.trace().real  # keep per-step trace drift from accumulating
        residual = float(np.abs(nxt - cur).max())
        cur = nxt
        steps += 1
        if residual < tol.power_iteration_step:
            # The remaining distance to the fixed point is about
            # residual / (1 - r) for contraction ratio r. With r below 0.99
            # a sub-1e-12 step change certifies a state error below 1e-10;
            # slower contractions (small alpha with beta close to alpha)
            # must instead run down to the arithmetic noise floor, where the
            # state error is residual-floor / spectral-gap, still tiny. The
            # ratio is averaged over a window because the max-norm change
            # jitters step to step.
            if residual < 1e-15:
                break
            history.append(residual)
            if len(history) > window:
                base = history[0]
                r = (residual / base) ** (1.0 / window) if base > 0 else 1.0
                if r < 0.99:
                    break
        else:
            history.clear()
    else:
        raise ConvergenceError(residual, steps)
    rho = DensityMatrix(0.5 * (cur + cur.conj().T), sys.buffer_ordering, tol)
    final_residual = float(
        np.abs(apply_channel_mat(rho.mat, sys, params) - rho.mat).max()
    )
    kernel_dim = 1
    if sys.k <= 2:
        ns = steady_state_nullspace(sys, params, tol)
        kernel_dim = ns.kernel_dimension
        if kernel_dim == 1:
            disagreement = float(np.abs(ns.rho.mat - rho.mat).max())
            if disagreement > 1e-8:
                raise RuntimeError(
                    f"power iteration and null-space solutions disagree by "
                    f"{disagreement:.3e} (alpha={params.alpha}, beta={params.beta})"
                )
    return SteadyStateResult(
        rho=rho,
        negativity=buffer_negativity(rho, sys.k, tol),
        residual=final_residual,
        method=SolveMethod.POWER_ITERATION,
        kernel_dimension=kernel_dim,
        steps=steps,
    )


def channel_superoperator(sys: BufferSystem, params: SwapParams) -> ComplexMatrix:
    """Column-stacked matrix of the channel, built column by column.

    Restricted to k <= 2 to keep the d^2 x d^2 array small.
    """
    if sys.k > 2:
        raise ValueError("superoperator construction is limited to k <= 2")
    d = sys.buffer_dim
    sup = np.zeros((d * d, d * d), dtype=complex)
    for col in range(d * d):
        e = np.zeros((d, d), dtype=complex)
        e[col % d, col // d] = 1.0  # column-major unit matrix
        out = apply_channel_mat(e, sys, params)
        sup[:, col] = out.reshape(-1, order="F")
    return sup


def steady_state_nullspace(sys: BufferSystem, params: SwapParams,
                           tol: Tolerances = DEFAULT_TOL) -> SteadyStateResult:
    """Fixed points as the null space of (channel - identity)."""
    _require_alpha(params)
    d = sys.buffer_dim
    sup = channel_superoperator(sys, params)
    u, s, vh = np.linalg.svd(sup - np.eye(d * d))
    kernel_dim = int(np.sum(s < 1e-10))
    if kernel_dim == 0:
        raise ConvergenceError(float(s.min()), 0)
    vec = vh[-1].conj()  # smallest singular value
    mat = vec.reshape(d, d, order="F")
    mat = 0.5 * (mat + mat.conj().T)
    mat /= mat.trace()
    rho = DensityMatrix(mat, sys.buffer_ordering, tol)
    residual = float(np.abs(apply_channel_mat(rho.mat, sys, params) - rho.mat).max())
    return SteadyStateResult(
        rho=rho,
        negativity=buffer_negativity(rho, sys.k, tol),
        residual=residual,
        method=SolveMethod.NULL_SPACE,
        kernel_dimension=kernel_dim,
    )


def steady_state_closed_form_k1(params: SwapParams,
                                tol: Tolerances = DEFAULT_TOL) -> DensityMatrix:
    """Bell-diagonal 1-pair steady state with weights set by (a, b)."""
    _require_alpha(params)
    a, b = params.a, params.b
    norm = a * a + 4 * b * (1 - a)
    if norm <= 0.0:
        raise DegenerateChannelError("vanishing normalization at a = 0")
    w = np.array([b, (a - b) ** 2 + b * (1 - b), (1 - a) * b, (1 - a) * b]) / norm
    mat = sum(w[j - 1] * projector(bell_state(j)) for j in (1, 2, 3, 4))
    from .linalg import QubitOrdering

    return DensityMatrix(mat, QubitOrdering.buffer(1), tol)


def steady_state_negativity_k1(params: SwapParams) -> float:
    """Closed-form negativity of the 1-pair steady state."""
    _require_alpha(params)
    a, b = params.a, params.b
    norm = a * a + 4 * b * (1 - a)
    if norm <= 0.0:
        raise DegenerateChannelError("vanishing normalization at a = 0")
    num = abs(a * a - 2 * b) + abs(a * a - 4 * a * b + 2 * b) - 4 * b * (1 - a)
    return float(np.log2(1 + num / (2 * norm)))


def verify_iswap_fixed_point(k: int, alpha: float) -> float:
    """Phase-minimized residual of U(alpha, alpha) on psi1 x psi2^k.

    The k-pair buffer in Bell-psi2 pairs together with a fresh source pair is
    left invariant by iSWAP-family caching for every swap angle.
    """
    if not 1 <= k <= 4:
        raise ValueError("k must be in 1..4")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    sys = BufferSystem(k)
    u = caching_unitary(sys, SwapParams.iswap(alpha))
    state = tensor(pair_product_state(k, bell_state(2)), bell_state(1))
    return phase_aligned_distance((u @ state)[:, None], state[:, None])


@dataclass(frozen=True)
class GridPoint:
    alpha_over_pi: float
    beta_over_pi: float
    negativity: float
    residual: float
    kernel_dim: int


def steady_state_grid(sys: BufferSystem, alpha_grid, beta_fractions,
                      rho0: DensityMatrix | None = None,
                      tol: Tolerances = DEFAULT_TOL) -> list[GridPoint]:
    """Steady-state negativity over (alpha, beta) with beta = fraction * alpha.

    `alpha_grid` is in radians; `beta_fractions` in [0, 1] so every point
    respects beta <= alpha.
    """
    from .channel import all_zero_buffer

    if rho0 is None:
        rho0 = all_zero_buffer(sys)
    rows = []
    for al in alpha_grid:
        for frac in beta_fractions:
            params = SwapParams(float(al), float(frac) * float(al))
            res = steady_state(sys, params, rho0, tol)
            rows.append(
                GridPoint(
                    alpha_over_pi=float(al) / np.pi,
                    beta_over_pi=params.beta / np.pi,
                    negativity=res.negativity,
                    residual=res.residual,
                    kernel_dim=res.kernel_dimension,
                )
            )
    return rows


def one_ebit_contour(points: list[GridPoint], level: float = 1.0):
    """Marching-squares polylines of the E = level contour of a grid.

    Returns a list of polylines, each a list of (alpha_over_pi, beta_over_pi)
    vertices. The sampling lattice is rectangular in (alpha, beta/alpha), so
    the squares are marched in that space and vertices mapped back to beta.
    """
    def frac_of(p: GridPoint) -> float:
        return round(p.beta_over_pi / p.alpha_over_pi, 12)

    alphas = sorted({p.alpha_over_pi for p in points})
    fracs = sorted({frac_of(p) for p in points})
    val = {(p.alpha_over_pi, frac_of(p)): p.negativity - level for p in points}
    if len(val) != len(alphas) * len(fracs):
        raise ValueError("contour extraction needs a full rectangular grid")

    def interp(p0, p1, v0, v1):
        t = v0 / (v0 - v1)
        return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))

    segments = []
    for i in range(len(alphas) - 1):
        for j in range(len(fracs) - 1):
            corners = [
                (alphas[i], fracs[j]),
                (alphas[i + 1], fracs[j]),
                (alphas[i + 1], fracs[j + 1]),
                (alphas[i], fracs[j + 1]),
            ]
            vals = [val[c] for c in corners]
            crossings = []
            for e in range(4):
                v0, v1 = vals[e], vals[(e + 1) % 4]
                if (v0 < 0) != (v1 < 0):
                    crossings.append(interp(corners[e], corners[(e + 1) % 4], v0, v1))
            if len(crossings) == 2:
                segments.append(tuple(crossings))
            elif len(crossings) == 4:  # saddle: pair edges arbitrarily but stably
                segments.append((crossings[0], crossings[1]))
                segments.append((crossings[2], crossings[3]))
    polylines = _chain_segments(segments)
    return [[(al, al * fr) for al, fr in line] for line in polylines]


def _chain_segments(segments, snap: float = 1e-9):
    """Join line segments sharing endpoints into ordered polylines."""
    def key(pt):
        return (round(pt[0] / snap), round(pt[1] / snap))

    unused = list(segments)
    polylines = []
    while unused:
        a, b = unused.pop()
        line = [a, b]
        grew = True
        while grew:
            grew = False
            for idx, (c, d) in enumerate(unused):
                if key(c) == key(line[-1]):
                    line.append(d)
                elif key(d) == key(line[-1]):
                    line.append(c)
                elif key(c) == key(line[0]):
                    line.insert(0, d)
                elif key(d) == key(line[0]):
                    line.insert(0, c)
                else:
                    continue
                unused.pop(idx)
                grew = True
                break
        polylines.append(line)
    return polylines
