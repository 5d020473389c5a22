"""Transmission-loss robustness of the multi-copy caching protocol.

Each caching step draws an independent arrival flag per side; a side that
lost its source qubit never interacts. The module provides closed-form
success rates for the two full gates on a 1-pair buffer, a seeded Monte
Carlo estimator over loss trajectories, and an exact branch-enumeration
oracle that merges numerically identical intermediate states.
"""
from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ALL_MASKS, LossMask, all_zero_buffer, apply_channel_mat
from .gates import BufferSystem, SwapParams
from .linalg import DensityMatrix, buffer_negativity
from .tolerances import DEFAULT_TOL, Tolerances

E_COMPARE_SLACK = 1e-9  # absorbs eigensolver jitter at exactly-filled states


class BranchBudgetError(ValueError):
    """Raised when an exact enumeration would exceed its cost budget."""


@dataclass(frozen=True)
class LossConfig:
    """Sampling configuration for loss Monte Carlo runs."""

    p: float
    n: int
    M: int
    E_threshold: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ValueError(f"transmission probability must be in (0, 1], got {self.p}")
        if self.n < 1 or self.M < 1:
            raise ValueError("need n >= 1 steps and M >= 1 samples")
        if self.E_threshold < 0.0:
            raise ValueError("E threshold must be nonnegative")


@dataclass(frozen=True)
class LossTrajectory:
    """Mask record of one sampled trajectory plus its RNG provenance."""

    masks: tuple[tuple[bool, bool], ...]
    seed: int
    index: int


@dataclass(frozen=True)
class SuccessEstimate:
    q_hat: float
    stderr: float
    config: LossConfig
    successes: int = 0


def q_n_full_swap(p: float, n: int) -> float:
    """Probability that n full-SWAP steps leave a 1-pair buffer filled."""
    return (1.0 - (1.0 - p) ** (2 * n)) * p / (2.0 - p)


def q_n_full_iswap(p: float, n: int) -> float:
    """Filled probability after n full-iSWAP steps, starting depleted.

    Two two-sided successes in a row are needed to refill a maximally mixed
    buffer, which keeps this below the single-shot probability p^2.
    """
    u = (1.0 - p) ** (2 * (n - 1))
    return p * p * (1.0 - u - (n - 1) * p * (2.0 - p) * u) / (2.0 - p) ** 2


def _state_key(mat: np.ndarray) -> bytes:
    # adding 0.0 turns -0.0 into +0.0 so zero signs cannot split states
    rounded = (np.round(mat.real, 12) + 0.0) + 1j * (np.round(mat.imag, 12) + 0.0)
    return hashlib.blake2b(rounded.tobytes(), digest_size=16).digest()


class TrajectoryEngine:
    """Walks buffer states under masked caching steps, memoizing transitions.

    States are interned by a rounded-matrix digest, so revisits (the rule
    rather than the exception for full gates) cost one dictionary lookup.
    Negativities and transitions are kept for every state seen; the matrices
    themselves live in a byte-capped LRU and are rebuilt from their recorded
    (parent, mask) provenance when needed again.
    """

    def __init__(self, sys: BufferSystem, params: SwapParams,
                 tol: Tolerances = DEFAULT_TOL, matrix_bytes: int = 2 ** 28):
        self.sys = sys
        self.params = params
        self.tol = tol
        state_bytes = sys.buffer_dim ** 2 * 16
        self.max_mats = max(8, matrix_bytes // state_bytes)
        self._mats: list[np.ndarray | None] = []
        self._parent: list[tuple[int, tuple[bool, bool]] | None] = []
        self._index: dict[bytes, int] = {}
        self._neg: dict[int, float] = {}
        self._trans: dict[tuple[int, tuple[bool, bool]], int] = {}
        self._lru: OrderedDict[int, None] = OrderedDict()
        self._lock = threading.Lock()

    @property
    def n_states(self) -> int:
        return len(self._mats)

    def intern(self, mat: np.ndarray,
               parent: tuple[int, tuple[bool, bool]] | None = None) -> int:
        key = _state_key(mat)
        idx = self._index.get(key)
        if idx is None:
            idx = len(self._mats)
            self._mats.append(np.asarray(mat, dtype=complex))
            self._parent.append(parent)
            self._index[key] = idx
            self._touch(idx)
        return idx

    def _touch(self, idx: int):
        lru = self._lru
        lru[idx] = None
        lru.move_to_end(idx)
        while len(lru) > self.max_mats:
            old, _ = lru.popitem(last=False)
            if old == 0:  # keep the walk origin pinned
                lru[0] = None
                lru.move_to_end(0, last=False)
                if len(lru) <= self.max_mats:
                    break
                old, _ = lru.popitem(last=False)
            self._mats[old] = None

    def state(self, idx: int) -> np.ndarray:
        mat = self._mats[idx]
        if mat is not None:
            self._touch(idx)
            return mat
        with self._lock:
            return self._materialize(idx)

    def _materialize(self, idx: int) -> np.ndarray:
        chain = []
        j = idx
        mat = self._mats[j]
        while mat is None:
            parent = self._parent[j]
            if parent is None:
                raise RuntimeError("evicted state has no provenance")
            chain.append((j, parent[1]))
            j = parent[0]
            mat = self._mats[j]
        for node, mask_bits in reversed(chain):
            mat = self._apply(mat, LossMask(*mask_bits))
            self._mats[node] = mat
            self._touch(node)
        return mat

    def negativity(self, idx: int) -> float:
        e = self._neg.get(idx)
        if e is None:
            e = self._neg_of(self.state(idx))
            self._neg[idx] = e
        return e

    def _neg_of(self, mat: np.ndarray) -> float:
        dm = DensityMatrix(mat, self.sys.buffer_ordering, self.tol)
        return buffer_negativity(dm, self.sys.k, self.tol)

    def _apply(self, mat: np.ndarray, mask: LossMask) -> np.ndarray:
        return apply_channel_mat(mat, self.sys, self.params, mask)

    def step(self, idx: int, mask: LossMask) -> int:
        """Advance one caching step, learning the transition if new."""
        if not mask.arrived_a and not mask.arrived_b:
            return idx
        tkey = (idx, mask.as_tuple())
        nxt = self._trans.get(tkey)
        if nxt is None:
            out = self._apply(self.state(idx), mask)
            nxt = self.intern(out, parent=tkey)
            self._trans[tkey] = nxt
        return nxt

    def walk(self, idx: int, masks) -> int:
        for m in masks:
            idx = self.step(idx, m)
        return idx


def draw_masks(cfg: LossConfig, index: int) -> LossTrajectory:
    """Per-trajectory mask sequence from a seed-and-index derived stream."""
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, index)))
    u = rng.random((cfg.n, 2))
    masks = tuple((bool(u[i, 0] < cfg.p), bool(u[i, 1] < cfg.p))
                  for i in range(cfg.n))
    return LossTrajectory(masks, cfg.seed, index)


def sample_trajectory(sys: BufferSystem, params: SwapParams, cfg: LossConfig,
                      index: int = 0, init: DensityMatrix | None = None,
                      engine: TrajectoryEngine | None = None,
                      tol: Tolerances = DEFAULT_TOL):
    """One sampled loss trajectory: final state, its negativity, mask record."""
    if engine is None:
        engine = TrajectoryEngine(sys, params, tol)
    rho0 = init if init is not None else all_zero_buffer(sys)
    traj = draw_masks(cfg, index)
    idx = engine.walk(engine.intern(rho0.mat),
                      (LossMask(*m) for m in traj.masks))
    final = DensityMatrix(engine.state(idx), sys.buffer_ordering, tol)
    return final, engine.negativity(idx), traj


def estimate_q(sys: BufferSystem, params: SwapParams, cfg: LossConfig,
               init: DensityMatrix | None = None, workers: int = 1,
               engine: TrajectoryEngine | None = None,
               tol: Tolerances = DEFAULT_TOL) -> SuccessEstimate:
    """Relative frequency of trajectories ending with E >= threshold.

    Trajectory i uses the RNG stream derived from (seed, i), so the estimate
    is identical for any worker count or execution order.
    """
    if engine is None:
        engine = TrajectoryEngine(sys, params, tol)
    rho0 = init if init is not None else all_zero_buffer(sys)
    start = engine.intern(rho0.mat)
    thresh = cfg.E_threshold - E_COMPARE_SLACK

    def run_one(i: int) -> bool:
        masks = draw_masks(cfg, i).masks
        idx = engine.walk(start, (LossMask(*m) for m in masks))
        return engine.negativity(idx) >= thresh

    if workers <= 1:
        flags = [run_one(i) for i in range(cfg.M)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            flags = list(pool.map(run_one, range(cfg.M)))
    successes = int(np.sum(flags))
    q = successes / cfg.M
    stderr = float(np.sqrt(q * (1.0 - q) / cfg.M))
    return SuccessEstimate(q, stderr, cfg, successes)


def estimate_q_vs_n(sys: BufferSystem, params: SwapParams, cfg: LossConfig,
                    step_counts, init: DensityMatrix | None = None,
                    tol: Tolerances = DEFAULT_TOL) -> list[SuccessEstimate]:
    """Success estimates at several step counts from shared trajectories.

    Every prefix of an n-step trajectory is itself a valid shorter
    trajectory, so one sample set serves all requested step counts.
    """
    steps = sorted(set(int(s) for s in step_counts))
    if steps[0] < 1 or steps[-1] > cfg.n:
        raise ValueError("step counts must lie in 1..cfg.n")
    engine = TrajectoryEngine(sys, params, tol)
    rho0 = init if init is not None else all_zero_buffer(sys)
    start = engine.intern(rho0.mat)
    thresh = cfg.E_threshold - E_COMPARE_SLACK
    wanted = set(steps)
    hits = {s: 0 for s in steps}
    for i in range(cfg.M):
        masks = draw_masks(cfg, i).masks
        idx = start
        for t, m in enumerate(masks, start=1):
            idx = engine.step(idx, LossMask(*m))
            if t in wanted and engine.negativity(idx) >= thresh:
                hits[t] += 1
    out = []
    for s in steps:
        sub = LossConfig(cfg.p, s, cfg.M, cfg.E_threshold, cfg.seed)
        q = hits[s] / cfg.M
        out.append(SuccessEstimate(q, float(np.sqrt(q * (1 - q) / cfg.M)),
                                   sub, hits[s]))
    return out


@dataclass(frozen=True)
class ExactDistribution:
    q: float
    total_weight: float
    final_branches: int
    n: int


def exact_branch_distribution(sys: BufferSystem, params: SwapParams, p: float,
                              n: int, E_threshold: float,
                              init: DensityMatrix | None = None,
                              tol: Tolerances = DEFAULT_TOL) -> ExactDistribution:
    """Exact q_n by enumerating all 4^n mask sequences with state merging.

    Branches whose intermediate states agree to 12 decimals are merged level
    by level, which collapses the enumeration whenever the channel has few
    reachable states. Budget: n <= 8 for k <= 2 and n <= 6 for k <= 4.
    """
    limit = 8 if sys.k <= 2 else 6
    if n > limit:
        raise BranchBudgetError(
            f"exact enumeration limited to n <= {limit} for k = {sys.k}"
        )
    if not (0.0 < p <= 1.0):
        raise ValueError("p must be in (0, 1]")
    rho0 = init if init is not None else all_zero_buffer(sys)
    mask_weight = [
        (m, (p if m.arrived_a else 1 - p) * (p if m.arrived_b else 1 - p))
        for m in ALL_MASKS
    ]
    level: dict[bytes, list] = {_state_key(rho0.mat): [1.0, rho0.mat]}
    for _ in range(n):
        nxt: dict[bytes, list] = {}
        for weight, mat in level.values():
            for mask, w in mask_weight:
                if w == 0.0:
                    continue
                out = mat if mask == LossMask.NONE else apply_channel_mat(
                    mat, sys, params, mask)
                key = _state_key(out)
                entry = nxt.get(key)
                if entry is None:
                    nxt[key] = [weight * w, out]
                else:
                    entry[0] += weight * w
        level = nxt
    total = 0.0
    q = 0.0
    thresh = E_threshold - E_COMPARE_SLACK
    for weight, mat in level.values():
        total += weight
        dm = DensityMatrix(mat, sys.buffer_ordering, tol)
        if buffer_negativity(dm, sys.k, tol) >= thresh:
            q += weight
    return ExactDistribution(q, total, len(level), n)


@dataclass(frozen=True)
class LossSweepRow:
    k: int
    alpha_over_pi: float
    family: str
    E_threshold: float
    q_hat: float
    stderr: float
    n: int
    M: int
    p: float
    seed: int


def loss_sweep(sys: BufferSystem, cfg_base: LossConfig, alpha_grid,
               families=("swap", "iswap"), thresholds=(1.0,),
               reference_rows: bool = True,
               tol: Tolerances = DEFAULT_TOL) -> list[LossSweepRow]:
    """Monte Carlo success rates over swap angles for both gate families.

    Emits one row per (alpha, family, threshold) plus reference rows: the
    single-shot probability p^2 and the full-gate asymptote per family
    (closed forms for a 1-pair buffer, a long high-sample run otherwise).
    """
    rows = []
    for family in families:
        for al in alpha_grid:
            params = (SwapParams.swap(float(al)) if family == "swap"
                      else SwapParams.iswap(float(al)))
            engine = TrajectoryEngine(sys, params, tol)
            for thr in thresholds:
                cfg = LossConfig(cfg_base.p, cfg_base.n, cfg_base.M, float(thr),
                                 cfg_base.seed)
                est = estimate_q(sys, params, cfg, engine=engine, tol=tol)
                rows.append(LossSweepRow(sys.k, float(al) / np.pi, family,
                                         float(thr), est.q_hat, est.stderr,
                                         cfg.n, cfg.M, cfg.p, cfg.seed))
    if reference_rows:
        p = cfg_base.p
        for thr in thresholds:
            rows.append(LossSweepRow(sys.k, 1.0, "ref_p2", float(thr),
                                     p * p, 0.0, cfg_base.n, 0, p, cfg_base.seed))
        for family in families:
            for thr in thresholds:
                rows.append(_asymptote_row(sys, cfg_base, family, float(thr), tol))
    return rows


def _asymptote_row(sys: BufferSystem, cfg: LossConfig, family: str,
                   threshold: float, tol: Tolerances) -> LossSweepRow:
    p = cfg.p
    if sys.k == 1 and threshold <= 1.0 + E_COMPARE_SLACK:
        q = p / (2 - p) if family == "swap" else (p / (2 - p)) ** 2
        return LossSweepRow(sys.k, 1.0, f"ref_asymptote_{family}", threshold,
                            q, 0.0, cfg.n, 0, p, cfg.seed)
    params = SwapParams.swap(np.pi) if family == "swap" else SwapParams.iswap(np.pi)
    n_long = max(cfg.n, int(np.ceil(3 / max(p, 1e-6))))
    big = LossConfig(p, n_long, 4 * cfg.M, threshold, cfg.seed + 1)
    est = estimate_q(sys, params, big, tol=tol)
    return LossSweepRow(sys.k, 1.0, f"ref_asymptote_{family}", threshold,
                        est.q_hat, est.stderr, big.n, big.M, p, cfg.seed + 1)
