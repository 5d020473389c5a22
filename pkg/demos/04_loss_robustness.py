"""Caching under transmission loss: closed forms, exact branches, Monte Carlo.

Per step, each side of the source pair arrives independently with probability
p; a lost qubit never interacts. The demo compares the 1-pair closed forms
against the exact branch enumeration and seeded Monte Carlo estimates, then
shows the buffer-size advantage at p = 0.5.
"""
import numpy as np

from entbuffer import (BufferSystem, LossConfig, SwapParams, TrajectoryEngine,
                       estimate_q, exact_branch_distribution,
                       maximally_mixed_buffer, q_n_full_iswap, q_n_full_swap,
                       sample_trajectory)

sys1 = BufferSystem(1)
p = 0.5

print("=== closed forms for full gates on a 1-pair buffer ===")
print(" n   q_n(SWAP)   q'_n(iSWAP)")
for n in (1, 2, 3, 5, 10, 1000):
    print(f"{n:4d}  {q_n_full_swap(p, n):9.5f}   {q_n_full_iswap(p, n):10.5f}")
print(f"asymptotes: p/(2-p) = {p/(2-p):.5f} beats the single-shot p^2 = "
      f"{p*p:.5f}; the iSWAP refill needs two wins in a row and saturates at "
      f"p^2/(2-p)^2 = {(p/(2-p))**2:.5f}.")

print()
print("=== exact branch enumeration reproduces both closed forms ===")
for n in (4, 8):
    ex = exact_branch_distribution(sys1, SwapParams(np.pi, 0.0), p, n, 1.0)
    exi = exact_branch_distribution(sys1, SwapParams(np.pi, np.pi), p, n, 1.0,
                                    init=maximally_mixed_buffer(sys1))
    print(f"n = {n}: |exact - closed| swap {abs(ex.q - q_n_full_swap(p, n)):.1e}, "
          f"iswap {abs(exi.q - q_n_full_iswap(p, n)):.1e} "
          f"({ex.final_branches} merged branches)")

print()
print("=== one sampled trajectory with its mask record ===")
cfg1 = LossConfig(p=p, n=10, M=1, E_threshold=1.0, seed=11)
final, e, traj = sample_trajectory(sys1, SwapParams(np.pi, 0.0), cfg1, index=4)
marks = ["AB" if a and b else ("A-" if a else ("-B" if b else "--"))
         for a, b in traj.masks]
print(f"arrivals per step: {' '.join(marks)}")
print(f"final buffer negativity: {e:.3f}")

print()
print("=== Monte Carlo at n = 10, M = 5000: buffer size pays off ===")
cfg = LossConfig(p=p, n=10, M=5000, E_threshold=1.0, seed=2024)
print(" k   family   q_hat    (stderr)")
for k in (1, 2, 4):
    sysk = BufferSystem(k)
    for family, params in (("swap", SwapParams(np.pi, 0.0)),
                           ("iswap", SwapParams(np.pi, np.pi))):
        engine = TrajectoryEngine(sysk, params)
        est = estimate_q(sysk, params, cfg, engine=engine)
        print(f"{k:2d}   {family:5s}   {est.q_hat:.4f}  ({est.stderr:.4f})  "
              f"[{engine.n_states} distinct states visited]")
print("at even k the two full-gate protocols reach the same success rate.")
