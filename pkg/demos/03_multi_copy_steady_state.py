"""Filling the buffer from a stream of Bell pairs: steady states.

Iterates the caching channel, solves for its fixed point by power iteration
and by a null-space solve, compares to the 1-pair closed form, and verifies
that the iSWAP family always fills a k-pair buffer to its maximum.
"""
import numpy as np

from entbuffer import (BufferSystem, SwapParams, all_zero_buffer, iterate,
                       steady_state, steady_state_closed_form_k1,
                       steady_state_negativity_k1, steady_state_nullspace,
                       verify_iswap_fixed_point)

sys1 = BufferSystem(1)

print("=== buffer filling under partial iSWAP steps (from |00>) ===")
for al_pi in (0.2, 0.4, 1.0):
    trace = iterate(all_zero_buffer(sys1), sys1, SwapParams.iswap(al_pi * np.pi), 12)
    line = " ".join(f"{e:.3f}" for e in trace.negativities)
    print(f"alpha = {al_pi} pi: E(n) = {line}")

print()
print("=== 1-pair steady state: solver vs closed form ===")
print("alpha/pi  beta/pi   E_inf(solver)   E_inf(closed)   state diff")
for al_pi, frac in ((0.7, 0.0), (0.7, 0.5), (0.7, 1.0), (0.62, 0.0), (1.0, 0.0)):
    params = SwapParams(al_pi * np.pi, frac * al_pi * np.pi)
    res = steady_state(sys1, params, all_zero_buffer(sys1))
    cf = steady_state_closed_form_k1(params)
    diff = np.abs(res.rho.mat - cf.mat).max()
    print(f"{al_pi:8.2f}  {frac * al_pi:7.2f}   {res.negativity:13.6f}   "
          f"{steady_state_negativity_k1(params):13.6f}   {diff:.1e}")
print("the SWAP family only caches in steady state above alpha ~ 0.61 pi;")
print("the iSWAP family reaches one ebit at every angle.")

print()
print("=== null-space solve agrees and reports the kernel dimension ===")
params = SwapParams(0.55 * np.pi, 0.25 * np.pi)
ns = steady_state_nullspace(sys1, params)
pw = steady_state(sys1, params, all_zero_buffer(sys1))
print(f"kernel dimension {ns.kernel_dimension}, "
      f"solver agreement {np.abs(ns.rho.mat - pw.rho.mat).max():.1e}")

print()
print("=== larger buffers: the iSWAP column fills to E = k ===")
for k in (2, 3):
    sysk = BufferSystem(k)
    res = steady_state(sysk, SwapParams.iswap(0.35 * np.pi), all_zero_buffer(sysk))
    print(f"k = {k}: E_inf = {res.negativity:.8f} (residual {res.residual:.1e})")

print()
print("=== Bell-pair product is an exact iSWAP fixed point for every angle ===")
for k in (1, 2, 3, 4):
    worst = max(verify_iswap_fixed_point(k, al)
                for al in np.linspace(0.05, 1.0, 8) * np.pi)
    print(f"k = {k}: worst phase-aligned residual {worst:.1e}")
