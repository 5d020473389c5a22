"""Partial swap gates and the buffer caching unitary.

Walks through the two-parameter gate family S(alpha, beta): the full SWAP
and iSWAP limits, the composition rule, and how per-pair gates assemble into
the caching unitary that couples a source Bell pair to a k-pair buffer.
"""
import numpy as np

from entbuffer import (BufferSystem, SwapParams, bell_state, caching_unitary,
                       compose, composed_params, partial_swap,
                       phase_aligned_distance, tensor, basis_state,
                       unitarity_defect)

print("=== the partial swap family ===")
for name, params in [("identity         S(0, 0)   ", SwapParams(0.0, 0.0)),
                     ("half swap        S(pi/2, 0)", SwapParams(np.pi / 2, 0.0)),
                     ("full SWAP        S(pi, 0)  ", SwapParams(np.pi, 0.0)),
                     ("full iSWAP       S(pi, pi) ", SwapParams(np.pi, np.pi))]:
    m = partial_swap(params)
    print(f"{name}  unitarity defect {unitarity_defect(m):.1e}")
print()
print("full SWAP matrix:")
print(np.real_if_close(partial_swap(SwapParams(np.pi, 0.0))).astype(float))
print("full iSWAP matrix (note the -i convention):")
print(partial_swap(SwapParams(np.pi, np.pi)))

print()
print("=== composition rule ===")
p1 = SwapParams(0.30 * np.pi, 0.10 * np.pi)
p2 = SwapParams(0.45 * np.pi, 0.20 * np.pi)
lhs = compose(p1, p2)
rhs = partial_swap(composed_params(p1, p2))
print(f"S(a1,b1) S(a2,b2) vs S(a1+a2, b1+b2): max deviation "
      f"{np.abs(lhs - rhs).max():.2e}")
print("so n weak passes at angle alpha/n equal one pass at alpha (k = 1).")

print()
print("=== caching unitary on a 2-pair buffer ===")
sys2 = BufferSystem(2)
u = caching_unitary(sys2, SwapParams(0.7 * np.pi, 0.3 * np.pi))
print(f"dimension {u.shape[0]} (qubits: {sys2.total_qubits}), "
      f"unitarity defect {unitarity_defect(u):.1e}")

print()
print("=== a full SWAP moves the source pair into a 1-pair buffer ===")
sys1 = BufferSystem(1)
u1 = caching_unitary(sys1, SwapParams(np.pi, 0.0))
before = tensor(basis_state([0, 0]), bell_state(1))
after_want = tensor(bell_state(1), basis_state([0, 0]))
dist = phase_aligned_distance((u1 @ before)[:, None], after_want[:, None])
print(f"|00>_buffer x bell_source -> bell_buffer x |00>_source, "
      f"phase-aligned distance {dist:.2e}")
