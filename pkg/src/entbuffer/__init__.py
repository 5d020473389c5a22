"""entbuffer: simulation toolkit for entanglement buffers.

Local multi-qubit stores shared by two parties are filled ("cached") with
Bell-pair entanglement through partial swap operations. The package covers
the dense linear algebra, the partial-swap gate family, the buffer update
channel and its Kraus form, steady states of the repeated protocol, and the
robustness of caching against transmission loss.
"""

__version__ = "0.1.0"

from .tolerances import DEFAULT_TOL, Tolerances
from .linalg import (BipartiteCut, ComplexMatrix, DensityMatrix, QubitOrdering,
                     basis_state, bell_state, buffer_negativity, embed_two_qubit,
                     apply_two_qubit, log_negativity, pair_product_state,
                     partial_trace, partial_transpose, projector, tensor,
                     tensor_all, trace_norm)
from .gates import (BufferSystem, SwapParams, caching_unitary, compose,
                    composed_params, partial_swap, phase_aligned_distance,
                    side_unitary, unitarity_defect)
from .channel import (ALL_MASKS, ChannelTrace, KrausSet, LossMask,
                      all_zero_buffer, apply_channel, apply_channel_mat,
                      channel_kraus, fresh_source_state, generator_apply,
                      iterate, kraus_k1, kraus_k1_coefficients,
                      maximally_mixed_buffer)
from .steady import (ConvergenceError, DegenerateChannelError, SolveMethod,
                     SteadyStateResult, one_ebit_contour, steady_state,
                     steady_state_closed_form_k1, steady_state_grid,
                     steady_state_negativity_k1, steady_state_nullspace,
                     verify_iswap_fixed_point)
from .single_copy import (MultiPassResult, PureInit, dicke_weak_E,
                          dicke_weak_state, dicke_pass_count_for_one_ebit,
                          full_iswap_pure_E_closed_form, mixed_init_E_closed_form,
                          multi_pass_single_pair, pure_buffer_state, pure_sweep,
                          single_copy_E, zero_init_E_closed_form)
from .loss import (BranchBudgetError, ExactDistribution, LossConfig,
                   LossTrajectory, SuccessEstimate, TrajectoryEngine,
                   draw_masks, estimate_q, estimate_q_vs_n,
                   exact_branch_distribution, loss_sweep, q_n_full_iswap,
                   q_n_full_swap, sample_trajectory)
