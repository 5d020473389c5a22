import numpy as np
import pytest

from entbuffer.channel import maximally_mixed_buffer
from entbuffer.gates import BufferSystem, SwapParams
from entbuffer.loss import (BranchBudgetError, LossConfig, TrajectoryEngine,
                            draw_masks, estimate_q, estimate_q_vs_n,
                            exact_branch_distribution, loss_sweep,
                            q_n_full_iswap, q_n_full_swap, sample_trajectory)

SYS1 = BufferSystem(1)
FULL_SWAP = SwapParams(np.pi, 0.0)
FULL_ISWAP = SwapParams(np.pi, np.pi)


class TestClosedForms:
    def test_swap_single_shot(self):
        for p in (0.1, 0.5, 0.9):
            assert abs(q_n_full_swap(p, 1) - p * p) < 1e-15

    def test_swap_limit(self):
        assert abs(q_n_full_swap(0.5, 10 ** 6) - 0.5 / 1.5) < 1e-12

    def test_swap_beats_single_shot_from_two_steps(self):
        p = 0.5
        for n in range(2, 12):
            assert q_n_full_swap(p, n) > p * p

    def test_iswap_two_steps_needs_two_successes(self):
        for p in (0.2, 0.5, 0.8):
            assert abs(q_n_full_iswap(p, 2) - p ** 4) < 1e-14

    def test_iswap_always_below_single_shot(self):
        p = 0.5
        for n in range(1, 40):
            assert q_n_full_iswap(p, n) < p * p

    def test_iswap_limit(self):
        assert abs(q_n_full_iswap(0.5, 10 ** 4) - 1.0 / 9.0) < 1e-12


class TestLossConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            LossConfig(0.0, 10, 100, 1.0, 1)
        with pytest.raises(ValueError):
            LossConfig(0.5, 0, 100, 1.0, 1)
        with pytest.raises(ValueError):
            LossConfig(0.5, 10, 100, -1.0, 1)

    def test_mask_stream_reproducible(self):
        cfg = LossConfig(0.5, 10, 100, 1.0, 77)
        a = draw_masks(cfg, 3)
        b = draw_masks(cfg, 3)
        assert a.masks == b.masks
        assert a.seed == 77 and a.index == 3
        c = draw_masks(cfg, 4)
        assert c.masks != a.masks


class TestSampleTrajectory:
    def test_p_one_is_deterministic_iterate(self):
        cfg = LossConfig(1.0, 5, 1, 1.0, 9)
        final, e, traj = sample_trajectory(SYS1, FULL_SWAP, cfg)
        assert all(m == (True, True) for m in traj.masks)
        assert abs(e - 1.0) < 1e-10

    def test_small_p_keeps_buffer_empty(self):
        cfg = LossConfig(1e-9, 8, 1, 1.0, 3)
        final, e, traj = sample_trajectory(SYS1, FULL_SWAP, cfg)
        assert e < 1e-10

    def test_full_swap_E_is_binary(self):
        cfg = LossConfig(0.5, 10, 1, 1.0, 5)
        engine = TrajectoryEngine(SYS1, FULL_SWAP)
        for i in range(50):
            _, e, _ = sample_trajectory(SYS1, FULL_SWAP, cfg, index=i,
                                        engine=engine)
            assert min(abs(e), abs(e - 1.0)) < 1e-9


class TestStateMachines:
    def test_full_swap_two_recurrent_states(self):
        engine = TrajectoryEngine(SYS1, FULL_SWAP)
        cfg = LossConfig(0.5, 12, 1, 1.0, 11)
        for i in range(200):
            sample_trajectory(SYS1, FULL_SWAP, cfg, index=i, engine=engine)
        # |00> start plus one-sided variants are transient; the recurrent
        # machine is {filled, depleted}
        assert engine.n_states <= 5
        es = sorted(round(engine.negativity(i), 6) for i in range(engine.n_states))
        assert set(es) <= {0.0, 1.0}

    def test_full_iswap_three_recurrent_states(self):
        engine = TrajectoryEngine(SYS1, FULL_ISWAP)
        cfg = LossConfig(0.5, 12, 1, 1.0, 11)
        for i in range(200):
            sample_trajectory(SYS1, FULL_ISWAP, cfg, index=i, engine=engine)
        assert engine.n_states <= 6
        for i in range(engine.n_states):
            e = engine.negativity(i)
            assert min(abs(e), abs(e - 1.0)) < 1e-9

    def test_engine_rematerializes_evicted_states(self):
        engine = TrajectoryEngine(SYS1, FULL_ISWAP, matrix_bytes=4 * 256)
        assert engine.max_mats == 8
        cfg = LossConfig(0.5, 12, 1, 1.0, 23)
        es = []
        for i in range(100):
            _, e, _ = sample_trajectory(SYS1, FULL_ISWAP, cfg, index=i,
                                        engine=engine)
            es.append(e)
        fresh = TrajectoryEngine(SYS1, FULL_ISWAP)
        for i in range(100):
            _, e, _ = sample_trajectory(SYS1, FULL_ISWAP, cfg, index=i,
                                        engine=fresh)
            assert abs(e - es[i]) < 1e-12


class TestEstimator:
    def test_matches_swap_closed_form(self):
        cfg = LossConfig(0.5, 10, 4000, 1.0, 101)
        est = estimate_q(SYS1, FULL_SWAP, cfg)
        assert abs(est.q_hat - q_n_full_swap(0.5, 10)) < 3 * est.stderr

    def test_matches_iswap_closed_form(self):
        cfg = LossConfig(0.5, 10, 4000, 1.0, 101)
        est = estimate_q(SYS1, FULL_ISWAP, cfg)
        assert abs(est.q_hat - q_n_full_iswap(0.5, 10)) < 3 * est.stderr

    def test_deterministic_repeat(self):
        cfg = LossConfig(0.5, 8, 500, 0.9, 4242)
        params = SwapParams(0.8 * np.pi, 0.2 * np.pi)
        a = estimate_q(SYS1, params, cfg)
        b = estimate_q(SYS1, params, cfg)
        assert a.q_hat == b.q_hat and a.successes == b.successes

    def test_worker_count_does_not_change_result(self):
        cfg = LossConfig(0.5, 8, 400, 1.0, 512)
        a = estimate_q(SYS1, FULL_SWAP, cfg, workers=1)
        b = estimate_q(SYS1, FULL_SWAP, cfg, workers=4)
        assert a.q_hat == b.q_hat

    def test_threshold_monotonicity_same_samples(self):
        params = SwapParams(0.7 * np.pi, 0.0)
        prev = 1.1
        for thr in (0.2, 0.5, 0.8, 0.95):
            cfg = LossConfig(0.5, 10, 800, thr, 99)
            q = estimate_q(SYS1, params, cfg).q_hat
            assert q <= prev + 1e-12
            prev = q

    def test_estimate_vs_n_prefix_consistency(self):
        cfg = LossConfig(0.5, 10, 600, 1.0, 7)
        series = estimate_q_vs_n(SYS1, FULL_SWAP, cfg, [1, 5, 10])
        assert [e.config.n for e in series] == [1, 5, 10]
        solo = estimate_q(SYS1, FULL_SWAP,
                          LossConfig(0.5, 10, 600, 1.0, 7))
        assert series[-1].q_hat == solo.q_hat

    def test_step_counts_validated(self):
        cfg = LossConfig(0.5, 10, 10, 1.0, 7)
        with pytest.raises(ValueError):
            estimate_q_vs_n(SYS1, FULL_SWAP, cfg, [0, 3])
        with pytest.raises(ValueError):
            estimate_q_vs_n(SYS1, FULL_SWAP, cfg, [11])


class TestExactBranches:
    def test_equals_swap_closed_form(self):
        for n in (1, 3, 6, 8):
            ex = exact_branch_distribution(SYS1, FULL_SWAP, 0.5, n, 1.0)
            assert abs(ex.q - q_n_full_swap(0.5, n)) < 1e-12
            assert abs(ex.total_weight - 1.0) < 1e-12

    def test_equals_iswap_closed_form_from_depleted(self):
        # the two-successes-in-a-row recursion starts from a depleted buffer
        for n in (2, 5, 8):
            ex = exact_branch_distribution(
                SYS1, FULL_ISWAP, 0.5, n, 1.0,
                init=maximally_mixed_buffer(SYS1))
            assert abs(ex.q - q_n_full_iswap(0.5, n)) < 1e-12

    def test_asymmetric_p(self):
        for p in (0.25, 0.8):
            ex = exact_branch_distribution(SYS1, FULL_SWAP, p, 6, 1.0)
            assert abs(ex.q - q_n_full_swap(p, 6)) < 1e-12

    def test_monte_carlo_within_four_sigma(self):
        params = SwapParams(0.85 * np.pi, 0.35 * np.pi)
        ex = exact_branch_distribution(SYS1, params, 0.5, 8, 0.9)
        cfg = LossConfig(0.5, 8, 4000, 0.9, 31)
        est = estimate_q(SYS1, params, cfg)
        assert abs(est.q_hat - ex.q) < 4 * max(est.stderr, 1e-4)

    def test_budget_enforced(self):
        with pytest.raises(BranchBudgetError):
            exact_branch_distribution(SYS1, FULL_SWAP, 0.5, 9, 1.0)
        with pytest.raises(BranchBudgetError):
            exact_branch_distribution(BufferSystem(3), FULL_SWAP, 0.5, 7, 1.0)

    def test_p_one_single_branch(self):
        ex = exact_branch_distribution(SYS1, FULL_SWAP, 1.0, 4, 1.0)
        assert ex.final_branches == 1
        assert abs(ex.q - 1.0) < 1e-12


class TestLossSweep:
    def test_rows_and_reference_lines(self):
        cfg = LossConfig(0.5, 6, 300, 1.0, 5)
        rows = loss_sweep(SYS1, cfg, [0.5 * np.pi, np.pi],
                          families=("swap", "iswap"), thresholds=(0.9,))
        families = {r.family for r in rows}
        assert {"swap", "iswap", "ref_p2", "ref_asymptote_swap",
                "ref_asymptote_iswap"} <= families
        ref_p2 = [r for r in rows if r.family == "ref_p2"][0]
        assert ref_p2.q_hat == 0.25
        ref_swap = [r for r in rows if r.family == "ref_asymptote_swap"][0]
        assert abs(ref_swap.q_hat - 0.5 / 1.5) < 1e-12
        ref_iswap = [r for r in rows if r.family == "ref_asymptote_iswap"][0]
        assert abs(ref_iswap.q_hat - 1.0 / 9.0) < 1e-12

    def test_k2_reference_is_sampled(self):
        sys2 = BufferSystem(2)
        cfg = LossConfig(0.5, 6, 200, 1.0, 5)
        rows = loss_sweep(sys2, cfg, [np.pi], families=("swap",),
                          thresholds=(1.0,))
        ref = [r for r in rows if r.family == "ref_asymptote_swap"][0]
        assert ref.M == 800
        assert 0.5 < ref.q_hat < 0.75
