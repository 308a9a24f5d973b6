import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shufflebandit.bandit import (ArmState, BatchSchedule, EngineConfig,
                                  confidence_radius, eliminate, run_episode,
                                  run_phase, update_confidence)
from shufflebandit.env import SeedSpec, make_instance, make_tapes
from shufflebandit.mechanism import derive_params

I_4_30_12_1E5 = 8.553728421127085  # (2*2*12/30 + 1/sqrt(30)) * sqrt(2 ln 1e5)


class TestConfidenceRadius:
    def test_sigma_zero_ln_t_one(self):
        assert confidence_radius(1, 100, math.e, 0.0) == \
            pytest.approx(math.sqrt(2) / 10)

    def test_single_phase_symbolic(self):
        sigma, m, horizon = 7.0, 25, 10**4
        expected = (2 * sigma / m + 1 / math.sqrt(m)) * \
            math.sqrt(2 * math.log(horizon))
        assert confidence_radius(1, m, horizon, sigma) == pytest.approx(expected)

    def test_high_precision_oracle(self):
        assert confidence_radius(4, 30, 10**5, 12.0) == \
            pytest.approx(I_4_30_12_1E5, rel=1e-12)

    def test_update_requires_pulls(self):
        with pytest.raises(ValueError):
            update_confidence(ArmState(), 1, 100, 1.0)


class TestEliminate:
    def _state(self, mean, radius):
        st = ArmState()
        st.mean_estimate = mean
        st.radius = radius
        return st

    def test_direct_rule(self):
        states = [self._state(0.7, 0.2), self._state(0.2, 0.1)]
        # UCBs [0.9, 0.3], LCBs [0.5, 0.1]: arm 1 is strictly below
        assert eliminate(states) == [1]
        assert states[0].active and not states[1].active

    def test_tie_no_elimination(self):
        states = [self._state(0.5, 0.0), self._state(0.5, 0.0)]
        assert eliminate(states) == []

    def test_best_lcb_arm_never_eliminated(self):
        states = [self._state(0.9, 0.05), self._state(0.4, 0.05),
                  self._state(0.3, 0.05)]
        eliminated = eliminate(states)
        assert 0 not in eliminated
        assert eliminated == [1, 2]


class TestRunPhase:
    def test_bookkeeping_constant(self):
        inst = make_instance(2, [1.0, 0.0], 1000)
        config = EngineConfig(schedule=BatchSchedule.constant(10), horizon=1000)
        states = [ArmState(), ArmState()]
        tapes = make_tapes(inst, SeedSpec(0))
        cum = np.empty(1000)
        consumed = run_phase(states, tapes, 1, config, inst, SeedSpec(0),
                             cum, 0)
        assert consumed == 20
        assert [st.pulls for st in states] == [10, 10]

    def test_noiseless_exact_sum(self):
        inst = make_instance(1, [1.0], 100)
        config = EngineConfig(schedule=BatchSchedule.constant(5), horizon=100)
        states = [ArmState()]
        tapes = make_tapes(inst, SeedSpec(0))
        cum = np.empty(100)
        run_phase(states, tapes, 1, config, inst, SeedSpec(0), cum, 0)
        assert states[0].noisy_sum == 5.0
        assert states[0].mean_estimate == 1.0

    def test_doubling_pull_counts(self):
        inst = make_instance(2, [0.5, 0.5], 10**4)
        config = EngineConfig(schedule=BatchSchedule.doubling(), horizon=10**4)
        states = [ArmState(), ArmState()]
        tapes = make_tapes(inst, SeedSpec(0))
        cum = np.empty(10**4)
        consumed = 0
        for t in (1, 2, 3):
            consumed = run_phase(states, tapes, t, config, inst, SeedSpec(0),
                                 cum, consumed)
        assert all(st.pulls == 2**4 - 2 for st in states)

    def test_horizon_exit_skips_mechanism(self):
        # the batch reaching the T-th pull is charged but never aggregated
        inst = make_instance(2, [1.0, 1.0], 15)
        config = EngineConfig(schedule=BatchSchedule.constant(10), horizon=15)
        states = [ArmState(), ArmState()]
        tapes = make_tapes(inst, SeedSpec(0))
        cum = np.empty(15)
        consumed = run_phase(states, tapes, 1, config, inst, SeedSpec(0),
                             cum, 0)
        assert consumed == 15
        assert states[0].pulls == 10
        assert states[1].pulls == 0  # interrupted batch, no state update
        assert tapes[1].cursor == 5


class TestRunEpisode:
    def test_single_arm_zero_regret(self):
        inst = make_instance(1, [0.5], 500)
        params = derive_params(0.9, 1e-3)
        config = EngineConfig(schedule=BatchSchedule.doubling(), horizon=500,
                              privacy=params)
        trace = run_episode(inst, config, SeedSpec(3))
        assert np.all(trace.cumulative_regret == 0.0)

    def test_baseline_closed_form_elimination(self):
        # noiseless baseline, means [1, 0], m=10, T=1000: with exact mean
        # estimates arm 2 goes at the first phase where UCB_2 < LCB_1,
        # i.e. 2 * I < 1; solve the inequality independently
        horizon, m = 1000, 10
        t_star = next(t for t in range(1, 200)
                      if 2 * confidence_radius(t, m * t, horizon, 0.0) < 1)
        inst = make_instance(2, [1.0, 0.0], horizon)
        config = EngineConfig(schedule=BatchSchedule.constant(m),
                              horizon=horizon)
        trace = run_episode(inst, config, SeedSpec(11))
        assert trace.eliminations == [(1, t_star)]
        assert trace.arm_pulls_total[1] == m * t_star
        assert trace.final_regret == m * t_star

    def test_pull_accounting(self):
        inst = make_instance(3, [0.9, 0.5, 0.1], 777)
        params = derive_params(0.8, 1e-3)
        config = EngineConfig(schedule=BatchSchedule.doubling(), horizon=777,
                              privacy=params)
        trace = run_episode(inst, config, SeedSpec(5))
        assert sum(trace.arm_pulls_total) == 777

    def test_regret_nondecreasing(self):
        inst = make_instance(3, [0.9, 0.5, 0.1], 2000)
        params = derive_params(0.8, 1e-3)
        config = EngineConfig(schedule=BatchSchedule.constant(30),
                              horizon=2000, privacy=params)
        trace = run_episode(inst, config, SeedSpec(5))
        assert np.all(np.diff(trace.cumulative_regret) >= 0)
        # final value equals the gap-weighted pull counts
        gaps = inst.gaps
        expected = sum(n * g for n, g in zip(trace.arm_pulls_total, gaps))
        assert trace.final_regret == pytest.approx(expected)

    def test_equal_footing_constant_schedule(self):
        # all active arms share N (hence I) after every full phase
        inst = make_instance(4, [0.8, 0.6, 0.4, 0.2], 5000)
        params = derive_params(0.9, 1e-3)
        config = EngineConfig(schedule=BatchSchedule.constant(25),
                              horizon=5000, privacy=params)
        states = [ArmState() for _ in range(4)]
        tapes = make_tapes(inst, SeedSpec(21))
        cum = np.empty(5000)
        consumed = 0
        for t in range(1, 5):
            consumed = run_phase(states, tapes, t, config, inst, SeedSpec(21),
                                 cum, consumed)
            active_pulls = {st.pulls for st in states if st.active}
            assert len(active_pulls) == 1
            for st in states:
                if st.active:
                    update_confidence(st, t, 5000, params.sigma)
            radii = {st.radius for st in states if st.active}
            assert len(radii) == 1
            eliminate(states)

    def test_determinism(self):
        inst = make_instance(3, [0.7, 0.5, 0.3], 3000)
        params = derive_params(0.6, 1e-4)
        config = EngineConfig(schedule=BatchSchedule.doubling(), horizon=3000,
                              privacy=params)
        a = run_episode(inst, config, SeedSpec(123, 7))
        b = run_episode(inst, config, SeedSpec(123, 7))
        np.testing.assert_array_equal(a.cumulative_regret, b.cumulative_regret)
        assert a.eliminations == b.eliminations

    def test_optimal_arm_safe_in_clean_runs(self):
        inst = make_instance(3, [0.9, 0.5, 0.1], 4000)
        config = EngineConfig(schedule=BatchSchedule.constant(5), horizon=4000)
        for seed in range(30):
            trace = run_episode(inst, config, SeedSpec(900, seed))
            if not trace.clean_event_violated:
                assert all(arm != 0 for arm, _ in trace.eliminations)

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=15, deadline=None)
    def test_trace_invariants_property(self, seed):
        inst = make_instance(2, [0.8, 0.3], 600)
        params = derive_params(0.9, 1e-2)
        config = EngineConfig(schedule=BatchSchedule.doubling(), horizon=600,
                              privacy=params)
        trace = run_episode(inst, config, SeedSpec(seed))
        assert trace.cumulative_regret.size == 600
        assert np.all(np.diff(trace.cumulative_regret) >= 0)
        assert sum(trace.arm_pulls_total) == 600


class TestBatchSchedule:
    def test_doubling_sizes(self):
        sched = BatchSchedule.doubling()
        assert [sched.batch_size(t) for t in (1, 2, 3, 4)] == [2, 4, 8, 16]

    def test_default_constant_is_ceil_sigma(self):
        params = derive_params(1.0, 1e-5)
        sched = BatchSchedule.default_constant(params)
        assert sched.constant_m == math.ceil(params.sigma) == 42

    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            BatchSchedule(kind="triangle")

    def test_constant_needs_m(self):
        with pytest.raises(ValueError):
            BatchSchedule(kind="constant")
