import numpy as np
import pytest

from ehsched import (
    EnergyProfile,
    InfeasibleScheduleError,
    Schedule,
    SystemParams,
    improvement_metrics,
    jain_index,
    make_users,
    sg_tdma_schedule,
    utility,
)
from ehsched.scenarios import builtin_scenarios

PARAMS = SystemParams(bandwidth_hz=1000.0, noise_density=1e-6)


class TestSgTdma:
    def test_powers_are_harvest_over_length(self, s1tilde):
        scenario, users = s1tilde
        sched = sg_tdma_schedule(scenario.profile, users, scenario.params)
        assert np.allclose(sched.powers, [2, 10, 0.1, 0.1, 0.1, 7, 10, 0.1, 1, 4])

    def test_round_robin_mapping(self, s1tilde):
        scenario, users = s1tilde
        sched = sg_tdma_schedule(scenario.profile, users, scenario.params)
        tau = sched.time_alloc
        # 5 users, 10 slots: user 1 owns slots 1 and 6, user 5 slots 5 and 10
        for t in range(10):
            owner = t % 5
            assert tau[owner, t] == scenario.profile.slot_lengths[t]
            assert tau[:, t].sum() == scenario.profile.slot_lengths[t]

    def test_cumulative_energy_tight_everywhere(self, s1tilde):
        scenario, users = s1tilde
        sched = sg_tdma_schedule(scenario.profile, users, scenario.params)
        spent = np.cumsum(sched.powers * scenario.profile.slot_lengths)
        assert np.allclose(spent, scenario.profile.cumulative_energy(), atol=1e-10)

    def test_fewer_slots_than_users_rejected(self):
        profile = EnergyProfile(slot_lengths=[1.0, 1.0], harvests=[1.0, 1.0])
        users = make_users([20, 25, 30], PARAMS)
        with pytest.raises(InfeasibleScheduleError):
            sg_tdma_schedule(profile, users, PARAMS)


class TestJainIndex:
    def test_equal_allocation_is_one(self):
        assert jain_index([3.7] * 4) == pytest.approx(1.0)

    def test_single_winner_limit(self):
        delta = 1e-12
        assert jain_index([1.0, delta, delta, delta]) == pytest.approx(0.25, abs=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(31)
        x = rng.uniform(0.1, 10.0, 7)
        for alpha in (0.01, 3.0, 1e4):
            assert jain_index(alpha * x) == pytest.approx(jain_index(x), rel=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(32)
        x = rng.uniform(0.1, 10.0, 6)
        assert jain_index(rng.permutation(x)) == pytest.approx(jain_index(x), rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            jain_index([])
        with pytest.raises(ValueError):
            jain_index([1.0, 0.0])


class TestImprovementMetrics:
    def test_baseline_against_itself_is_zero(self, s1tilde):
        scenario, users = s1tilde
        base = sg_tdma_schedule(scenario.profile, users, scenario.params)
        m = improvement_metrics(base, base, users, scenario.params)
        assert m.utility_improvement_pct == 0.0
        assert np.allclose(m.per_user_throughput_improvement_pct, 0.0)

    def test_mean_path_loss(self, s1tilde):
        scenario, users = s1tilde
        base = sg_tdma_schedule(scenario.profile, users, scenario.params)
        m = improvement_metrics(base, base, users, scenario.params)
        assert m.mean_path_loss_db == pytest.approx(31.0)

    def test_sign_matches_utility_ordering(self, s1tilde):
        scenario, users = s1tilde
        base = sg_tdma_schedule(scenario.profile, users, scenario.params)
        # boost the baseline's weakest user by handing it the strongest slot
        tau = base.time_alloc.copy()
        m = improvement_metrics(
            Schedule.build(base.powers * np.array([1, 1, 1, 1, 1, 1, 1, 1, 1, 0.5]),
                           tau, users, scenario.params),
            base, users, scenario.params)
        u_c = utility(Schedule.build(
            base.powers * np.array([1, 1, 1, 1, 1, 1, 1, 1, 1, 0.5]),
            tau, users, scenario.params), users, scenario.params)
        u_b = utility(base, users, scenario.params)
        assert (m.utility_improvement_pct > 0) == (u_c > u_b)

    def test_zero_bit_baseline_user_reported_as_nan(self):
        profile = EnergyProfile(slot_lengths=[1.0, 1.0], harvests=[1.0, 1.0])
        users = make_users([25.0, 28.0], PARAMS)
        base = Schedule.build([1.0, 0.0], [[1.0, 0.0], [0.0, 1.0]], users, PARAMS)
        cand = Schedule.build([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]], users, PARAMS)
        m = improvement_metrics(cand, base, users, PARAMS)
        assert np.isnan(m.per_user_throughput_improvement_pct[1])
        assert np.isnan(m.utility_improvement_pct)
        assert not np.isnan(m.per_user_throughput_improvement_pct[0])

    def test_s1tilde_end_to_end_improvement(self, table1_runs):
        run = table1_runs["s1tilde"]
        m = improvement_metrics(run["report"].schedule, run["baseline"],
                                run["users"], run["scenario"].params)
        assert m.utility_improvement_pct == pytest.approx(9.6133, abs=0.3)
