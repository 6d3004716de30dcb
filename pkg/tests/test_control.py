"""Control schedules and the exhaustive window audits."""

import numpy as np
import pytest

from strav.control import (
    CustomSchedule,
    CyclicSchedule,
    ExplicitSchedule,
    PowerOfTwoSchedule,
    f_value,
    fit_check,
    uniform_modulus,
    verify_admissible,
)
from strav.dsa import StringStage
from strav.gmsa import IterationPlan, StepSpec

FIRST_TWENTY = [0, 1, 0, 2, 0, 1, 0, 3, 0, 1, 0, 2, 0, 1, 0, 4, 0, 1, 0, 2]


def one_index_plan(k, n, eps=1.0, alpha=1.0):
    return IterationPlan(k=k, N=1, eps=eps, steps=[StepSpec.relaxation(-n, alpha)])


class TestFValue:
    def test_first_twenty(self):
        assert [f_value(i) for i in range(20)] == FIRST_TWENTY

    def test_dyadic_oracle(self):
        # f(i) is the 2-adic valuation of i + 1; recompute by division
        for i in range(2000):
            v, n = i + 1, 0
            while v % 2 == 0:
                v //= 2
                n += 1
            assert f_value(i) == n

    def test_each_value_once_per_block(self):
        # value n appears exactly once in every 2^{n+1} consecutive indices,
        # at i = 2^n - 1 + j * 2^{n+1}
        for n in range(6):
            w = 2 ** (n + 1)
            hits = [i for i in range(4 * w) if f_value(i) == n]
            assert hits == [2**n - 1 + j * w for j in range(4)]

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            f_value(-1)


class TestPowerOfTwoSchedule:
    def test_plan_targets_f_value(self):
        s = PowerOfTwoSchedule()
        for k in (0, 1, 7, 30, 63):
            p = s.plan_at(k)
            assert p.output_indices() == {f_value(k)}
            assert p.k == k

    def test_window_bound(self):
        s = PowerOfTwoSchedule()
        assert [s.window_bound(n) for n in range(5)] == [2, 4, 8, 16, 32]

    def test_metadata(self):
        assert PowerOfTwoSchedule().plan_metadata() == (1, 1)

    def test_eps_validated(self):
        with pytest.raises(ValueError):
            PowerOfTwoSchedule(eps=0.0)


class TestCyclicSchedule:
    def test_wraps_and_stamps_k(self):
        s = CyclicSchedule([one_index_plan(0, 0), one_index_plan(1, 3)])
        assert s.plan_at(5).output_indices() == {3}
        assert s.plan_at(5).k == 5

    def test_default_bound_is_period_for_covered(self):
        s = CyclicSchedule([one_index_plan(0, 0), one_index_plan(1, 3), one_index_plan(2, 1)])
        assert s.window_bound(3) == 3
        assert s.window_bound(0) == 3
        assert s.window_bound(7) is None

    def test_declared_bound_wins(self):
        s = CyclicSchedule([one_index_plan(0, 0)], window_bounds={0: 5})
        assert s.window_bound(0) == 5

    def test_over_indices(self):
        s = CyclicSchedule.over_indices([2, 0, 1])
        assert [s.plan_at(k).output_indices() for k in range(3)] == [{2}, {0}, {1}]
        assert s.plan_metadata() == (1, 1)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            CyclicSchedule([])


class TestExplicitSchedule:
    def test_finite_horizon(self):
        s = ExplicitSchedule([one_index_plan(0, 0), one_index_plan(1, 1)])
        assert s.plan_at(1).output_indices() == {1}
        with pytest.raises(ValueError, match="horizon-exceeded"):
            s.plan_at(2)
        with pytest.raises(ValueError, match="horizon-exceeded"):
            s.plan_at(-1)

    def test_metadata_from_plans(self):
        two_wide = IterationPlan(
            k=0, N=2, eps=1.0,
            steps={1: StepSpec.relaxation(0, 1.0), 2: StepSpec(2, (1, -1), order=(1, -1))},
        )
        s = ExplicitSchedule([one_index_plan(0, 0), two_wide])
        assert s.plan_metadata() == (2, 2)


class TestUniformModulus:
    def test_from_metadata(self):
        assert uniform_modulus(PowerOfTwoSchedule(eps=0.1), 0.1) == 0.05

    def test_requires_metadata(self):
        s = CustomSchedule(lambda k: one_index_plan(k, 0))
        with pytest.raises(ValueError, match="metadata"):
            uniform_modulus(s, 1.0)


class TestVerifyAdmissible:
    def test_power_of_two_exhaustive(self):
        rep = verify_admissible(PowerOfTwoSchedule(), 200, range(5))
        assert rep.passed
        assert rep.violations == []
        assert rep.windows == {n: 2 ** (n + 1) for n in range(5)}

    def test_detects_missed_window(self):
        # index 1 appears only at k = 0 and k = 4; with a declared window of
        # 3 the first full window missing it starts at k = 1
        plans = [one_index_plan(k, n) for k, n in enumerate([1, 0, 0, 0, 1, 0])]
        s = ExplicitSchedule(plans, window_bounds={0: 2, 1: 3})
        rep = verify_admissible(s, 5, [0, 1])
        assert not rep.passed
        assert rep.first_violation == (1, 1)

    def test_cycle_passes_at_default_bound(self):
        s = CyclicSchedule([one_index_plan(0, 2), one_index_plan(1, 5)])
        rep = verify_admissible(s, 100, [2, 5])
        assert rep.passed
        assert rep.windows == {2: 2, 5: 2}

    def test_refuses_undeclared_bound(self):
        s = CustomSchedule(lambda k: one_index_plan(k, 0))
        with pytest.raises(ValueError, match="not declared"):
            verify_admissible(s, 10, [0])

    def test_window_must_fit_horizon(self):
        with pytest.raises(ValueError, match="does not fit"):
            verify_admissible(PowerOfTwoSchedule(), 10, [4])  # window 32 > 11

    def test_negative_horizon_rejected(self):
        with pytest.raises(ValueError):
            verify_admissible(PowerOfTwoSchedule(), -1, [0])

    def test_multi_index_plans_count_every_touch(self):
        pair = IterationPlan(
            k=0, N=1, eps=0.5,
            steps=[StepSpec(1, (-1, -2), weights={-1: 0.5, -2: 0.5})],
        )
        s = CyclicSchedule([pair])
        rep = verify_admissible(s, 50, [1, 2])
        assert rep.passed and rep.windows == {1: 1, 2: 1}


class TestFitCheck:
    def test_stage_sequence_passes(self):
        stages = [
            StringStage([(0, 1)], [1.0]),
            StringStage([(2,), (0,)], [0.5, 0.5]),
        ]
        rep = fit_check(stages, 40, {0: 2, 1: 2, 2: 2}, [0, 1, 2])
        assert rep.passed

    def test_bare_index_tuples_accepted(self):
        rep = fit_check([[(0,)], [(1,)]], 20, {0: 2, 1: 2}, [0, 1])
        assert rep.passed

    def test_detects_starved_index(self):
        # index 1 only every 4th iteration, but a window of 3 is promised
        rep = fit_check([[(0,)], [(0,)], [(1,)], [(0,)]], 30, {0: 3, 1: 3}, [0, 1])
        assert not rep.passed
        assert rep.first_violation == (1, 3)

    def test_callable_stages(self):
        rep = fit_check(lambda k: [(k % 2,)], 20, {0: 2, 1: 2}, [0, 1])
        assert rep.passed
