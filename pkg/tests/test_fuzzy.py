import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frl_autoscale.fuzzy import (
    FiringVector,
    FuzzyPartition,
    MembershipFunction,
    RuleBase,
    combine_action,
    default_rt_partition,
    default_workload_partition,
    discretize_action,
    eval_membership,
    fire_rules,
)
from frl_autoscale.state import ACTIONS, SystemState

SLA = 0.6
PW = default_workload_partition()
PRT = default_rt_partition(SLA)
RB = RuleBase()


def fv(mu):
    return FiringVector(np.asarray(mu, dtype=float))


def fire(w, rt):
    return fire_rules(RB, PW, PRT, SystemState(w, rt, 1)).strengths


class TestMembership:
    def test_triangle_peak(self):
        assert eval_membership(MembershipFunction.triangular(0, 50, 100), 50) == 1.0

    def test_triangle_midpoint(self):
        assert eval_membership(MembershipFunction.triangular(0, 50, 100), 25) == 0.5

    def test_trapezoid_descent(self):
        assert eval_membership(MembershipFunction.trapezoidal(0, 0, 20, 60), 40) == 0.5

    def test_outside_support(self):
        mf = MembershipFunction.triangular(0, 50, 100)
        assert mf(-1) == 0.0
        assert mf(101) == 0.0

    def test_shoulder_edge(self):
        assert MembershipFunction.trapezoidal(0, 0, 10, 55)(0) == 1.0

    @pytest.mark.parametrize("points", [(3, 2, 5), (0, 1, 5, 4)])
    def test_decreasing_breakpoints_rejected(self, points):
        kind = "triangular" if len(points) == 3 else "trapezoidal"
        with pytest.raises(ValueError, match="non-decreasing"):
            MembershipFunction(kind, points)

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            MembershipFunction("triangular", (0, 1, 2, 3))

    @given(
        st.lists(st.floats(-100, 100), min_size=4, max_size=4).map(sorted),
        st.floats(-200, 200),
    )
    def test_output_in_unit_interval(self, pts, x):
        assert 0.0 <= MembershipFunction("trapezoidal", tuple(pts))(x) <= 1.0


class TestPartition:
    @pytest.mark.parametrize("part", [PW, PRT, default_rt_partition(2.5)])
    def test_partition_of_unity_on_grid(self, part):
        lo, hi = part.domain
        for x in np.linspace(lo, hi, 1000):
            assert abs(part.memberships(x).sum() - 1.0) < 1e-9

    def test_three_sets_required(self):
        sets = PW.sets[:2]
        with pytest.raises(ValueError, match="3 fuzzy sets"):
            FuzzyPartition("w", sets, (0, 120))

    def test_non_ruspini_rejected(self):
        sets = (
            ("low", MembershipFunction.trapezoidal(0, 0, 10, 40)),
            ("medium", MembershipFunction.triangular(10, 55, 100)),
            ("high", MembershipFunction.trapezoidal(55, 100, 120, 120)),
        )
        with pytest.raises(ValueError, match="sum to"):
            FuzzyPartition("w", sets, (0, 120))

    def test_round_trip(self):
        assert FuzzyPartition.from_dict(PRT.to_dict()) == PRT

    def test_clamps_outside_domain(self):
        np.testing.assert_array_equal(PW.memberships(500), PW.memberships(120))
        np.testing.assert_array_equal(PRT.memberships(-1), PRT.memberships(0))


class TestRuleBase:
    def test_row_major_grid(self):
        assert RB.rules == tuple((i, j) for i in range(3) for j in range(3))
        assert RB.actions == (-2, -1, 0, 1, 2)
        assert RB.index(2, 2) == 8

    def test_custom_order_rejected(self):
        with pytest.raises(ValueError):
            RuleBase(rules=tuple(reversed(RuleBase().rules)))


class TestFireRules:
    def test_crisp_center_is_one_hot(self):
        mu = fire(55, SLA)  # medium, ok
        expected = np.zeros(9)
        expected[RB.index(1, 1)] = 1.0
        np.testing.assert_array_equal(mu, expected)

    def test_half_low_medium_at_bad(self):
        # low and medium cross at 32.5; rt=1.2 is the core of "bad"
        mu = fire(32.5, 1.2)
        expected = np.zeros(9)
        expected[RB.index(0, 2)] = 0.5
        expected[RB.index(1, 2)] = 0.5
        np.testing.assert_allclose(mu, expected, atol=1e-12)

    def test_four_rules_at_quarter(self):
        # hand evaluation: low(32.5)=(55-32.5)/45, medium=(32.5-10)/45,
        # ok(0.75)=(0.9-0.75)/0.3, bad(0.75)=(0.75-0.6)/0.3
        low, med = (55 - 32.5) / 45, (32.5 - 10) / 45
        ok, bad = (0.9 - 0.75) / 0.3, (0.75 - 0.6) / 0.3
        assert low == pytest.approx(0.5) and ok == pytest.approx(0.5)
        mu = fire(32.5, 0.75)
        expected = np.zeros(9)
        expected[RB.index(0, 1)] = low * ok
        expected[RB.index(0, 2)] = low * bad
        expected[RB.index(1, 1)] = med * ok
        expected[RB.index(1, 2)] = med * bad
        np.testing.assert_allclose(mu, expected, atol=1e-12)
        np.testing.assert_allclose(mu[mu > 0], 0.25, atol=1e-12)

    def test_normalisation_grid(self):
        for w in np.linspace(0, 120, 100):
            for rt in np.linspace(0, 2 * SLA, 100):
                mu = fire(w, rt)
                assert abs(mu.sum() - 1.0) < 1e-9
                assert np.all((mu >= 0) & (mu <= 1))
                assert np.count_nonzero(mu) <= 4

    def test_out_of_domain_clamped(self):
        np.testing.assert_array_equal(fire(400, 9.0), fire(120, 2 * SLA))


class TestCombineAction:
    def test_single_rule(self):
        chosen = [0] * 9
        chosen[RB.index(1, 1)] = 2
        assert combine_action(fv(fire(55, SLA)), chosen) == 2.0

    def test_weighted_pair(self):
        mu = np.zeros(9)
        mu[:2] = 0.5
        assert combine_action(fv(mu), [2, -1] + [0] * 7) == 0.5

    @given(st.lists(st.floats(0, 1), min_size=9, max_size=9))
    def test_zero_consequents(self, raw):
        assert combine_action(fv(np.array(raw)), [0] * 9) == 0.0

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            combine_action(fv(np.ones(9) / 9), [0] * 8)

    def test_bounded_on_random_simplex(self):
        rng = np.random.default_rng(3)
        for _ in range(10_000):
            mu = rng.dirichlet(np.ones(9))
            chosen = rng.choice(ACTIONS, size=9)
            assert -2.0 <= combine_action(fv(mu), chosen) <= 2.0

    def test_lipschitz_in_state(self):
        # |da| <= max|a_i| * sum|dmu| and sum|dmu| <= 2 * max slope * step
        rng = np.random.default_rng(11)
        chosen = rng.choice(ACTIONS, size=9)
        lw, lrt = 2 * 2 / 45, 2 * 2 / (0.5 * SLA)
        hw, hrt = 120 / 400, 2 * SLA / 400
        for w in np.linspace(0, 120 - hw, 60):
            for rt in np.linspace(0, 2 * SLA - hrt, 60):
                a = combine_action(fv(fire(w, rt)), chosen)
                aw = combine_action(fv(fire(w + hw, rt)), chosen)
                art = combine_action(fv(fire(w, rt + hrt)), chosen)
                assert abs(aw - a) <= lw * hw + 1e-12
                assert abs(art - a) <= lrt * hrt + 1e-12


class TestDiscretize:
    @pytest.mark.parametrize(
        "a, expected",
        [(0.5, 1), (-0.49, 0), (2.0, 2), (-0.5, -1), (1.5, 2), (-1.5, -2), (0.0, 0), (-2.0, -2), (1.49, 1)],
    )
    def test_half_away_from_zero(self, a, expected):
        assert discretize_action(a) == expected

    @settings(max_examples=300)
    @given(st.floats(-2, 2))
    def test_in_action_set_and_close(self, a):
        d = discretize_action(a)
        assert d in ACTIONS
        assert abs(d - a) <= 0.5 + 1e-12
