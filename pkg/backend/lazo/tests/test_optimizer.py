import math
import os
import unittest

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase
from numpy.testing import assert_allclose, assert_array_equal

from lazo.diagnostics import regret_slope
from lazo.estimators import FRESH_TWO_POINT, REUSED, EstimatorConfig, GradientEstimate
from lazo.exceptions import InvalidConfig, InvalidInput, RoundError
from lazo.numerics import FeasibleSet
from lazo.oracles import ProblemConfig
from lazo.optimizer import RunConfig, checksum, run, sgd_step, sqrt_horizon_preset

DRIFT = ProblemConfig("quadratic", {"dimension": 3, "schedule": "drift", "drift_std": 0.02})


def config(variant="lazo_a", problem=DRIFT, horizon=50, **estimator):
    estimator.setdefault("delta", 0.05)
    return RunConfig(problem=problem, estimator=EstimatorConfig(variant, **estimator),
                     horizon=horizon, step_size=0.01, seed=3)


def estimate(vector):
    return GradientEstimate(np.asarray(vector, dtype=float), 2, FRESH_TWO_POINT)


class SgdStepTests(SimpleTestCase):
    def test_interior_step(self):
        out = sgd_step(np.array([1.0, 1.0]), estimate([1.0, 0.0]), 0.5, FeasibleSet.ball(10.0))
        assert_allclose(out, [0.5, 1.0])

    def test_zero_gradient(self):
        x = np.array([0.3, -0.2])
        assert_array_equal(sgd_step(x, estimate(np.zeros(2)), 0.5, FeasibleSet.ball(1.0)), x)

    def test_projects_back(self):
        out = sgd_step(np.array([1.0, 0.0]), estimate([-4.0, 0.0]), 1.0, FeasibleSet.ball(2.0))
        assert_allclose(out, [2.0, 0.0])

    def test_rejects_bare_vector(self):
        with self.assertRaises(InvalidInput):
            sgd_step(np.zeros(2), np.array([1.0, 0.0]), 0.5, FeasibleSet.ball(1.0))


class PresetTests(SimpleTestCase):
    def test_values(self):
        eta, delta = sqrt_horizon_preset(radius=2.0, lipschitz=4.0, d=4, horizon=100)
        self.assertAlmostEqual(eta, 2.0 / (4.0 * 20.0))
        self.assertAlmostEqual(delta, 2.0 * math.sqrt(0.04))

    def test_invalid(self):
        with self.assertRaises(InvalidConfig):
            sqrt_horizon_preset(1.0, 0.0, 4, 100)


class RunTests(SimpleTestCase):
    def test_zero_horizon_keeps_bootstrap_only(self):
        trajectory = run(config(horizon=0))
        self.assertEqual(len(trajectory.records), 1)
        self.assertEqual(trajectory.records[0].rule_fired, FRESH_TWO_POINT)
        self.assertEqual(trajectory.total_queries, 2)

    def test_deterministic(self):
        first, second = run(config(threshold=0.5), trial=2), run(config(threshold=0.5), trial=2)
        self.assertEqual(first.records, second.records)
        assert_array_equal(first.final_iterate, second.final_iterate)
        self.assertEqual(first.loss_checksum, second.loss_checksum)

    def test_trials_differ(self):
        self.assertNotEqual(run(config(), trial=0).loss_checksum, run(config(), trial=1).loss_checksum)

    def test_query_accounting(self):
        trajectory = run(config(threshold=0.5, horizon=200))
        queries = [r.queries for r in trajectory.records]
        self.assertTrue(set(queries[1:]) <= {1, 2})
        self.assertEqual(trajectory.total_queries, sum(queries))
        self.assertEqual(list(np.cumsum(queries)), [r.cum_queries for r in trajectory.records])

    def test_paired_oracle_checksum(self):
        lazy = run(config("lazo_b", threshold=1.0))
        sym = run(config("two_point_sym"))
        self.assertEqual(lazy.oracle_checksum, sym.oracle_checksum)
        self.assertNotEqual(lazy.loss_checksum, sym.loss_checksum)

    def test_loss_is_recorded_at_iterate(self):
        trajectory = run(config("two_point_sym", horizon=5))
        self.assertEqual(trajectory.records[0].loss, 3.0)  # ||0 - 1||² in 3 dims
        self.assertEqual(trajectory.loss_checksum, checksum([r.loss for r in trajectory.records]))

    def test_converges_on_stationary_quadratic(self):
        cfg = RunConfig(problem=ProblemConfig("quadratic", {"center": [1.0, -2.0, 0.5, 3.0]}),
                        estimator=EstimatorConfig("two_point_sym", delta=0.01),
                        horizon=2000, step_size=0.01)
        trajectory = run(cfg)
        self.assertLess(trajectory.final_loss, 0.01 * trajectory.records[0].loss)

    def test_snapshots(self):
        trajectory = run(config("lazo_b", threshold=1.0), snapshot_rounds=(0, 10))
        self.assertEqual([s.t for s in trajectory.snapshots], [0, 10])
        snap = trajectory.snapshots[1]
        assert_array_equal(snap.x, trajectory.records[10].x)
        self.assertEqual(snap.oracle.round, 10)

    def test_random_start_inside_ball(self):
        cfg = RunConfig(problem=DRIFT, estimator=EstimatorConfig("two_point_sym", delta=0.05), horizon=3,
                        step_size=0.01, feasible_set=FeasibleSet.ball(0.5), x0="random")
        trajectory = run(cfg)
        self.assertTrue(cfg.feasible_set.contains(trajectory.records[0].x))
        self.assertGreater(np.linalg.norm(trajectory.records[0].x), 0.0)

    def test_projection_keeps_iterates_feasible(self):
        cfg = RunConfig(problem=DRIFT, estimator=EstimatorConfig("one_point", delta=0.05), horizon=100,
                        step_size=0.05, feasible_set=FeasibleSet.ball(0.5))
        for record in run(cfg).records:
            self.assertTrue(cfg.feasible_set.contains(record.x))

    def test_oracle_failure_carries_round(self):
        cfg = RunConfig(problem=ProblemConfig("quadratic", {"dimension": 2}),
                        estimator=EstimatorConfig("one_point", delta=0.01), horizon=500, step_size=1.0)
        with np.errstate(all="ignore"):
            with self.assertRaises(RoundError) as ctx:
                run(cfg)
        self.assertIsInstance(ctx.exception.cause, InvalidInput)
        self.assertIn(f"round {ctx.exception.round_index}", str(ctx.exception))

    def test_invalid_config(self):
        with self.assertRaises(InvalidConfig):
            config(horizon=-1)
        with self.assertRaises(InvalidConfig):
            RunConfig(problem=DRIFT, estimator=EstimatorConfig("residual", delta=0.1), horizon=1, step_size=0.0)


class DegenerateTrajectoryTests(SimpleTestCase):
    """퇴화 설정의 trajectory 가 기준 estimator 와 비트 단위로 같은지."""

    def assertSameTrajectory(self, left, right):
        assert_array_equal(left.losses, right.losses)
        self.assertEqual([r.queries for r in left.records], [r.queries for r in right.records])
        self.assertEqual([r.rule_fired for r in left.records], [r.rule_fired for r in right.records])
        for a, b in zip(left.records, right.records):
            assert_array_equal(a.gradient, b.gradient)
        assert_array_equal(left.final_iterate, right.final_iterate)

    def test_infinite_threshold_is_residual(self):
        residual = run(config("residual", horizon=500))
        for variant in ("lazo_a", "lazo_b"):
            self.assertSameTrajectory(run(config(variant, horizon=500, threshold=math.inf)), residual)

    def test_zero_threshold_is_symmetric(self):
        symmetric = run(config("two_point_sym", horizon=500))
        for variant in ("lazo_a", "lazo_b"):
            self.assertSameTrajectory(run(config(variant, horizon=500, threshold=0.0)), symmetric)

    def test_single_slot_multipoint_is_lazo(self):
        for rule in ("a", "b"):
            single = run(config(f"lazo_{rule}", horizon=200, threshold=1.0))
            multi = run(config(f"multi_lazo_{rule}", horizon=200, threshold=1.0,
                               history_len=1, directions_per_round=1))
            self.assertSameTrajectory(multi, single)
            self.assertEqual([r.variation for r in multi.records], [r.variation for r in single.records])

    def test_zero_threshold_multipoint_is_2k_point_symmetric(self):
        multi = run(config("multi_lazo_a", horizon=200, threshold=0.0, history_len=3, directions_per_round=3))
        symmetric = run(config("multi_point_sym", horizon=200, directions_per_round=3))
        self.assertSameTrajectory(multi, symmetric)
        self.assertEqual(multi.total_queries, 6 * 201)


class LQRRunTests(SimpleTestCase):
    """기본 LQR 설정 (η = 1e-5, δ = 0.01) 에서의 짧은 실행."""

    def lqr_config(self, variant, threshold=1.0, horizon=150, **params):
        merged = {**settings.LAZO["PROBLEMS"]["lqr"], **params}
        return RunConfig(problem=ProblemConfig("lqr", merged),
                         estimator=EstimatorConfig(variant, delta=0.01, threshold=threshold),
                         horizon=horizon, step_size=1e-5)

    def test_default_costs_stay_finite_and_uncapped(self):
        cap = settings.LAZO["PROBLEMS"]["lqr"]["cost_cap"]
        for variant in ("two_point_sym", "lazo_a"):
            trajectory = run(self.lqr_config(variant))
            self.assertEqual(trajectory.capped_evaluations, 0, variant)
            self.assertTrue(np.all(np.isfinite(trajectory.losses)), variant)
            self.assertLess(trajectory.losses.max(), cap, variant)

    def test_default_lazy_rule_both_reuses_and_queries(self):
        rules = {r.rule_fired for r in run(self.lqr_config("lazo_a")).records[1:]}
        self.assertEqual(rules, {REUSED, FRESH_TWO_POINT})

    def test_capped_rounds_never_reuse(self):
        # 상한이 매우 낮아 모든 평가가 잘린다
        for variant, threshold in (("lazo_a", 1.0), ("lazo_b", 100.0)):
            trajectory = run(self.lqr_config(variant, threshold, horizon=40, cost_cap=1e-3))
            self.assertGreater(trajectory.capped_evaluations, 0)
            self.assertEqual({r.rule_fired for r in trajectory.records}, {FRESH_TWO_POINT}, variant)
            self.assertEqual(trajectory.total_queries, 2 * 41)


SLOW = unittest.skipUnless(os.environ.get("LAZO_SLOW_TESTS"), "set LAZO_SLOW_TESTS=1 to run")


@SLOW
class LongRunTests(SimpleTestCase):
    """벤치마크 규모의 성질. LAZO_SLOW_TESTS=1 일 때만 돈다."""

    trials = 10

    def test_regret_grows_like_square_root(self):
        d, radius, lipschitz = 4, 3.0, 10.0
        center = [1.0, 1.0, 1.0, 1.0]
        horizons = (1_000, 10_000, 100_000)
        for variant in ("two_point_sym", "lazo_a", "lazo_b"):
            regrets = []
            for horizon in horizons:
                eta, delta = sqrt_horizon_preset(radius, lipschitz, d, horizon)
                cfg = RunConfig(problem=ProblemConfig("quadratic", {"center": center}),
                                estimator=EstimatorConfig(variant, delta=delta, threshold=1.0,
                                                          lipschitz_scale=lipschitz),
                                horizon=horizon, step_size=eta, feasible_set=FeasibleSet.ball(radius))
                # 잡음 없는 정상 이차 함수라 f_t(x*) = 0
                regrets.append(np.mean([run(cfg, trial).losses.sum() for trial in range(self.trials)]))
            slope = regret_slope(horizons, regrets)
            self.assertTrue(0.35 <= slope <= 0.65, f"{variant}: slope {slope:.3f}")

    def lqr_config(self, variant, threshold=1.0, horizon=300):
        return RunConfig(problem=ProblemConfig("lqr", settings.LAZO["PROBLEMS"]["lqr"]),
                         estimator=EstimatorConfig(variant, delta=0.01, threshold=threshold),
                         horizon=horizon, step_size=1e-5)

    def test_lqr_queries_follow_bursts(self):
        calm, burst = [], []
        for trial in range(self.trials):
            for record in run(self.lqr_config("lazo_a"), trial).records[1:]:
                phase = record.t % 100
                if phase <= 34:
                    calm.append(record.queries)
                elif phase <= 65:
                    burst.append(record.queries)
        self.assertLess(np.mean(calm), 1.9)
        self.assertGreater(np.mean(burst), np.mean(calm))

    def final_loss_at_budget(self, trajectories, budget):
        out = []
        for trajectory in trajectories:
            spent = np.array([r.cum_queries for r in trajectory.records])
            index = min(int(np.searchsorted(spent, budget)), len(spent) - 1)
            out.append(trajectory.records[index].loss)
        return np.array(out)

    def assertLazyDominates(self, runs, cap=None):
        trajectories = {label: [run(cfg, t) for t in range(self.trials)] for label, cfg in runs.items()}
        budget = min(tr.total_queries for group in trajectories.values() for tr in group)
        finals = {label: self.final_loss_at_budget(group, budget) for label, group in trajectories.items()}
        if cap is not None:
            for label, values in finals.items():
                self.assertTrue(np.all(values < cap), f"{label}: losses at the budget point reach the cap")
        sym = finals.pop("two_point_sym")
        for label, values in finals.items():
            pooled = math.sqrt((values.var(ddof=1) + sym.var(ddof=1)) / 2.0)
            self.assertLessEqual(values.mean(), sym.mean() + pooled, label)

    def test_query_efficiency_on_lqr(self):
        self.assertLazyDominates({
            "lazo_a": self.lqr_config("lazo_a", 1.0, horizon=1000),
            "lazo_b": self.lqr_config("lazo_b", 100.0, horizon=1000),
            "two_point_sym": self.lqr_config("two_point_sym", horizon=1000),
        }, cap=settings.LAZO["PROBLEMS"]["lqr"]["cost_cap"])

    def test_query_efficiency_on_resource_allocation(self):
        problem = ProblemConfig("resource_allocation", settings.LAZO["PROBLEMS"]["resource_allocation"])

        def cfg(variant, threshold=math.inf):
            return RunConfig(problem=problem, estimator=EstimatorConfig(variant, delta=0.1, threshold=threshold),
                             horizon=1000, step_size=1e-5)

        self.assertLazyDominates({
            "lazo_a": cfg("lazo_a", 10.0),
            "lazo_b": cfg("lazo_b", 1000.0),
            "two_point_sym": cfg("two_point_sym"),
        })
