import json
import math
import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase, override_settings

from lazo.exceptions import InvalidConfig
from lazo.numerics import FeasibleSet
from lazo.optimizer import sqrt_horizon_preset
from lazo.specs import build_experiment, load_experiment, normalize_config, with_overrides


class NormalizeConfigTests(SimpleTestCase):
    def test_defaults_are_filled(self):
        data = normalize_config({"problem": {"name": "lqr", "params": {"panel_size": 4}}})
        self.assertEqual(data["problem"]["params"]["panel_size"], 4)
        self.assertEqual(data["problem"]["params"]["discount"], 0.5)
        self.assertEqual(data["problem"]["feasible_set"], {"kind": "unconstrained"})
        self.assertEqual(data["trials"], settings.LAZO["DEFAULT_TRIALS"])
        self.assertEqual(data["estimator"]["variant"], "lazo_a")
        self.assertEqual(data["methods"], [{}])

    def test_payload_is_not_mutated(self):
        payload = {"problem": {"name": "regression"}}
        normalize_config(payload)
        self.assertEqual(payload, {"problem": {"name": "regression"}})

    def test_regression_defaults_to_ball(self):
        data = normalize_config({"problem": {"name": "regression"}})
        self.assertEqual(data["problem"]["feasible_set"], {"kind": "ball", "radius": 100.0})

    @override_settings(LAZO={**settings.LAZO, "DEFAULT_TRIALS": 3})
    def test_trial_default_follows_settings(self):
        self.assertEqual(normalize_config({"problem": {"name": "quadratic"}})["trials"], 3)

    def test_rejections(self):
        bad = [
            {"problem": {"name": "mnist"}},
            {"problem": "lqr"},
            {"problem": {"name": "lqr"}, "methods": []},
            {"problem": {"name": "lqr"}, "seed": -1},
            {"problem": {"name": "lqr"}, "seed": 1.5},
            {"problem": {"name": "lqr"}, "sweep": {"horizon": [10]}},
            [],
        ]
        for payload in bad:
            with self.assertRaises(InvalidConfig, msg=str(payload)):
                normalize_config(payload)


class BuildExperimentTests(SimpleTestCase):
    def build(self, payload):
        return build_experiment(normalize_config(payload))

    def test_methods_share_problem(self):
        spec = self.build({
            "problem": {"name": "lqr"},
            "optimizer": {"horizon": 50, "step_size": 1e-5},
            "estimator": {"delta": 0.01},
            "methods": [
                {"label": "LAZOa", "variant": "lazo_a", "threshold": 1},
                {"label": "LAZOb", "variant": "lazo_b", "threshold": 100},
                {"label": "two-point", "variant": "two_point_sym"},
            ],
        })
        self.assertEqual([r.label for r in spec.runs], ["LAZOa", "LAZOb", "two-point"])
        self.assertEqual(spec.runs[1].estimator.threshold, 100.0)
        self.assertEqual(spec.runs[2].estimator.threshold, math.inf)
        self.assertTrue(all(r.horizon == 50 for r in spec.runs))

    def test_infinite_threshold_spellings(self):
        for value in ("inf", "Infinity", None):
            spec = self.build({"problem": {"name": "quadratic"}, "estimator": {"threshold": value}})
            self.assertEqual(spec.runs[0].estimator.threshold, math.inf)

    def test_duplicate_labels(self):
        with self.assertRaises(InvalidConfig):
            self.build({"problem": {"name": "quadratic"},
                        "methods": [{"variant": "lazo_a"}, {"variant": "lazo_a"}]})

    def test_unknown_variant(self):
        with self.assertRaises(InvalidConfig):
            self.build({"problem": {"name": "quadratic"}, "estimator": {"variant": "kernel"}})

    def test_sqrt_horizon_preset(self):
        spec = self.build({
            "problem": {"name": "quadratic", "params": {"dimension": 4},
                        "feasible_set": {"kind": "ball", "radius": 3.0}},
            "optimizer": {"horizon": 100, "preset": "sqrt_horizon", "lipschitz": 10.0},
        })
        eta, delta = sqrt_horizon_preset(3.0, 10.0, 4, 100)
        self.assertEqual(spec.runs[0].step_size, eta)
        self.assertEqual(spec.runs[0].estimator.delta, delta)
        self.assertEqual(spec.runs[0].feasible_set, FeasibleSet.ball(3.0))

    def test_preset_needs_lipschitz(self):
        with self.assertRaises(InvalidConfig):
            self.build({"problem": {"name": "regression"}, "optimizer": {"preset": "sqrt_horizon"}})

    def test_diagnostics_and_sweep(self):
        spec = self.build({"problem": {"name": "lqr"},
                           "diagnostics": {"symmetry_rounds": [2, 20], "projections": 24},
                           "sweep": {"threshold": [0.1, "inf"]}})
        self.assertEqual(spec.diagnostics.symmetry_rounds, (2, 20))
        self.assertEqual(spec.diagnostics.projections, 24)
        self.assertEqual(spec.sweep, {"threshold": [0.1, math.inf]})

    def test_overrides(self):
        run = self.build({"problem": {"name": "quadratic"}}).runs[0]
        changed = with_overrides(run, threshold=2.0, step_size=0.5)
        self.assertEqual((changed.estimator.threshold, changed.step_size), (2.0, 0.5))
        self.assertEqual(changed.estimator.delta, run.estimator.delta)


class LoadExperimentTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_missing_file_is_named(self):
        path = self.dir / "missing.json"
        with self.assertRaises(InvalidConfig) as ctx:
            load_experiment(path)
        self.assertIn("missing.json", str(ctx.exception))

    def test_malformed_json(self):
        path = self.dir / "broken.json"
        path.write_text("{\"problem\": ", encoding="utf-8")
        with self.assertRaises(InvalidConfig) as ctx:
            load_experiment(path)
        self.assertIn("broken.json", str(ctx.exception))

    def test_overrides_and_name(self):
        path = self.dir / "quad.json"
        path.write_text(json.dumps({"problem": {"name": "quadratic"}, "seed": 1, "output": "out/q"}),
                        encoding="utf-8")
        spec = load_experiment(path, seed=9, trials=2)
        self.assertEqual((spec.name, spec.seed, spec.trials), ("quad", 9, 2))
        self.assertEqual(spec.runs[0].seed, 9)
        self.assertEqual(spec.output_dir, Path("out/q"))
        self.assertEqual(load_experiment(path, output=str(self.dir)).output_dir, self.dir)
