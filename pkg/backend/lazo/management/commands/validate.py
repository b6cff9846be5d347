# lazo/management/commands/validate.py
"""
python manage.py validate --config configs/regression.json

방법마다 <out>/bounds_<label>.csv 한 개 (trial 별 한 행).
- instance-dependent bound 위반 수, reduced-norm 조건 검사 (diagnostics.lipschitz)
- diagnostics.mc_samples >= 2 이면 고전 estimator 들의 MC 2차 모멘트
- 이차 손실 계열이면 최종 regret, 항상 temporal variation 통계

참 기울기가 있는 문제(quadratic, regression)는 <out>/errors_<label>.csv 도 쓴다.
라운드별 temporal variation 과 추정 오차 ||g̃_t - ∇f_t(x_t)||.
"""
import logging

import numpy as np

from lazo.diagnostics import (
    ProblemReplay,
    best_fixed_decision,
    estimation_error_trace,
    regret_curve,
    validate_bounds,
    variation_statistics,
)
from lazo.exceptions import UnsupportedOperation
from lazo.export import write_bound_report_csv, write_error_trace_csv
from lazo.harness import run_trials
from lazo.management.base import ExperimentCommand
from lazo.numerics import make_rng

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "Check the per-round estimator bounds along every trial and write bound reports."

    def execute_spec(self, spec, out, options):
        diag = spec.diagnostics
        for config in spec.runs:
            reports = []
            traces = []
            supports_regret = True
            has_gradient = ProblemReplay(config).fresh_oracle().has_true_gradient
            for trajectory in run_trials(config, spec.trials, options['jobs']):
                replay = ProblemReplay(config, trajectory.trial)
                report = validate_bounds(trajectory, config, lipschitz=diag.lipschitz, replay=replay,
                                         mc_samples=diag.mc_samples,
                                         rng=make_rng(config.seed, trajectory.trial, "diagnostics"))
                points = np.vstack([trajectory.records[0].x, trajectory.final_iterate])
                report.statistics.update(variation_statistics(replay, points))
                if supports_regret:
                    try:
                        x_star = best_fixed_decision(replay)
                        curve = regret_curve(trajectory, x_star, replay)
                        report.statistics["final_regret"] = curve.final
                    except UnsupportedOperation:
                        supports_regret = False
                        logger.info("%s: no best fixed decision for %s, regret skipped",
                                    config.label, config.problem.name)
                if has_gradient:
                    traces.append((trajectory.trial, estimation_error_trace(trajectory, replay)))
                reports.append(report)
                if report.bound_violations or report.reduced_norm_violations:
                    logger.warning("%s trial=%d: %d bound / %d reduced-norm violations", config.label,
                                   trajectory.trial, report.bound_violations, report.reduced_norm_violations)
            path = write_bound_report_csv(out / f"bounds_{config.label}.csv", config.label, reports)
            total = sum(r.bound_violations for r in reports)
            self.stdout.write(f"{config.label}: {total} bound violation(s) -> {path}")
            if traces:
                path = write_error_trace_csv(out / f"errors_{config.label}.csv", config.label, traces)
                self.stdout.write(f"{config.label}: estimation error trace -> {path}")
        self.stdout.write(self.style.SUCCESS(f"wrote {out}"))
