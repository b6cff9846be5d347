# lazo/management/commands/run.py
"""
python manage.py run --config configs/lqr.json [--out DIR] [--jobs N] [--seed S]

방법(method)마다:
    <out>/<label>/trial_<i>.csv   라운드별 기록
    <out>/<label>/aggregate.csv   시행 평균/표준편차
    <out>/<label>/summary.csv     trial 별 최종 손실, 총 질의 수, oracle checksum
    <out>/<label>/variance.csv    diagnostics.variance_rounds 가 있을 때만
"""
import logging

from lazo.diagnostics import variance_along_run
from lazo.export import (
    variance_row,
    write_aggregate_csv,
    write_summary_csv,
    write_trajectory_csv,
    write_variance_csv,
)
from lazo.harness import aggregate, run_trials
from lazo.management.base import ExperimentCommand
from lazo.numerics import make_rng

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "Run every method of an experiment config and write trajectory / aggregate CSVs."

    def execute_spec(self, spec, out, options):
        diag = spec.diagnostics
        for config in spec.runs:
            method_dir = out / config.label
            trajectories = run_trials(config, spec.trials, options['jobs'],
                                      snapshot_rounds=diag.variance_rounds)
            for trajectory in trajectories:
                write_trajectory_csv(method_dir / f"trial_{trajectory.trial}.csv", trajectory)
            write_aggregate_csv(method_dir / "aggregate.csv", aggregate(trajectories))
            write_summary_csv(method_dir / "summary.csv", trajectories)

            if diag.variance_rounds:
                rows = []
                for trajectory in trajectories:
                    rng = make_rng(config.seed, trajectory.trial, "diagnostics")
                    for t, trace in variance_along_run(trajectory, config.estimator,
                                                       diag.variance_samples, rng):
                        rows.append(variance_row(trajectory.trial, t, trace))
                write_variance_csv(method_dir / "variance.csv", rows)

            mean_final = sum(tr.final_loss for tr in trajectories) / len(trajectories)
            self.stdout.write(f"{config.label}: {len(trajectories)} trial(s), mean final loss {mean_final:.6g}")
        self.stdout.write(self.style.SUCCESS(f"wrote {out}"))
