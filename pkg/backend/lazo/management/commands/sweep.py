# lazo/management/commands/sweep.py
"""
python manage.py sweep --config configs/resource_allocation.json [--threshold 1 10 inf] [--step-size ...] [--delta ...]

격자는 설정 파일 "sweep" 섹션에서 읽고, 플래그가 있으면 그 축을 덮어쓴다.
방법 × 격자점마다 한 행: <out>/sweep.csv
"""
import itertools
import logging

from lazo.exceptions import InvalidConfig
from lazo.export import write_sweep_csv
from lazo.harness import final_summary, run_trials
from lazo.management.base import ExperimentCommand
from lazo.specs import SWEEP_KEYS, as_float, with_overrides

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "Grid search over the lazy threshold D, step size and smoothing radius."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--threshold', nargs='+', default=None, help='values of D ("inf" allowed)')
        parser.add_argument('--step-size', dest='step_size', nargs='+', default=None, help='values of eta')
        parser.add_argument('--delta', nargs='+', default=None, help='values of delta')

    def execute_spec(self, spec, out, options):
        grid = dict(spec.sweep)
        for key in SWEEP_KEYS:
            if options.get(key):
                grid[key] = [as_float(v, key) for v in options[key]]
        if not grid:
            raise InvalidConfig("sweep grid is empty (use the \"sweep\" section or --threshold/--step-size/--delta)")

        keys = [k for k in SWEEP_KEYS if k in grid]
        rows = []
        for config in spec.runs:
            for values in itertools.product(*(grid[k] for k in keys)):
                point = dict(zip(keys, values))
                cfg = with_overrides(config, **point)
                summary = final_summary(run_trials(cfg, spec.trials, options['jobs']))
                rows.append({
                    "label": config.label,
                    "threshold": cfg.estimator.threshold,
                    "step_size": cfg.step_size,
                    "delta": cfg.estimator.delta,
                    **summary,
                })
                logger.info("sweep %s %s -> final loss %.6g", config.label, point, summary["final_loss_mean"])
        path = write_sweep_csv(out / "sweep.csv", rows)
        self.stdout.write(self.style.SUCCESS(f"wrote {len(rows)} grid point(s) to {path}"))
