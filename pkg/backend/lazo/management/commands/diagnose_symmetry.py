# lazo/management/commands/diagnose_symmetry.py
"""
python manage.py diagnose_symmetry --config configs/lqr.json [--rounds 10] [--samples 40000] [--projections 4]

lazy 규칙(lazo_a / lazo_b)을 쓰는 방법마다 trial 0 을 지정한 라운드까지 돌려서 스냅샷을 잡고,
대척점 쌍으로 재사용 영역의 비대칭도를 잰다.

    <out>/<label>/symmetry_round_<t>.csv   샘플별 소속 여부 + 투영 좌표
    <out>/symmetry_summary.csv             (label, round) 별 비대칭도
"""
import logging
from dataclasses import replace

from lazo.diagnostics import symmetry_diagnostic
from lazo.exceptions import InvalidConfig
from lazo.export import write_symmetry_csv, write_symmetry_summary_csv
from lazo.management.base import ExperimentCommand
from lazo.numerics import make_rng
from lazo.optimizer import run

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = "Measure antipodal asymmetry of the lazy reuse region at frozen rounds."

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--rounds', type=int, nargs='+', default=None,
                            help='round indices to freeze (default: diagnostics.symmetry_rounds)')
        parser.add_argument('--samples', type=int, default=None, help='number of directions N (even)')
        parser.add_argument('--projections', type=int, default=None, help='number of random 2-D projections')

    def execute_spec(self, spec, out, options):
        diag = spec.diagnostics
        rounds = tuple(options['rounds'] or diag.symmetry_rounds)
        samples = options['samples'] or diag.symmetry_samples
        projections = diag.projections if options['projections'] is None else options['projections']
        if not rounds:
            raise InvalidConfig("no rounds to diagnose")
        if any(t < 0 for t in rounds):
            raise InvalidConfig(f"rounds must be non-negative, got {list(rounds)}")

        summary = []
        for config in spec.runs:
            if config.estimator.rule is None or config.estimator.is_multipoint:
                logger.warning("%s: variant %s has no single-point lazy rule, skipped",
                               config.label, config.estimator.variant)
                continue
            horizon = max(config.horizon, max(rounds))
            trajectory = run(replace(config, horizon=horizon), trial=0, snapshot_rounds=rounds)
            for snapshot in trajectory.snapshots:
                rng = make_rng(config.seed, 0, "projection", stream=snapshot.t)
                report = symmetry_diagnostic(snapshot, config.estimator, samples, projections, rng)
                write_symmetry_csv(out / config.label / f"symmetry_round_{snapshot.t}.csv", report)
                summary.append({
                    "label": config.label,
                    "round": report.round_index,
                    "samples": report.samples,
                    "member_fraction": report.member_fraction,
                    "asymmetry_score": report.asymmetry_score,
                })
                self.stdout.write(f"{config.label} round {report.round_index}: "
                                  f"asymmetry {report.asymmetry_score:.4f}")
        write_symmetry_summary_csv(out / "symmetry_summary.csv", summary)
        self.stdout.write(self.style.SUCCESS(f"wrote {out}"))
