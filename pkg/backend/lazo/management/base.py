# lazo/management/base.py
"""
실험 command 공통 베이스.

- 공통 플래그: --config PATH, --out DIR, --jobs N, --seed OVERRIDE
- 설정 오류(InvalidConfig, 잘못된 플래그)는 exit 1, 실행 중 오류(LazoError)는 exit 2 로 변환
"""
import logging
import sys
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError, CommandParser

from lazo.exceptions import InvalidConfig, LazoError
from lazo.specs import ExperimentSpec, load_experiment

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 1
EXIT_RUNTIME_ERROR = 2


class ExperimentParser(CommandParser):
    """사용법 오류 (모르는 플래그, 빠진 --config) 도 설정 오류 코드로 끝낸다."""

    def error(self, message):
        if self.called_from_command_line:
            self.print_usage(sys.stderr)
            self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")
        raise CommandError(f"Error: {message}", returncode=EXIT_CONFIG_ERROR)


class ExperimentCommand(BaseCommand):
    """설정 파일 하나를 읽어 ExperimentSpec 으로 실행하는 command."""

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.__class__ = ExperimentParser
        return parser

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='experiment config file (JSON)')
        parser.add_argument('--out', default=None, help='output directory (overrides config "output")')
        parser.add_argument('--jobs', type=int, default=settings.LAZO['DEFAULT_JOBS'],
                            help='number of worker processes for trials')
        parser.add_argument('--seed', type=int, default=None, help='override the config seed')
        parser.add_argument('--trials', type=int, default=None, help='override the config trial count')

    def handle(self, *args, **options):
        try:
            spec = load_experiment(options['config'], seed=options['seed'], output=options['out'],
                                   trials=options['trials'])
            if spec.output_dir is None:
                raise InvalidConfig(f"{options['config']}: no output directory (use --out or \"output\")")
            if options['jobs'] < 1:
                raise InvalidConfig(f"--jobs must be >= 1, got {options['jobs']}")
        except InvalidConfig as exc:
            raise CommandError(str(exc), returncode=EXIT_CONFIG_ERROR)

        out = Path(spec.output_dir)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CommandError(f"cannot create output directory {out}: {exc}", returncode=EXIT_CONFIG_ERROR)

        try:
            self.execute_spec(spec, out, options)
        except InvalidConfig as exc:
            raise CommandError(f"{options['config']}: {exc}", returncode=EXIT_CONFIG_ERROR)
        except LazoError as exc:
            raise CommandError(f"{options['config']}: {exc}", returncode=EXIT_RUNTIME_ERROR)

    def execute_spec(self, spec: ExperimentSpec, out: Path, options) -> None:
        raise NotImplementedError
