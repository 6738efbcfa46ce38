#!/usr/bin/env python
import argparse
import logging
import os
import sys
from typing import List, Optional

from .acceptance import REPRODUCTIONS, reproduce
from .agent import ALGORITHMS
from .config_handler import ConfigHandler, ConfigValidationError
from .csv_handler import emit_csv, emit_sweep_csv
from .environments import ENVIRONMENTS
from .experiment import run_experiment, sweep_alpha

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_ACCEPTANCE = 3

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for config validation here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def setup_logging(verbose: bool = False, log_file: Optional[str] = None) -> None:
    """
    # Configure root logging for the command-line tool
    # verbose: DEBUG instead of INFO
    # log_file: additional log file (optional)
    """
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Base seed (overrides config file)')
    common.add_argument('--runs', type=int, default=None, help='Number of independent runs (overrides config file)')
    common.add_argument('--out', type=str, default=None, help='Output CSV path, or directory for reproduce')
    common.add_argument('--parallel', type=int, default=None, help='Maximum number of worker processes')
    common.add_argument('--log_file', type=str, default=None, help='Also write logs to this file')
    common.add_argument('--verbose', action='store_true', default=False, help='Enable debug logging')

    parser = _ArgumentParser(description='Q(sigma) Experiment Manager')
    sub = parser.add_subparsers(dest='command', parser_class=_ArgumentParser)
    run = sub.add_parser('run', parents=[common], help='Run the experiment(s) of a config file and write CSV')
    run.add_argument('config', type=str, help='Path to experiment config file (INI format)')
    sweep = sub.add_parser('sweep', parents=[common], help='Step-size sweep over the alphas of a config file')
    sweep.add_argument('config', type=str, help='Path to experiment config file (INI format)')
    sub.add_parser('list-envs', parents=[common], help='List available environments')
    sub.add_parser('list-algorithms', parents=[common], help='List available algorithms')
    repro = sub.add_parser('reproduce', parents=[common], help='Run a checked-in experiment and check its results')
    repro.add_argument('experiment', choices=REPRODUCTIONS)
    create = sub.add_parser('create-config', parents=[common], help='Create a default configuration file')
    create.add_argument('path', type=str, help='Where to write the config file')
    return parser


def output_path(base: str, variant: str, multiple: bool, suffix: str = '') -> str:
    """
    # CSV path of one variant: base itself for a single config, <stem>_<variant><suffix>.csv otherwise
    """
    stem, ext = os.path.splitext(base)
    if not multiple and not suffix:
        return base
    return f"{stem}{'_' + variant if multiple else ''}{suffix}{ext or '.csv'}"


def _configs(args: argparse.Namespace):
    handler = ConfigHandler(args.config)
    return handler.experiment_configs(runs=args.runs, seed=args.seed)


def _default_output(config_file: str, configured: str) -> str:
    if configured:
        return configured
    return os.path.join('results', os.path.splitext(os.path.basename(config_file))[0] + '.csv')


def command_run(args: argparse.Namespace) -> int:
    configs = _configs(args)
    for name, config in configs:
        stats = run_experiment(config, args.parallel)
        path = output_path(args.out or _default_output(args.config, config.output), name, len(configs) > 1)
        emit_csv(stats, path)
        mean, stderr = stats.overall_mean
        print(f"{name}: 평균 {mean:.6g} (표준오차 {stderr:.3g}), 마지막 이동 평균 "
              f"{stats.moving_average[-1]:.6g} -> {path}")
    return EXIT_OK


def command_sweep(args: argparse.Namespace) -> int:
    configs = _configs(args)
    for name, config in configs:
        sweep = sweep_alpha(config, workers=args.parallel)
        path = output_path(args.out or _default_output(args.config, config.output), name,
                           len(configs) > 1, '_sweep')
        emit_sweep_csv(sweep, path)
        print(f"[{name}]")
        print(sweep.to_string(index=False))
    return EXIT_OK


def command_reproduce(args: argparse.Namespace) -> int:
    passed, checks, summary = reproduce(args.experiment, workers=args.parallel, runs=args.runs,
                                        seed=args.seed, out_dir=args.out)
    print(summary)
    print()
    for check in checks:
        print(f"[{'PASS' if check.passed else 'FAIL'}] {check.name}: {check.detail}")
    if not passed:
        logger.error(f"재현 실험 {args.experiment}의 수용 기준을 통과하지 못했습니다.")
        return EXIT_ACCEPTANCE
    return EXIT_OK


def command_create_config(args: argparse.Namespace) -> int:
    if ConfigHandler().create_default_config(args.path):
        logger.info(f"기본 설정 파일 생성 완료: {args.path}")
        return EXIT_OK
    logger.error(f"기본 설정 파일 생성 실패: {args.path}")
    return EXIT_USAGE


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    # Command-line entry point returning an exit code
    # 0 success, 1 usage error, 2 config validation error, 3 acceptance failure
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"오류: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    setup_logging(args.verbose, args.log_file)
    if args.parallel is not None and args.parallel < 1:
        logger.error(f"--parallel 값은 1 이상이어야 합니다: {args.parallel}")
        return EXIT_USAGE

    try:
        if args.command == 'list-envs':
            print('\n'.join(ENVIRONMENTS))
            return EXIT_OK
        if args.command == 'list-algorithms':
            print('\n'.join(ALGORITHMS))
            return EXIT_OK
        if args.command == 'run':
            return command_run(args)
        if args.command == 'sweep':
            return command_sweep(args)
        if args.command == 'reproduce':
            return command_reproduce(args)
        return command_create_config(args)
    except ConfigValidationError as e:
        logger.error(f"설정 오류: {e}")
        print(f"설정 오류: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"파일 입출력 오류: {e}")
        return EXIT_USAGE


def main():
    """
    # Main entry point
    """
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
