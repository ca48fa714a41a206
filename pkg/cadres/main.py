"""Cadres Main Application.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import argparse
import logging
import os
import sys

from pydantic import ValidationError
from typing import Optional, Sequence

from cadres import __NAME__, __version__
from cadres.config import CadresConfig, load_config
from cadres.errors import CadresError

#: Flags accepted by each subcommand (beyond the global ones)
COMMAND_FLAGS = {
    'train': ('data', 'target', 'out', 'hyperparams', 'train'),
    'predict': ('model', 'data', 'out'),
    'cv': ('data', 'target', 'out', 'folds', 'hyperparams', 'train'),
    'bootstrap': ('data', 'target', 'out', 'bootstrap', 'assignments', 'hyperparams', 'train'),
    'benchmark': ('data', 'target', 'out', 'splits', 'folds', 'train_fraction', 'hyperparams', 'train'),
    'synth': ('out', 'n_per_group', 'seed', 'labels'),
}

#: Subcommands that cannot run without a target column
NEEDS_TARGET = ('train', 'cv', 'bootstrap', 'benchmark')

COMMAND_HELP = {
    'train': 'Train a cadre model and write it as JSON',
    'predict': 'Predict with a saved model, exporting memberships and cadres',
    'cv': 'Select hyperparameters by k-fold cross-validation',
    'bootstrap': 'Assess cadre stability by bootstrap resampling',
    'benchmark': 'Compare against ridge baselines over random train/test splits',
    'synth': 'Generate the synthetic three-group dataset',
}


def _positive_int(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f'invalid int value: {value!r}')
    if n < 1:
        raise argparse.ArgumentTypeError(f'must be at least 1, got {n}')
    return n


def _add_flags(parser: argparse.ArgumentParser, command: str) -> None:
    flags = COMMAND_FLAGS[command]

    if 'data' in flags:
        parser.add_argument('--data', type=str, required=True, help='Input CSV file with a header row')
    if 'target' in flags:
        parser.add_argument('--target', type=str, required=command in NEEDS_TARGET, help='Target column name')
    if 'model' in flags:
        parser.add_argument('--model', type=str, required=True, help='Model JSON file written by "train"')
    if 'out' in flags:
        parser.add_argument(
            '--out', type=str, default=None, required=command in ('train', 'predict', 'synth'),
            help='Output file (relative to "cadres.output_dir" if set)',
        )

    if 'hyperparams' in flags:
        group = parser.add_argument_group('hyperparameters')
        group.add_argument('--cadres', type=int, default=None, metavar='M', help='Number of cadres')
        group.add_argument('--gamma', type=float, default=None, help='Cadre-assignment sharpness')
        group.add_argument('--lambda-d', type=float, default=None, help='Elastic net strength on d')
        group.add_argument('--lambda-w', type=float, default=None, help='Elastic net strength on W')
        group.add_argument('--alpha-d', type=float, default=None, help='Elastic net L1 mixing on d (default 0.95)')
        group.add_argument('--alpha-w', type=float, default=None, help='Elastic net L1 mixing on W (default 0.05)')

    if 'train' in flags:
        group = parser.add_argument_group('training')
        group.add_argument('--seed', type=int, default=None, help='Random seed')
        group.add_argument('--batch-size', type=int, default=None, help='Minibatch size')
        group.add_argument('--epochs', type=int, default=None, help='Maximum number of epochs')
        group.add_argument('--lr', type=float, default=None, help='Adam learning rate')

    if 'folds' in flags:
        parser.add_argument('--folds', type=int, default=None, help='Cross-validation folds')
    if 'splits' in flags:
        parser.add_argument('--splits', type=int, default=None, help='Number of random train/test splits')
    if 'train_fraction' in flags:
        parser.add_argument('--train-fraction', type=float, default=None, help='Training share of each split')
    if 'bootstrap' in flags:
        parser.add_argument('--bootstrap', type=int, default=None, metavar='B', help='Bootstrap replicas (default 10)')
    if 'assignments' in flags:
        parser.add_argument('--assignments', type=str, default=None, help='Write the cadre assignment table as CSV')
    if 'n_per_group' in flags:
        parser.add_argument('--n-per-group', type=int, default=None, help='Rows per synthetic group (default 100)')
    if 'seed' in flags and 'train' not in flags:
        parser.add_argument('--seed', type=int, default=None, help='Random seed')
    if 'labels' in flags:
        parser.add_argument('--labels', type=str, default=None, help='True-group sidecar CSV (default <out>.labels.csv)')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='cadres',
        description='Supervised Cadre Models: interpretable subpopulation regression',
    )
    parser.add_argument(
        '-c', '--config', type=str, default=None,
        help='Cadres configuration file (YAML)'
    )
    parser.add_argument(
        '-w', '--workers', type=_positive_int, default=None,
        help='Worker threads for cross-validation, bootstrap and benchmark runs'
    )
    parser.add_argument(
        '-v', '--verbose', action='count', default=0,
        help='Increase Verbosity Level (default is WARNING)'
    )
    parser.add_argument(
        '-V', '--version', action='store_true',
        help='Print Cadres version number and exit'
    )

    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    for command, help_text in COMMAND_HELP.items():
        _add_flags(subparsers.add_parser(command, help=help_text, description=help_text), command)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Cadres Main Entry Point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.version:
        print(f'{__NAME__} {__version__}')
        sys.exit(0)

    if not args.command:
        parser.print_usage(sys.stderr)
        print('cadres: error: a command is required', file=sys.stderr)
        sys.exit(2)

    # Load Configuration File
    config = CadresConfig()
    if args.config:
        if not os.path.exists(args.config):
            parser.error(f'configuration file {args.config} not found')
        config = load_config(args.config)
        if not config:
            sys.exit(2)

    # Initialize Logging Subsystem
    if args.verbose == 1:
        log_level = logging.INFO
    elif args.verbose >= 2:
        log_level = logging.DEBUG
    elif args.config:
        log_level = config.cadres.log_level.upper()
        if log_level not in logging.getLevelNamesMapping():
            parser.error(f'invalid value for "cadres.log_level": {config.cadres.log_level}')
    else:
        log_level = logging.WARNING

    from .logging import init_logging
    logger = init_logging(log_level)
    logger.info(f'{__NAME__} {__version__} Started')

    from .commands import load_runner
    try:
        runner = load_runner(args.command, args, config)
        runner.run()

    except ValidationError as exc:
        logging.error(f'Invalid settings: {exc}')
        sys.exit(2)

    except CadresError as exc:
        logging.error(str(exc))
        sys.exit(1)

    logging.info(f'{__NAME__} Run Complete')
    return 0
