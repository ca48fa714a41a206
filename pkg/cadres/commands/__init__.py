"""Cadres Command Runners.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import argparse

from typing import Optional

from cadres.config import CadresConfig

from .base import CommandRunner
from .benchmark import BenchmarkCommand
from .bootstrap import BootstrapCommand
from .select import CrossValidateCommand
from .synth import SynthCommand
from .train import PredictCommand, TrainCommand

#: Mapping of subcommand name to `CommandRunner` subclass
COMMAND_CLASSES = {
    'train': TrainCommand,
    'predict': PredictCommand,
    'cv': CrossValidateCommand,
    'bootstrap': BootstrapCommand,
    'benchmark': BenchmarkCommand,
    'synth': SynthCommand,
}


def load_runner(
    command: str,
    args: argparse.Namespace,
    config: Optional[CadresConfig] = None,
) -> CommandRunner:
    """Create the Command Runner for a subcommand."""
    runner_cls = COMMAND_CLASSES.get(command.lower())
    if not runner_cls:
        raise KeyError(f'Command "{command}" is not supported')

    return runner_cls(args, config)
