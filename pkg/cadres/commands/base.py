"""Cadres Command Runner Base Class.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import argparse
import logging
import math
import os

import jinja2

from typing import Any, Optional

from cadres.config import CadresConfig, Hyperparams, TrainConfig
from cadres.data import Dataset, Scaler, apply_scaler, fit_scaler, load_csv
from cadres.errors import CadresError

#: Command-line flags that override `Hyperparams` fields
HYPERPARAM_FLAGS = {
    'cadres': 'M',
    'gamma': 'gamma',
    'lambda_d': 'lambda_d',
    'lambda_w': 'lambda_W',
    'alpha_d': 'alpha_d',
    'alpha_w': 'alpha_W',
}

#: Command-line flags that override `TrainConfig` fields
TRAIN_FLAGS = {
    'seed': 'seed',
    'batch_size': 'batch_size',
    'epochs': 'max_epochs',
    'lr': 'lr',
}


def fmt_float(value: Any, digits: int = 4) -> str:
    """Jinja2 filter to format a number, rendering NaN as n/a."""
    if value is None:
        return 'n/a'
    value = float(value)
    if math.isnan(value):
        return 'n/a'
    return f'{value:.{digits}f}'


def template_env() -> jinja2.Environment:
    env = jinja2.Environment(
        loader=jinja2.PackageLoader('cadres'),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters['fmt'] = fmt_float
    return env


class CommandRunner(object):
    """Base Class for Cadres Command Runners.

    One subclass per subcommand; subclasses set `name` and `comment` and
    override `_execute()`. Settings resolve as command-line flag, then
    configuration file, then schema default.
    """
    name: str = None
    comment: Optional[str] = None

    def __init__(self, args: argparse.Namespace, config: Optional[CadresConfig] = None):
        self._args = args
        self._config = config or CadresConfig()
        self._base_dir = self._config.cadres.output_dir

    def _execute(self) -> None:
        """Run the actual command logic."""
        raise NotImplementedError()

    def arg(self, key: str, default: Any = None) -> Any:
        """Command-line value for `key`, or `default` if unset."""
        value = getattr(self._args, key, None)
        return default if value is None else value

    def require(self, key: str) -> Any:
        value = getattr(self._args, key, None)
        if value is None:
            raise CadresError(f'<{self.name}> --{key.replace("_", "-")} is required')
        return value

    def hyperparams(self) -> Hyperparams:
        """Configured hyperparameters with command-line overrides applied."""
        data = self._config.hyperparams.model_dump()
        for flag, field in HYPERPARAM_FLAGS.items():
            value = getattr(self._args, flag, None)
            if value is not None:
                data[field] = value
        return Hyperparams.model_validate(data)

    def train_config(self) -> TrainConfig:
        """Configured training settings with command-line overrides applied."""
        data = self._config.train.model_dump()
        for flag, field in TRAIN_FLAGS.items():
            value = getattr(self._args, flag, None)
            if value is not None:
                data[field] = value
        return TrainConfig.model_validate(data)

    @property
    def workers(self) -> int:
        return self.arg('workers', self._config.cadres.workers)

    def loadStandardized(self) -> tuple[Dataset, Dataset, Scaler]:
        """Load `--data` with `--target` and standardize it on itself.

        Returns the raw Dataset, the standardized Dataset and the Scaler.
        """
        raw = load_csv(self.require('data'), self.require('target'))
        scaler = fit_scaler(raw)
        logging.info(f'<{self.name}> Loaded {raw.N} rows with {raw.P} features')
        return raw, apply_scaler(raw, scaler), scaler

    def checkOutputFile(self, filename: str) -> str | None:
        """Check that an Output File should be writable.

        If the file is expected to be writable, its absolute path is returned. If
        the file will not be writable (i.e. it exists as a directory already),
        `None` is returned.
        """
        if self._base_dir:
            abs_fn = os.path.abspath(os.path.join(self._base_dir, filename))
        else:
            abs_fn = os.path.abspath(filename)

        out_dir = os.path.dirname(abs_fn)
        if not os.path.exists(out_dir):
            logging.info(f'<{self.name}> Output directory {out_dir} does not exist and will be created')
            os.makedirs(out_dir, exist_ok=True)

        if os.path.exists(abs_fn) and not os.path.isfile(abs_fn):
            logging.error(f'<{self.name}> Output file {abs_fn} is not a file')
            return None

        elif os.path.exists(abs_fn):
            logging.warning(f'<{self.name}> Output file {abs_fn} exists and will be overwritten')

        return abs_fn

    def outputFile(self, filename: str) -> str:
        """Like `checkOutputFile`, but raise if the file is not writable."""
        abs_fn = self.checkOutputFile(filename)
        if abs_fn is None:
            raise CadresError(f'<{self.name}> Cannot write output file {filename}')
        return abs_fn

    def render(self, template: str, **context) -> str:
        """Render a console report from a package template."""
        return template_env().get_template(template).render(**context)

    def run(self) -> None:
        """Run the Command Runner."""
        msg = f'Running {self.name}'
        if self.comment:
            msg += f' ({self.comment})'

        logging.info(msg)
        self._execute()
        logging.info(f'<{self.name}> Completed')

    def __repr__(self) -> str:
        return f'<{self.__class__.__name__} {self.name}>'
