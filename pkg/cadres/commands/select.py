"""Cadres Cross-Validation Command.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging

from cadres.select import cross_validate

from .base import CommandRunner


class CrossValidateCommand(CommandRunner):
    """Grid-search hyperparameters by k-fold cross-validation.

    The grid comes from the configuration file; flags for single
    hyperparameters set the fields the grid does not cover.
    """
    name = 'cv'
    comment = 'select hyperparameters by cross-validation'

    def _execute(self) -> None:
        _, scaled, _ = self.loadStandardized()
        folds = self.arg('folds', self._config.benchmark.folds)

        best, table = cross_validate(
            scaled,
            self._config.grid,
            folds,
            self.train_config(),
            base=self.hyperparams(),
            workers=self.workers,
        )

        if self.arg('out'):
            out_fn = self.outputFile(self.arg('out'))
            table.to_csv(out_fn, index=False)
            logging.info(f'<{self.name}> Wrote cross-validation table to {out_fn}')

        print(self.render('cv.txt.j2', best=best, folds=folds, rows=table.to_dict('records')), end='')
