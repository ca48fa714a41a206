"""Cadres Bootstrap Quality Command.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging

from cadres.eval import bootstrap_quality
from cadres.serialize import save_report

from .base import CommandRunner

#: Bootstrap replicas when --bootstrap is not given
DEFAULT_REPLICAS = 10


class BootstrapCommand(CommandRunner):
    """Assess cadre stability with warm-started bootstrap models."""
    name = 'bootstrap'
    comment = 'bootstrap cadre quality'

    def _execute(self) -> None:
        _, scaled, _ = self.loadStandardized()
        hp = self.hyperparams()
        cfg = self.train_config()
        B = self.arg('bootstrap', DEFAULT_REPLICAS)

        report = bootstrap_quality(scaled, hp, cfg, B, cfg.seed, workers=self.workers)

        if self.arg('out'):
            out_fn = self.outputFile(self.arg('out'))
            save_report(report, hp, cfg.seed, out_fn)
            logging.info(f'<{self.name}> Wrote bootstrap report to {out_fn}')

        if self.arg('assignments'):
            table_fn = self.outputFile(self.arg('assignments'))
            report.assignment_table.to_frame().to_csv(table_fn, index=False)
            logging.info(f'<{self.name}> Wrote assignment table to {table_fn}')

        print(self.render('bootstrap.txt.j2', report=report, hp=hp), end='')
