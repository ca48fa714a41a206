"""Cadres Synthetic Data Command.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging
import os

import pandas as pd

from cadres.data import SYNTH_TARGET_FEATURES, gen_synthetic

from .base import CommandRunner

#: Rows per synthetic group when --n-per-group is not given
DEFAULT_N_PER_GROUP = 100


def labels_filename(data_fn: str) -> str:
    """Default label sidecar path: `data.csv` -> `data.labels.csv`."""
    stem, _ = os.path.splitext(data_fn)
    return f'{stem}.labels.csv'


class SynthCommand(CommandRunner):
    """Write the connectivity/polarizability example data and its true groups.

    The label sidecar has one row per data row with the 1-based group.
    """
    name = 'synth'
    comment = 'generate synthetic cadre data'

    def _execute(self) -> None:
        out_fn = self.outputFile(self.require('out'))
        labels_fn = self.outputFile(self.arg('labels') or labels_filename(out_fn))

        n_per_group = self.arg('n_per_group', DEFAULT_N_PER_GROUP)
        seed = self.arg('seed', 0)
        ds, labels = gen_synthetic(n_per_group, seed)

        ds.to_frame().to_csv(out_fn, index=False)
        pd.DataFrame({'row_id': ds.row_ids, 'group': labels + 1}).to_csv(labels_fn, index=False)
        logging.info(f'<{self.name}> Wrote {ds.N} rows to {out_fn} and labels to {labels_fn}')
        logging.info(f'<{self.name}> Use hyperparams.target_features = {list(SYNTH_TARGET_FEATURES)} to recover the groups')
