"""Cadres Training and Prediction Commands.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging

import pandas as pd

from cadres.data import read_feature_frame
from cadres.eval import cadre_summary, density_rate, feature_relevance, tau_statistic
from cadres.optim import train
from cadres.serialize import load_model, save_model

from .base import CommandRunner


class TrainCommand(CommandRunner):
    """Train a cadre model on a CSV file and write it as JSON."""
    name = 'train'
    comment = 'fit a supervised cadre model'

    def _execute(self) -> None:
        out_fn = self.outputFile(self.require('out'))
        raw, scaled, scaler = self.loadStandardized()

        hp = self.hyperparams()
        cfg = self.train_config()
        model = train(scaled, hp, cfg, tag=self.name).with_scaler(scaler)

        save_model(model, out_fn)
        logging.info(f'<{self.name}> Wrote model to {out_fn}')

        # Cadre summaries report target means on the original scale
        summary_ds = scaled.with_values(scaled.features, raw.target)
        print(self.render(
            'train.txt.j2',
            model=model,
            loss=model.final_loss,
            density_rate=density_rate(model.params),
            tau=tau_statistic(model.params),
            relevance=feature_relevance(model.params, model.feature_names).to_dict('records'),
            cadres=cadre_summary(summary_ds, model.params, hp.gamma).to_dict('records'),
            filename=out_fn,
        ), end='')


class PredictCommand(CommandRunner):
    """Predict with a saved model and export memberships and cadres as CSV.

    Predictions are on the original target scale.
    """
    name = 'predict'
    comment = 'apply a saved cadre model'

    def _execute(self) -> None:
        model = load_model(self.require('model'))
        out_fn = self.outputFile(self.require('out'))
        X, row_ids = read_feature_frame(
            self.require('data'),
            model.feature_names,
            target_column=model.target_name,
        )

        G = model.memberships(X)
        frame = pd.DataFrame({'row_id': row_ids, 'prediction': model.predict(X)})
        for m in range(model.params.M):
            frame[f'g_{m + 1}'] = G[:, m]
        frame['cadre'] = model.assign(X) + 1

        frame.to_csv(out_fn, index=False)
        logging.info(f'<{self.name}> Wrote {len(frame)} predictions to {out_fn}')
