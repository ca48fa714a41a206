"""Cadres Exception Classes.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

from typing import Optional


class CadresError(Exception):
    """Base Class for all Cadres Errors."""
    pass


class DataError(CadresError, ValueError):
    """Raised for invalid input files, shapes, or split sizes."""
    pass


class ModelError(CadresError, ValueError):
    """Raised for invalid cadre parameters or cadre indices."""
    pass


class DivergenceError(CadresError):
    """Raised when the training loss becomes non-finite.

    `last_finite_loss` holds the most recent finite full-data loss (or `None`
    if no finite loss was ever recorded) and `epoch` the epoch at which the
    divergence was detected.
    """
    def __init__(
        self,
        message: str,
        *,
        last_finite_loss: Optional[float] = None,
        epoch: Optional[int] = None,
    ):
        super().__init__(message)
        self.last_finite_loss = last_finite_loss
        self.epoch = epoch


class SelectionError(CadresError, ValueError):
    """Raised when cross-validation folds cannot be trained."""
    pass


class BaselineError(CadresError, ValueError):
    """Raised when a comparator model cannot be fitted."""
    pass


class ModelFileError(CadresError):
    """Raised for unreadable model files or mismatched input columns."""
    pass
