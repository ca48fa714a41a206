"""Cadres Logging Configuration.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging
import sys

from typing import TextIO

DEFAULT_FORMAT = '[%(asctime)s] %(color)s%(levelname)s in %(package)s: %(message)s%(color_reset)s'

# Log Colors
GREY = "\x1b[30;20m"
GREEN = "\x1b[32;20m"
YELLOW = "\x1b[33;20m"
RED = "\x1b[31;20m"
BOLD_RED = "\x1b[31;1m"
RESET = "\x1b[0m"

COLORS = {
    logging.DEBUG: GREY,
    logging.INFO: GREEN,
    logging.WARNING: YELLOW,
    logging.ERROR: RED,
    logging.CRITICAL: BOLD_RED,
}


class PackageInjectorMixin(object):
    """Inject the dotted module path of the logging call into the record.

    Records from module-level `logging.info()` calls carry the root logger's
    name, so the path is rebuilt from `record.pathname` relative to the
    `cadres` package directory and cached per file.
    """
    def _injectPackage(self, record: logging.LogRecord) -> logging.LogRecord:
        if not hasattr(self, '_package_cache'):
            self._package_cache = dict()

        if record.pathname in self._package_cache:
            record.package = self._package_cache[record.pathname]
            return record

        parts = record.pathname.replace('\\', '/').rsplit('/cadres/', 1)
        if len(parts) == 2 and parts[1].endswith('.py'):
            module = parts[1][:-3].replace('/', '.')
            package = 'cadres' if module == '__init__' else f'cadres.{module}'
        else:
            package = record.module

        self._package_cache[record.pathname] = package
        record.package = package
        return record


class CadresLogFormatter(logging.Formatter, PackageInjectorMixin):
    """Cadres Logging Formatter.

    Renders log messages with the dotted module path, in color when the
    output stream is a terminal.
    """
    def __init__(self, fmt: str = DEFAULT_FORMAT, *, use_color: bool = True):
        super().__init__(fmt)
        self._use_color = use_color

    def format(self, record: logging.LogRecord) -> str:
        record = self._injectPackage(record)
        if self._use_color:
            record.color = COLORS.get(record.levelno, GREY)
            record.color_reset = RESET
        else:
            record.color = ''
            record.color_reset = ''

        return super().format(record)


def init_logging(level: int | str, stream: TextIO = None) -> logging.Logger:
    """Initialize the Logging Subsystem.

    Calling this again replaces the handler installed by the previous call.
    """
    stream = stream or sys.stderr
    logger = logging.getLogger()
    logger.setLevel(level)

    for h in list(logger.handlers):
        if getattr(h, '_cadres_handler', False):
            logger.removeHandler(h)

    use_color = hasattr(stream, 'isatty') and stream.isatty()
    handler = logging.StreamHandler(stream)
    handler.setLevel(level)
    handler.setFormatter(CadresLogFormatter(DEFAULT_FORMAT, use_color=use_color))
    handler._cadres_handler = True

    logger.addHandler(handler)
    logger.debug('Logging Initialized')

    return logger
