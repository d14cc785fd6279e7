import logging
import logging.handlers
import queue
import sys
import atexit
from src.config.settings import settings

# One listener thread owns stderr; module loggers only enqueue records.
_log_queue = queue.Queue(-1)
_queue_handler = logging.handlers.QueueHandler(_log_queue)
_console_handler = logging.StreamHandler(sys.stderr)
_console_handler.setFormatter(logging.Formatter(settings.LOG_FORMAT))

_listener = logging.handlers.QueueListener(_log_queue, _console_handler)
_listener.start()
atexit.register(_listener.stop)

_configured = set()


def setup_logging(name: str) -> logging.Logger:
    """
    Module logger writing through the shared queue at settings.LOG_LEVEL.
    """
    logger = logging.getLogger(name)
    if name in _configured:
        return logger

    logger.setLevel(settings.LOG_LEVEL)
    logger.addHandler(_queue_handler)
    logger.propagate = False
    _configured.add(name)
    return logger


def set_level(level: str) -> None:
    """Re-level every logger created by setup_logging (the CLI's --verbose)."""
    for name in _configured:
        logging.getLogger(name).setLevel(level)


class NumericWarningFilter(logging.Filter):
    """
    Drops numpy overflow and invalid-value warnings raised while long words are
    evaluated in floating point; those words are already counted as skipped.
    """
    def filter(self, record):
        msg = record.getMessage()
        return not ("overflow encountered" in msg or "invalid value encountered" in msg)


def capture_numeric_warnings() -> None:
    """Route Python warnings through the queue, minus the overflow chatter."""
    logging.captureWarnings(True)
    setup_logging("py.warnings").addFilter(NumericWarningFilter())
