import curses
import logging
import sys

import click

__all__ = ["LogFormatter", "get_stream_handler", "configure_logger"]

LEVEL_COLORS = {
    logging.DEBUG: 4,  # Blue
    logging.INFO: 2,  # Green
    logging.WARNING: 3,  # Yellow
    logging.ERROR: 1,  # Red
    logging.CRITICAL: 1,
}


def _stderr_colors(colors):
    """Terminal escape sequences per level, or {} when stderr is not a colour terminal."""
    try:
        if not (hasattr(sys.stderr, "isatty") and sys.stderr.isatty()):
            return {}, ""
        curses.setupterm()
        if curses.tigetnum("colors") <= 0:
            return {}, ""
        fg_color = curses.tigetstr("setaf") or curses.tigetstr("setf") or b""
        escapes = {levelno: str(curses.tparm(fg_color, code), "ascii") for levelno, code in colors.items()}
        return escapes, str(curses.tigetstr("sgr0"), "ascii")
    except Exception:
        # no terminfo, redirected stream, ...
        return {}, ""


def _current_command():
    ctx = click.get_current_context(silent=True)
    return ctx.info_name if ctx is not None else None


class LogFormatter(logging.Formatter):
    """
    [time module:line] | [LEVEL] | [command] message

    `command` is the click command being run ("verify", "convergence", ...) or "-"
    outside one. Continuation lines and tracebacks are indented under the record.
    """

    DEFAULT_FORMAT = "%(color)s[%(asctime)s %(module)s:%(lineno)d] | [%(levelname)s] | [%(command)s]%(end_color)s %(message)s"
    DEFAULT_DATE_FORMAT = "%B %d, %Y %H:%M:%S %Z"

    def __init__(self, fmt=DEFAULT_FORMAT, datefmt=DEFAULT_DATE_FORMAT, color=True, colors=LEVEL_COLORS):
        super().__init__(datefmt=datefmt)
        self._fmt = fmt
        self._colors, self._normal = _stderr_colors(colors) if color else ({}, "")

    def format(self, record):
        try:
            record.message = record.getMessage()
        except Exception as e:
            record.message = "Bad message (%r): %r" % (e, record.__dict__)

        record.command = _current_command() or "-"
        record.asctime = self.formatTime(record, self.datefmt)
        record.color = self._colors.get(record.levelno, "")
        record.end_color = self._normal if record.color else ""

        formatted = self._fmt % record.__dict__
        if record.exc_info and not record.exc_text:
            record.exc_text = self.formatException(record.exc_info)
        if record.exc_text:
            formatted = formatted.rstrip() + "\n" + record.exc_text

        return formatted.replace("\n", "\n    ")


def get_stream_handler():
    handler = logging.StreamHandler()
    handler.setFormatter(LogFormatter())
    return handler


def configure_logger(logger: logging.Logger, level) -> logging.Logger:
    """
    Route `logger` (the application logger, named "symstress") to one stderr
    handler. Library modules log to "symstress.<module>" children and reach it
    by propagation.
    """
    logger.handlers = [get_stream_handler()]
    logger.setLevel(level)
    logger.propagate = False
    return logger
