"""
Tests for small helpers
"""
import logging

import click
import pytest

from symstress.logger import LogFormatter, configure_logger
from symstress.util import output_path, parse_float_list, sibling_path


class TestParseFloatList:
    """Tests for parse_float_list"""

    def test_values(self):
        """Test a comma separated list"""
        assert parse_float_list("1,1e3, 1e6") == [1.0, 1000.0, 1e6]

    def test_empty(self):
        """Test None and the empty string"""
        assert parse_float_list(None) == []
        assert parse_float_list("") == []

    def test_invalid(self):
        """Test a non-number"""
        with pytest.raises(ValueError):
            parse_float_list("1,abc")


class TestPaths:
    """Tests for sibling_path and output_path"""

    def test_sibling(self):
        """Test the extension is replaced"""
        assert sibling_path("out/conv.csv", ".json") == "out/conv.json"

    def test_output_path(self, tmp_path):
        """Test relative paths land in the output directory"""
        assert output_path("conv.csv", str(tmp_path)) == str(tmp_path / "conv.csv")
        assert output_path("-", str(tmp_path)) == "-"
        assert output_path(None, str(tmp_path)) is None
        assert output_path("/abs/conv.csv", str(tmp_path)) == "/abs/conv.csv"
        assert output_path("conv.csv", None) == "conv.csv"


class TestLogFormatter:
    """Tests for LogFormatter"""

    def record(self, message="hello"):
        return logging.LogRecord("symstress.analysis", logging.INFO, __file__, 10, message, None, None)

    def test_without_command(self):
        """Test records outside a command"""
        formatted = LogFormatter(color=False).format(self.record())

        assert "[INFO]" in formatted
        assert "[-]" in formatted
        assert formatted.endswith("hello")

    def test_multiline_is_indented(self):
        """Test continuation lines are indented"""
        formatted = LogFormatter(color=False).format(self.record("first\nsecond"))

        assert "\n    second" in formatted

    def test_inside_command(self):
        """Test the click command name is rendered"""
        with click.Context(click.Command("convergence"), info_name="convergence"):
            formatted = LogFormatter(color=False).format(self.record())

        assert "[convergence]" in formatted


class TestConfigureLogger:
    """Tests for configure_logger"""

    def test_application_logger(self, app):
        """Test the testing config sets one handler at WARNING"""
        assert app.logger.name == "symstress"
        assert len(app.logger.handlers) == 1
        assert app.logger.level == logging.WARNING
        assert not app.logger.propagate

    def test_library_loggers_propagate(self, app):
        """Test module loggers reach the application handler"""
        child = logging.getLogger("symstress.analysis")

        assert child.getEffectiveLevel() == logging.WARNING

    def test_reconfigure(self):
        """Test handlers are replaced rather than added"""
        logger = configure_logger(logging.getLogger("symstress-test"), "INFO")
        configure_logger(logger, "DEBUG")

        assert len(logger.handlers) == 1
        assert logger.level == logging.DEBUG
