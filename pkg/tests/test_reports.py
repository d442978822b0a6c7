"""
Tests for the report writers
"""
import io
import json
import math

import numpy as np

from symstress.analysis import ConvergenceRow
from symstress.reports import dumps, format_float, infsup_table, write_csv, write_dat, write_json

ROWS = [
    ConvergenceRow(m=1, h=1.0, e_sigma_l2=0.5, e_sigma_div=0.25, e_sigma_hdiv=0.75, e_u_l2=0.125),
    ConvergenceRow(m=2, h=0.5, error="singular"),
]


class TestFormatFloat:
    """Tests for format_float"""

    def test_formats(self):
        """Test fixed exponent format, integers and missing values"""
        assert format_float(0.5) == "5.000000000000e-01"
        assert format_float(4) == "4"
        assert format_float(np.int64(8)) == "8"
        assert format_float(None) == ""
        assert format_float(math.nan, missing="NaN") == "NaN"


class TestWriters:
    """Tests for the CSV, gnuplot and JSON writers"""

    def test_csv(self):
        """Test the header and blank cells for missing values"""
        stream = io.StringIO()
        write_csv(ROWS, stream)
        lines = stream.getvalue().splitlines()

        assert lines[0] == "m,h,e_sigma_l2,e_sigma_div,e_sigma_hdiv,e_u_l2,rate_hdiv,rate_u,rate_sigma_l2,beta"
        assert lines[1].startswith("1,1.000000000000e+00,5.000000000000e-01")
        assert lines[2] == "2,5.000000000000e-01,,,,,,,,"

    def test_dat(self):
        """Test NaN placeholders"""
        stream = io.StringIO()
        write_dat(ROWS, stream)
        lines = stream.getvalue().splitlines()

        assert lines[0].startswith("# m h ")
        assert lines[2].split()[2] == "NaN"

    def test_json_nan_is_null(self):
        """Test non-finite values and numpy types"""
        stream = io.StringIO()
        write_json({"a": math.nan, "b": np.float64(1.5), "c": np.arange(3), "d": math.inf}, stream)

        assert json.loads(stream.getvalue()) == {"a": None, "b": 1.5, "c": [0, 1, 2], "d": None}

    def test_json_nested_nan_is_null(self):
        """Test non-finite values inside arrays and lists"""
        stream = io.StringIO()
        write_json({"sigma": np.array([[1.0, np.nan], [np.inf, 2.0]]), "rows": [{"e": [math.nan, 0.5]}]}, stream)
        text = stream.getvalue()

        assert "NaN" not in text and "Infinity" not in text
        assert json.loads(text) == {"sigma": [[1.0, None], [None, 2.0]], "rows": [{"e": [None, 0.5]}]}

    def test_dumps_sorted(self):
        """Test keys are sorted"""
        assert dumps({"b": 1, "a": 2}).index('"a"') < dumps({"b": 1, "a": 2}).index('"b"')

    def test_infsup_table(self):
        """Test failed levels are marked"""
        table = infsup_table([{"m": 1, "h": 1.0, "beta": 0.25}, {"m": 2, "h": 0.5, "beta": None}])

        assert "2.500000000000e-01" in table
        assert table.splitlines()[-1].endswith("failed")
