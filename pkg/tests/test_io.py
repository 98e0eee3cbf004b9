import numpy as np
import pytest

from mgfnorm.errors import ParseError
from mgfnorm.garch import benchmark_design
from mgfnorm.io import (format_params_csv, format_sample_csv, parse_params, parse_sample_csv,
                        read_sample_csv)


def test_header_and_blank_lines():
    x = parse_sample_csv("a,b\n1,2\n\n3.5,-4e-3\n")
    assert x.tolist() == [[1.0, 2.0], [3.5, -0.004]]


def test_ragged_row_names_line():
    with pytest.raises(ParseError, match="line 3"):
        parse_sample_csv("a,b\n1,2\n3\n")


@pytest.mark.parametrize("bad", ["x", "nan", "inf"])
def test_bad_value_names_line_and_column(bad):
    with pytest.raises(ParseError, match="line 2, column 2"):
        parse_sample_csv(f"1,2\n3,{bad}\n")


def test_empty_input():
    with pytest.raises(ParseError):
        parse_sample_csv("a,b\n\n")


def test_missing_file(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        read_sample_csv(tmp_path / "absent.csv")


def test_sample_round_trip_is_exact():
    x = np.random.default_rng(0).standard_normal((20, 3))
    assert np.array_equal(parse_sample_csv(format_sample_csv(x, ["x1", "x2", "x3"])), x)


def test_params_round_trip_both_formats():
    p = benchmark_design(2, 0.4, 0.3)
    assert parse_params(format_params_csv(p)).to_record() == p.to_record()
    assert parse_params(p.to_json()).to_record() == p.to_record()
    assert parse_params(format_params_csv(p).splitlines()[1]).to_record() == p.to_record()


def test_bad_params():
    with pytest.raises(ParseError, match="line 1"):
        parse_params("2,1,1,0.1,abc")
    with pytest.raises(ParseError, match="needs 14 values"):
        parse_params("2,1,1,0.1,0.1")
    with pytest.raises(ParseError, match="JSON"):
        parse_params('{"d": 1, "p": 1}')
    with pytest.raises(ParseError, match="JSON"):
        parse_params('{"d": 1,')
