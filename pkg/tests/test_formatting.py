"""Tests for formatting utilities."""

import pytest

from src.utils.formatting import db_to_linear, dbm_to_mw, format_float, format_runtime


class TestDbmToMw:
    """Tests for dbm_to_mw function."""

    def test_zero_dbm(self):
        assert dbm_to_mw(0.0) == 1.0

    def test_twenty_dbm(self):
        assert dbm_to_mw(20.0) == pytest.approx(100.0)

    def test_minus_eighty_dbm(self):
        assert dbm_to_mw(-80.0) == pytest.approx(1e-8)


class TestDbToLinear:
    def test_minus_thirty_db(self):
        # reference gain at 1 m
        assert db_to_linear(-30.0) == pytest.approx(1e-3)


class TestFormatFloat:
    def test_nine_significant_digits(self):
        assert format_float(1.0 / 3.0) == "0.333333333"

    def test_integer_valued(self):
        assert format_float(20.0) == "20"


class TestFormatRuntime:
    """Tests for format_runtime function."""

    def test_milliseconds(self):
        assert format_runtime(850) == "850 ms"

    def test_seconds(self):
        assert format_runtime(12_340) == "12.3 s"

    def test_minutes_and_seconds(self):
        assert format_runtime(125_000) == "02:05"
