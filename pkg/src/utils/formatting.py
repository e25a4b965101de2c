"""
Formatting Utility Functions

Unit conversions between dB/dBm and linear/mW, and number formatting for the
result files.
"""

FLOAT_FORMAT = "%.9g"


def dbm_to_mw(dbm: float) -> float:
    """
    Convert a power level in dBm to milliwatts.

    Args:
        dbm: Power in dBm

    Returns:
        Power in mW
    """
    return 10.0 ** (dbm / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def format_float(value: float) -> str:
    """Nine significant digits, the precision of every CSV column."""
    return FLOAT_FORMAT % value


def format_runtime(milliseconds: float) -> str:
    """
    Format a runtime for log messages.

    Args:
        milliseconds: Elapsed time in ms

    Returns:
        "850 ms" below one second, "12.3 s" below one minute, else "MM:SS"
    """
    if milliseconds < 1000:
        return f"{milliseconds:.0f} ms"
    seconds = milliseconds / 1000.0
    if seconds < 60:
        return f"{seconds:.1f} s"
    minutes, secs = divmod(int(round(seconds)), 60)
    return f"{minutes:02d}:{secs:02d}"
