"""airs-wsr - Joint uplink/downlink weighted-sum-rate toolkit for distributed active IRSs."""

__version__ = "1.0.0"
__author__ = "andreicosmin02"
