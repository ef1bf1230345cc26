"""Numerical laboratory for echo chains in linearised resistive MHD around Couette flow."""

from .core import (
    GammaExponents,
    IntervalPartition,
    ModeIndex,
    PhysParams,
    SpectralWeight,
    coefficient_a,
    coefficient_b,
    gevrey_functional,
    interval_partition,
    x_norm,
)

__version__ = "0.1.0"

__all__ = [
    "GammaExponents",
    "IntervalPartition",
    "ModeIndex",
    "PhysParams",
    "SpectralWeight",
    "coefficient_a",
    "coefficient_b",
    "gevrey_functional",
    "interval_partition",
    "x_norm",
]
