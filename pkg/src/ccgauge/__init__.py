"""Coulomb-counting fuel gauge for Li-ion packs, with a simulated cell and ADC front-end."""

from .gauge import (
    GaugeConfig,
    GaugeState,
    Mode,
    NonMonotonicTime,
    Sample,
    alpha,
    classify_mode,
    initialize,
    reported_soc,
    step,
)
from .ocv import DEFAULT_TABLE, OcvOutOfRange, OcvTable, ocv_from_soc, soc_from_ocv

__all__ = [
    "DEFAULT_TABLE",
    "GaugeConfig",
    "GaugeState",
    "Mode",
    "NonMonotonicTime",
    "OcvOutOfRange",
    "OcvTable",
    "Sample",
    "alpha",
    "classify_mode",
    "initialize",
    "ocv_from_soc",
    "reported_soc",
    "soc_from_ocv",
    "step",
]
