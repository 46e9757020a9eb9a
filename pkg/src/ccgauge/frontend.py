"""Acquisition chain: sense resistor, per-channel ADC quantization, NTC rounding."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .gauge import Sample


@dataclass(frozen=True)
class AdcModel:
    bits: int = 10
    lsb: float = 0.001  # V
    noise_lsb: float = 0.0  # rms input noise, in LSB

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if not self.lsb > 0:
            raise ValueError("lsb must be positive")
        if self.noise_lsb < 0:
            raise ValueError("noise_lsb must be non-negative")

    @property
    def top_code(self) -> int:
        return 2**self.bits - 1

    @property
    def full_scale(self) -> float:
        return self.top_code * self.lsb


@dataclass(frozen=True)
class SenseCircuit:
    r_sens: float = 0.1  # ohm

    def __post_init__(self):
        if not self.r_sens > 0:
            raise ValueError("r_sens must be positive")

    def dissipation(self, i_ma: float) -> float:
        """Power burnt in the sense resistor, in W."""
        return (i_ma / 1000.0) ** 2 * self.r_sens


def quantize(v: float, adc: AdcModel, saturate: bool = True) -> float:
    """Round ``v`` to the nearest code (ties to even).

    With ``saturate=False`` the code range is unbounded, which stands in for
    the scaling network that brings battery-level voltages into the ADC span.
    """
    code = round(v / adc.lsb)
    if saturate:
        code = min(max(code, 0), adc.top_code)
    return code * adc.lsb


def sense_current(
    v_packplus: float,
    v_bat: float,
    circuit: SenseCircuit,
    adc: AdcModel,
    saturate: bool = True,
) -> float:
    """Current in mA from two independently quantized resistor terminals."""
    dv = quantize(v_packplus, adc, saturate) - quantize(v_bat, adc, saturate)
    # snap to the code grid so that equal code differences give equal currents
    dv = round(dv / adc.lsb) * adc.lsb
    return dv / circuit.r_sens * 1000.0


def read_temperature(temp: float) -> float:
    """NTC reading, resolved to 1 degC."""
    return float(round(temp))


def measure(
    t: float,
    v_terminal: float,
    i_true: float,
    temp: float,
    circuit: SenseCircuit | None = None,
    adc: AdcModel | None = None,
    rng: random.Random | None = None,
) -> Sample:
    """Build the sample the gauge sees from the cell's true outputs.

    ``adc=None`` is an exact, infinitely fine front-end. The battery-side
    channels are not clipped at the ADC top code.
    """
    if adc is None:
        return Sample(t, i_true, v_terminal, temp)
    circuit = circuit or SenseCircuit()
    v_packplus = v_terminal + i_true * circuit.r_sens / 1000.0
    if adc.noise_lsb > 0:
        rng = rng or random.Random(0)
        sigma = adc.noise_lsb * adc.lsb
        v_packplus += rng.gauss(0.0, sigma)
        v_terminal += rng.gauss(0.0, sigma)
    return Sample(
        t,
        sense_current(v_packplus, v_terminal, circuit, adc, saturate=False),
        quantize(v_terminal, adc, saturate=False),
        read_temperature(temp),
    )
