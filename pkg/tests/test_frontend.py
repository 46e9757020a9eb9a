import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ccgauge.frontend import AdcModel, SenseCircuit, measure, quantize, read_temperature, sense_current

ADC = AdcModel()
SENSE = SenseCircuit()


class TestQuantize:
    def test_rounds_to_nearest(self):
        assert quantize(3.7004, ADC, saturate=False) == pytest.approx(3.700, abs=1e-12)

    def test_fixed_point(self):
        assert quantize(0.512, ADC) == pytest.approx(0.512, abs=1e-15)

    def test_saturates_at_top_code(self):
        assert quantize(2.0, ADC) == pytest.approx(1.023)
        assert quantize(-0.5, ADC) == 0.0

    def test_ties_to_even(self):
        assert quantize(0.0025, AdcModel(lsb=0.001)) in (pytest.approx(0.002),)

    @given(st.floats(0, 1.023))
    def test_error_bound(self, v):
        assert abs(quantize(v, ADC) - v) <= ADC.lsb / 2 + 1e-12

    @given(st.floats(0, 5))
    def test_idempotent(self, v):
        once = quantize(v, ADC, saturate=False)
        assert quantize(once, ADC, saturate=False) == once

    def test_zero_mean_on_dithered_input(self):
        rng = np.random.default_rng(2024)
        base = rng.integers(100, 900, size=100_000) * ADC.lsb
        v = base + rng.uniform(-0.5, 0.5, size=100_000) * ADC.lsb
        err = np.array([quantize(x, ADC) for x in v]) - v
        assert abs(err.mean()) < 0.01 * ADC.lsb

    def test_rejects_bad_model(self):
        with pytest.raises(ValueError):
            AdcModel(bits=0)
        with pytest.raises(ValueError):
            AdcModel(lsb=0)


class TestSenseCurrent:
    def test_one_lsb_is_10_ma(self):
        assert sense_current(0.501, 0.500, SENSE, ADC) == pytest.approx(10.0)

    def test_equal_terminals(self):
        assert sense_current(0.7, 0.7, SENSE, ADC) == 0.0

    def test_full_charge_current(self):
        i = sense_current(4.14, 3.70, SENSE, ADC, saturate=False)
        assert i == pytest.approx(4400.0)
        assert SENSE.dissipation(i) == pytest.approx(1.936)

    @given(st.floats(3.0, 4.3), st.floats(-5000, 5000))
    def test_error_bound(self, v, i):
        measured = sense_current(v + i * SENSE.r_sens / 1000, v, SENSE, ADC, saturate=False)
        assert abs(measured - i) <= ADC.lsb / SENSE.r_sens * 1000 + 1e-6


class TestMeasure:
    def test_ideal_passthrough(self):
        s = measure(5.0, 3.71234, 123.4, 24.6)
        assert (s.t, s.v_bat, s.i_bat, s.temp) == (5.0, 3.71234, 123.4, 24.6)

    def test_zero_current(self):
        assert measure(0, 3.8123, 0.0, 25, SENSE, ADC).i_bat == 0.0

    def test_sub_lsb_current_invisible(self):
        assert measure(0, 3.8, 5.0, 25, SENSE, ADC).i_bat == 0.0

    def test_ten_ma_visible(self):
        assert measure(0, 3.8, 10.0, 25, SENSE, ADC).i_bat == pytest.approx(10.0)

    def test_voltage_and_temperature(self):
        s = measure(0, 3.71234, 0.0, 24.6, SENSE, ADC)
        assert s.v_bat == pytest.approx(3.712)
        assert s.temp == 25.0
        assert read_temperature(-3.4) == -3.0

    def test_noise_is_seeded(self):
        adc = AdcModel(noise_lsb=2.0)
        a = [measure(k, 3.8, 500.0, 25, SENSE, adc, random.Random(7)) for k in range(3)]
        b = [measure(k, 3.8, 500.0, 25, SENSE, adc, random.Random(7)) for k in range(3)]
        assert a == b
