"""Ground-truth simulated Li-ion pack (OCV source plus series resistance).

The simulator integrates current exactly and is the reference the gauge
is scored against. Scenario generators yield ``(Sample, CellState)`` pairs
where the sample carries exact, unquantized values.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, replace
from typing import Iterator

from .gauge import HOURS_PER_MONTH, Sample
from .ocv import DEFAULT_TABLE, OcvTable, ocv_from_soc

# temperature (degC) -> fraction of the 25 degC capacity that can be released
CAPACITY_ANCHORS = ((-10.0, 0.6), (5.0, 0.8), (25.0, 1.0), (45.0, 0.95), (60.0, 0.9))

CV_TIME_CONSTANT = 600.0  # s


def capacity_factor(temp: float) -> float:
    temps = [t for t, _ in CAPACITY_ANCHORS]
    if temp <= temps[0]:
        return CAPACITY_ANCHORS[0][1]
    if temp >= temps[-1]:
        return CAPACITY_ANCHORS[-1][1]
    k = bisect.bisect_right(temps, temp)
    (t0, f0), (t1, f1) = CAPACITY_ANCHORS[k - 1], CAPACITY_ANCHORS[k]
    return f0 + (f1 - f0) * (temp - t0) / (t1 - t0)


@dataclass(frozen=True)
class CellState:
    q_true: float  # mAh
    q_capacity: float = 4400.0  # mAh at 25 degC
    r_internal: float = 0.05  # ohm
    temp: float = 25.0
    table: OcvTable = DEFAULT_TABLE

    def __post_init__(self):
        if not self.q_capacity > 0:
            raise ValueError("q_capacity must be positive")
        if self.r_internal < 0:
            raise ValueError("r_internal must be non-negative")
        if not 0 <= self.q_true <= self.capacity_bound * (1 + 1e-12):
            raise ValueError(f"q_true={self.q_true} outside [0, {self.capacity_bound}]")

    @property
    def capacity_bound(self) -> float:
        return self.q_capacity * capacity_factor(self.temp)

    @property
    def is_full(self) -> bool:
        return self.q_true >= self.capacity_bound

    @classmethod
    def at_soc(cls, soc: float, **kwargs) -> "CellState":
        cell = cls(q_true=0.0, **kwargs)
        return replace(cell, q_true=cell.capacity_bound * soc / 100.0)


def true_soc(cell: CellState) -> float:
    return 100.0 * cell.q_true / cell.capacity_bound


def open_circuit_voltage(cell: CellState) -> float:
    return ocv_from_soc(min(100.0, true_soc(cell)), cell.table)


def terminal_voltage(cell: CellState, i: float) -> float:
    return open_circuit_voltage(cell) + i * cell.r_internal / 1000.0


def apply_current(cell: CellState, i: float, dt: float) -> tuple[CellState, float]:
    """Push ``i`` mA through the cell for ``dt`` seconds.

    Returns the new state and the terminal voltage at the end of the step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    q = min(max(cell.q_true + i * dt / 3600.0, 0.0), cell.capacity_bound)
    cell = replace(cell, q_true=q)
    return cell, terminal_voltage(cell, i)


def set_temperature(cell: CellState, temp: float) -> CellState:
    """Change ambient temperature; charge above the new releasable bound is clipped."""
    bound = cell.q_capacity * capacity_factor(temp)
    return replace(cell, temp=temp, q_true=min(cell.q_true, bound))


def advance_storage(
    cell: CellState, hours: float, self_discharge_per_month: float = 0.05
) -> CellState:
    if hours < 0:
        raise ValueError("hours must be non-negative")
    loss = self_discharge_per_month / HOURS_PER_MONTH * cell.q_capacity * hours
    return replace(cell, q_true=max(0.0, cell.q_true - loss))


def cc_cv_charge(
    cell: CellState,
    i_cc: float,
    v_cv: float,
    i_taper: float,
    dt: float = 1.0,
    t0: float = 0.0,
    max_seconds: float | None = None,
) -> Iterator[tuple[Sample, CellState]]:
    """Constant-current bulk charge followed by a constant-voltage taper.

    The CV phase starts once the terminal voltage at ``i_cc`` would reach
    ``v_cv`` or the cell saturates. Its current decays exponentially while
    the terminal is held at ``v_cv``; the stream ends with the first sample
    at or below ``i_taper``.
    """
    if not i_cc >= i_taper > 0:
        raise ValueError("need i_cc >= i_taper > 0")
    n = 0
    cv_start = None
    while max_seconds is None or n * dt < max_seconds:
        if cv_start is None and (cell.is_full or terminal_voltage(cell, i_cc) >= v_cv):
            cv_start = t0 + n * dt
        n += 1
        t = t0 + n * dt
        if cv_start is None:
            cell, v = apply_current(cell, i_cc, dt)
            yield Sample(t, i_cc, v, cell.temp), cell
            continue
        i = i_cc * math.exp(-(t - cv_start) / CV_TIME_CONSTANT)
        cell, _ = apply_current(cell, i, dt)
        yield Sample(t, i, v_cv, cell.temp), cell
        if i <= i_taper:
            return


def constant_current_discharge(
    cell: CellState,
    i: float,
    v_cutoff: float,
    dt: float = 1.0,
    t0: float = 0.0,
    max_seconds: float | None = None,
) -> Iterator[tuple[Sample, CellState]]:
    """Discharge at ``i`` mA until the terminal voltage hits ``v_cutoff`` or the cell is empty."""
    if not i > 0:
        raise ValueError("discharge current must be positive")
    n = 0
    while max_seconds is None or n * dt < max_seconds:
        n += 1
        t = t0 + n * dt
        cell, v = apply_current(cell, -i, dt)
        yield Sample(t, -i, v, cell.temp), cell
        if v <= v_cutoff or cell.q_true == 0:
            return


def rest(
    cell: CellState,
    seconds: float,
    dt: float = 60.0,
    t0: float = 0.0,
    self_discharge_per_month: float = 0.05,
) -> Iterator[tuple[Sample, CellState]]:
    """Open-circuit storage sampled every ``dt`` seconds (last step may be shorter)."""
    steps = math.ceil(seconds / dt)
    for n in range(1, steps + 1):
        h = min(dt, seconds - (n - 1) * dt)
        t = t0 + min(n * dt, seconds)
        cell = advance_storage(cell, h / 3600.0, self_discharge_per_month)
        yield Sample(t, 0.0, open_circuit_voltage(cell), cell.temp), cell
