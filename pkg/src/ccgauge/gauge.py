"""Improved Coulomb-counting state machine.

The gauge is a value: every operation returns a new :class:`GaugeState`
and leaves its input untouched. Currents are in mA (positive = charging),
charge in mAh, SOC and DOD in percent.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

from .ocv import DEFAULT_TABLE, OcvOutOfRange, OcvTable, soc_from_ocv

HOURS_PER_MONTH = 720.0


class NonMonotonicTime(ValueError):
    pass


class GaugeNotInitialized(RuntimeError):
    pass


class Mode(str, enum.Enum):
    CHARGE = "charge"
    DISCHARGE = "discharge"
    OPEN_CIRCUIT = "open_circuit"


@dataclass(frozen=True)
class Sample:
    t: float  # s
    i_bat: float  # mA, positive = charging
    v_bat: float  # V
    temp: float  # degC


@dataclass(frozen=True)
class GaugeConfig:
    q_rated: float = 4400.0
    sample_period: float = 1.0
    self_discharge_per_month: float = 0.05
    idle_current_threshold: float = 1.0
    taper_current: float = 10.0
    full_voltage: float = 4.2
    empty_cutoff_voltage: float = 3.3
    rest_time_for_ocv: float = 1800.0
    coulombic_efficiency: float = 1.0

    def __post_init__(self):
        if not self.q_rated > 0:
            raise ValueError("q_rated must be positive")
        if not self.sample_period > 0:
            raise ValueError("sample_period must be positive")
        if not 0 < self.coulombic_efficiency <= 1:
            raise ValueError("coulombic_efficiency must lie in (0, 1]")
        if self.self_discharge_per_month < 0:
            raise ValueError("self_discharge_per_month must be non-negative")
        if not 0 <= self.idle_current_threshold < self.taper_current:
            # a taper current inside the idle deadband could never be seen as charging
            raise ValueError("need 0 <= idle_current_threshold < taper_current")


@dataclass(frozen=True)
class GaugeState:
    mode: Mode = Mode.OPEN_CIRCUIT
    soc: float = 0.0
    dod: float = 100.0
    q_gained: float = 0.0
    q_lost: float = 0.0
    q_oc: float = 0.0
    storage_seconds: float = 0.0
    q_rated_est: float = 4400.0
    initialized: bool = False
    full_anchor: bool = False
    coarse: bool = False
    last_t: float = 0.0

    @property
    def remaining_mah(self) -> float:
        return self.soc / 100.0 * self.q_rated_est


def _with_soc(state: GaugeState, soc: float, **changes) -> GaugeState:
    soc = min(100.0, max(0.0, soc))
    return replace(state, soc=soc, dod=100.0 - soc, **changes)


def _with_dod(state: GaugeState, dod: float, **changes) -> GaugeState:
    dod = min(100.0, max(0.0, dod))
    return replace(state, soc=100.0 - dod, dod=dod, **changes)


def initialize(
    ocv: float,
    temp: float,
    config: GaugeConfig,
    table: OcvTable = DEFAULT_TABLE,
    t0: float = 0.0,
) -> GaugeState:
    """Start the gauge from a rested open-circuit voltage.

    Raises :class:`~ccgauge.ocv.OcvOutOfRange` when the voltage is not
    usable at this temperature.
    """
    soc = soc_from_ocv(ocv, temp, table)
    return _with_soc(
        GaugeState(q_rated_est=config.q_rated, initialized=True, last_t=t0), soc
    )


def initialize_with_fallback(
    ocv: float,
    temp: float,
    config: GaugeConfig,
    table: OcvTable = DEFAULT_TABLE,
    t0: float = 0.0,
) -> GaugeState:
    """Like :func:`initialize`, but never fails.

    An out-of-range voltage starts the gauge at 0 % (below the usable
    range) or 100 % (above it) with ``coarse`` set until the next
    full or empty anchor.
    """
    try:
        return initialize(ocv, temp, config, table, t0)
    except OcvOutOfRange as exc:
        soc = 0.0 if exc.below else 100.0
        state = GaugeState(q_rated_est=config.q_rated, initialized=True, coarse=True, last_t=t0)
        return _with_soc(state, soc)


def classify_mode(sample: Sample, config: GaugeConfig) -> Mode:
    if abs(sample.i_bat) <= config.idle_current_threshold:
        return Mode.OPEN_CIRCUIT
    return Mode.CHARGE if sample.i_bat > 0 else Mode.DISCHARGE


def delta_q(i_bat: float, dt: float) -> float:
    """Charge moved in one period at constant current, in mAh (signed)."""
    return i_bat * dt / 3600.0


def q_per_hour(state: GaugeState, config: GaugeConfig) -> float:
    return config.self_discharge_per_month * state.q_rated_est / HOURS_PER_MONTH


def apply_self_discharge_compensation(state: GaugeState) -> GaugeState:
    """Book the storage loss accumulated during open circuit."""
    if state.q_oc == 0 and state.storage_seconds == 0:
        return state
    q_oc = state.q_oc
    return _with_soc(
        state,
        state.soc - q_oc / state.q_rated_est * 100.0,
        q_lost=state.q_lost + q_oc,
        q_gained=max(0.0, state.q_gained - q_oc),
        q_oc=0.0,
        storage_seconds=0.0,
    )


def detect_full(sample: Sample, config: GaugeConfig) -> bool:
    return sample.v_bat >= config.full_voltage and 0 < sample.i_bat <= config.taper_current


def detect_empty(sample: Sample, config: GaugeConfig) -> bool:
    return sample.i_bat < 0 and sample.v_bat <= config.empty_cutoff_voltage


def recalibrate_full(state: GaugeState) -> GaugeState:
    """Anchor at 100 % and start measuring releasable capacity from here."""
    return _with_soc(state, 100.0, q_gained=0.0, q_lost=0.0, full_anchor=True, coarse=False)


def recalibrate_empty(state: GaugeState, config: GaugeConfig | None = None) -> GaugeState:
    """Anchor at 0 %.

    After an uninterrupted full-to-empty run the charge counted out of the
    cell becomes the new releasable-capacity estimate.
    """
    q_rated_est = state.q_rated_est
    if state.full_anchor and state.q_lost > 0:
        q_rated_est = state.q_lost
    return _with_soc(
        state, 0.0, q_lost=0.0, q_rated_est=q_rated_est, full_anchor=False, coarse=False
    )


def step(state: GaugeState, sample: Sample, config: GaugeConfig) -> GaugeState:
    """Advance the gauge by one measurement."""
    if not state.initialized:
        raise GaugeNotInitialized("initialize the gauge before stepping")
    dt = sample.t - state.last_t
    if not dt > 0:
        raise NonMonotonicTime(f"sample time {sample.t} does not follow {state.last_t}")

    mode = classify_mode(sample, config)
    if state.mode is Mode.OPEN_CIRCUIT and mode is not Mode.OPEN_CIRCUIT:
        state = apply_self_discharge_compensation(state)
    state = replace(state, mode=mode, last_t=sample.t)

    if mode is Mode.CHARGE:
        dq = config.coulombic_efficiency * delta_q(sample.i_bat, dt)
        anchor = state.full_anchor and state.q_lost == 0
        state = _with_soc(
            state,
            state.soc + dq / state.q_rated_est * 100.0,
            q_gained=state.q_gained + dq,
            full_anchor=anchor,
        )
        if detect_full(sample, config):
            state = recalibrate_full(state)
    elif mode is Mode.DISCHARGE:
        dq = abs(delta_q(sample.i_bat, dt))
        state = _with_dod(
            state, state.dod + dq / state.q_rated_est * 100.0, q_lost=state.q_lost + dq
        )
        if detect_empty(sample, config):
            state = recalibrate_empty(state, config)
    else:
        seconds = state.storage_seconds + dt
        hours = math.floor(seconds / 3600.0)
        q_oc = state.q_oc
        per_hour = q_per_hour(state, config)
        for _ in range(hours):
            q_oc += per_hour
        state = replace(state, q_oc=q_oc, storage_seconds=seconds - hours * 3600.0)
    return state


def alpha(temp: float) -> float:
    """Temperature weight for the displayed SOC (flat above 60 degC)."""
    if temp < -10:
        return 0.5
    if temp < 5:
        return 0.6
    if temp < 25:
        return 0.8
    if temp < 45:
        return 1.0
    return 0.9


def reported_soc(state: GaugeState, temp: float) -> float:
    if not state.initialized:
        raise GaugeNotInitialized("initialize the gauge before reading it")
    return min(100.0, max(0.0, alpha(temp) * state.soc))


def to_snapshot(state: GaugeState) -> str:
    lines = []
    for f in fields(state):
        value = getattr(state, f.name)
        if isinstance(value, Mode):
            text = value.value
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = format(float(value), ".17g")
        lines.append(f"{f.name}={text}")
    return "\n".join(lines) + "\n"


def from_snapshot(text: str) -> GaugeState:
    kinds = {f.name: f.type for f in fields(GaugeState)}
    values = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in kinds:
            raise ValueError(f"unknown snapshot key {key!r}")
        if key == "mode":
            values[key] = Mode(value)
        elif kinds[key] == "bool":
            if value not in ("true", "false"):
                raise ValueError(f"{key}: expected true/false, got {value!r}")
            values[key] = value == "true"
        else:
            values[key] = float(value)
    return GaugeState(**values)
