"""Scenario runner: simulated cell -> measurement front-end -> gauge.

Scenario files are line oriented, one phase or setting per line::

    # 1C CC-CV charge of a 4400 mAh pack from empty
    initial_soc 0
    set adc.bits 10
    charge 4400 4.2 10          # i_cc [mA] v_cv [V] i_taper [mA] [max_s]
    discharge 4400 3.3          # i [mA] v_cutoff [V] [max_s]
    storage 720                 # hours
    temperature 0               # degC

``set`` keys are ``<section>.<field>`` with sections ``gauge``, ``cell``,
``adc``, ``sense`` and ``run`` (``run.storage_step`` is the open-circuit
sampling period in seconds).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

from . import cell as cellsim
from . import gauge as g
from .frontend import AdcModel, SenseCircuit, measure


class ScenarioInvalid(ValueError):
    pass


@dataclass(frozen=True)
class CcCvCharge:
    i_cc: float
    v_cv: float
    i_taper: float
    max_seconds: float | None = None


@dataclass(frozen=True)
class Discharge:
    i: float
    v_cutoff: float
    max_seconds: float | None = None


@dataclass(frozen=True)
class Storage:
    hours: float


@dataclass(frozen=True)
class SetTemperature:
    deg_c: float


Phase = Union[CcCvCharge, Discharge, Storage, SetTemperature]


@dataclass
class Scenario:
    phases: list[Phase]
    initial_soc: float = 0.0
    gauge: dict[str, float] = field(default_factory=dict)
    cell: dict[str, float] = field(default_factory=dict)
    adc: dict[str, float] = field(default_factory=dict)
    sense: dict[str, float] = field(default_factory=dict)
    storage_step: float = 60.0

    def validate(self) -> None:
        if not self.phases:
            raise ScenarioInvalid("scenario has no phases")
        if not 0 <= self.initial_soc <= 100:
            raise ScenarioInvalid(f"initial_soc {self.initial_soc} outside [0, 100]")
        if not self.storage_step > 0:
            raise ScenarioInvalid("run.storage_step must be positive")
        for k, phase in enumerate(self.phases, start=1):
            if isinstance(phase, CcCvCharge):
                if not phase.i_cc >= phase.i_taper > 0:
                    raise ScenarioInvalid(f"phase {k}: need i_cc >= i_taper > 0")
            elif isinstance(phase, Discharge):
                if not phase.i > 0:
                    raise ScenarioInvalid(f"phase {k}: discharge current must be positive")
            elif isinstance(phase, Storage):
                if phase.hours < 0:
                    raise ScenarioInvalid(f"phase {k}: storage hours must be >= 0")
            if getattr(phase, "max_seconds", None) is not None and phase.max_seconds <= 0:
                raise ScenarioInvalid(f"phase {k}: max_s must be positive")
        try:
            self.gauge_config()
            self.initial_cell()
            self.adc_model()
            self.sense_circuit()
        except (TypeError, ValueError) as exc:
            raise ScenarioInvalid(str(exc)) from None

    def gauge_config(self) -> g.GaugeConfig:
        return g.GaugeConfig(**self.gauge)

    def initial_cell(self) -> cellsim.CellState:
        return cellsim.CellState.at_soc(self.initial_soc, **self.cell)

    def adc_model(self) -> AdcModel:
        values = dict(self.adc)
        if "bits" in values:
            values["bits"] = int(values["bits"])
        return AdcModel(**values)

    def sense_circuit(self) -> SenseCircuit:
        return SenseCircuit(**self.sense)


_NOT_SETTABLE = ("table", "q_true")
_SECTIONS = {
    "gauge": g.GaugeConfig,
    "cell": cellsim.CellState,
    "adc": AdcModel,
    "sense": SenseCircuit,
}


def parse_scenario(text: str) -> Scenario:
    scenario = Scenario(phases=[])
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, *args = line.split()
        try:
            _apply_line(scenario, keyword, args)
        except ScenarioInvalid as exc:
            raise ScenarioInvalid(f"line {lineno}: {exc}") from None
        except ValueError:
            raise ScenarioInvalid(f"line {lineno}: bad number in {raw.strip()!r}") from None
    scenario.validate()
    return scenario


def _numbers(args: list[str], required: int, optional: int = 0) -> list[float]:
    if not required <= len(args) <= required + optional:
        raise ScenarioInvalid(f"expected {required} to {required + optional} arguments")
    return [float(a) for a in args]


def _apply_line(scenario: Scenario, keyword: str, args: list[str]) -> None:
    if keyword == "charge":
        scenario.phases.append(CcCvCharge(*_numbers(args, 3, 1)))
    elif keyword == "discharge":
        scenario.phases.append(Discharge(*_numbers(args, 2, 1)))
    elif keyword == "storage":
        scenario.phases.append(Storage(*_numbers(args, 1)))
    elif keyword == "temperature":
        scenario.phases.append(SetTemperature(*_numbers(args, 1)))
    elif keyword == "initial_soc":
        (scenario.initial_soc,) = _numbers(args, 1)
    elif keyword == "set":
        if len(args) != 2:
            raise ScenarioInvalid("expected 'set <section>.<field> <value>'")
        section, _, name = args[0].partition(".")
        value = float(args[1])
        if section == "run" and name == "storage_step":
            scenario.storage_step = value
            return
        cls = _SECTIONS.get(section)
        known = {f.name for f in dataclasses.fields(cls)} if cls else set()
        if name not in known or name in _NOT_SETTABLE:
            raise ScenarioInvalid(f"unknown setting {args[0]!r}")
        getattr(scenario, section)[name] = value
    else:
        raise ScenarioInvalid(f"unknown keyword {keyword!r}")


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def simulate(scenario: Scenario) -> tuple[cellsim.CellState, list[tuple[g.Sample, cellsim.CellState]]]:
    """Generate the exact truth stream. Independent of any gauge."""
    scenario.validate()
    dt = scenario.gauge_config().sample_period
    rate = scenario.gauge_config().self_discharge_per_month
    start = cell = scenario.initial_cell()
    t = 0.0
    stream: list[tuple[g.Sample, cellsim.CellState]] = []
    for phase in scenario.phases:
        if isinstance(phase, SetTemperature):
            cell = cellsim.set_temperature(cell, phase.deg_c)
            continue
        if isinstance(phase, CcCvCharge):
            gen = cellsim.cc_cv_charge(
                cell, phase.i_cc, phase.v_cv, phase.i_taper, dt, t, phase.max_seconds
            )
        elif isinstance(phase, Discharge):
            gen = cellsim.constant_current_discharge(
                cell, phase.i, phase.v_cutoff, dt, t, phase.max_seconds
            )
        else:
            gen = cellsim.rest(cell, phase.hours * 3600.0, scenario.storage_step, t, rate)
        for sample, cell in gen:
            stream.append((sample, cell))
            t = sample.t
    return start, stream


@dataclass(frozen=True)
class Row:
    time_s: float
    mode: str
    i_meas_mA: float
    v_meas_V: float
    temp_C: float
    soc_true_pct: float
    soc_est_pct: float
    soc_reported_pct: float
    dod_pct: float
    err_pct: float
    cap_mAh: float


@dataclass(frozen=True)
class Summary:
    max_abs_err_pct: float
    mean_abs_err_pct: float
    final_err_pct: float

    @classmethod
    def of(cls, errors: list[float]) -> "Summary":
        if not errors:
            return cls(0.0, 0.0, 0.0)
        absolute = [abs(e) for e in errors]
        return cls(max(absolute), sum(absolute) / len(absolute), errors[-1])


@dataclass
class RunReport:
    rows: list[Row]
    final_state: g.GaugeState
    initial_state: g.GaugeState

    @property
    def summary(self) -> Summary:
        return Summary.of([r.err_pct for r in self.rows])


def _evaluate(
    scenario: Scenario,
    start: cellsim.CellState,
    stream: Iterable[tuple[g.Sample, cellsim.CellState]],
    adc: AdcModel | None,
    seed: int,
) -> RunReport:
    config = scenario.gauge_config()
    circuit = scenario.sense_circuit()
    rng = random.Random(seed)
    rested = measure(0.0, cellsim.open_circuit_voltage(start), 0.0, start.temp, circuit, adc, rng)
    state = initial = g.initialize_with_fallback(rested.v_bat, rested.temp, config, start.table)
    rows = []
    for truth, cell in stream:
        sample = measure(truth.t, truth.v_bat, truth.i_bat, truth.temp, circuit, adc, rng)
        state = g.step(state, sample, config)
        soc_true = cellsim.true_soc(cell)
        rows.append(
            Row(
                time_s=sample.t,
                mode=state.mode.value,
                i_meas_mA=sample.i_bat,
                v_meas_V=sample.v_bat,
                temp_C=sample.temp,
                soc_true_pct=soc_true,
                soc_est_pct=state.soc,
                soc_reported_pct=g.reported_soc(state, sample.temp),
                dod_pct=state.dod,
                err_pct=state.soc - soc_true,
                cap_mAh=state.remaining_mah,
            )
        )
    return RunReport(rows, state, initial)


def run(scenario: Scenario, seed: int = 0, adc: AdcModel | None = None) -> RunReport:
    """Run a scenario. ``adc=None`` uses the scenario's ADC settings."""
    start, stream = simulate(scenario)
    return _evaluate(scenario, start, stream, adc or scenario.adc_model(), seed)


def run_ideal(scenario: Scenario) -> RunReport:
    start, stream = simulate(scenario)
    return _evaluate(scenario, start, stream, None, 0)


@dataclass
class Comparison:
    ideal: RunReport
    quantized: RunReport
    q_rated: float

    @property
    def cap_errors(self) -> list[float]:
        """Quantized minus ideal remaining capacity, in percent of rated capacity."""
        return [
            (q.cap_mAh - i.cap_mAh) / self.q_rated * 100.0
            for i, q in zip(self.ideal.rows, self.quantized.rows)
        ]

    @property
    def summary(self) -> Summary:
        return Summary.of(self.cap_errors)


def compare(scenario: Scenario, adc: AdcModel | None = None, seed: int = 0) -> Comparison:
    """Same truth stream through an exact front-end and through the ADC model."""
    start, stream = simulate(scenario)
    ideal = _evaluate(scenario, start, stream, None, seed)
    quantized = _evaluate(scenario, start, stream, adc or scenario.adc_model(), seed)
    return Comparison(ideal, quantized, scenario.gauge_config().q_rated)


RUN_COLUMNS = [
    "time_s",
    "mode",
    "i_meas_mA",
    "v_meas_V",
    "temp_C",
    "soc_true_pct",
    "soc_est_pct",
    "soc_reported_pct",
    "dod_pct",
    "err_pct",
]
COMPARE_COLUMNS = RUN_COLUMNS + ["cap_ideal_mAh", "cap_quant_mAh", "cap_err_pct"]


def _fmt(value) -> str:
    return value if isinstance(value, str) else f"{value:.6f}"


def _row_values(row: Row) -> list:
    return [getattr(row, name) for name in RUN_COLUMNS]


def write_run_csv(report: RunReport, out: io.TextIOBase) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(RUN_COLUMNS)
    for row in report.rows:
        writer.writerow([_fmt(v) for v in _row_values(row)])


def write_compare_csv(comparison: Comparison, out: io.TextIOBase) -> None:
    """Quantized-run columns followed by both capacity series and their error."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COMPARE_COLUMNS)
    for ideal, quant, err in zip(comparison.ideal.rows, comparison.quantized.rows, comparison.cap_errors):
        values = _row_values(quant) + [ideal.cap_mAh, quant.cap_mAh, err]
        writer.writerow([_fmt(v) for v in values])


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
