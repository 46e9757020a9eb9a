"""Piecewise-linear SOC-OCV map with temperature masking.

Each segment maps open-circuit voltage to state of charge as
``soc = a * ocv - b`` over ``[v_lo, v_hi)``. The last segment is closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path


class OcvOutOfRange(ValueError):
    """The voltage is not covered by any segment allowed at this temperature."""

    def __init__(self, ocv: float, temp: float, v_min: float, v_max: float):
        self.ocv = ocv
        self.temp = temp
        self.v_min = v_min
        self.v_max = v_max
        super().__init__(
            f"OCV {ocv:.4f} V outside [{v_min:.3f}, {v_max:.3f}] V allowed at {temp:g} degC"
        )

    @property
    def below(self) -> bool:
        return self.ocv < self.v_min


class TableError(ValueError):
    """Raised by the loader when a table violates its structural invariants."""


@dataclass(frozen=True)
class OcvSegment:
    v_lo: float
    v_hi: float
    a: float  # percent per volt
    b: float  # percent

    def soc(self, ocv: float) -> float:
        return self.a * ocv - self.b

    def ocv(self, soc: float) -> float:
        return (soc + self.b) / self.a


@dataclass(frozen=True)
class OcvTable:
    segments: tuple[OcvSegment, ...]
    reference_temperature: float = 25.0

    @property
    def v_min(self) -> float:
        return self.segments[0].v_lo

    @property
    def v_max(self) -> float:
        return self.segments[-1].v_hi


@dataclass(frozen=True)
class SegmentMask:
    first_allowed_index: int  # 1-based


# (v_lo, v_hi, a, b) at 25 degC
_DEFAULT_ROWS = (
    (3.300, 3.452, 26.55, 88.6),
    (3.452, 3.508, 125.0, 431.1),
    (3.508, 3.595, 149.0, 516.1),
    (3.595, 3.676, 344.0, 1225.0),
    (3.676, 3.739, 229.5, 800.9),
    (3.739, 3.967, 111.9, 359.9),
    (3.967, 4.039, 104.8, 332.0),
    (4.039, 4.132, 90.61, 274.7),
)

DEFAULT_TABLE = OcvTable(tuple(OcvSegment(*row) for row in _DEFAULT_ROWS))


def allowed_segments(temp: float) -> SegmentMask:
    """Return the first usable segment for an ambient temperature.

    Cold cells shift the low end of the curve, so the lowest segments are
    dropped below 15 degC and again below 5 degC. Band edges take the
    warmer mask.
    """
    if temp >= 15.0:
        return SegmentMask(1)
    if temp >= 5.0:
        return SegmentMask(2)
    return SegmentMask(3)


def _find_segment(ocv: float, segments: tuple[OcvSegment, ...]) -> int | None:
    last = len(segments) - 1
    for k, seg in enumerate(segments):
        if seg.v_lo <= ocv < seg.v_hi or (k == last and ocv == seg.v_hi):
            return k
    return None


def soc_from_ocv(ocv: float, temp: float, table: OcvTable = DEFAULT_TABLE) -> float:
    """State of charge in percent for a rested terminal voltage.

    Raises
    ------
    OcvOutOfRange
        If ``ocv`` lies outside the segments allowed at ``temp``.
    """
    if not math.isfinite(ocv):
        raise ValueError(f"ocv must be finite, got {ocv!r}")
    first = allowed_segments(temp).first_allowed_index - 1
    allowed = table.segments[first:]
    k = _find_segment(ocv, allowed)
    if k is None:
        raise OcvOutOfRange(ocv, temp, allowed[0].v_lo, allowed[-1].v_hi)
    return min(100.0, max(0.0, allowed[k].soc(ocv)))


def _soc_partition(table: OcvTable) -> list[tuple[float, float]]:
    # Image of each segment; where images overlap the higher index keeps the
    # span, matching the forward map's breakpoint ownership.
    spans = []
    ceiling = math.inf
    for seg in reversed(table.segments):
        lo = seg.soc(seg.v_lo)
        spans.append((lo, min(seg.soc(seg.v_hi), ceiling)))
        ceiling = min(ceiling, lo)
    return spans[::-1]


def ocv_from_soc(soc: float, table: OcvTable = DEFAULT_TABLE) -> float:
    """Inverse map used by the cell simulator.

    SOC values falling in a gap between segment images map to the shared
    breakpoint; values beyond the table's image clamp to its end voltages.
    """
    if not 0.0 <= soc <= 100.0:
        raise ValueError(f"soc must lie in [0, 100], got {soc!r}")
    spans = _soc_partition(table)
    segs = table.segments
    for k, (lo, hi) in enumerate(spans):
        if soc < lo:
            # gap below this segment's image, or below the whole table
            return segs[k].v_lo
        if soc < hi:
            return segs[k].ocv(soc)
    last = segs[-1]
    if soc == spans[-1][1]:
        return last.ocv(soc)
    return last.v_hi


def validate_table(table: OcvTable) -> list[str]:
    """Structural and continuity diagnostics for a table. Never raises."""
    diags: list[str] = []
    segs = table.segments
    for k, seg in enumerate(segs, start=1):
        if not seg.v_lo < seg.v_hi:
            diags.append(f"segment {k}: empty voltage range [{seg.v_lo}, {seg.v_hi}]")
        if not seg.a > 0:
            diags.append(f"segment {k}: non-positive slope a={seg.a}")
    for k in range(len(segs) - 1):
        lower, upper = segs[k], segs[k + 1]
        if lower.v_hi != upper.v_lo:
            diags.append(
                f"segments {k + 1}-{k + 2}: not contiguous "
                f"(v_hi={lower.v_hi} != v_lo={upper.v_lo})"
            )
            continue
        v = lower.v_hi
        below, above = lower.soc(v), upper.soc(v)
        if not math.isclose(below, above, abs_tol=1e-9):
            diags.append(
                f"segments {k + 1}-{k + 2}: discontinuity at {v:.3f} V of "
                f"{abs(above - below):.4f} % ({below:.4f} -> {above:.4f})"
            )
    return diags


def is_structural(diagnostic: str) -> bool:
    return "discontinuity" not in diagnostic


def parse_table(text: str, reference_temperature: float = 25.0) -> OcvTable:
    segments = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise TableError(f"line {lineno}: expected 'v_lo v_hi a b', got {raw!r}")
        try:
            segments.append(OcvSegment(*(float(f) for f in fields)))
        except ValueError as exc:
            raise TableError(f"line {lineno}: {exc}") from None
    if len(segments) != 8:
        raise TableError(f"expected 8 segments, found {len(segments)}")
    table = OcvTable(tuple(segments), reference_temperature)
    problems = [d for d in validate_table(table) if is_structural(d)]
    if problems:
        raise TableError("; ".join(problems))
    return table


def load_table(path: str | Path) -> OcvTable:
    return parse_table(Path(path).read_text())
