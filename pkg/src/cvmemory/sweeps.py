"""Parameter sweeps over the coupling strength and the squeezing, with CSV output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

from .gaussian import ConfigurationError
from .memory import coefficients
from .protocol import ProtocolConfig, Stage, run_protocol

MAX_POINTS = 10**6


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    step: float
    fixed: dict = field(default_factory=dict)
    stages: tuple[Stage, ...] = tuple(Stage)

    def __post_init__(self):
        if self.variable not in ("kappa", "r"):
            raise ConfigurationError(f"sweep variable must be 'kappa' or 'r', got {self.variable!r}")
        if not all(math.isfinite(v) for v in (self.start, self.stop, self.step)):
            raise ConfigurationError("sweep bounds must be finite")
        if self.start > self.stop:
            raise ConfigurationError(f"sweep start {self.start} exceeds stop {self.stop}")
        if self.step <= 0:
            raise ConfigurationError(f"sweep step must be positive, got {self.step}")
        if (self.stop - self.start) / self.step > MAX_POINTS:
            raise ConfigurationError(f"sweep would exceed {MAX_POINTS} points")

    def grid(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        # rounding keeps abscissae like 1.5 exact instead of 1.5000000000000002
        return [round(self.start + k * self.step, 12) for k in range(n + 1)]


@dataclass(frozen=True)
class SweepRecord:
    abscissa: float
    series: dict[str, float]
    stage: str | None = None

    def __post_init__(self):
        bad = [k for k, v in self.series.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite sweep values in {bad}")


def coefficient_sweep(spec: SweepSpec) -> list[SweepRecord]:
    if spec.variable != "kappa":
        raise ConfigurationError("coefficient sweeps run over kappa")
    records = []
    for kappa in spec.grid():
        c = coefficients(kappa)
        records.append(SweepRecord(kappa, {"C1": c.c1, "C2": c.c2, "C3": c.c3}))
    return records


def variance_sweep(spec: SweepSpec) -> list[SweepRecord]:
    if spec.variable != "r":
        raise ConfigurationError("variance sweeps run over r")
    if "kappa" not in spec.fixed:
        raise ConfigurationError("variance sweeps need a fixed kappa")
    records = []
    for r in spec.grid():
        reports = run_protocol(ProtocolConfig(spec.fixed["kappa"], r)).reports
        for stage in spec.stages:
            v = reports[stage].nullifier_variances
            records.append(SweepRecord(r, {f"V{k + 1}": v[k] for k in range(4)}, stage.value))
    return records


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips to the same double
    return repr(float(v))


def to_csv(records: Sequence[SweepRecord], abscissa_name: str) -> str:
    if not records:
        raise ValueError("nothing to write")
    keys = list(records[0].series)
    with_stage = records[0].stage is not None
    header = [abscissa_name] + (["stage"] if with_stage else []) + keys
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for rec in records:
        row = [_fmt(rec.abscissa)] + ([rec.stage] if with_stage else [])
        w.writerow(row + [_fmt(rec.series[k]) for k in keys])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list]]:
    """Parse CSV written by :func:`to_csv`; numeric cells become floats."""
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    parsed = [[cell if name == "stage" else float(cell) for name, cell in zip(header, row)] for row in body]
    return header, parsed
