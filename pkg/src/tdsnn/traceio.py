"""Trace serialization: CSV files plus a JSON run summary.

Output is byte-stable for identical inputs: fixed column schemas, fixed row
ordering, floats printed with 9 significant digits.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .network import TraceSet


def _f(x) -> str:
    return format(float(x), ".9g")


def write_traces(traces: TraceSet, out_dir) -> list[str]:
    """Write spikes/membrane/synapse/output CSVs into out_dir.

    All four files are always created; absent series produce header-only
    files. Returns the written paths.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create trace directory {out}: {exc}") from exc
    paths = []

    def _write(name: str, header: str, rows) -> None:
        path = out / name
        try:
            with open(path, "w", newline="") as fh:
                fh.write(header + "\n")
                for row in rows:
                    fh.write(row + "\n")
        except OSError as exc:
            raise OSError(f"cannot write trace file {path}: {exc}") from exc
        paths.append(str(path))

    def spike_rows():
        for i, times in enumerate(traces.spikes):
            for t in times:
                yield f"{i},{_f(t)}"

    def membrane_rows():
        for si, t in enumerate(traces.sample_times):
            ts = _f(t)
            for i in range(traces.n_neurons):
                yield f"{ts},{i},{_f(traces.v_mem[si, i])}"

    def synapse_rows():
        for si, t in enumerate(traces.sample_times):
            ts = _f(t)
            for i in range(traces.n_neurons):
                yield (f"{ts},{i},{_f(traces.v_syn[si, i])},"
                       f"{_f(traces.freq_hz[si, i])}")

    def output_rows():
        if traces.z_times is None:
            return
        for t, z, tgt in zip(traces.z_times, traces.z, traces.target):
            yield f"{_f(t)},{_f(z)},{_f(tgt)}"

    _write("spikes.csv", "neuron_id,time_s", spike_rows())
    _write("membrane.csv", "time_s,neuron_id,v_mem", membrane_rows())
    _write("synapse.csv", "time_s,synapse_id,v_syn,freq_hz", synapse_rows())
    _write("output.csv", "time_s,z,target", output_rows())
    return paths


def read_csv_columns(path) -> dict:
    """Read one of our CSVs back into {column: float array or int array}."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        cols = {h: [] for h in header}
        for line in fh:
            for h, v in zip(header, line.strip().split(",")):
                cols[h].append(v)
    out = {}
    for h, vals in cols.items():
        if h.endswith("_id"):
            out[h] = np.array([int(v) for v in vals], dtype=int)
        else:
            out[h] = np.array([float(v) for v in vals])
    return out


@dataclass
class RunSummary:
    """Scalar record of one run: config echo, metrics, seed, wall clock."""

    command: str
    seed: int
    metrics: dict = field(default_factory=dict)
    config_echo: str = ""
    wall_clock_s: float = 0.0

    def validate(self) -> None:
        for key, value in self.metrics.items():
            if not np.isfinite(value):
                raise ValueError(f"metric {key!r} is not finite: {value}")

    def to_json(self) -> str:
        self.validate()
        payload = {
            "command": self.command,
            "seed": self.seed,
            "metrics": {k: float(v) for k, v in sorted(self.metrics.items())},
            "config_echo": self.config_echo,
            "wall_clock_s": round(self.wall_clock_s, 3),
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_summary(summary: RunSummary, out_dir) -> str:
    path = Path(out_dir) / "summary.json"
    try:
        with open(path, "w") as fh:
            fh.write(summary.to_json())
    except OSError as exc:
        raise OSError(f"cannot write summary {path}: {exc}") from exc
    return str(path)


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False
