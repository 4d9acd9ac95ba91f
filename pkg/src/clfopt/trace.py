"""Run traces and their delimited export.

Every run, discrete or continuous, records the same schema per step:

    step          iteration index k (discrete) or time t (flow)
    x0..x{n-1}    the iterate
    energy        objective value E(x)
    grad_inf      sup-norm of grad E(x)
    clf_value     V at the costate -nu0 grad E(x)
    hamiltonian   lambda . u + nu0 grad E . u for the realized control/step
    active_set    active coordinate (or block) indices, ascending
    alpha         step size used leaving this record (h for flows), 0 at the end
    gamma         subgradient convex weight used at this record
    dissipation_rate  <dV, hess E u> for the realized control/step

CSV files carry one leading '# <json metadata>' comment line, then a fixed
header naming every column.  JSON files are a single object
{"metadata": ..., "dimension": ..., "records": [...]}.  Floats are written
with 17 significant digits so re-parsing reproduces them bit-exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import List

import numpy as np

FORMATS = ("csv", "json")

_SCALAR_COLUMNS = (
    "energy",
    "grad_inf",
    "clf_value",
    "hamiltonian",
    "alpha",
    "gamma",
    "dissipation_rate",
)


@dataclass
class TraceRecord:
    step: float
    x: np.ndarray
    energy: float
    grad_inf: float
    clf_value: float
    hamiltonian: float
    active_set: tuple
    alpha: float
    gamma: float
    dissipation_rate: float


@dataclass
class IterationTrace:
    dimension: int
    records: List[TraceRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def header(self) -> list:
        xs = [f"x{i}" for i in range(self.dimension)]
        return ["step", *xs, "energy", "grad_inf", "clf_value", "hamiltonian",
                "active_set", "alpha", "gamma", "dissipation_rate"]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _record_row(r: TraceRecord) -> list:
    return [
        _fmt(r.step),
        *[_fmt(v) for v in r.x],
        _fmt(r.energy),
        _fmt(r.grad_inf),
        _fmt(r.clf_value),
        _fmt(r.hamiltonian),
        ";".join(str(i) for i in r.active_set),
        _fmt(r.alpha),
        _fmt(r.gamma),
        _fmt(r.dissipation_rate),
    ]


def export_trace(trace: IterationTrace, fmt: str, path) -> None:
    if fmt not in FORMATS:
        raise ValueError(f"unknown trace format {fmt!r}; one of {FORMATS}")
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(trace.metadata) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(trace.header())
            for r in trace.records:
                writer.writerow(_record_row(r))
        return
    payload = {
        "metadata": trace.metadata,
        "dimension": trace.dimension,
        "records": [
            {
                "step": float(r.step),
                "x": [float(v) for v in r.x],
                "energy": float(r.energy),
                "grad_inf": float(r.grad_inf),
                "clf_value": float(r.clf_value),
                "hamiltonian": float(r.hamiltonian),
                "active_set": list(r.active_set),
                "alpha": float(r.alpha),
                "gamma": float(r.gamma),
                "dissipation_rate": float(r.dissipation_rate),
            }
            for r in trace.records
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _parse_active(cell: str) -> tuple:
    return tuple(int(tok) for tok in cell.split(";") if tok != "")


def read_trace(path, fmt: str) -> IterationTrace:
    """Inverse of export_trace; round-trips all floats bit-exactly."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown trace format {fmt!r}; one of {FORMATS}")
    if fmt == "json":
        with open(path) as fh:
            payload = json.load(fh)
        records = [
            TraceRecord(
                step=rec["step"],
                x=np.asarray(rec["x"], dtype=float),
                energy=rec["energy"],
                grad_inf=rec["grad_inf"],
                clf_value=rec["clf_value"],
                hamiltonian=rec["hamiltonian"],
                active_set=tuple(rec["active_set"]),
                alpha=rec["alpha"],
                gamma=rec["gamma"],
                dissipation_rate=rec["dissipation_rate"],
            )
            for rec in payload["records"]
        ]
        return IterationTrace(dimension=payload["dimension"], records=records,
                              metadata=payload["metadata"])

    with open(path, newline="") as fh:
        first = fh.readline()
        metadata = json.loads(first[1:].strip()) if first.startswith("#") else {}
        reader = csv.reader(fh)
        header = next(reader)
        dim = sum(1 for name in header if name.startswith("x") and name[1:].isdigit())
        records = []
        for row in reader:
            vals = dict(zip(header, row))
            records.append(
                TraceRecord(
                    step=float(vals["step"]),
                    x=np.array([float(vals[f"x{i}"]) for i in range(dim)]),
                    energy=float(vals["energy"]),
                    grad_inf=float(vals["grad_inf"]),
                    clf_value=float(vals["clf_value"]),
                    hamiltonian=float(vals["hamiltonian"]),
                    active_set=_parse_active(vals["active_set"]),
                    alpha=float(vals["alpha"]),
                    gamma=float(vals["gamma"]),
                    dissipation_rate=float(vals["dissipation_rate"]),
                )
            )
    return IterationTrace(dimension=dim, records=records, metadata=metadata)
