"""Scenario JSON ingestion and result serialization.

Scenario file layout (complex entries as ``[re, im]``; plain numbers are
read as real)::

    {
      "dim": 2,
      "h0": [[0, 0], [0, 1]],
      "htau": [[0, 1], [1, 0]],
      "evolution": {"type": "unitary", "matrix": [[1, 0], [0, 1]]},
      "rho0": {"pure": [[0.7071067811865476, 0], [0.7071067811865476, 0]]},
      "options": {"q": [0, 0.5, 1], "merge_tol": 1e-9, "degeneracy_tol": 1e-10}
    }

``evolution`` may instead be
``{"type": "schedule", "segments": [{"h": M, "t": 1.0}, ...], "slices": 10}``.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import warnings
from dataclasses import dataclass, field
from typing import IO, Any

import numpy as np

from . import __version__
from .operators import (
    DensityMatrix,
    EvolutionSpec,
    HermitianOperator,
    Segment,
    Unitary,
    ValidationError,
)
from .work import Scenario, WorkDistribution

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Scenario file problem, addressed by field (or line for syntax errors)."""

    def __init__(self, field: str, kind: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.kind = kind


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    scenario: Scenario
    q_values: tuple = ()
    merge_tol: float | None = None
    degeneracy_tol: float = 1e-10
    evolution_info: dict = field(default_factory=dict)
    digest: str = ""


def _complex_entry(value, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise ScenarioError(where, "schema", f"expected a number or [re, im] pair, got {value!r}")


def _matrix(value, dim: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != dim:
        raise ScenarioError(where, "dimension", f"expected {dim} rows")
    rows = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or len(row) != dim:
            raise ScenarioError(f"{where}[{r}]", "dimension", f"expected {dim} entries")
        rows.append([_complex_entry(v, f"{where}[{r}][{c}]") for c, v in enumerate(row)])
    return np.array(rows, dtype=complex)


def _vector(value, dim: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != dim:
        raise ScenarioError(where, "dimension", f"expected {dim} components")
    return np.array([_complex_entry(v, f"{where}[{i}]") for i, v in enumerate(value)], dtype=complex)


def _validated(where: str, build):
    try:
        return build()
    except ValidationError as err:
        raise ScenarioError(where, err.kind, str(err)) from err


def _require(obj: dict, key: str, where: str = ""):
    if key not in obj:
        raise ScenarioError(f"{where}{key}", "schema", "missing required field")
    return obj[key]


def load_scenario_file(text: str) -> ScenarioFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioError(f"line {err.lineno}, column {err.colno}", "syntax", err.msg) from err
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "schema", "expected a JSON object")
    dim = _require(doc, "dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ScenarioError("dim", "schema", f"expected a positive integer, got {dim!r}")

    options = doc.get("options", {})
    if not isinstance(options, dict):
        raise ScenarioError("options", "schema", "expected an object")
    q_values = options.get("q", [])
    if not isinstance(q_values, list) or not all(isinstance(q, (int, float)) for q in q_values):
        raise ScenarioError("options.q", "schema", "expected a list of numbers")
    merge_tol = options.get("merge_tol")
    degeneracy_tol = options.get("degeneracy_tol", 1e-10)
    for name, val in (("merge_tol", merge_tol), ("degeneracy_tol", degeneracy_tol)):
        if val is not None and (not isinstance(val, (int, float)) or val < 0):
            raise ScenarioError(f"options.{name}", "schema", "expected a non-negative number")

    h0 = _validated("h0", lambda: HermitianOperator(_matrix(_require(doc, "h0"), dim, "h0")))
    htau = _validated("htau", lambda: HermitianOperator(_matrix(_require(doc, "htau"), dim, "htau")))

    evo = _require(doc, "evolution")
    if not isinstance(evo, dict):
        raise ScenarioError("evolution", "schema", "expected an object")
    kind = _require(evo, "type", "evolution.")
    if kind == "unitary":
        m = _matrix(_require(evo, "matrix", "evolution."), dim, "evolution.matrix")
        evolution = _validated("evolution.matrix", lambda: EvolutionSpec.direct(Unitary(m)))
        info = {"type": "unitary"}
    elif kind == "schedule":
        segs = _require(evo, "segments", "evolution.")
        if not isinstance(segs, list) or not segs:
            raise ScenarioError("evolution.segments", "schema", "expected a non-empty list")
        slices = evo.get("slices", 1)
        if not isinstance(slices, int) or isinstance(slices, bool) or slices < 1:
            raise ScenarioError("evolution.slices", "schema", "expected a positive integer")
        built = []
        for n, seg in enumerate(segs):
            where = f"evolution.segments[{n}]"
            if not isinstance(seg, dict):
                raise ScenarioError(where, "schema", "expected an object")
            h = _validated(f"{where}.h", lambda: HermitianOperator(_matrix(_require(seg, "h", where + "."), dim, where + ".h")))
            t = _require(seg, "t", where + ".")
            if not isinstance(t, (int, float)) or isinstance(t, bool) or not t > 0:
                raise ScenarioError(f"{where}.t", "schema", "expected a positive duration")
            built.append(Segment(h, float(t)))
        evolution = _validated("evolution", lambda: EvolutionSpec.schedule(built, slices))
        info = {"type": "schedule", "segments": len(built), "slices": slices}
    else:
        raise ScenarioError("evolution.type", "schema", f"unknown evolution type {kind!r}")

    rho_doc = _require(doc, "rho0")
    if isinstance(rho_doc, dict):
        vec = _vector(_require(rho_doc, "pure", "rho0."), dim, "rho0.pure")
        nrm = float(np.linalg.norm(vec))
        if nrm == 0:
            raise ScenarioError("rho0.pure", "trace", "zero vector")
        if abs(nrm ** 2 - 1) > 1e-8:
            warnings.warn(f"rho0.pure: vector norm^2 {nrm ** 2:.12g} renormalized to 1", stacklevel=2)
        vec = vec / nrm
        rho0 = _validated("rho0", lambda: DensityMatrix.pure(vec))
    else:
        rho0 = _validated("rho0", lambda: DensityMatrix(_matrix(rho_doc, dim, "rho0")))

    scenario = _validated("scenario", lambda: Scenario.from_hamiltonians(h0, htau, evolution, rho0, degeneracy_tol))
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return ScenarioFile(scenario, tuple(float(q) for q in q_values), merge_tol, float(degeneracy_tol), info, digest)


def parse_scenario(text: str) -> Scenario:
    return load_scenario_file(text).scenario


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def distribution_to_csv(d: WorkDistribution) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["w", "weight"])
    for w, c in d.atoms:
        writer.writerow([_fmt(w), _fmt(c)])
    return buf.getvalue()


def distribution_to_dict(d: WorkDistribution) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "merge_tol": d.merge_tol,
        "atoms": [{"w": w, "weight": c} for w, c in d.atoms],
    }


def emit_distribution(d: WorkDistribution, fmt: str = "csv", destination: str | IO[str] | None = None) -> str:
    """Serialize ``d``; writes to a path or stream when ``destination`` is given."""
    if fmt == "csv":
        text = distribution_to_csv(d)
    elif fmt == "json":
        text = json.dumps(distribution_to_dict(d), indent=2) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if destination is None:
        return text
    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        destination.write(text)
    return text


def read_distribution(text: str, fmt: str = "csv", merge_tol: float | None = None) -> WorkDistribution:
    if fmt == "csv":
        rows = list(csv.reader(_io.StringIO(text)))
        if not rows or rows[0] != ["w", "weight"]:
            raise ValueError("CSV distribution must start with the header 'w,weight'")
        w = [float(r[0]) for r in rows[1:]]
        c = [float(r[1]) for r in rows[1:]]
        # CSV carries no tolerance; pick one below the smallest atom gap
        tol = min(1e-9, _min_gap(w) / 2) if merge_tol is None else merge_tol
        return WorkDistribution(w, c, tol)
    doc = json.loads(text)
    atoms = doc["atoms"]
    return WorkDistribution([a["w"] for a in atoms], [a["weight"] for a in atoms],
                            doc["merge_tol"] if merge_tol is None else merge_tol)


def _min_gap(w: list[float]) -> float:
    return float(np.min(np.diff(w))) if len(w) > 1 else 1.0


def to_json_value(obj):
    """Recursively convert numpy / complex values into JSON-ready types."""
    if isinstance(obj, dict):
        return {str(k): to_json_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json_value(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_json_value(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class RunReport:
    command: str
    config: dict
    input_digest: str = ""
    checks: list = field(default_factory=list)
    distributions: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)

    def add_check(self, name: str, residual: float, tolerance: float, passed: bool | None = None) -> bool:
        ok = residual <= tolerance if passed is None else passed
        self.checks.append({"name": name, "residual": float(residual), "tolerance": float(tolerance), "pass": bool(ok)})
        return ok

    def add_distribution(self, key: str, d: WorkDistribution) -> None:
        self.distributions[key] = [{"w": w, "weight": c} for w, c in d.atoms]

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_dict(self) -> dict:
        return to_json_value({
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "passed": self.passed,
            "checks": self.checks,
            "distributions": self.distributions,
            "data": self.data,
            "provenance": {"input_digest": self.input_digest, "config": self.config, "tool_version": __version__},
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
