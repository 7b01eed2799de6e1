"""Instance JSON, schedule CSV (+ JSON sidecar) and seeded random instances.

Numbers in files are strings holding either a plain decimal (``"2.5"``) or an
exact ratio (``"2/3"``) so that nothing is lost on a round trip; bare JSON
numbers are accepted on input too.
"""

from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from ._rational import as_fraction, fraction_str
from .model import Agent, Allocation, Instance, InstanceError, PiecewiseConstantUtility, normalize_utilities

SCHEMA_VERSION = 1

_NUMBER = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*[-+]?(\d+(\.\d*)?|\.\d+)([eE][-+]?\d+)?(\s*/\s*\d+)?\s*$"},
    ]
}

INSTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "fairshed instance",
    "type": "object",
    "required": ["schema_version", "supply", "horizon", "agents"],
    "additionalProperties": True,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "supply": _NUMBER,
        "horizon": _NUMBER,
        "agents": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "demand", "utility"],
                "properties": {
                    "id": {"type": ["string", "integer"]},
                    "demand": _NUMBER,
                    "utility": {
                        "type": "object",
                        "required": ["breakpoints", "densities"],
                        "properties": {
                            "breakpoints": {"type": "array", "minItems": 2, "items": _NUMBER},
                            "densities": {"type": "array", "minItems": 1, "items": _NUMBER},
                        },
                    },
                },
            },
        },
    },
}


def _path(parts) -> str:
    return "/".join(str(p) for p in parts) or "<root>"


def instance_from_dict(data: dict, normalize: bool = True) -> Instance:
    """Validate a decoded instance document and build an :class:`Instance`."""
    try:
        jsonschema.validate(data, INSTANCE_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InstanceError(f"schema error at {_path(exc.absolute_path)}: {exc.message}") from None
    supply = as_fraction(data["supply"])
    horizon = as_fraction(data["horizon"])
    agents = []
    seen = set()
    for k, a in enumerate(data["agents"]):
        where = f"agents/{k}"
        if str(a["id"]) in seen:
            raise InstanceError(f"{where}/id: duplicate agent id {a['id']!r}")
        seen.add(str(a["id"]))
        u = a["utility"]
        bps = [as_fraction(b) for b in u["breakpoints"]]
        dens = [as_fraction(d) for d in u["densities"]]
        if bps[0] != 0 or bps[-1] != horizon:
            raise InstanceError(f"{where}/utility/breakpoints: must run from 0 to the horizon {horizon}")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise InstanceError(f"{where}/utility/breakpoints: must be strictly increasing")
        if len(dens) != len(bps) - 1:
            raise InstanceError(
                f"{where}/utility/densities: expected {len(bps) - 1} values, got {len(dens)}"
            )
        if any(d < 0 for d in dens):
            raise InstanceError(f"{where}/utility/densities: must be non-negative")
        demand = as_fraction(a["demand"])
        if demand > supply:
            raise InstanceError(
                f"{where}/demand: agent {a['id']!r} demands {demand}, more than the supply {supply}"
            )
        agents.append(Agent(demand, PiecewiseConstantUtility(tuple(bps), tuple(dens)), a["id"]))
    inst = Instance(supply, horizon, tuple(agents))
    return normalize_utilities(inst) if normalize else inst


def load_instance(path, normalize: bool = True) -> Instance:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceError(f"{path}: not valid JSON ({exc})") from None
    return instance_from_dict(data, normalize=normalize)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "supply": fraction_str(inst.supply),
        "horizon": fraction_str(inst.horizon),
        "agents": [
            {
                "id": a.id if a.id is not None else i,
                "demand": fraction_str(a.demand),
                "utility": {
                    "breakpoints": [fraction_str(b) for b in a.utility.breakpoints],
                    "densities": [fraction_str(d) for d in a.utility.densities],
                },
            }
            for i, a in enumerate(inst.agents)
        ],
    }


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


# ---------------------------------------------------------------------------
# schedules


def sidecar_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".metrics.json")


def _agent_labels(inst: Instance) -> list[str]:
    return [str(a.id if a.id is not None else i) for i, a in enumerate(inst.agents)]


def metrics_to_dict(metrics) -> dict:
    d = metrics.as_dict()
    out = {}
    for key, val in d.items():
        if isinstance(val, list):
            out[key] = [fraction_str(v) if isinstance(v, Fraction) else v for v in val]
        elif isinstance(val, Fraction):
            out[key] = fraction_str(val)
        else:
            out[key] = val
    out["eg_float"] = float(metrics.egalitarian)
    out["ut_float"] = float(metrics.utilitarian)
    out["ef_float"] = float(metrics.max_difference)
    return out


def save_schedule(path, inst: Instance, A: Allocation, metrics=None, provenance=None) -> Path:
    """Write ``agent_id,start,end`` rows and, next to them, a metrics/provenance sidecar."""
    path = Path(path)
    labels = _agent_labels(inst)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["agent_id", "start", "end"])
        for i, a, b in A.rows():
            w.writerow([labels[i], fraction_str(a), fraction_str(b)])
    side = {
        "metrics": metrics_to_dict(metrics) if metrics is not None else None,
        "provenance": provenance or {},
    }
    sp = sidecar_path(path)
    sp.write_text(json.dumps(side, indent=2) + "\n")
    return sp


def load_schedule(path, inst: Instance) -> Allocation:
    path = Path(path)
    index = {lab: i for i, lab in enumerate(_agent_labels(inst))}
    pieces: list[list] = [[] for _ in range(inst.n)]
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["agent_id", "start", "end"]:
            raise InstanceError(f"{path}: header must be agent_id,start,end")
        for line, row in enumerate(reader, start=2):
            if row["agent_id"] not in index:
                raise InstanceError(f"{path}:{line}: unknown agent id {row['agent_id']!r}")
            try:
                a, b = as_fraction(row["start"]), as_fraction(row["end"])
            except (ValueError, ZeroDivisionError) as exc:
                raise InstanceError(f"{path}:{line}: {exc}") from None
            if not 0 <= a < b <= inst.horizon:
                raise InstanceError(f"{path}:{line}: interval [{a}, {b}) outside the horizon")
            pieces[index[row["agent_id"]]].append((a, b))
    return Allocation(tuple(tuple(p) for p in pieces))


# ---------------------------------------------------------------------------
# random instances

PROFILES = ("identical", "uniform-random", "heavy-tailed")


def _decimal(x: float, digits: int = 3) -> Fraction:
    return Fraction(round(float(x) * 10**digits), 10**digits)


def generate_instance(
    seed: int,
    n: int,
    supply=10,
    horizon=24,
    segments: int = 4,
    profile: str = "uniform-random",
) -> Instance:
    """Seeded random instance with positive, normalised piecewise-constant utilities.

    Demand profiles: ``identical`` (one demand ``supply / j`` for a random
    ``j``), ``uniform-random`` (uniform on ``(0.05, 1] * supply``) and
    ``heavy-tailed`` (Lomax-distributed, clamped to the supply).
    """
    if profile not in PROFILES:
        raise ValueError(f"unknown demand profile {profile!r}; choose from {PROFILES}")
    if n < 1 or segments < 1:
        raise ValueError("n and segments must be positive")
    S, T = as_fraction(supply), as_fraction(horizon)
    if S <= 0 or T <= 0:
        raise ValueError("supply and horizon must be positive")
    rng = np.random.default_rng(seed)
    if profile == "identical":
        j = int(rng.integers(1, max(2, n)))
        demands = [S / j] * n
    elif profile == "uniform-random":
        demands = [max(Fraction(1, 1000), _decimal(float(S) * rng.uniform(0.05, 1.0))) for _ in range(n)]
    else:
        raw = 0.08 * (rng.pareto(1.2, size=n) + 1.0)
        demands = [max(Fraction(1, 1000), _decimal(float(S) * min(1.0, r))) for r in raw]
    demands = [min(d, S) for d in demands]
    grid = 4 * segments
    agents = []
    for i in range(n):
        inner = sorted(rng.choice(np.arange(1, grid), size=segments - 1, replace=False)) if segments > 1 else []
        bps = [Fraction(0)] + [T * int(g) / grid for g in inner] + [T]
        dens = [Fraction(int(v)) for v in rng.integers(1, 100, size=segments)]
        u = PiecewiseConstantUtility(tuple(bps), tuple(dens)).normalized()
        agents.append(Agent(demands[i], u, i))
    return Instance(S, T, tuple(agents))
