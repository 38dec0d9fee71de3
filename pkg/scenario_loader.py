"""Scenario files (JSON) and the built-in published scenarios.

A scenario looks like::

    {
      "name": "row 2",
      "mesh": [7, 8, 11],
      "faults": [{"type": "rect", "origin": [2, 2, 2], "extents": [2, 1, 3]}],
      "analysis": {"engine": "auto", "cross_check": "sample", "precision": 3,
                   "pair_convention": "unordered", "obstacle": "fr"},
      "mc": {"samples": 100000, "seed": 1, "workers": 1}
    }

Fault types: ``rect`` (origin + extents), ``overlap`` (``rects``: list of rects)
and ``arbitrary`` (``nodes``: list of coordinates). Several entries in
``faults`` are analyzed as one fault region: all-rect lists as overlapping
rectangles, anything else as the union of their nodes.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import config
from errors import FaultSpecError, MeshError, ScenarioError
from fault_model import (ArbitraryFault, FaultComplex, FaultSpec, OverlappingFault, RectangularFault,
                         build_complex)
from mesh import MeshShape

logger = logging.getLogger(__name__)

ENGINES = ("auto", "det", "dp")
CROSS_CHECKS = ("off", "sample", "full")
PAIR_CONVENTIONS = ("unordered", "ordered")
OBSTACLES = ("fr", "fault")

_TOP_FIELDS = {"name", "mesh", "faults", "analysis", "mc"}
_ANALYSIS_FIELDS = {"engine", "cross_check", "precision", "pair_convention", "obstacle"}
_MC_FIELDS = {"samples", "seed", "workers"}
_FAULT_FIELDS = {
    "rect": {"type", "origin", "extents"},
    "overlap": {"type", "rects"},
    "arbitrary": {"type", "nodes"},
}


@dataclass(frozen=True)
class AnalysisOptions:
    engine: str = "auto"
    cross_check: Optional[str] = None
    precision: int = config.PRECISION
    pair_convention: str = "unordered"
    obstacle: str = "fr"


@dataclass(frozen=True)
class McOptions:
    samples: int = config.SAMPLES
    seed: int = config.SEED
    workers: int = config.WORKERS


@dataclass(frozen=True)
class ScenarioConfig:
    mesh: MeshShape
    faults: Tuple[FaultSpec, ...] = ()
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    mc: McOptions = field(default_factory=McOptions)
    name: Optional[str] = None

    def fault_spec(self) -> Optional[FaultSpec]:
        if not self.faults:
            return None
        if len(self.faults) == 1:
            return self.faults[0]
        if all(isinstance(f, RectangularFault) for f in self.faults):
            return OverlappingFault(tuple(self.faults))
        nodes = set()
        for f in self.faults:
            nodes |= f.nodes(self.mesh)
        return ArbitraryFault(frozenset(nodes))

    def build(self) -> FaultComplex:
        return build_complex(self.mesh, self.fault_spec())

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        if self.name is not None:
            data["name"] = self.name
        data["mesh"] = list(self.mesh.radices)
        data["faults"] = [_fault_to_dict(f) for f in self.faults]
        analysis = {
            "engine": self.analysis.engine,
            "precision": self.analysis.precision,
            "pair_convention": self.analysis.pair_convention,
            "obstacle": self.analysis.obstacle,
        }
        if self.analysis.cross_check is not None:
            analysis["cross_check"] = self.analysis.cross_check
        data["analysis"] = analysis
        data["mc"] = {"samples": self.mc.samples, "seed": self.mc.seed, "workers": self.mc.workers}
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _fault_to_dict(fault: FaultSpec) -> Dict[str, Any]:
    if isinstance(fault, RectangularFault):
        return {"type": "rect", "origin": list(fault.origin), "extents": list(fault.extents)}
    if isinstance(fault, OverlappingFault):
        return {"type": "overlap", "rects": [_fault_to_dict(r) for r in fault.rects]}
    return {"type": "arbitrary", "nodes": [list(v) for v in sorted(fault.points)]}


def _reject_unknown(data: Dict, allowed: set, where: str):
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ScenarioError(f"unknown field(s) {', '.join(unknown)}", field=where or "<root>")


def _int_list(value: Any, where: str, length: Optional[int] = None) -> List[int]:
    if not isinstance(value, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
        raise ScenarioError("expected a list of integers", field=where)
    if length is not None and len(value) != length:
        raise ScenarioError(f"expected {length} components, got {len(value)}", field=where)
    return value


def _parse_rect(data: Any, n: int, where: str) -> RectangularFault:
    if not isinstance(data, dict):
        raise ScenarioError("expected an object", field=where)
    _reject_unknown(data, _FAULT_FIELDS["rect"], where)
    if data.get("type", "rect") != "rect":
        raise ScenarioError("overlap members must be rectangles", field=f"{where}.type")
    for key in ("origin", "extents"):
        if key not in data:
            raise ScenarioError("missing field", field=f"{where}.{key}")
    origin = _int_list(data["origin"], f"{where}.origin", n)
    extents = _int_list(data["extents"], f"{where}.extents", n)
    return RectangularFault(tuple(origin), tuple(extents))


def _parse_fault(data: Any, n: int, where: str) -> FaultSpec:
    if not isinstance(data, dict):
        raise ScenarioError("expected an object", field=where)
    kind = data.get("type")
    if kind not in _FAULT_FIELDS:
        raise ScenarioError(f"unknown fault type {kind!r} (use rect, overlap or arbitrary)", field=f"{where}.type")
    if kind == "rect":
        return _parse_rect(data, n, where)
    _reject_unknown(data, _FAULT_FIELDS[kind], where)
    if kind == "overlap":
        rects = data.get("rects")
        if not isinstance(rects, list) or len(rects) < 2:
            raise ScenarioError("expected a list of at least two rectangles", field=f"{where}.rects")
        return OverlappingFault(tuple(_parse_rect(r, n, f"{where}.rects[{k}]") for k, r in enumerate(rects)))
    nodes = data.get("nodes")
    if not isinstance(nodes, list) or not nodes:
        raise ScenarioError("expected a non-empty list of coordinates", field=f"{where}.nodes")
    return ArbitraryFault(frozenset(tuple(_int_list(v, f"{where}.nodes[{k}]", n)) for k, v in enumerate(nodes)))


def _parse_choice(data: Dict, key: str, choices: Sequence[str], where: str, default):
    value = data.get(key, default)
    if value is not None and value not in choices:
        raise ScenarioError(f"expected one of {', '.join(choices)}, got {value!r}", field=f"{where}.{key}")
    return value


def _parse_positive(data: Dict, key: str, where: str, default: int, minimum: int = 1) -> int:
    value = data.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ScenarioError(f"expected an integer >= {minimum}, got {value!r}", field=f"{where}.{key}")
    return value


def parse_scenario(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(e.msg, line=e.lineno, column=e.colno) from e
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object", line=1, column=1)
    _reject_unknown(data, _TOP_FIELDS, "")

    if "mesh" not in data:
        raise ScenarioError("missing field", field="mesh")
    radices = _int_list(data["mesh"], "mesh")
    try:
        shape = MeshShape(tuple(radices))
    except MeshError as e:
        raise ScenarioError(str(e), field="mesh") from e

    raw_faults = data.get("faults", [])
    if not isinstance(raw_faults, list):
        raise ScenarioError("expected a list", field="faults")
    faults = []
    for k, raw in enumerate(raw_faults):
        where = f"faults[{k}]"
        fault = _parse_fault(raw, shape.n, where)
        try:
            fault.nodes(shape)
        except FaultSpecError as e:
            raise ScenarioError(str(e), field=where) from e
        faults.append(fault)

    analysis_data = data.get("analysis", {})
    if not isinstance(analysis_data, dict):
        raise ScenarioError("expected an object", field="analysis")
    _reject_unknown(analysis_data, _ANALYSIS_FIELDS, "analysis")
    analysis = AnalysisOptions(
        engine=_parse_choice(analysis_data, "engine", ENGINES, "analysis", "auto"),
        cross_check=_parse_choice(analysis_data, "cross_check", CROSS_CHECKS, "analysis", None),
        precision=_parse_positive(analysis_data, "precision", "analysis", config.PRECISION, minimum=0),
        pair_convention=_parse_choice(analysis_data, "pair_convention", PAIR_CONVENTIONS, "analysis", "unordered"),
        obstacle=_parse_choice(analysis_data, "obstacle", OBSTACLES, "analysis", "fr"),
    )

    mc_data = data.get("mc", {})
    if not isinstance(mc_data, dict):
        raise ScenarioError("expected an object", field="mc")
    _reject_unknown(mc_data, _MC_FIELDS, "mc")
    mc = McOptions(
        samples=_parse_positive(mc_data, "samples", "mc", config.SAMPLES),
        seed=_parse_positive(mc_data, "seed", "mc", config.SEED, minimum=0),
        workers=_parse_positive(mc_data, "workers", "mc", config.WORKERS),
    )

    name = data.get("name")
    if name is not None and not isinstance(name, str):
        raise ScenarioError("expected a string", field="name")
    logger.debug("parsed scenario %s on mesh %s with %d fault entries", name, shape.label(), len(faults))
    return ScenarioConfig(shape, tuple(faults), analysis, mc, name)


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as f:
        return parse_scenario(f.read())


@dataclass(frozen=True)
class Table2Row:
    row: int
    mesh: Tuple[int, ...]
    published_class: str
    origin: Tuple[int, ...]
    extents: Tuple[int, ...]
    published_p_hit: str

    def scenario(self) -> ScenarioConfig:
        return ScenarioConfig(MeshShape(self.mesh), (RectangularFault(self.origin, self.extents),),
                              name=f"row {self.row}")


# The published comparison table: mesh, fault class, origin, fault extents, P_hit.
TABLE2_ROWS: Tuple[Table2Row, ...] = (
    Table2Row(1, (3, 2, 2), "chain", (1, 1, 0), (1, 1, 1), "1"),
    Table2Row(2, (7, 8, 11), "ring", (2, 2, 2), (2, 1, 3), "0.214"),
    Table2Row(3, (5, 13, 9), "ring", (2, 3, 1), (1, 7, 2), "0.304"),
    Table2Row(4, (3, 5, 7), "chain", (0, 0, 1), (2, 2, 2), "0.817"),
    Table2Row(5, (6, 11, 17), "ring", (2, 4, 6), (4, 6, 10), "0.884"),
    Table2Row(6, (3, 7, 8, 9), "ring", (1, 1, 1, 1), (1, 5, 6, 8), "0.878"),
    Table2Row(7, (2, 3, 4, 2), "chain", (0, 0, 1, 0), (1, 1, 2, 1), "0.976"),
    Table2Row(8, (9, 5, 3, 9), "ring", (2, 3, 1, 3), (1, 1, 1, 4), "0.095"),
    Table2Row(9, (3, 3, 3, 3, 3), "chain", (1, 1, 1, 1, 1), (1, 1, 1, 2, 1), "1"),
    Table2Row(10, (5, 4, 3, 5, 6), "ring", (1, 1, 1, 1, 1), (1, 1, 1, 2, 1), "0.036"),
    Table2Row(11, (5, 4, 3, 5, 6), "ring", (2, 2, 2, 2, 2), (2, 2, 1, 1, 3), "0.104"),
)


def table2_row(number: int) -> Table2Row:
    for row in TABLE2_ROWS:
        if row.row == number:
            return row
    raise KeyError(f"no published row {number}")
