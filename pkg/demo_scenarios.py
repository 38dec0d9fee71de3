import os
import sys
from typing import Dict, List

import pandas as pd

from fault_model import ArbitraryFault, OverlappingFault, RectangularFault
from mesh import MeshShape
from scenario_loader import TABLE2_ROWS, ScenarioConfig

# Small scenarios for trying the CLI by hand
EXTRA_SCENARIOS = {
    "small_ring": ScenarioConfig(MeshShape((4, 4)), (RectangularFault((1, 1), (1, 1)),), name="small ring"),
    "fault_free": ScenarioConfig(MeshShape((5, 5)), (), name="fault free"),
    "x_shape": ScenarioConfig(
        MeshShape((5, 5)),
        (ArbitraryFault(frozenset({(1, 1), (1, 3), (2, 2), (3, 1), (3, 3)})),),
        name="x-shaped fault",
    ),
    "overlap": ScenarioConfig(
        MeshShape((6, 6)),
        (OverlappingFault((RectangularFault((1, 1), (2, 2)), RectangularFault((2, 2), (2, 2)))),),
        name="two overlapping blocks",
    ),
    "disconnecting": ScenarioConfig(
        MeshShape((3, 3)),
        (ArbitraryFault(frozenset({(0, 1), (1, 0)})),),
        name="corner cut off",
    ),
}


def demo_scenarios() -> Dict[str, ScenarioConfig]:
    scenarios = {f"table2_row{row.row:02d}": row.scenario() for row in TABLE2_ROWS}
    scenarios.update(EXTRA_SCENARIOS)
    return scenarios


def write_demo_scenarios(directory: str) -> List[str]:
    """Writes one JSON file per demo scenario plus an overview sheet; returns the JSON paths."""
    os.makedirs(directory, exist_ok=True)
    paths, overview = [], []
    for name, scenario in demo_scenarios().items():
        path = os.path.join(directory, f"{name}.json")
        with open(path, "w", encoding="utf-8") as f:
            f.write(scenario.to_json() + "\n")
        paths.append(path)
        overview.append({
            "file": os.path.basename(path),
            "mesh": scenario.mesh.label(),
            "faults": " + ".join(fault.describe() for fault in scenario.faults) or "-",
        })
    pd.DataFrame(overview).to_excel(os.path.join(directory, "demo_scenarios.xlsx"), index=False)
    return paths


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "demo_scenarios"
    written = write_demo_scenarios(target)
    print(f"Demo scenarios created in {target}/")
    print("\nFile yang tersedia:")
    for path in written:
        print(f"- {os.path.basename(path)}")
    print("\nContoh: python app.py analyze -s " + os.path.join(target, "small_ring.json"))
