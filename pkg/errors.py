from typing import Optional, Tuple


class MeshRingError(Exception):
    """Base class for every error raised by the analyzer."""


class MeshError(MeshRingError, ValueError):
    pass


class FaultSpecError(MeshRingError, ValueError):
    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class RestrictionError(MeshRingError):
    pass


class EnumerationCapError(MeshRingError):
    pass


class CrossCheckError(MeshRingError):
    """The determinant and DP engines disagreed on one source-destination pair."""

    def __init__(self, pair: Tuple[Tuple[int, ...], Tuple[int, ...]], det_count: int, dp_count: int):
        self.pair = pair
        self.det_count = det_count
        self.dp_count = dp_count
        super().__init__(
            f"engines disagree on pair {pair[0]} -> {pair[1]}: determinant={det_count}, dp={dp_count}"
        )


class ReliabilityError(MeshRingError):
    pass


class ScenarioError(MeshRingError):
    """Scenario text could not be turned into a config; carries the location of the problem."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None,
                 field: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if field:
            where.append(field)
        super().__init__(f"{' / '.join(where)}: {message}" if where else message)


class BudgetExceededError(MeshRingError):
    pass
