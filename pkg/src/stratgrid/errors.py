"""Exception hierarchy. Every error carries a distinct CLI exit code."""


class StratGridError(Exception):
    exit_code = 10


class ParseError(StratGridError):
    exit_code = 11


class ValidationError(StratGridError):
    exit_code = 12

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class DanglingReference(ValidationError):
    exit_code = 13

    def __init__(self, path: str, missing_id: str):
        self.missing_id = missing_id
        super().__init__(path, f"unknown endpoint id {missing_id!r}")


class DomainError(StratGridError, ValueError):
    exit_code = 14


class LengthMismatch(StratGridError, ValueError):
    exit_code = 15


class BoundsError(StratGridError):
    exit_code = 16


class SimultaneousChargeDischarge(StratGridError):
    exit_code = 17


class ZeroDistance(StratGridError):
    exit_code = 18


class NoPath(StratGridError):
    exit_code = 19


class InfeasibleByConstruction(StratGridError):
    exit_code = 20

    def __init__(self, node_id: str, step: int, shortfall_wh: float):
        self.node_id = node_id
        self.step = step
        self.shortfall_wh = shortfall_wh
        super().__init__(
            f"node {node_id!r} cannot be supplied at step {step}: "
            f"load exceeds maximal intake by {shortfall_wh:.3f} Wh"
        )


class Infeasible(StratGridError):
    exit_code = 21

    def __init__(self, message: str, violated_rows=()):
        self.violated_rows = list(violated_rows)
        super().__init__(message)


class Unbounded(StratGridError):
    exit_code = 22


class TooLarge(StratGridError):
    exit_code = 23


class PlanMismatch(StratGridError):
    exit_code = 24


class ConservationViolation(StratGridError):
    exit_code = 25

    def __init__(self, node_id: str, step: int, residual_wh: float):
        self.node_id = node_id
        self.step = step
        self.residual_wh = residual_wh
        super().__init__(
            f"energy balance violated for node {node_id!r} at step {step}: "
            f"residual {residual_wh:.6g} Wh"
        )


class ScenarioMismatch(StratGridError):
    exit_code = 26


class IoError(StratGridError):
    exit_code = 27
