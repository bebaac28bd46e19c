"""Exception types shared across the clasp subsystems."""


class ClaspError(Exception):
    """Base class for all errors raised by this package."""


# --- simulator ---------------------------------------------------------------

class InvalidTemplate(ClaspError):
    pass


class OutOfWorkspace(ClaspError):
    pass


class NumericalDivergence(ClaspError):
    """NaN/inf detected in the particle state; aborts the current trial."""


class SettleTimeout(ClaspError):
    pass


# --- perception / detector ---------------------------------------------------

class InvalidParameter(ClaspError):
    pass


class SchemaMismatch(ClaspError):
    """Vocabulary / channel-count disagreement between two keypoint artifacts."""


class InvalidInput(ClaspError):
    pass


class DivergedTraining(ClaspError):
    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


# --- plan language -----------------------------------------------------------

class ParseError(ClaspError):
    """Plan text rejected; carries a code and a 1-based line/column location."""

    def __init__(self, code: str, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{code} at line {line}, col {col}: {message}")
        self.code = code
        self.line = line
        self.col = col


# --- planner -----------------------------------------------------------------

class PlanningFailed(ClaspError):
    def __init__(self, message: str, attempts: list | None = None):
        super().__init__(message)
        self.attempts = attempts or []


class TransportError(ClaspError):
    """HTTP failure, timeout, or missing offline transcript."""


class UnsupportedTask(ClaspError):
    pass


# --- skills ------------------------------------------------------------------

class GroundingFailed(ClaspError):
    def __init__(self, descriptor: str, reason: str = ""):
        super().__init__(f"cannot ground {descriptor!r}" + (f": {reason}" if reason else ""))
        self.descriptor = descriptor


class Unreachable(ClaspError):
    pass


class DegenerateGrasp(ClaspError):
    pass


class GraspMissed(ClaspError):
    """No particle within grasp radius when the gripper closed (logged, non-fatal)."""


# --- bench -------------------------------------------------------------------

class InvalidSpec(ClaspError):
    pass


class IoError(ClaspError):
    pass
