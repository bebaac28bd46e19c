"""Low-level action primitives: grounding, trajectory compilation, execution."""

from .execute import ExecutionLog, execute
from .grounding import ARMS, ArmTarget, Grounding, GripperState, WorldState, ground_contacts
from .trajectory import Trajectory, Waypoint, check_speed_bound, compile_subtask

__all__ = [
    "ground_contacts", "Grounding", "ArmTarget", "WorldState", "GripperState", "ARMS",
    "compile_subtask", "Trajectory", "Waypoint", "check_speed_bound",
    "execute", "ExecutionLog",
]
