"""Task specification shared by planners and the benchmark."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidSpec
from ..vocab import CATEGORY_DESCRIPTORS

FAMILIES = ("folding", "flattening", "hanging", "placing")
FOLD_DIRECTIONS = ("left_to_right", "right_to_left", "top_to_bottom", "bottom_to_top")


@dataclass
class TaskSpec:
    family: str
    category: str
    instruction: str
    fold_direction: str = "left_to_right"
    fold_fraction: float = 0.5
    fold_times: int = 1
    crumple_intensity: float = 0.6
    receptacle: str | None = None        # "hanger" | "box"
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown task family {self.family!r}")
        if self.category not in CATEGORY_DESCRIPTORS:
            raise InvalidSpec(f"unknown category {self.category!r}")
        if self.family == "hanging" and self.receptacle != "hanger":
            raise InvalidSpec("hanging tasks require receptacle='hanger'")
        if self.family == "placing" and self.receptacle != "box":
            raise InvalidSpec("placing tasks require receptacle='box'")
        if self.family == "folding":
            if self.fold_direction not in FOLD_DIRECTIONS:
                raise InvalidSpec(f"unknown fold direction {self.fold_direction!r}")
            if not 0.0 < self.fold_fraction <= 0.5:
                raise InvalidSpec("fold fraction must be in (0, 0.5]")
            if self.fold_times not in (1, 2):
                raise InvalidSpec("fold times must be 1 or 2")

    @property
    def name(self) -> str:
        parts = [self.family, self.category]
        if self.family == "folding":
            parts.append(self.fold_direction)
            if self.fold_fraction != 0.5:
                parts.append(f"f{self.fold_fraction:g}")
            if self.fold_times != 1:
                parts.append(f"x{self.fold_times}")
        return "-".join(parts)
