"""Per-category descriptor vocabularies.

The descriptor order is load-bearing: it fixes the heatmap channel order of
the detector and the entry order of keypoint sets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SchemaMismatch

CATEGORIES = ("towel", "tshirt", "trousers", "skirt")

CATEGORY_DESCRIPTORS: dict[str, tuple[str, ...]] = {
    "towel": (
        "corner_top_left",
        "corner_top_right",
        "corner_bottom_left",
        "corner_bottom_right",
    ),
    "tshirt": (
        "collar",
        "left_shoulder",
        "right_shoulder",
        "left_sleeve",
        "right_sleeve",
        "left_hem",
        "right_hem",
    ),
    "trousers": (
        "left_waist",
        "right_waist",
        "left_leg",
        "right_leg",
    ),
    "skirt": (
        "left_waist",
        "right_waist",
        "left_hem",
        "right_hem",
    ),
}


@dataclass(frozen=True)
class Vocabulary:
    category: str
    descriptors: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.descriptors)) != len(self.descriptors):
            raise SchemaMismatch(f"duplicate descriptors in {self.category} vocabulary")

    def __len__(self) -> int:
        return len(self.descriptors)

    def index(self, descriptor: str) -> int:
        try:
            return self.descriptors.index(descriptor)
        except ValueError:
            raise SchemaMismatch(
                f"descriptor {descriptor!r} not in {self.category} vocabulary"
            ) from None

    def __contains__(self, descriptor: str) -> bool:
        return descriptor in self.descriptors


def vocabulary_for(category: str) -> Vocabulary:
    if category not in CATEGORY_DESCRIPTORS:
        raise SchemaMismatch(f"unknown clothes category {category!r}")
    return Vocabulary(category, CATEGORY_DESCRIPTORS[category])
