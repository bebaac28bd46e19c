"""Deterministic mass-spring cloth simulator with garment templates."""

from .camera import OrthoCamera, load_depth_raw, render_depth, save_depth_raw
from .coverage import coverage
from .dynamics import apply_crumple, settle, step
from .scene import Box, GripperCommand, HangerBar, Scene, default_scene
from .state import ClothState, instantiate_cloth
from .templates import (
    BEND,
    CATEGORY_ANCHORS,
    CATEGORY_OUTLINES,
    DEFAULT_GRID_SPACING,
    SHEAR,
    STRUCTURAL,
    ClothTemplate,
    build_template,
)

__all__ = [
    "OrthoCamera", "render_depth", "save_depth_raw", "load_depth_raw",
    "coverage", "step", "settle", "apply_crumple",
    "Scene", "HangerBar", "Box", "GripperCommand", "default_scene",
    "ClothState", "instantiate_cloth",
    "ClothTemplate", "build_template",
    "CATEGORY_OUTLINES", "CATEGORY_ANCHORS", "DEFAULT_GRID_SPACING",
    "STRUCTURAL", "SHEAR", "BEND",
]
