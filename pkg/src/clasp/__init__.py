"""clasp: semantic-keypoint cloth manipulation toolkit.

Subsystems: `sim` (particle cloth simulator), `percept` (keypoints, heatmaps,
metrics), `detector` (masked-reconstruction keypoint detector), `planlang`
(sub-task plan language), `planner` (LLM and template planners), `skills`
(primitive execution), `bench` (task suite and reports).
"""

__version__ = "0.1.0"
