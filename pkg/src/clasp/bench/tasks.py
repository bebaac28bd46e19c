"""The benchmark task catalog.

Sixteen base tasks (four families over four categories) plus folding
requirement variants (fold position, direction, and repetition) on the
towel. Thresholds live in BenchConfig; the catalog only enumerates specs.
"""

from __future__ import annotations

from ..planner.task import TaskSpec
from ..vocab import CATEGORIES

NICE_NAME = {"towel": "towel", "tshirt": "T-shirt", "trousers": "trousers", "skirt": "skirt"}

# natural fold direction per category (top edge folds onto the bottom for
# garments whose graspable edge is the waist/shoulders)
_FOLD_DIRECTION = {
    "towel": "left_to_right",
    "tshirt": "left_to_right",
    "trousers": "top_to_bottom",
    "skirt": "top_to_bottom",
}


def base_tasks() -> list[TaskSpec]:
    tasks = []
    for cat in CATEGORIES:
        nice = NICE_NAME[cat]
        tasks.append(TaskSpec(
            family="folding", category=cat,
            instruction=f"Fold the {nice} in half.",
            fold_direction=_FOLD_DIRECTION[cat],
        ))
        tasks.append(TaskSpec(
            family="flattening", category=cat,
            instruction=f"Flatten the crumpled {nice}.",
        ))
        tasks.append(TaskSpec(
            family="hanging", category=cat,
            instruction=f"Hang the {nice} on the hanger.",
            receptacle="hanger",
        ))
        tasks.append(TaskSpec(
            family="placing", category=cat,
            instruction=f"Place the {nice} in the box.",
            receptacle="box",
        ))
    return tasks


def folding_variants() -> list[TaskSpec]:
    return [
        TaskSpec(
            family="folding", category="towel",
            instruction="Fold the left quarter of the towel over.",
            fold_direction="left_to_right", fold_fraction=0.25,
        ),
        TaskSpec(
            family="folding", category="towel",
            instruction="Fold the towel in half, top over bottom.",
            fold_direction="top_to_bottom",
        ),
        TaskSpec(
            family="folding", category="towel",
            instruction="Fold the towel in half twice.",
            fold_direction="left_to_right", fold_times=2,
        ),
    ]


def catalog() -> list[TaskSpec]:
    return base_tasks() + folding_variants()


def find_task(name: str) -> TaskSpec:
    for task in catalog():
        if task.name == name:
            return task
    from ..errors import InvalidSpec

    known = ", ".join(t.name for t in catalog())
    raise InvalidSpec(f"no task named {name!r}; known tasks: {known}")
