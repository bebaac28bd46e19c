"""Prompt construction for LLM task planning.

The prompt carries the task instruction, the detected descriptor list, the
primitive signature table, and a small bank of few-shot exemplars matched by
task family. Exemplar plans are validated at import against their own
vocabularies, so a broken exemplar fails loudly at startup rather than
mid-trial.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidParameter
from ..percept import SemanticKeypointSet
from ..planlang import SIGNATURES, SceneCapabilities, parse_plan, validate_plan
from ..vocab import vocabulary_for

# How the six primitives were fixed: a chain-of-thought session asking the
# model to (i) list clothes manipulation tasks, (ii) decompose them into
# basic actions, (iii) name the recurring actions. The resulting set
# {grasp, moveto, press, release, rotate, pull} is frozen in code; planning
# correctness never depends on re-deriving it live.
PRIMITIVE_DISCOVERY_PROMPT = """\
You are designing a minimal action vocabulary for a dual-arm cloth
manipulation robot.

Step 1. List common household clothes manipulation tasks (e.g. folding a
        T-shirt for storage, flattening a crumpled towel, hanging a skirt
        on a hanger, placing a towel in a box).
Step 2. Decompose each task into short sequences of basic arm actions.
Step 3. Name the recurring basic actions from step 2. Merge duplicates and
        output the minimal set that covers every sequence.
"""

FROZEN_PRIMITIVES = ("grasp", "moveto", "press", "release", "rotate", "pull")

SYSTEM_PROMPT = """\
You are a task planner for a dual-arm cloth manipulation robot.

You decompose an instruction into sub-tasks, one per line. Each sub-task is
one action primitive applied to contact points chosen from the detected
keypoint descriptors.

Primitive signatures:
{signatures}

Rules:
- Contact points must be quoted descriptors from the detected list.
- Something must be grasped before moveto, pull, rotate, or release.
- At most two simultaneous grasps; pull requires exactly two.
- moveto takes one target per active grasp; targets may be descriptors,
  hanger, box, or offset("descriptor", dx_meters, dy_meters).
- Output only plan lines. No commentary, no numbering, no blank lines.
"""


@dataclass(frozen=True)
class Exemplar:
    family: str
    category: str
    instruction: str
    plan_text: str


EXEMPLARS: tuple[Exemplar, ...] = (
    Exemplar(
        family="folding",
        category="towel",
        instruction="Fold the towel in half, left over right.",
        plan_text=(
            'grasp("corner_top_left", "corner_bottom_left")\n'
            'moveto("corner_top_right", "corner_bottom_right")\n'
            "release()\n"
            'press("corner_top_right", "corner_bottom_right")\n'
        ),
    ),
    Exemplar(
        family="folding",
        category="trousers",
        instruction="Fold the trousers in half, waist over legs.",
        plan_text=(
            'grasp("left_waist", "right_waist")\n'
            'moveto("left_leg", "right_leg")\n'
            "release()\n"
            'press("left_leg", "right_leg")\n'
        ),
    ),
    Exemplar(
        family="flattening",
        category="towel",
        instruction="Flatten the crumpled towel.",
        plan_text=(
            'grasp("corner_top_left", "corner_bottom_right")\n'
            "pull()\n"
            "release()\n"
            'grasp("corner_top_right", "corner_bottom_left")\n'
            "pull()\n"
            "release()\n"
        ),
    ),
    Exemplar(
        family="hanging",
        category="skirt",
        instruction="Hang the skirt on the hanger.",
        plan_text=(
            'grasp("left_waist", "right_waist")\n'
            'moveto(offset("left_waist", 0.00, 0.00), offset("right_waist", 0.00, 0.00))\n'
            "rotate(align(hanger))\n"
            "moveto(hanger, hanger)\n"
            "release()\n"
        ),
    ),
    Exemplar(
        family="placing",
        category="towel",
        instruction="Place the towel in the box.",
        plan_text=(
            'grasp("corner_top_left", "corner_top_right")\n'
            "moveto(box, box)\n"
            "release()\n"
        ),
    ),
)

_FULL_CAPS = SceneCapabilities(has_hanger=True, has_box=True)


def _check_exemplars() -> None:
    for ex in EXEMPLARS:
        plan = parse_plan(ex.plan_text)
        report = validate_plan(plan, vocabulary_for(ex.category), _FULL_CAPS)
        if not report.ok:
            raise InvalidParameter(f"broken exemplar {ex.instruction!r}: {report.summary()}")


_check_exemplars()


@dataclass
class PromptBundle:
    system: str
    exemplars: list[Exemplar]
    descriptors: list[str]
    instruction: str

    def messages(self) -> list[dict]:
        msgs = [{"role": "system", "content": self.system}]
        for ex in self.exemplars:
            msgs.append({"role": "user", "content": _user_turn(ex.instruction, ex.category, None)})
            msgs.append({"role": "assistant", "content": ex.plan_text.strip()})
        msgs.append({"role": "user", "content": _user_turn(self.instruction, None, self.descriptors)})
        return msgs


def _user_turn(instruction: str, category: str | None, descriptors: list[str] | None) -> str:
    if descriptors is None:
        descriptors = list(vocabulary_for(category).descriptors)
    return f"Instruction: {instruction}\nDetected keypoints: {', '.join(descriptors)}"


def build_prompt(task, keypoints: SemanticKeypointSet, n_exemplars: int = 4) -> PromptBundle:
    """Deterministic prompt for one task; exemplars matched by family first."""
    if len(keypoints) == 0:
        raise InvalidParameter("cannot plan without detected keypoints")
    matched = [e for e in EXEMPLARS if e.family == task.family]
    others = [e for e in EXEMPLARS if e.family != task.family]
    chosen = (matched + others)[:n_exemplars]
    system = SYSTEM_PROMPT.format(
        signatures="\n".join(f"- {sig[2]}" for sig in SIGNATURES.values())
    )
    return PromptBundle(
        system=system,
        exemplars=chosen,
        descriptors=[kp.descriptor for kp in keypoints.keypoints],
        instruction=task.instruction,
    )
