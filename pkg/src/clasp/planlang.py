"""The sub-task plan language.

Plans are line-oriented: one primitive call per line, e.g.::

    # fold in half, left over right
    grasp("corner_top_left", "corner_bottom_left")
    moveto("corner_top_right", "corner_bottom_right")
    release()
    press("corner_top_right", "corner_bottom_right")

Descriptors arriving in natural LLM form ("left sleeve") are normalized to
snake_case at parse time. Offsets are meters at centimeter resolution; the
canonical printer renders them with two decimals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError
from .vocab import Vocabulary

PRIMITIVES = ("grasp", "moveto", "press", "release", "rotate", "pull")

# Signature table: (min arity, max arity, human-readable argument forms).
SIGNATURES: dict[str, tuple[int, int, str]] = {
    "grasp": (1, 2, 'grasp("descriptor"[, "descriptor"])'),
    "moveto": (1, 2, 'moveto(target[, target]) with target = "descriptor" | hanger | box | offset("descriptor", dx, dy); one target per active grasp'),
    "press": (1, 2, 'press("descriptor"[, "descriptor"])'),
    "release": (0, 0, "release()"),
    "rotate": (1, 1, "rotate(angle_degrees) or rotate(align(hanger))"),
    "pull": (0, 0, "pull()"),
}


# --- AST ----------------------------------------------------------------------

@dataclass(frozen=True)
class Descriptor:
    name: str


@dataclass(frozen=True)
class Receptacle:
    kind: str                      # "hanger" | "box"


@dataclass(frozen=True)
class Offset:
    descriptor: str
    dx: float                      # meters
    dy: float


@dataclass(frozen=True)
class Angle:
    degrees: float


@dataclass(frozen=True)
class AlignTo:
    target: str = "hanger"


Arg = Descriptor | Receptacle | Offset | Angle | AlignTo


@dataclass
class SubTask:
    primitive: str
    args: tuple[Arg, ...]
    line: int = field(default=0, compare=False)


@dataclass
class Plan:
    subtasks: list[SubTask]
    source: str = ""
    provenance: str = "manual"     # "llm" | "template" | "manual"

    def __len__(self) -> int:
        return len(self.subtasks)


# --- parser -------------------------------------------------------------------

def normalize_descriptor(raw: str) -> str:
    return re.sub(r"\s+", "_", raw.strip().lower())


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#.*)
  | (?P<string>"[^"\n]*")
  | (?P<number>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str, line_no: int) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError("MalformedArgs", f"unexpected character {text[pos]!r}", line_no, pos + 1)
        kind = m.lastgroup
        if kind == "comment":
            break
        if kind != "ws":
            tokens.append((kind, m.group(), m.start() + 1))
        pos = m.end()
    return tokens


class _LineParser:
    def __init__(self, tokens: list[tuple[str, str, int]], line_no: int):
        self.tokens = tokens
        self.line_no = line_no
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self, expect_kind: str | None = None, expect_text: str | None = None):
        tok = self.peek()
        if tok is None:
            raise ParseError("MalformedArgs", "unexpected end of line", self.line_no,
                             self.tokens[-1][2] if self.tokens else 1)
        kind, text, col = tok
        if expect_kind and kind != expect_kind:
            raise ParseError("MalformedArgs", f"expected {expect_kind}, got {text!r}", self.line_no, col)
        if expect_text and text != expect_text:
            raise ParseError("MalformedArgs", f"expected {expect_text!r}, got {text!r}", self.line_no, col)
        self.i += 1
        return tok

    def parse_subtask(self) -> SubTask:
        kind, name, col = self.next()
        if kind != "name" or name not in PRIMITIVES:
            raise ParseError("UnknownPrimitive", f"unknown primitive {name!r}", self.line_no, col)
        self.next("punct", "(")
        args: list[Arg] = []
        tok = self.peek()
        if tok and tok[1] == ")":
            self.next()
        else:
            while True:
                args.append(self.parse_arg())
                kind, text, col = self.next("punct")
                if text == ")":
                    break
                if text != ",":
                    raise ParseError("MalformedArgs", f"expected ',' or ')', got {text!r}", self.line_no, col)
        if self.peek() is not None:
            _, text, col = self.peek()
            raise ParseError("MalformedArgs", f"trailing {text!r} after ')'", self.line_no, col)
        return SubTask(primitive=name, args=tuple(args), line=self.line_no)

    def parse_arg(self) -> Arg:
        kind, text, col = self.next()
        if kind == "string":
            return Descriptor(normalize_descriptor(text[1:-1]))
        if kind == "number":
            return Angle(float(text))
        if kind == "name":
            if text in ("hanger", "box"):
                return Receptacle(text)
            if text == "offset":
                self.next("punct", "(")
                _, d, _ = self.next("string")
                self.next("punct", ",")
                _, dx, _ = self.next("number")
                self.next("punct", ",")
                _, dy, _ = self.next("number")
                self.next("punct", ")")
                return Offset(normalize_descriptor(d[1:-1]), float(dx), float(dy))
            if text == "align":
                self.next("punct", "(")
                self.next("name", "hanger")
                self.next("punct", ")")
                return AlignTo("hanger")
        raise ParseError("MalformedArgs", f"cannot interpret argument {text!r}", self.line_no, col)


def parse_plan(text: str, provenance: str = "manual") -> Plan:
    """Parse plan text into an AST; raises ParseError with a location."""
    if not isinstance(text, str):
        raise ParseError("MalformedArgs", "plan must be text", 1, 1)
    subtasks = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(raw, line_no)
        if not tokens:
            continue
        subtasks.append(_LineParser(tokens, line_no).parse_subtask())
    if not subtasks:
        raise ParseError("EmptyPlan", "no sub-tasks found", 1, 1)
    return Plan(subtasks=subtasks, source=text, provenance=provenance)


# --- canonical printer ---------------------------------------------------------

def _format_arg(arg: Arg) -> str:
    if isinstance(arg, Descriptor):
        return f'"{arg.name}"'
    if isinstance(arg, Receptacle):
        return arg.kind
    if isinstance(arg, Offset):
        return f'offset("{arg.descriptor}", {arg.dx:.2f}, {arg.dy:.2f})'
    if isinstance(arg, Angle):
        return repr(arg.degrees)
    if isinstance(arg, AlignTo):
        return f"align({arg.target})"
    raise TypeError(f"unknown argument type {type(arg)!r}")


def format_plan(plan: Plan) -> str:
    """Canonical text: one sub-task per line, no trailing whitespace."""
    lines = [
        f"{st.primitive}({', '.join(_format_arg(a) for a in st.args)})"
        for st in plan.subtasks
    ]
    return "\n".join(lines) + "\n"


# --- validator -----------------------------------------------------------------

@dataclass(frozen=True)
class SceneCapabilities:
    has_hanger: bool = False
    has_box: bool = False

    @classmethod
    def from_scene(cls, scene) -> "SceneCapabilities":
        return cls(has_hanger=scene.hanger is not None, has_box=scene.box is not None)


@dataclass
class Issue:
    index: int                     # sub-task index within the plan
    code: str
    message: str


@dataclass
class ValidationReport:
    ok: bool
    issues: list[Issue] = field(default_factory=list)

    def summary(self) -> str:
        if self.ok:
            return "plan is valid"
        return "; ".join(f"sub-task {i.index + 1}: {i.code}: {i.message}" for i in self.issues)


def validate_plan(
    plan: Plan,
    vocab: Vocabulary,
    capabilities: SceneCapabilities = SceneCapabilities(),
) -> ValidationReport:
    """Static signature checks plus a symbolic grasp-state walk.

    The state machine mirrors what execution grounding enforces: something
    must be grasped before moveto/pull/rotate/release, at most two grasps
    are active, pull needs exactly two, and receptacle references require
    the receptacle to exist in the scene.
    """
    issues: list[Issue] = []
    active = 0

    def say(idx: int, code: str, message: str) -> None:
        issues.append(Issue(idx, code, message))

    def check_descriptor(idx: int, name: str) -> None:
        if name not in vocab:
            say(idx, "UnknownDescriptor",
                f"{name!r} is not a {vocab.category} descriptor "
                f"(choose from: {', '.join(vocab.descriptors)})")

    def check_receptacle(idx: int, kind: str) -> None:
        if kind == "hanger" and not capabilities.has_hanger:
            say(idx, "MissingReceptacle", "no hanger in this scene")
        if kind == "box" and not capabilities.has_box:
            say(idx, "MissingReceptacle", "no box in this scene")

    for idx, st in enumerate(plan.subtasks):
        lo, hi, usage = SIGNATURES[st.primitive]
        if not (lo <= len(st.args) <= hi):
            say(idx, "BadArity", f"{st.primitive} takes {lo}..{hi} arguments; usage: {usage}")
            continue

        if st.primitive == "grasp":
            for a in st.args:
                if not isinstance(a, Descriptor):
                    say(idx, "BadArgKind", f"grasp arguments must be descriptors; usage: {usage}")
                else:
                    check_descriptor(idx, a.name)
            if active + len(st.args) > 2:
                say(idx, "TooManyGrasps", "at most two simultaneous grasps")
            else:
                active += len(st.args)

        elif st.primitive == "moveto":
            if active == 0:
                say(idx, "NothingGrasped", "moveto requires an active grasp")
            elif len(st.args) != active:
                say(idx, "MovetoCountMismatch",
                    f"moveto needs one target per active grasp ({active} active, {len(st.args)} given)")
            for a in st.args:
                if isinstance(a, Descriptor):
                    check_descriptor(idx, a.name)
                elif isinstance(a, Receptacle):
                    check_receptacle(idx, a.kind)
                elif isinstance(a, Offset):
                    check_descriptor(idx, a.descriptor)
                else:
                    say(idx, "BadArgKind", f"moveto target cannot be {type(a).__name__}; usage: {usage}")

        elif st.primitive == "press":
            for a in st.args:
                if not isinstance(a, Descriptor):
                    say(idx, "BadArgKind", f"press arguments must be descriptors; usage: {usage}")
                else:
                    check_descriptor(idx, a.name)

        elif st.primitive == "release":
            if active == 0:
                say(idx, "NothingGrasped", "release requires an active grasp")
            active = 0

        elif st.primitive == "rotate":
            arg = st.args[0]
            if not isinstance(arg, (Angle, AlignTo)):
                say(idx, "BadArgKind", f"rotate takes an angle or align(hanger); usage: {usage}")
            if active == 0:
                say(idx, "NothingGrasped", "rotate requires an active grasp")
            if isinstance(arg, AlignTo) and not capabilities.has_hanger:
                say(idx, "MissingReceptacle", "rotate(align(hanger)) requires a hanger in the scene")

        elif st.primitive == "pull":
            if active != 2:
                say(idx, "PullNeedsTwoGrasps", f"pull requires exactly two active grasps ({active} active)")

    return ValidationReport(ok=not issues, issues=issues)
