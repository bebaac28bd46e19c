import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clasp.errors import ParseError
from clasp.planlang import (
    AlignTo,
    Angle,
    Descriptor,
    Offset,
    Plan,
    Receptacle,
    SceneCapabilities,
    SubTask,
    format_plan,
    parse_plan,
    validate_plan,
)
from clasp.vocab import vocabulary_for


class TestParse:
    def test_two_subtasks(self):
        plan = parse_plan('grasp("left sleeve")\nmoveto("right shoulder")')
        assert len(plan) == 2
        assert plan.subtasks[0].primitive == "grasp"
        # natural-language descriptors are normalized to vocabulary form
        assert plan.subtasks[0].args == (Descriptor("left_sleeve"),)
        assert plan.subtasks[1].args == (Descriptor("right_shoulder"),)

    def test_unknown_primitive(self):
        with pytest.raises(ParseError) as exc:
            parse_plan('fling("corner")')
        assert exc.value.code == "UnknownPrimitive"
        assert exc.value.line == 1

    def test_empty_plan(self):
        with pytest.raises(ParseError) as exc:
            parse_plan("")
        assert exc.value.code == "EmptyPlan"

    def test_comments_and_blanks_ignored(self):
        plan = parse_plan("# a comment\n\ngrasp(\"corner_top_left\")  # inline\n\n")
        assert len(plan) == 1

    def test_all_arg_forms(self):
        text = (
            'grasp("left_waist", "right_waist")\n'
            'moveto(offset("left_waist", 0.05, 0.00), hanger)\n'
            "rotate(align(hanger))\n"
            "rotate(-45.5)\n"
            "pull()\n"
            "release()\n"
        )
        plan = parse_plan(text)
        assert plan.subtasks[1].args[0] == Offset("left_waist", 0.05, 0.0)
        assert plan.subtasks[1].args[1] == Receptacle("hanger")
        assert plan.subtasks[2].args[0] == AlignTo("hanger")
        assert plan.subtasks[3].args[0] == Angle(-45.5)

    def test_error_location(self):
        with pytest.raises(ParseError) as exc:
            parse_plan('grasp("a")\nmoveto("b" "c")')
        assert exc.value.line == 2

    def test_malformed(self):
        for bad in ("grasp(", "grasp)", 'grasp("a",)', "grasp(]", "grasp('a')", "grasp(\"a\") x"):
            with pytest.raises(ParseError):
                parse_plan(bad)


# strategy for structurally valid plan ASTs (offsets at cm resolution,
# matching the canonical printer's two-decimal convention)
_DESCRIPTORS = st.sampled_from(vocabulary_for("tshirt").descriptors + vocabulary_for("towel").descriptors)
_CM = st.integers(-30, 30).map(lambda v: v / 100.0)
_ANGLE = st.floats(min_value=-360, max_value=360, allow_nan=False, allow_infinity=False)
_ARG = st.one_of(
    _DESCRIPTORS.map(Descriptor),
    st.sampled_from(["hanger", "box"]).map(Receptacle),
    st.builds(Offset, _DESCRIPTORS, _CM, _CM),
    _ANGLE.map(Angle),
    st.just(AlignTo("hanger")),
)


@st.composite
def plans(draw) -> Plan:
    n = draw(st.integers(1, 6))
    subtasks = []
    for _ in range(n):
        prim = draw(st.sampled_from(["grasp", "moveto", "press", "release", "rotate", "pull"]))
        if prim in ("release", "pull"):
            args = ()
        elif prim == "rotate":
            args = (draw(st.one_of(_ANGLE.map(Angle), st.just(AlignTo("hanger"))))),
        elif prim == "moveto":
            args = tuple(draw(st.lists(_ARG.filter(lambda a: isinstance(a, (Descriptor, Receptacle, Offset))), min_size=1, max_size=2)))
        else:
            args = tuple(draw(st.lists(_DESCRIPTORS.map(Descriptor), min_size=1, max_size=2)))
        subtasks.append(SubTask(primitive=prim, args=args))
    return Plan(subtasks=subtasks)


class TestFormat:
    def test_canonical_offset_format(self):
        plan = Plan(subtasks=[SubTask("moveto", (Offset("left_waist", 0.05, 0.0),))])
        assert format_plan(plan) == 'moveto(offset("left_waist", 0.05, 0.00))\n'

    def test_no_trailing_whitespace(self):
        plan = parse_plan('grasp(  "a_b" ,  "c_d" )')
        for line in format_plan(plan).splitlines():
            assert line == line.rstrip()

    @given(plans())
    @settings(max_examples=300, deadline=None)
    def test_round_trip(self, plan):
        assert parse_plan(format_plan(plan)).subtasks == plan.subtasks

    @given(plans())
    @settings(max_examples=100, deadline=None)
    def test_format_idempotent(self, plan):
        once = format_plan(plan)
        assert format_plan(parse_plan(once)) == once

    @given(st.binary(max_size=120))
    @settings(max_examples=300, deadline=None)
    def test_fuzz_structured_errors_only(self, blob):
        text = blob.decode("utf-8", errors="replace")
        try:
            parse_plan(text)
        except ParseError as exc:
            assert exc.line >= 1
        # any other exception type fails the test


class TestValidate:
    def setup_method(self):
        self.towel = vocabulary_for("towel")
        self.caps = SceneCapabilities(has_hanger=True, has_box=True)

    def check(self, text, caps=None):
        return validate_plan(parse_plan(text), self.towel, caps or self.caps)

    def test_fold_plan_valid(self):
        report = self.check(
            'grasp("corner_top_left")\nmoveto("corner_bottom_left")\nrelease()'
        )
        assert report.ok and report.issues == []

    def test_moveto_before_grasp(self):
        report = self.check('moveto("corner_top_left")')
        assert not report.ok
        assert report.issues[0].code == "NothingGrasped"

    def test_unknown_descriptor(self):
        report = self.check('grasp("left_sleeve")')
        assert [i.code for i in report.issues] == ["UnknownDescriptor"]

    def test_pull_needs_two(self):
        report = self.check('grasp("corner_top_left")\npull()')
        assert any(i.code == "PullNeedsTwoGrasps" for i in report.issues)
        ok = self.check('grasp("corner_top_left", "corner_top_right")\npull()')
        assert ok.ok

    def test_too_many_grasps(self):
        report = self.check(
            'grasp("corner_top_left", "corner_top_right")\ngrasp("corner_bottom_left")'
        )
        assert any(i.code == "TooManyGrasps" for i in report.issues)

    def test_moveto_count_mismatch(self):
        report = self.check(
            'grasp("corner_top_left", "corner_top_right")\nmoveto("corner_bottom_left")'
        )
        assert any(i.code == "MovetoCountMismatch" for i in report.issues)

    def test_rotate_align_requires_hanger(self):
        report = self.check(
            'grasp("corner_top_left")\nrotate(align(hanger))',
            caps=SceneCapabilities(has_hanger=False),
        )
        assert any(i.code == "MissingReceptacle" for i in report.issues)

    def test_release_requires_grasp(self):
        report = self.check("release()")
        assert report.issues[0].code == "NothingGrasped"

    def test_bad_arity(self):
        report = self.check("rotate(30, 40)")
        assert report.issues[0].code == "BadArity"

    def test_issue_indices_point_at_subtasks(self):
        report = self.check('grasp("corner_top_left")\nmoveto("nope")')
        assert report.issues[0].index == 1
