"""Seeded trial runner and suite executor."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import Config
from ..errors import ClaspError, IoError
from ..percept import SemanticKeypointSet, extract_keypoints, project_keypoints
from ..planlang import Plan, SceneCapabilities, format_plan, validate_plan
from ..planner import LlmConfig, TaskSpec, plan_with_llm, template_plan
from ..sim import OrthoCamera, apply_crumple, default_scene, instantiate_cloth, render_depth
from ..sim.coverage import coverage
from ..sim.templates import build_template
from ..skills import ExecutionLog, WorldState, compile_subtask, execute, ground_contacts
from ..vocab import vocabulary_for
from .evaluate import evaluate_success
from .tasks import catalog


@dataclass
class TrialModes:
    planner: str = "template"            # template | llm | llm-offline
    detector: str = "oracle"             # oracle | learned
    checkpoint: str | None = None        # required in learned mode
    llm: LlmConfig | None = None
    offline_dir: str | None = None       # transcripts for llm-offline


@dataclass
class TrialResult:
    task: str
    family: str
    category: str
    seed: int
    plan_text: str
    subtask_status: list[str]
    success: bool
    score: float
    failure_stage: str
    events: list[str]
    wall_time_s: float

    def to_json_dict(self) -> dict:
        return {
            "task": self.task,
            "family": self.family,
            "category": self.category,
            "seed": self.seed,
            "plan": self.plan_text,
            "subtask_status": self.subtask_status,
            "success": bool(self.success),
            "score": float(self.score),
            "failure_stage": self.failure_stage,
            "events": self.events,
            "wall_time_s": round(self.wall_time_s, 3),
        }


# family-specific start offsets keep the cloth clear of the receptacles
_START_OFFSET = {
    "folding": (0.0, 0.0),
    "flattening": (0.0, 0.0),
    "hanging": (0.0, -0.10),
    "placing": (-0.10, 0.10),
}


def _load_detector(modes: TrialModes):
    if modes.detector == "learned":
        from ..detector import load_model

        if not modes.checkpoint:
            raise ClaspError("learned detector mode requires a checkpoint path")
        return load_model(modes.checkpoint)
    return None


def _detect(world, camera, thickness, vocab, model, frame_history) -> SemanticKeypointSet:
    if model is None:
        return project_keypoints(world.cloth, camera, vocab)
    depth = render_depth(world.cloth, camera, thickness)
    frame_history.append(depth)
    recent = frame_history[-model.frames_per_input:]
    heatmaps = model.infer_heatmaps(np.stack(recent))
    return extract_keypoints(np.asarray(heatmaps, dtype=np.float64), vocab)


def run_trial(
    spec: TaskSpec,
    seed: int,
    modes: TrialModes = TrialModes(),
    config: Config | None = None,
) -> TrialResult:
    """One full pipeline pass: perturb, detect, plan once, execute, evaluate.

    Every stage failure is caught and recorded; the trial still produces a
    score from whatever state the cloth ended in.
    """
    config = config or Config()
    t0 = time.perf_counter()
    camera = OrthoCamera(config.camera.resolution, config.camera.extent)
    thickness = config.camera.cloth_thickness
    physics = config.physics
    scene = default_scene(hanger=spec.receptacle == "hanger", box=spec.receptacle == "box")
    vocab = vocabulary_for(spec.category)
    rng = np.random.default_rng(np.random.SeedSequence([max(seed, 0), spec.seed]))

    statuses: list[str] = []
    events: list[str] = []
    failure_stage = ""
    plan: Plan | None = None
    plan_text = ""
    world = None
    flat_positions = None
    flat_cov = 0.0

    def finish(success: bool, score: float) -> TrialResult:
        return TrialResult(
            task=spec.name, family=spec.family, category=spec.category, seed=seed,
            plan_text=plan_text, subtask_status=statuses, success=success, score=score,
            failure_stage=failure_stage, events=events,
            wall_time_s=time.perf_counter() - t0,
        )

    # --- setup -------------------------------------------------------------
    try:
        template = build_template(spec.category)
        dims = float(rng.uniform(0.9, 1.1))
        base = _START_OFFSET[spec.family]
        pose = (
            float(rng.uniform(-0.3, 0.3)),
            base[0] + float(rng.uniform(-0.04, 0.04)),
            base[1] + float(rng.uniform(-0.04, 0.04)),
        )
        state = instantiate_cloth(template, dims=dims, pose=pose, physics=physics, scene=scene)
        flat_positions = state.positions.copy()
        flat_cov = coverage(state)
        if spec.family == "flattening":
            crumple_seed = int(rng.integers(2**31))
            state = apply_crumple(state, crumple_seed, spec.crumple_intensity, scene, physics)
        world = WorldState(cloth=state)
    except ClaspError as exc:
        failure_stage = "setup"
        events.append(f"{type(exc).__name__}: {exc}")
        return finish(False, float("nan"))

    detector_model = None
    frame_history: list[np.ndarray] = []
    try:
        detector_model = _load_detector(modes)
    except ClaspError as exc:
        failure_stage = "detector-load"
        events.append(f"{type(exc).__name__}: {exc}")
        return finish(False, float("nan"))

    # --- detect + plan once (open loop) -------------------------------------
    try:
        kps = _detect(world, camera, thickness, vocab, detector_model, frame_history)
        caps = SceneCapabilities.from_scene(scene)
        if modes.planner == "template":
            plan = template_plan(spec, kps)
        else:
            llm_cfg = modes.llm or LlmConfig.from_env()
            if modes.planner == "llm-offline":
                llm_cfg.offline_dir = modes.offline_dir or llm_cfg.offline_dir
            plan = plan_with_llm(llm_cfg, spec, kps, caps)
        plan_text = format_plan(plan)
        report = validate_plan(plan, vocab, caps)
        if not report.ok:
            raise ClaspError(f"plan failed validation: {report.summary()}")
    except ClaspError as exc:
        failure_stage = "planning"
        events.append(f"{type(exc).__name__}: {exc}")
        success, score = evaluate_success(
            spec, world.cloth, flat_positions, flat_cov, scene, config.bench
        )
        return finish(False, score)

    # --- execute sub-task by sub-task ---------------------------------------
    log = ExecutionLog()
    for idx, subtask in enumerate(plan.subtasks):
        try:
            kps_now = _detect(world, camera, thickness, vocab, detector_model, frame_history)
            depth_now = render_depth(world.cloth, camera, thickness)
            grounding = ground_contacts(subtask, kps_now, camera, depth_now, world, config.skills)
            traj = compile_subtask(subtask, grounding, scene, world, config.skills)
            world, log = execute(traj, world, scene, physics, config.bench, log)
            if subtask.primitive == "grasp":
                world.grasp_order += [t.arm for t in grounding.targets]
            elif subtask.primitive == "release":
                world.grasp_order = []
            statuses.append("ok")
        except ClaspError as exc:
            statuses.append(f"{type(exc).__name__}")
            events.append(f"subtask {idx + 1} ({subtask.primitive}): {exc}")
            failure_stage = f"execution:{idx + 1}:{subtask.primitive}"
            break
    events.extend(log.events)

    success, score = evaluate_success(
        spec, world.cloth, flat_positions, flat_cov, scene, config.bench
    )
    if failure_stage:
        success = False
    return finish(success, score)


# --- suite -------------------------------------------------------------------

@dataclass
class SuiteConfig:
    tasks: list[TaskSpec] = field(default_factory=catalog)
    trials_per_task: int = 20
    seed_base: int = 0
    modes: TrialModes = field(default_factory=TrialModes)
    out_dir: str | Path = "bench_out"
    jobs: int = 1

    def __post_init__(self):
        if self.trials_per_task < 1:
            raise ClaspError("trials_per_task must be >= 1")


def _run_one(args) -> TrialResult:
    spec, seed, modes, config = args
    return run_trial(spec, seed, modes, config)


def run_suite(suite: SuiteConfig, config: Config | None = None) -> list[dict]:
    """Run all trials (parallelizable), write artifacts, return report rows.

    Outputs under out_dir: trials/<task>_<seed>.json, results.csv,
    results.md, results.png. Aggregation is sorted, so the report does not
    depend on execution order or parallelism.
    """
    from .report import write_report

    config = config or Config()
    out = Path(suite.out_dir)
    try:
        (out / "trials").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output dir {out}: {exc}") from exc

    jobs = []
    for task in suite.tasks:
        for t in range(suite.trials_per_task):
            jobs.append((task, suite.seed_base + t, suite.modes, config))

    if suite.jobs > 1:
        with ProcessPoolExecutor(max_workers=suite.jobs) as pool:
            results = list(pool.map(_run_one, jobs, chunksize=1))
    else:
        results = [_run_one(j) for j in jobs]

    results.sort(key=lambda r: (r.task, r.seed))
    for r in results:
        path = out / "trials" / f"{r.task}_{r.seed:04d}.json"
        path.write_text(json.dumps(r.to_json_dict(), indent=2, sort_keys=True) + "\n")

    rows = []
    for task in sorted({r.task for r in results}):
        rs = [r for r in results if r.task == task]
        finite = [r.score for r in rs if np.isfinite(r.score)]
        rows.append({
            "task": task,
            "family": rs[0].family,
            "category": rs[0].category,
            "trials": len(rs),
            "successes": sum(r.success for r in rs),
            "success_rate_pct": 100.0 * sum(r.success for r in rs) / len(rs),
            "mean_score": float(np.mean(finite)) if finite else float("nan"),
        })
    write_report(rows, out)
    return rows
