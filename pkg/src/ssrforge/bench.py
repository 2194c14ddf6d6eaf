"""Dataset assembly, evaluation, random baseline, and manifest verification.

A dataset is described by a config of cells (task + subtype/difficulty +
count). Assembly walks a corpus of frame-directory videos, derives one 64-bit
seed per record, and generates records independently — so it parallelizes
across processes and re-runs are byte-identical. An answers-only mode samples
ground truths without rendering any video, for fast statistical baselines.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path

import numpy as np

from .answers import CountsAnswer, PermutationAnswer, Task, Unparseable, answer_from_dict
from .frames import FrameSequence, FrameStoreError, TimeInterval, load_sequence, save_sequence
from .perturb import Perturbation, PerturbParams, describe
from .rewards import parse_answer, score_prediction
from .taskgen import (
    CountingSpec,
    GenError,
    GroundingSpec,
    JigsawSpec,
    QARecord,
    derive_seed,
    gen_counting,
    gen_grounding,
    gen_jigsaw,
    render_prompt,
    rng_for,
    sample_counts,
    sample_interval,
    sample_jigsaw_permutation,
)

MANIFEST_NAME = "manifest.jsonl"
VIDEOS_SUBDIR = "videos"
MAX_RECORD_RETRIES = 8


class BenchError(ValueError):
    """Bad dataset config, unusable corpus, or malformed manifest."""


# ============================================================================
# Dataset configuration
# ============================================================================


@dataclass(frozen=True)
class CellConfig:
    """One homogeneous block of records."""

    task: Task
    subtype: str
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise BenchError(f"cell count must be >= 1, got {self.count}")


@dataclass(frozen=True)
class DatasetConfig:
    """Full recipe for one dataset: cells, per-task specs, corpus defaults."""

    name: str
    total_items: int
    cells: tuple[CellConfig, ...]
    grounding: GroundingSpec = field(default_factory=GroundingSpec)
    counting_easy: CountingSpec = field(default_factory=CountingSpec.easy)
    counting_hard: CountingSpec = field(default_factory=CountingSpec.hard)
    jigsaw_easy: JigsawSpec = field(default_factory=JigsawSpec.easy)
    jigsaw_hard: JigsawSpec = field(default_factory=JigsawSpec.hard)
    default_fps: float = 2.0
    answers_only_duration: tuple[float, float] = (30.0, 120.0)

    def __post_init__(self) -> None:
        if not self.cells:
            raise BenchError("config needs at least one cell")
        total = sum(c.count for c in self.cells)
        if total != self.total_items:
            raise BenchError(f"cells sum to {total}, config says total_items={self.total_items}")
        for cell in self.cells:
            self.resolve_cell(cell)  # raises on unknown subtype
        if not self.answers_only_duration[0] <= self.answers_only_duration[1]:
            raise BenchError("answers_only_duration must be (low, high) with low <= high")

    def resolve_cell(self, cell: CellConfig) -> GroundingSpec | CountingSpec | JigsawSpec:
        """Spec governing a cell; grounding cells narrow the pool to their subtype."""
        if cell.task is Task.GROUNDING:
            if cell.subtype == "mixed":
                return self.grounding
            try:
                kind = Perturbation(cell.subtype)
            except ValueError:
                raise BenchError(f"unknown perturbation subtype: {cell.subtype!r}") from None
            return dataclasses_replace_pool(self.grounding, (kind,))
        if cell.task is Task.COUNTING:
            spec = {"easy": self.counting_easy, "hard": self.counting_hard}.get(cell.subtype)
        elif cell.task is Task.JIGSAW:
            spec = {"easy": self.jigsaw_easy, "hard": self.jigsaw_hard}.get(cell.subtype)
        else:
            spec = None
        if spec is None:
            raise BenchError(f"unknown {cell.task.value} difficulty: {cell.subtype!r}")
        return spec

    @classmethod
    def from_json_dict(cls, d: dict) -> "DatasetConfig":
        try:
            cells = tuple(
                CellConfig(
                    task=Task(c["task"]),
                    subtype=str(c.get("subtype", c.get("difficulty", "mixed"))),
                    count=int(c["count"]),
                )
                for c in d["cells"]
            )
            grounding_kw = dict(d.get("grounding", {}))
            if "perturb" in grounding_kw:
                grounding_kw["perturb"] = PerturbParams(**grounding_kw["perturb"])
            grounding = GroundingSpec(**grounding_kw)
            counting = d.get("counting", {})
            jigsaw = d.get("jigsaw", {})
            return cls(
                name=str(d.get("name", "dataset")),
                # optional checksum: when present it must match the cell sum
                total_items=int(d.get("total_items", sum(c.count for c in cells))),
                cells=cells,
                grounding=grounding,
                counting_easy=CountingSpec(**counting.get("easy", {"max_frames": 3, "max_per_shape_per_frame": 3})),
                counting_hard=CountingSpec(**counting.get("hard", {"max_frames": 4, "max_per_shape_per_frame": 4})),
                jigsaw_easy=JigsawSpec(**jigsaw.get("easy", {"n": 6})),
                jigsaw_hard=JigsawSpec(**jigsaw.get("hard", {"n": 8})),
                default_fps=float(d.get("default_fps", 2.0)),
                answers_only_duration=tuple(d.get("answers_only_duration", (30.0, 120.0))),
            )
        except (KeyError, TypeError, ValueError, GenError) as exc:
            if isinstance(exc, BenchError):
                raise
            raise BenchError(f"bad dataset config: {exc}") from exc

    @classmethod
    def from_json_file(cls, path: str | Path) -> "DatasetConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_json_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise BenchError(f"cannot read dataset config {path}: {exc}") from exc


def dataclasses_replace_pool(spec: GroundingSpec, pool: tuple[Perturbation, ...]) -> GroundingSpec:
    return GroundingSpec(
        kinds_pool=pool,
        min_len_frac=spec.min_len_frac,
        max_len_frac=spec.max_len_frac,
        min_len_seconds=spec.min_len_seconds,
        perturb=spec.perturb,
    )


# ============================================================================
# Manifest I/O
# ============================================================================


def write_manifest(records: list[QARecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_dict()) + "\n")


def load_manifest(path: str | Path) -> list[QARecord]:
    records = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise BenchError(f"cannot read manifest {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(QARecord.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise BenchError(f"{path}: bad manifest line {lineno}: {exc}") from exc
    return records


def load_predictions(path: str | Path) -> tuple[dict[str, dict], list[str]]:
    """Predictions keyed by record_id, plus per-line errors (never fatal)."""
    preds: dict[str, dict] = {}
    errors: list[str] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise BenchError(f"cannot read predictions {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rid = obj["record_id"]
                if "answer" not in obj and "text" not in obj:
                    raise KeyError("needs 'answer' or 'text'")
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                errors.append(f"line {lineno}: {exc}")
                continue
            preds[str(rid)] = obj
    return preds, errors


# ============================================================================
# Corpus helpers
# ============================================================================


def list_corpus(corpus_dir: str | Path) -> list[Path]:
    corpus_dir = Path(corpus_dir)
    if not corpus_dir.is_dir():
        raise BenchError(f"corpus directory not found: {corpus_dir}")
    videos = sorted(p for p in corpus_dir.iterdir() if p.is_dir())
    if not videos:
        raise BenchError(f"corpus is empty: {corpus_dir}")
    return videos


def make_demo_corpus(
    corpus_dir: str | Path,
    num_videos: int = 10,
    duration: float = 30.0,
    fps: float = 2.0,
    size: tuple[int, int] = (256, 256),
    seed: int = 0,
) -> list[Path]:
    """Write synthetic videos with enough motion and color for every task.

    Each video is a drifting three-phase color field plus a moving bright
    blob, so consecutive frames always differ and every perturbation kind is
    visually detectable.
    """
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    width, height = size
    num_frames = max(2, round(duration * fps))
    xs = np.linspace(0.0, 2.0 * math.pi, width, dtype=np.float64)[None, :]
    ys = np.linspace(0.0, 2.0 * math.pi, height, dtype=np.float64)[:, None]
    paths = []
    master = np.random.default_rng(seed)
    for v in range(num_videos):
        rng = np.random.default_rng(master.integers(2**63))
        freq = rng.uniform(0.5, 3.0, size=3)
        phase = rng.uniform(0.0, 2.0 * math.pi, size=3)
        speed = rng.uniform(0.2, 1.0, size=3)
        blob_v = rng.uniform(-8.0, 8.0, size=2)
        blob_p = rng.uniform(0.0, [width, height])
        arrays = []
        for t in range(num_frames):
            channels = [
                np.sin(freq[0] * xs + phase[0] + speed[0] * t) + 0 * ys,
                np.sin(freq[1] * ys + phase[1] + speed[1] * t) + 0 * xs,
                np.sin(freq[2] * (xs + ys) + phase[2] + speed[2] * t),
            ]
            px = np.stack([127.5 * (1.0 + c) for c in channels], axis=2)
            cx = (blob_p[0] + blob_v[0] * t) % width
            cy = (blob_p[1] + blob_v[1] * t) % height
            yy, xx = np.ogrid[:height, :width]
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= (0.08 * min(width, height)) ** 2
            px[mask] = (255.0, 255.0, 255.0)
            arrays.append(px.round().astype(np.uint8))
        seq = FrameSequence.from_arrays(id=f"demo{v:03d}", arrays=arrays, fps=fps)
        dest = corpus_dir / seq.id
        save_sequence(seq, dest)
        paths.append(dest)
    return paths


# ============================================================================
# Assembly
# ============================================================================


@dataclass(frozen=True)
class _Job:
    cell: CellConfig
    index: int
    record_id: str
    video_path: str  # empty in answers-only mode
    master_seed: int
    out_dir: str  # empty in answers-only mode
    config: DatasetConfig
    answers_only: bool


_SEQ_CACHE: dict[tuple[str, float], FrameSequence] = {}


def _load_cached(path: str, default_fps: float) -> FrameSequence:
    key = (path, default_fps)
    if key not in _SEQ_CACHE:
        sidecar = Path(path) / "sequence.json"
        fps = None if sidecar.exists() else default_fps
        _SEQ_CACHE[key] = load_sequence(path, fps=fps)
    return _SEQ_CACHE[key]


def _answers_only_record(job: _Job, subtype_salt: str) -> QARecord:
    cfg = job.config
    cell = job.cell
    seed = derive_seed(job.master_seed, "synthetic", cell.task.value, subtype_salt, job.index)
    rng = rng_for(seed)
    lo, hi = cfg.answers_only_duration
    duration = float(rng.uniform(lo, hi))
    spec = cfg.resolve_cell(cell)
    if cell.task is Task.GROUNDING:
        kind = spec.kinds_pool[int(rng.integers(len(spec.kinds_pool)))]
        answer: object = sample_interval(duration, spec, rng)
        prompt = render_prompt(Task.GROUNDING, description=describe(kind), duration=duration)
        subtype = kind.value
        difficulty = "default"
        extra = {
            "kind": kind.value,
            "interval_spec": {
                "min_len_frac": spec.min_len_frac,
                "max_len_frac": spec.max_len_frac,
                "min_len_seconds": spec.min_len_seconds,
            },
        }
    elif cell.task is Task.COUNTING:
        frames, answer = sample_counts(spec, rng)
        prompt = render_prompt(Task.COUNTING, shape_names=spec.shape_classes)
        subtype = difficulty = spec.difficulty
        extra = {
            "shape_classes": list(spec.shape_classes),
            "max_frames": spec.max_frames,
            "max_per_shape_per_frame": spec.max_per_shape_per_frame,
            "min_total_per_shape": spec.min_total_per_shape,
            "modified_frame_count": frames,
        }
    else:
        order, answer = sample_jigsaw_permutation(spec.n, rng)
        prompt = render_prompt(Task.JIGSAW, n_segments=spec.n)
        subtype = difficulty = spec.difficulty
        extra = {"n": spec.n, "shuffle_order": list(order)}
    return QARecord(
        id=job.record_id,
        task=cell.task,
        subtype=subtype,
        difficulty=difficulty,
        video_dir="",
        fps=cfg.default_fps,
        prompt=prompt,
        answer=answer,
        seed=seed,
        gen_params={"answers_only": True, "duration": duration, **extra},
    )


def _run_job(job: _Job) -> QARecord:
    cell = job.cell
    cfg = job.config
    if job.answers_only:
        return _answers_only_record(job, cell.subtype)

    last_error: Exception | None = None
    for attempt in range(MAX_RECORD_RETRIES):
        video_path = job.video_path if attempt == 0 else _rotate_video(job, attempt)
        subtype_salt = cell.subtype if attempt == 0 else f"{cell.subtype}#retry{attempt}"
        video_id = Path(video_path).name
        seed = derive_seed(job.master_seed, video_id, cell.task.value, subtype_salt, job.index)
        rng = rng_for(seed)
        try:
            seq = _load_cached(video_path, cfg.default_fps)
            spec = cfg.resolve_cell(cell)
            if cell.task is Task.GROUNDING:
                modified, record = gen_grounding(seq, spec, rng, record_id=job.record_id, seed=seed)
            elif cell.task is Task.COUNTING:
                modified, record = gen_counting(seq, spec, rng, record_id=job.record_id, seed=seed)
            else:
                modified, record = gen_jigsaw(seq, spec, rng, record_id=job.record_id, seed=seed)
        except (GenError, FrameStoreError) as exc:
            last_error = exc
            continue
        video_dir = f"{VIDEOS_SUBDIR}/{job.record_id}"
        save_sequence(modified, Path(job.out_dir) / video_dir)
        gen_params = {**record.gen_params, "source_dir": video_path}
        return dataclasses.replace(record, video_dir=video_dir, gen_params=gen_params)
    raise BenchError(
        f"record {job.record_id}: generation failed after {MAX_RECORD_RETRIES} attempts "
        f"(last error: {last_error})"
    )


def _rotate_video(job: _Job, attempt: int) -> str:
    videos = list_corpus(Path(job.video_path).parent)
    base = videos.index(Path(job.video_path))
    return str(videos[(base + attempt) % len(videos)])


def plan_jobs(
    config: DatasetConfig,
    corpus_dir: str | Path | None,
    out_dir: str | Path,
    master_seed: int,
    answers_only: bool = False,
) -> list[_Job]:
    videos = [] if answers_only else list_corpus(corpus_dir)
    jobs: list[_Job] = []
    position = 0
    for cell in config.cells:
        for index in range(cell.count):
            record_id = f"{cell.task.value}-{cell.subtype}-{index:06d}"
            video_path = "" if answers_only else str(videos[position % len(videos)])
            jobs.append(
                _Job(
                    cell=cell,
                    index=index,
                    record_id=record_id,
                    video_path=video_path,
                    master_seed=master_seed,
                    out_dir="" if answers_only else str(out_dir),
                    config=config,
                    answers_only=answers_only,
                )
            )
            position += 1
    return jobs


def assemble_dataset(
    config: DatasetConfig,
    corpus_dir: str | Path | None,
    out_dir: str | Path,
    master_seed: int,
    jobs: int | None = None,
    answers_only: bool = False,
) -> list[QARecord]:
    """Generate every record in the config; writes manifest.jsonl under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    planned = plan_jobs(config, corpus_dir, out_dir, master_seed, answers_only)
    if jobs is not None and jobs > 1 and len(planned) > 1:
        with Pool(processes=jobs) as pool:
            records = list(pool.imap(_run_job, planned, chunksize=8))
    else:
        records = [_run_job(j) for j in planned]
    write_manifest(records, out_dir / MANIFEST_NAME)
    with open(out_dir / "config_used.json", "w", encoding="utf-8") as fh:
        json.dump({"name": config.name, "master_seed": master_seed,
                   "total_items": config.total_items, "answers_only": answers_only}, fh, indent=2)
        fh.write("\n")
    return records


# ============================================================================
# Evaluation
# ============================================================================


@dataclass(frozen=True)
class RecordScore:
    record_id: str
    task: str
    subtype: str
    difficulty: str
    smooth: float
    strict: float
    missing: bool
    unparseable: bool


@dataclass(frozen=True)
class ScoreReport:
    """Per-record scores plus record-weighted aggregates on a 0-100 scale."""

    mode: str
    rows: tuple[RecordScore, ...]
    per_subtype: dict
    per_task: dict
    overall: float
    missing: int
    unparseable: int
    prediction_errors: tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return len(self.rows)


def _mean_pct(values: list[float]) -> float:
    return 100.0 * sum(values) / len(values) if values else 0.0


def evaluate(
    records: list[QARecord],
    predictions: dict[str, dict],
    mode: str = "strict",
    prediction_errors: list[str] | None = None,
) -> ScoreReport:
    """Score predictions against a manifest; missing predictions score 0."""
    if mode not in ("strict", "smooth"):
        raise BenchError(f"mode must be 'strict' or 'smooth', got {mode!r}")
    if not records:
        raise BenchError("no records to evaluate")
    rows: list[RecordScore] = []
    for record in records:
        pred_obj = predictions.get(record.id)
        missing = pred_obj is None
        if missing:
            scored = score_prediction(record.task, record.answer, None)
        elif pred_obj.get("answer") is not None:
            try:
                parsed = answer_from_dict(pred_obj["answer"])
            except Exception as exc:
                parsed = Unparseable(f"bad structured answer: {exc}")
            scored = score_prediction(record.task, record.answer, parsed)
        else:
            parsed = parse_answer(str(pred_obj.get("text", "")), record.task, _size_of(record))
            scored = score_prediction(record.task, record.answer, parsed)
        unparseable = not missing and "unparseable" in scored["components"]
        rows.append(
            RecordScore(
                record_id=record.id,
                task=record.task.value,
                subtype=record.subtype,
                difficulty=record.difficulty,
                smooth=scored["smooth"],
                strict=scored["strict"],
                missing=missing,
                unparseable=unparseable,
            )
        )

    def col(row: RecordScore) -> float:
        return row.strict if mode == "strict" else row.smooth

    per_subtype: dict[str, dict] = {}
    per_task: dict[str, dict] = {}
    for row in rows:
        per_subtype.setdefault(f"{row.task}/{row.subtype}", []).append(col(row))
        per_task.setdefault(row.task, []).append(col(row))
    per_subtype = {k: {"mean": _mean_pct(v), "n": len(v)} for k, v in sorted(per_subtype.items())}
    per_task = {k: {"mean": _mean_pct(v), "n": len(v)} for k, v in sorted(per_task.items())}
    return ScoreReport(
        mode=mode,
        rows=tuple(rows),
        per_subtype=per_subtype,
        per_task=per_task,
        overall=_mean_pct([col(r) for r in rows]),
        missing=sum(1 for r in rows if r.missing),
        unparseable=sum(1 for r in rows if r.unparseable),
        prediction_errors=tuple(prediction_errors or ()),
    )


def _size_of(record: QARecord) -> int:
    if isinstance(record.answer, CountsAnswer):
        return len(record.answer.values)
    if isinstance(record.answer, PermutationAnswer):
        return record.answer.n
    return 2


# ============================================================================
# Random baseline
# ============================================================================


def random_baseline(records: list[QARecord], rng: np.random.Generator) -> list[dict]:
    """Guess every record blindly: intervals from the generator's own
    distribution, counts uniform over the answer range, permutations uniform."""
    predictions = []
    for record in records:
        gp = record.gen_params
        if record.task is Task.GROUNDING:
            spec = GroundingSpec(**gp.get("interval_spec", {}))
            duration = float(gp.get("duration", record.answer.end))
            guess = sample_interval(duration, spec, rng)
            answer = {"type": "interval", "start": guess.start, "end": guess.end}
        elif record.task is Task.COUNTING:
            cap = int(gp["max_frames"]) * int(gp["max_per_shape_per_frame"])
            k = len(record.answer.values)
            answer = {
                "type": "counts",
                "values": [int(rng.integers(1, cap + 1)) for _ in range(k)],
            }
        else:
            n = int(gp["n"])
            order = [int(x) + 1 for x in rng.permutation(n)]
            answer = {"type": "permutation", "order": order}
        predictions.append({"record_id": record.id, "answer": answer})
    return predictions


def write_predictions(predictions: list[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pred in predictions:
            fh.write(json.dumps(pred) + "\n")


# ============================================================================
# Verification
# ============================================================================


def verify_manifest(records: list[QARecord], base_dir: str | Path) -> list[dict]:
    """Re-check each record's construction; returns one diagnostic per record."""
    if not records:
        raise BenchError("no records")
    base_dir = Path(base_dir)
    return [_verify_record(record, base_dir) for record in records]


def _verify_record(record: QARecord, base_dir: Path) -> dict:
    diag = {"record_id": record.id, "task": record.task.value, "ok": False, "checks": {}, "error": None}
    try:
        if record.gen_params.get("answers_only"):
            diag["checks"]["answers_only"] = True
            _verify_answers_only(record, diag)
        elif record.task is Task.GROUNDING:
            _verify_grounding(record, base_dir, diag)
        elif record.task is Task.COUNTING:
            _verify_counting(record, base_dir, diag)
        else:
            _verify_jigsaw(record, base_dir, diag)
        diag["ok"] = all(bool(v) for v in diag["checks"].values())
        if not diag["ok"]:
            failed = [k for k, v in diag["checks"].items() if not v]
            diag["error"] = f"failed checks: {', '.join(failed)}"
    except (FrameStoreError, BenchError, OSError, KeyError, ValueError) as exc:
        diag["error"] = str(exc)
    return diag


def _verify_answers_only(record: QARecord, diag: dict) -> None:
    checks = diag["checks"]
    if record.task is Task.GROUNDING:
        duration = float(record.gen_params["duration"])
        a = record.answer
        checks["answer_is_interval"] = isinstance(a, TimeInterval)
        checks["interval_in_bounds"] = 0.0 <= a.start < a.end <= duration + 1e-9
    elif record.task is Task.COUNTING:
        cap = int(record.gen_params["max_frames"]) * int(record.gen_params["max_per_shape_per_frame"])
        lo = int(record.gen_params.get("min_total_per_shape", 0))
        checks["counts_in_range"] = all(lo <= v <= cap for v in record.answer.values)
    else:
        n = int(record.gen_params["n"])
        checks["permutation_size"] = record.answer.n == n


def _load_pair(record: QARecord, base_dir: Path) -> tuple[FrameSequence, FrameSequence]:
    video_dir = Path(record.video_dir)
    if not video_dir.is_absolute():
        video_dir = base_dir / video_dir
    if not video_dir.is_dir():
        raise BenchError(f"missing video directory: {video_dir}")
    modified = load_sequence(video_dir)
    source_dir = record.gen_params.get("source_dir")
    if not source_dir:
        raise BenchError("record lacks gen_params.source_dir")
    source_path = Path(source_dir)
    if not source_path.is_dir():
        raise BenchError(f"missing source directory: {source_path}")
    sidecar = source_path / "sequence.json"
    source = load_sequence(source_path, fps=None if sidecar.exists() else record.fps)
    return modified, source


def _verify_grounding(record: QARecord, base_dir: Path, diag: dict) -> None:
    checks = diag["checks"]
    modified, source = _load_pair(record, base_dir)
    checks["same_shape"] = (
        modified.num_frames == source.num_frames
        and (modified.width, modified.height) == (source.width, source.height)
    )
    interval = record.answer
    # The answer must be exactly the timestamp bounds of the stored frame
    # range; pixels alone cannot pin the bounds (frames inside the altered
    # span are allowed to come out visually unchanged, e.g. a shuffle fixing
    # a frame), so a widened interval would otherwise slip through.
    lo, hi = (int(i) for i in record.gen_params["interval_frames"])
    checks["answer_matches_frame_range"] = (
        abs(interval.start - modified.timestamp_of(lo)) <= 1e-9
        and abs(interval.end - modified.timestamp_of(hi)) <= 1e-9
    )
    inside_differs = False
    outside_identical = True
    for m, s in zip(modified.frames, source.frames):
        same = np.array_equal(m.pixels, s.pixels)
        if interval.contains(m.timestamp):
            inside_differs = inside_differs or not same
        elif not same:
            outside_identical = False
    checks["modified_inside_interval"] = inside_differs
    checks["untouched_outside_interval"] = outside_identical


def _verify_counting(record: QARecord, base_dir: Path, diag: dict) -> None:
    checks = diag["checks"]
    log = record.gen_params["placement_log"]
    classes = record.gen_params["shape_classes"]
    recount = {c: 0 for c in classes}
    for entry in log:
        recount[entry["shape"]["kind"]] += 1
    checks["recount_matches_answer"] = tuple(recount[c] for c in classes) == record.answer.values
    per_frame: dict[int, list] = {}
    for entry in log:
        per_frame.setdefault(entry["frame_index"], []).append(entry["shape"])
    disjoint = True
    for shapes in per_frame.values():
        boxes = [_shape_box(s) for s in shapes]
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                if _overlap(boxes[i], boxes[j]):
                    disjoint = False
    checks["disjoint_boxes"] = disjoint
    video_dir = Path(record.video_dir)
    if not video_dir.is_absolute():
        video_dir = base_dir / video_dir
    if not video_dir.is_dir():
        raise BenchError(f"missing video directory: {video_dir}")
    modified = load_sequence(video_dir)
    max_per = int(record.gen_params["max_per_shape_per_frame"])
    checks["per_frame_cap"] = all(
        sum(1 for e in log if e["frame_index"] == f and e["shape"]["kind"] == c) <= max_per
        for f in per_frame
        for c in classes
    )
    checks["frames_exist"] = all(1 <= f <= modified.num_frames for f in per_frame)


def _shape_box(shape: dict) -> tuple[float, float, float, float]:
    cx, cy = shape["center"]
    reach = shape["size"] + shape["outline_width"]
    return (cx - reach, cy - reach, cx + reach, cy + reach)


def _overlap(a: tuple, b: tuple) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def _verify_jigsaw(record: QARecord, base_dir: Path, diag: dict) -> None:
    checks = diag["checks"]
    modified, source = _load_pair(record, base_dir)
    n = int(record.gen_params["n"])
    seg_len = int(record.gen_params["segment_frames"])
    checks["frame_count"] = modified.num_frames == n * seg_len
    shuffled_segments = [
        [f.pixels for f in modified.frames[i * seg_len : (i + 1) * seg_len]] for i in range(n)
    ]
    reconstructed = [px for pos in record.answer.order for px in shuffled_segments[pos - 1]]
    original = [f.pixels for f in source.frames[: n * seg_len]]
    checks["round_trip"] = len(reconstructed) == len(original) and all(
        np.array_equal(a, b) for a, b in zip(reconstructed, original)
    )
