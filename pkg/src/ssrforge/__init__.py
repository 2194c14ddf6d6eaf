"""ssr-forge: self-supervised video pretext-task generator and reward engine.

Three task families — anomaly grounding, object counting, temporal jigsaw —
are generated procedurally from raw frame sequences, so every record carries
a verifiable ground truth. Predictions are scored with smooth dense rewards
(for RL training) and strict benchmark rules (for evaluation).
"""
from .answers import (
    AnswerError,
    AnswerValue,
    CountsAnswer,
    ParsedAnswer,
    PermutationAnswer,
    Task,
    Unparseable,
    answer_from_dict,
    answer_to_dict,
)
from .bench import (
    BenchError,
    CellConfig,
    DatasetConfig,
    RecordScore,
    ScoreReport,
    assemble_dataset,
    evaluate,
    list_corpus,
    load_manifest,
    load_predictions,
    make_demo_corpus,
    random_baseline,
    verify_manifest,
    write_manifest,
    write_predictions,
)
from .frames import (
    Frame,
    FrameSequence,
    FrameStoreError,
    TimeInterval,
    load_sequence,
    replace_segment,
    sample_for_model,
    save_sequence,
    slice_frames,
)
from .perturb import (
    Category,
    DESCRIPTIONS,
    Perturbation,
    PerturbError,
    PerturbParams,
    SPEED_NOTE,
    ShapeSpec,
    apply_perturbation,
    describe,
    non_identity_permutation,
    render_shapes,
)
from .rewards import (
    PredictionRecord,
    RewardError,
    RewardValue,
    displacement_error,
    e_max,
    iou,
    parse_answer,
    recall_at,
    reward_count,
    reward_jigsaw,
    run_score_stream,
    score_prediction,
    score_request,
    strict_count_score,
    strict_jigsaw_score,
)
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
from .transcoder import TRANSCODER_ENV, Transcoder, TranscoderError

__version__ = "0.1.0"
