"""Pose dataset tooling: keypoint similarity, detection evaluation,
feature restyling, loss composition, and OKS-ranked retrieval."""

from .core import (
    FLAT_POSE_LENGTH,
    KEYPOINT_NAMES,
    NUM_JOINTS,
    SKELETON_EDGES,
    BoundingBox,
    ImageRecord,
    Keypoint,
    PersonInstance,
    PoseAnnotation,
    Visibility,
    normalize_pose,
)
from .manifest import (
    DatasetManifest,
    DatasetName,
    Split,
    ValidationReport,
    load_manifest_file,
    validate_manifests,
)
from .metrics import (
    COCO_SIGMAS,
    DEFAULT_OKS_PARAMS,
    MetricKind,
    OksParams,
    SimilarityScore,
    iou,
    oks,
)
from .evaluation import (
    DEFAULT_THRESHOLDS,
    RECALL_POINTS,
    EvalReport,
    MatchConfig,
    PrCurve,
    ThresholdResult,
    evaluate,
    match_greedy,
)
from .adain import (
    STYLE_SET_IDS,
    TENSOR_MAGIC,
    VARIANCE_EPS,
    AlphaMode,
    ChannelStats,
    FeatureTensor,
    StyleConfig,
    StyleSet,
    adain,
    alpha_blend,
    channel_stats,
    dataset_groups,
    load_tensor,
    read_tensor,
    restyle,
    sample_alpha,
    save_tensor,
    uniform_alpha,
    write_tensor,
)
from .losses import (
    DETECTION_LAMBDAS,
    POSE_LAMBDAS,
    LossWeights,
    TaskKind,
    combined_loss_1,
    combined_loss_2,
    detection_loss,
    perceptual_loss,
    pose_loss,
)
from .ingest import (
    MAX_CHARACTERS,
    MAX_SCENES,
    AnnotationDocument,
    CategoryDescriptor,
    ImageEntry,
    LabelVocabulary,
    PersonEntry,
    RetrievalLabel,
    find_out_of_bounds,
    load_vocabulary,
    parse_annotations,
    parse_retrieval_labels,
    write_annotations,
    write_retrieval_labels,
)
from .server import (
    PoseServer,
    ServiceConfig,
    make_server,
    parse_config_file,
    resolve_config,
    serve_http,
)
from .retrieval import (
    IndexEntry,
    LabelMode,
    RankedResult,
    RetrievalIndex,
    RetrievalSummary,
    build_index,
    load_index,
    precision_at_k,
    query,
    query_by_person,
    retrieval_map,
    save_index,
)
from . import errors

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
