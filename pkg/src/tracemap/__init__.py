"""Turn personal data exports into a navigable 2D semantic map.

The pipeline: parse a YouTube or Spotify export into normalized events,
embed each event's text, reduce the vectors to a 2D layout, label the map
with ranked topics at zoom-dependent detail, and estimate density for
contour rendering. Datasets persist to content-addressed directories and
are served over a local HTTP API; overlays project one person's history
into another dataset's layout for side-by-side comparison.
"""

from .config import Config, load_config
from .errors import (
    BadBBox,
    BadRequest,
    BadWindow,
    BuildError,
    ConfigError,
    DegenerateGraph,
    DimensionMismatch,
    EmptyModel,
    EmptyText,
    FormatVersionError,
    MalformedExport,
    MissingPosition,
    ProviderMismatch,
    ProviderUnavailable,
    TracemapError,
    UnknownDataset,
    UnknownJob,
    UnknownPoint,
    UnsupportedFormat,
)
from .events import (
    KIND_STYLES,
    EventKind,
    FootprintEvent,
    KindStyle,
    Platform,
    format_instant,
    parse_instant,
    read_events_jsonl,
    write_events_jsonl,
)
from .ingest import parse_export, sniff_platform
from .embed import (
    EmbeddingCache,
    LocalHashProvider,
    RemoteHttpProvider,
    embed_texts,
    local_hash_embed,
    make_provider,
)
from .reduce import (
    FuzzyGraph,
    KnnGraph,
    LayoutParams,
    ReducerModel,
    fit_reducer,
    fuzzy_simplicial_set,
    knn_graph,
    optimize_layout,
    smooth_knn,
    transform,
)
from .topics import (
    RankedTopic,
    TopicAssignment,
    TopicNode,
    TopicTree,
    aggregate_rank,
    anchor_topics,
    build_topic_tree,
    extract_topics,
)
from .mapview import (
    Bbox,
    DensityGrid,
    LabelPlacement,
    SpatialIndex,
    TimeWindow,
    animation_frames,
    contours,
    default_levels,
    filter_by_time,
    kde_density,
    place_labels,
    summarize_viewport,
)
from .store import (
    DatasetManifest,
    DatasetView,
    MapDataset,
    OverlayResult,
    build_dataset,
    build_from_events,
    dataset_id_for,
    load_dataset,
    overlay_datasets,
    persist_dataset,
)
from .server import create_app, run_server

__version__ = "0.1.0"

__all__ = [
    "Config", "load_config",
    "TracemapError", "MalformedExport", "UnsupportedFormat",
    "ProviderUnavailable", "DimensionMismatch", "EmptyText",
    "DegenerateGraph", "EmptyModel", "MissingPosition", "ProviderMismatch",
    "ConfigError", "UnknownDataset", "UnknownPoint", "UnknownJob",
    "BadBBox", "BadWindow", "BadRequest", "FormatVersionError", "BuildError",
    "Platform", "EventKind", "KindStyle", "KIND_STYLES", "FootprintEvent",
    "parse_instant", "format_instant", "read_events_jsonl", "write_events_jsonl",
    "parse_export", "sniff_platform",
    "LocalHashProvider", "RemoteHttpProvider", "EmbeddingCache",
    "local_hash_embed", "embed_texts", "make_provider",
    "KnnGraph", "FuzzyGraph", "LayoutParams", "ReducerModel",
    "knn_graph", "smooth_knn", "fuzzy_simplicial_set", "optimize_layout",
    "fit_reducer", "transform",
    "TopicAssignment", "RankedTopic", "TopicNode", "TopicTree",
    "extract_topics", "aggregate_rank", "anchor_topics", "build_topic_tree",
    "Bbox", "TimeWindow", "DensityGrid", "LabelPlacement", "SpatialIndex",
    "kde_density", "default_levels", "contours", "place_labels",
    "filter_by_time", "animation_frames", "summarize_viewport",
    "DatasetManifest", "MapDataset", "DatasetView", "OverlayResult",
    "dataset_id_for", "build_dataset", "build_from_events",
    "persist_dataset", "load_dataset", "overlay_datasets",
    "create_app", "run_server",
    "__version__",
]
