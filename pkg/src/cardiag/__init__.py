"""Query-by-example diagnosis of car trouble sounds.

A recording of a failing component is decoded, resampled to 16 kHz,
peak-normalized, sliced into 960 ms windows, turned into 96x64 log-mel
patches, and embedded; the index returns the closest annotated reference
recordings by cosine similarity, filtered by where and when the sound occurs.
"""

from .audio import (
    CANONICAL_RATE_HZ,
    Waveform,
    canonical_waveform,
    decode_audio,
    peak_normalize,
    resample_to_16k,
)
from .embedding import (
    DEFAULT_DIMENSION,
    Embedding,
    ReferenceProjectionEmbedder,
    SidecarEmbeddings,
    SliceEmbedder,
    embed_recording,
    read_sidecar,
    write_sidecar,
)
from .errors import DiagnosticError
from .evaluation import (
    EvalReport,
    RandomBaseline,
    label_uniform_baseline,
    leave_one_out_eval,
    random_filtered_baseline,
)
from .features import MelPatch, log_mel_patch, patches, slice_960ms
from .index import (
    CalibrationStats,
    DiagnosticIndex,
    Location,
    Match,
    QueryResult,
    ReferenceRecord,
    Timing,
    compute_calibration,
    confidence,
    cosine_similarity,
    metadata_filter,
    rank_top_k,
    search_url_for,
)
from .manifest import ManifestRow, build_index, load_manifest, parse_manifest, write_manifest
from .service import create_app

__version__ = "0.1.0"

__all__ = [
    "CANONICAL_RATE_HZ",
    "CalibrationStats",
    "DEFAULT_DIMENSION",
    "DiagnosticError",
    "DiagnosticIndex",
    "Embedding",
    "EvalReport",
    "Location",
    "ManifestRow",
    "Match",
    "MelPatch",
    "QueryResult",
    "RandomBaseline",
    "ReferenceProjectionEmbedder",
    "ReferenceRecord",
    "SidecarEmbeddings",
    "SliceEmbedder",
    "Timing",
    "Waveform",
    "build_index",
    "canonical_waveform",
    "compute_calibration",
    "confidence",
    "cosine_similarity",
    "create_app",
    "decode_audio",
    "embed_recording",
    "label_uniform_baseline",
    "leave_one_out_eval",
    "load_manifest",
    "log_mel_patch",
    "metadata_filter",
    "parse_manifest",
    "patches",
    "peak_normalize",
    "rank_top_k",
    "random_filtered_baseline",
    "read_sidecar",
    "resample_to_16k",
    "search_url_for",
    "slice_960ms",
    "write_manifest",
    "write_sidecar",
]
