"""The reference index: metadata filtering, cosine ranking, similarity
calibration, and the versioned on-disk container."""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import quote_plus

import numpy as np

from ._accel import cosine_scores, pairwise_sim_stats
from .embedding import Embedding
from .errors import (
    DimensionMismatchError,
    DuplicateIdError,
    EmbedderMismatchError,
    EmptyIndexError,
    IndexFormatError,
    InsufficientRecordsError,
    InvalidEnumError,
    ZeroVectorError,
)

ZERO_NORM_FLOOR = 1e-12
DEFAULT_TOP_K = 3
SEARCH_URL_PREFIX = "https://www.google.com/search?q="

INDEX_FORMAT_NAME = "diagnostic-index"
INDEX_FORMAT_VERSION = 1


class Location(str, Enum):
    """Where on the vehicle the sound comes from. not_sure is query-only."""

    FRONT = "front"
    REAR = "rear"
    WHEELS = "wheels"
    NOT_SURE = "not_sure"


class Timing(str, Enum):
    """When the sound occurs. not_sure is query-only."""

    STARTING = "starting"
    IDLING = "idling"
    DRIVING = "driving"
    BRAKING = "braking"
    TURNING = "turning"
    NOT_SURE = "not_sure"


LOCATION_LABELS = {
    Location.FRONT: "Front of the vehicle",
    Location.REAR: "Rear of the vehicle",
    Location.WHEELS: "Wheels",
    Location.NOT_SURE: "Not sure",
}

TIMING_LABELS = {
    Timing.STARTING: "While starting the car",
    Timing.IDLING: "While the engine is idling",
    Timing.DRIVING: "While driving",
    Timing.BRAKING: "While braking",
    Timing.TURNING: "While turning",
    Timing.NOT_SURE: "Not sure",
}


def _parse_enum(enum_cls, token: str, allow_not_sure: bool):
    try:
        value = enum_cls(token)
    except ValueError:
        valid = ", ".join(m.value for m in enum_cls)
        raise InvalidEnumError(
            f"invalid {enum_cls.__name__.lower()} {token!r}; expected one of: {valid}"
        ) from None
    if not allow_not_sure and value.value == "not_sure":
        raise InvalidEnumError(
            f"{enum_cls.__name__.lower()} 'not_sure' is only valid on queries"
        )
    return value


def parse_location(token: str, query: bool = False) -> Location:
    return _parse_enum(Location, token, allow_not_sure=query)


def parse_timing(token: str, query: bool = False) -> Timing:
    return _parse_enum(Timing, token, allow_not_sure=query)


def search_url_for(search_terms: str) -> str:
    """Web search link for a record's curated search terms."""
    return SEARCH_URL_PREFIX + quote_plus(search_terms)


@dataclass(frozen=True)
class ReferenceRecord:
    """One annotated dataset entry held by the index."""

    id: str
    diagnosis: str
    location: Location
    timing: Timing
    embedding: Embedding
    source_url: str = ""
    source_title: str = ""
    excerpt_start_s: float = 0.0
    search_terms: str = ""
    audio_path: str = ""  # provenance, lets the service stream the excerpt

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if not self.diagnosis:
            raise ValueError(f"record {self.id!r} has an empty diagnosis")
        if self.location is Location.NOT_SURE:
            raise InvalidEnumError(f"record {self.id!r}: location 'not_sure' is query-only")
        if self.timing is Timing.NOT_SURE:
            raise InvalidEnumError(f"record {self.id!r}: timing 'not_sure' is query-only")
        if self.excerpt_start_s < 0:
            raise ValueError(f"record {self.id!r}: excerpt_start_s must be >= 0")


@dataclass(frozen=True)
class CalibrationStats:
    """Similarity statistics over all record pairs, used for confidence."""

    mean_sim: float
    min_sim: float
    max_sim: float
    pair_count: int

    def __post_init__(self):
        if not self.min_sim <= self.mean_sim <= self.max_sim:
            raise ValueError(
                f"calibration stats out of order: min={self.min_sim} "
                f"mean={self.mean_sim} max={self.max_sim}"
            )
        if self.pair_count < 1:
            raise ValueError(f"pair_count must be positive, got {self.pair_count}")


@dataclass(frozen=True)
class Match:
    """One ranked retrieval result."""

    record_id: str
    diagnosis: str
    similarity: float
    confidence: float
    search_url: str
    rank: int


@dataclass(frozen=True)
class QueryResult:
    matches: tuple[Match, ...]
    fallback: bool


def metadata_filter(records: Iterable[ReferenceRecord], where: Location,
                    when: Timing) -> list[ReferenceRecord]:
    """Records consistent with the user's answers; not_sure means no constraint."""
    return [
        r for r in records
        if (where is Location.NOT_SURE or r.location is where)
        and (when is Timing.NOT_SURE or r.timing is when)
    ]


def _unit(values: np.ndarray, what: str) -> np.ndarray:
    norm = float(np.sqrt(np.dot(values, values)))
    if norm < ZERO_NORM_FLOOR:
        raise ZeroVectorError(f"{what} has near-zero norm {norm:.2e}")
    return values / norm


def cosine_similarity(a: Embedding, b: Embedding) -> float:
    """Cosine of the angle between two embeddings, in [-1, 1]."""
    if a.embedder_id != b.embedder_id:
        raise EmbedderMismatchError(
            f"cannot compare embeddings from {a.embedder_id!r} and {b.embedder_id!r}"
        )
    if a.dimension != b.dimension:
        raise DimensionMismatchError(f"dimensions differ: {a.dimension} vs {b.dimension}")
    ua = _unit(a.values, "first embedding")
    ub = _unit(b.values, "second embedding")
    if np.array_equal(ua, ub):
        return 1.0  # identical inputs must not round below 1
    return float(np.clip(np.dot(ua, ub), -1.0, 1.0))


def rank_top_k(query: Embedding, candidates: Sequence[ReferenceRecord],
               k: int = DEFAULT_TOP_K,
               stats: CalibrationStats | None = None) -> list[Match]:
    """The min(k, len(candidates)) most similar records, sorted by similarity
    descending, ties broken by ascending record id.

    Confidence comes from the supplied calibration stats; without stats it
    falls back to the degenerate midpoint 0.5.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not candidates:
        return []
    for c in candidates:
        if c.embedding.embedder_id != query.embedder_id:
            raise EmbedderMismatchError(
                f"candidate {c.id!r} was embedded by {c.embedding.embedder_id!r}, "
                f"query by {query.embedder_id!r}"
            )
        if c.embedding.dimension != query.dimension:
            raise DimensionMismatchError(
                f"candidate {c.id!r} dimension {c.embedding.dimension} "
                f"!= query dimension {query.dimension}"
            )
    unit_query = _unit(query.values, "query embedding")
    unit_rows = np.stack([_unit(c.embedding.values, f"record {c.id!r}") for c in candidates])
    scores = cosine_scores(unit_query, unit_rows)
    order = sorted(range(len(candidates)), key=lambda i: (-scores[i], candidates[i].id))
    matches = []
    for rank, i in enumerate(order[:k], start=1):
        record = candidates[i]
        similarity = float(scores[i])
        matches.append(Match(
            record_id=record.id,
            diagnosis=record.diagnosis,
            similarity=similarity,
            confidence=confidence(similarity, stats) if stats is not None else 0.5,
            search_url=search_url_for(record.search_terms),
            rank=rank,
        ))
    return matches


def compute_calibration(records: Sequence[ReferenceRecord]) -> CalibrationStats:
    """Mean/min/max cosine similarity over all unordered record pairs,
    self-similarities excluded."""
    n = len(records)
    if n < 2:
        raise InsufficientRecordsError(f"calibration needs at least 2 records, got {n}")
    unit_rows = np.stack([_unit(r.embedding.values, f"record {r.id!r}") for r in records])
    mean_sim, min_sim, max_sim = pairwise_sim_stats(unit_rows)
    return CalibrationStats(
        mean_sim=float(mean_sim),
        min_sim=float(min_sim),
        max_sim=float(max_sim),
        pair_count=n * (n - 1) // 2,
    )


def confidence(similarity: float, stats: CalibrationStats) -> float:
    """Map a raw similarity onto [0, 1]: the dataset-mean similarity lands at
    0.5 and the similarity range sets the slope. Clamped at the ends; a
    degenerate range (max == min) pins the score to 0.5."""
    spread = stats.max_sim - stats.min_sim
    if spread == 0.0:
        return 0.5
    return float(min(1.0, max(0.0, 0.5 + (similarity - stats.mean_sim) / spread)))


class DiagnosticIndex:
    """Immutable queryable store: records plus calibration statistics.

    Concurrent queries share the instance read-only; a rebuild produces a new
    instance that callers swap in whole.
    """

    def __init__(self, records: Sequence[ReferenceRecord],
                 calibration: CalibrationStats | None = None):
        records = tuple(records)
        if not records:
            raise EmptyIndexError("an index needs at least one record")
        seen: set[str] = set()
        for r in records:
            if r.id in seen:
                raise DuplicateIdError(f"duplicate record id {r.id!r}")
            seen.add(r.id)
        embedder_ids = {r.embedding.embedder_id for r in records}
        if len(embedder_ids) != 1:
            raise EmbedderMismatchError(
                f"records mix embedders: {sorted(embedder_ids)}"
            )
        dims = {r.embedding.dimension for r in records}
        if len(dims) != 1:
            raise DimensionMismatchError(f"records mix dimensions: {sorted(dims)}")
        self._records = records
        self._by_id = {r.id: r for r in records}
        self.embedder_id = embedder_ids.pop()
        self.dimension = dims.pop()
        self.calibration = calibration if calibration is not None else compute_calibration(records)

    def __len__(self):
        return len(self._records)

    @property
    def records(self) -> tuple[ReferenceRecord, ...]:
        return self._records

    def record_by_id(self, record_id: str) -> ReferenceRecord | None:
        return self._by_id.get(record_id)

    def diagnoses(self) -> list[str]:
        """Distinct diagnosis labels, in first-seen order."""
        return list(dict.fromkeys(r.diagnosis for r in self._records))

    def query(self, embedding: Embedding, where: Location = Location.NOT_SURE,
              when: Timing = Timing.NOT_SURE, k: int = DEFAULT_TOP_K) -> QueryResult:
        """Filter by metadata, rank by cosine similarity, attach confidence.

        An over-restrictive filter that empties the candidate pool falls back
        to ranking the whole index, flagged via fallback=True.
        """
        if embedding.embedder_id != self.embedder_id:
            raise EmbedderMismatchError(
                f"query embedded by {embedding.embedder_id!r}, "
                f"index built with {self.embedder_id!r}"
            )
        candidates = metadata_filter(self._records, where, when)
        fallback = not candidates
        if fallback:
            candidates = list(self._records)
        matches = rank_top_k(embedding, candidates, k, stats=self.calibration)
        return QueryResult(matches=tuple(matches), fallback=fallback)

    # --- persistence ----------------------------------------------------------

    def save(self, path) -> None:
        """Write the versioned JSON container; embeddings round-trip bit-exact
        (stored as base64 little-endian float64)."""
        doc = {
            "format": INDEX_FORMAT_NAME,
            "version": INDEX_FORMAT_VERSION,
            "embedder_id": self.embedder_id,
            "dimension": self.dimension,
            "calibration": {
                "mean_sim": self.calibration.mean_sim,
                "min_sim": self.calibration.min_sim,
                "max_sim": self.calibration.max_sim,
                "pair_count": self.calibration.pair_count,
            },
            "records": [
                {
                    "id": r.id,
                    "diagnosis": r.diagnosis,
                    "location": r.location.value,
                    "timing": r.timing.value,
                    "source_url": r.source_url,
                    "source_title": r.source_title,
                    "excerpt_start_s": r.excerpt_start_s,
                    "search_terms": r.search_terms,
                    "audio_path": r.audio_path,
                    "embedding": base64.b64encode(
                        np.ascontiguousarray(r.embedding.values, dtype="<f8").tobytes()
                    ).decode("ascii"),
                }
                for r in self._records
            ],
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "DiagnosticIndex":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise IndexFormatError(f"index file is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != INDEX_FORMAT_NAME:
            raise IndexFormatError("not a diagnostic index file")
        if doc.get("version") != INDEX_FORMAT_VERSION:
            raise IndexFormatError(
                f"unsupported index version {doc.get('version')!r}; "
                f"this build reads version {INDEX_FORMAT_VERSION}"
            )
        try:
            embedder_id = doc["embedder_id"]
            dimension = int(doc["dimension"])
            cal = doc["calibration"]
            calibration = CalibrationStats(
                mean_sim=float(cal["mean_sim"]),
                min_sim=float(cal["min_sim"]),
                max_sim=float(cal["max_sim"]),
                pair_count=int(cal["pair_count"]),
            )
            records = []
            for raw in doc["records"]:
                values = np.frombuffer(base64.b64decode(raw["embedding"]), dtype="<f8")
                if values.size != dimension:
                    raise IndexFormatError(
                        f"record {raw.get('id')!r} stores {values.size} values, "
                        f"header says {dimension}"
                    )
                records.append(ReferenceRecord(
                    id=raw["id"],
                    diagnosis=raw["diagnosis"],
                    location=parse_location(raw["location"]),
                    timing=parse_timing(raw["timing"]),
                    embedding=Embedding(values, embedder_id),
                    source_url=raw.get("source_url", ""),
                    source_title=raw.get("source_title", ""),
                    excerpt_start_s=float(raw.get("excerpt_start_s", 0.0)),
                    search_terms=raw.get("search_terms", ""),
                    audio_path=raw.get("audio_path", ""),
                ))
        except (KeyError, TypeError, ValueError) as exc:
            raise IndexFormatError(f"malformed index file: {exc!r}") from exc
        return cls(records, calibration=calibration)
