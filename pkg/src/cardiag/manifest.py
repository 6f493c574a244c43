"""Dataset manifest parsing and end-to-end index construction."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .audio import canonical_waveform
from .embedding import SidecarEmbeddings, SliceEmbedder, embed_recording
from .errors import (
    DiagnosticError,
    DuplicateIdError,
    IndexBuildError,
    InvalidEnumError,
    MalformedRowError,
)
from .index import (
    DiagnosticIndex,
    Location,
    ReferenceRecord,
    Timing,
    parse_location,
    parse_timing,
)

COLUMNS = (
    "id",
    "audio_path",
    "diagnosis",
    "location",
    "timing",
    "source_title",
    "source_url",
    "excerpt_start_s",
    "search_terms",
)


@dataclass(frozen=True)
class ManifestRow:
    """One dataset entry as declared in the manifest CSV."""

    id: str
    audio_path: str
    diagnosis: str
    location: Location
    timing: Timing
    source_title: str = ""
    source_url: str = ""
    excerpt_start_s: float = 0.0
    search_terms: str = ""


def parse_manifest(text: str) -> list[ManifestRow]:
    """Parse manifest CSV text, validating every row.

    Errors carry the 1-based line number of the offending row. The header
    must list the expected columns in order; rows with missing or blank
    required fields, bad enums, unparseable offsets, or repeated ids are
    rejected.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRowError("manifest is empty") from None
    if tuple(h.strip() for h in header) != COLUMNS:
        raise MalformedRowError(
            f"line 1: bad header; expected {','.join(COLUMNS)}"
        )
    rows: list[ManifestRow] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(reader, start=2):
        if not raw or (len(raw) == 1 and not raw[0].strip()):
            continue  # blank line
        if len(raw) != len(COLUMNS):
            raise MalformedRowError(
                f"line {lineno}: expected {len(COLUMNS)} fields, got {len(raw)}"
            )
        field = dict(zip(COLUMNS, (v.strip() for v in raw)))
        for required in ("id", "audio_path", "diagnosis", "location", "timing"):
            if not field[required]:
                raise MalformedRowError(f"line {lineno}: {required} is empty")
        if field["id"] in seen:
            raise DuplicateIdError(f"line {lineno}: duplicate id {field['id']!r}")
        seen.add(field["id"])
        try:
            location = parse_location(field["location"])
            timing = parse_timing(field["timing"])
        except InvalidEnumError as exc:
            raise InvalidEnumError(f"line {lineno}: {exc}") from None
        offset_text = field["excerpt_start_s"] or "0"
        try:
            excerpt_start_s = float(offset_text)
        except ValueError:
            raise MalformedRowError(
                f"line {lineno}: excerpt_start_s {offset_text!r} is not a number"
            ) from None
        if excerpt_start_s < 0:
            raise MalformedRowError(f"line {lineno}: excerpt_start_s must be >= 0")
        rows.append(ManifestRow(
            id=field["id"],
            audio_path=field["audio_path"],
            diagnosis=field["diagnosis"],
            location=location,
            timing=timing,
            source_title=field["source_title"],
            source_url=field["source_url"],
            excerpt_start_s=excerpt_start_s,
            search_terms=field["search_terms"],
        ))
    if not rows:
        raise MalformedRowError("manifest has a header but no rows")
    return rows


def load_manifest(path) -> list[ManifestRow]:
    return parse_manifest(Path(path).read_text(encoding="utf-8"))


def write_manifest(path, rows: Sequence[ManifestRow]) -> None:
    """Write rows back out in the canonical column order."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow([
                r.id, r.audio_path, r.diagnosis, r.location.value, r.timing.value,
                r.source_title, r.source_url,
                f"{r.excerpt_start_s:g}", r.search_terms,
            ])


def _row_record(row: ManifestRow, audio_root: Path,
                embedder: SliceEmbedder | None,
                sidecar: SidecarEmbeddings | None) -> ReferenceRecord:
    if sidecar is not None:
        embedding = sidecar.embedding_for(row.id)
    else:
        assert embedder is not None
        data = (audio_root / row.audio_path).read_bytes()
        w = canonical_waveform(data)
        embedding = embed_recording(w, embedder)
    return ReferenceRecord(
        id=row.id,
        diagnosis=row.diagnosis,
        location=row.location,
        timing=row.timing,
        embedding=embedding,
        source_url=row.source_url,
        source_title=row.source_title,
        excerpt_start_s=row.excerpt_start_s,
        search_terms=row.search_terms,
        audio_path=row.audio_path,
    )


def build_index(rows: Sequence[ManifestRow], audio_root,
                embedder: SliceEmbedder | None = None,
                sidecar: SidecarEmbeddings | None = None) -> DiagnosticIndex:
    """Embed every manifest row and assemble the index.

    Embeddings come either from decoding the audio under audio_root with the
    given embedder, or from a sidecar of precomputed vectors. Per-row failures
    are collected and reported together so one bad file cannot hide the rest.
    """
    if (embedder is None) == (sidecar is None):
        raise ValueError("pass exactly one of embedder or sidecar")
    audio_root = Path(audio_root)
    records: list[ReferenceRecord] = []
    failures: list[tuple[str, Exception]] = []
    for row in rows:
        try:
            records.append(_row_record(row, audio_root, embedder, sidecar))
        except (DiagnosticError, OSError, ValueError) as exc:
            failures.append((row.id, exc))
    if failures:
        raise IndexBuildError(failures)
    return DiagnosticIndex(records)
