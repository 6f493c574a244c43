"""Leave-one-out retrieval evaluation and chance baselines."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InsufficientRecordsError
from .index import DiagnosticIndex, metadata_filter, rank_top_k

DEFAULT_TOP_K = 3


@dataclass(frozen=True)
class EvalReport:
    """Leave-one-out accuracy, as fractions in [0, 1]."""

    n_records: int
    n_diagnoses: int
    k: int
    top1_filtered: float
    topk_filtered: float
    top1_unfiltered: float
    topk_unfiltered: float
    n_empty_filter: int
    random_filtered_top1: float
    label_uniform_top1: float


@dataclass(frozen=True)
class RandomBaseline:
    """Accuracy of picking uniformly among the filtered candidates."""

    expected: float
    estimate: float | None
    draws: int


def _filtered_pool(index: DiagnosticIndex, held_out):
    others = [r for r in index.records if r.id != held_out.id]
    return others, metadata_filter(others, held_out.location, held_out.timing)


def random_filtered_baseline(index: DiagnosticIndex, use_metadata: bool = True,
                             draws: int = 0, seed: int = 0) -> RandomBaseline:
    """Expected top-1 accuracy of a uniform random pick from each record's
    candidate pool, leave-one-out. With use_metadata the pool is filtered by
    the held-out record's annotations; empty pools score 0.

    With draws > 0 a Monte Carlo estimate of the same quantity is included
    as an independent cross-check of the closed form.
    """
    pools = []
    for r in index.records:
        others, filtered = _filtered_pool(index, r)
        pool = filtered if use_metadata else others
        pools.append((r.diagnosis, [c.diagnosis for c in pool]))
    per_record = [
        sum(1 for d in labels if d == truth) / len(labels) if labels else 0.0
        for truth, labels in pools
    ]
    expected = float(np.mean(per_record))

    estimate = None
    if draws > 0:
        rng = np.random.default_rng(seed)
        record_picks = rng.integers(0, len(pools), size=draws)
        correct = 0
        for i in record_picks:
            truth, labels = pools[i]
            if labels and labels[rng.integers(0, len(labels))] == truth:
                correct += 1
        estimate = correct / draws
    return RandomBaseline(expected=expected, estimate=estimate, draws=draws)


def label_uniform_baseline(index: DiagnosticIndex) -> float:
    """Top-1 accuracy of guessing a diagnosis uniformly at random."""
    return 1.0 / len(index.diagnoses())


def leave_one_out_eval(index: DiagnosticIndex, k: int = DEFAULT_TOP_K) -> EvalReport:
    """Hold out each record in turn and retrieve it against the rest.

    The held-out record's own location and timing stand in for the user's
    answers. A hit means the true diagnosis label appears at rank 1 (top-1)
    or within the top k. Queries whose filter empties the pool score 0 and
    stay in the denominator; the count is reported separately.
    """
    if len(index) < 2:
        raise InsufficientRecordsError(
            f"leave-one-out needs at least 2 records, got {len(index)}"
        )
    top1_f = topk_f = top1_u = topk_u = 0
    n_empty = 0
    for r in index.records:
        others, pool = _filtered_pool(index, r)

        unfiltered = rank_top_k(r.embedding, others, k, stats=index.calibration)
        labels = [m.diagnosis for m in unfiltered]
        top1_u += labels[:1] == [r.diagnosis]
        topk_u += r.diagnosis in labels

        if not pool:
            n_empty += 1
            continue
        filtered = rank_top_k(r.embedding, pool, k, stats=index.calibration)
        labels = [m.diagnosis for m in filtered]
        top1_f += labels[:1] == [r.diagnosis]
        topk_f += r.diagnosis in labels

    n = len(index)
    return EvalReport(
        n_records=n,
        n_diagnoses=len(index.diagnoses()),
        k=k,
        top1_filtered=top1_f / n,
        topk_filtered=topk_f / n,
        top1_unfiltered=top1_u / n,
        topk_unfiltered=topk_u / n,
        n_empty_filter=n_empty,
        random_filtered_top1=random_filtered_baseline(index).expected,
        label_uniform_top1=label_uniform_baseline(index),
    )


def _pct(x: float) -> str:
    return f"{100.0 * x:.1f}%"


def format_report(report: EvalReport) -> str:
    """Plain-text accuracy table with one-decimal percentages."""
    kh = f"top-{report.k}"
    rows = [
        ("with metadata filter", _pct(report.top1_filtered), _pct(report.topk_filtered)),
        ("without metadata filter", _pct(report.top1_unfiltered), _pct(report.topk_unfiltered)),
        ("random within filter", _pct(report.random_filtered_top1), ""),
        ("random diagnosis", _pct(report.label_uniform_top1), ""),
    ]
    width = max(len(r[0]) for r in rows)
    lines = [
        f"Leave-one-out retrieval over {report.n_records} recordings, "
        f"{report.n_diagnoses} diagnoses",
        f"{'':<{width}}  {'top-1':>6}  {kh:>6}",
    ]
    for name, a, b in rows:
        lines.append(f"{name:<{width}}  {a:>6}  {b:>6}".rstrip())
    if report.n_empty_filter:
        lines.append(
            f"empty-filter queries: {report.n_empty_filter} (scored 0, kept in denominator)"
        )
    return "\n".join(lines) + "\n"


def report_to_json(report: EvalReport) -> str:
    return json.dumps(asdict(report), indent=2, sort_keys=True) + "\n"


def report_from_json(text: str) -> EvalReport:
    return EvalReport(**json.loads(text))
