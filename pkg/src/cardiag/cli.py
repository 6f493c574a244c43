"""Command-line entry points: build-index, query, evaluate, serve."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .embedding import (
    DEFAULT_DIMENSION,
    ReferenceProjectionEmbedder,
    read_sidecar,
)
from .errors import DiagnosticError, IndexBuildError
from .evaluation import format_report, leave_one_out_eval, report_to_json
from .index import DiagnosticIndex, parse_location, parse_timing
from .manifest import build_index, load_manifest
from .service import create_app, resolve_embedder


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cardiag",
        description="Diagnose car trouble sounds by audio similarity search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", help="embed a dataset manifest into an index file")
    p.add_argument("--manifest", required=True, help="dataset manifest CSV")
    p.add_argument("--audio-root", required=True, help="directory audio_path entries are relative to")
    p.add_argument("--out", required=True, help="index file to write")
    p.add_argument("--embedder", choices=("reference", "sidecar", "external"),
                   default="reference")
    p.add_argument("--seed", type=int, default=0, help="reference embedder seed")
    p.add_argument("--dim", type=int, default=DEFAULT_DIMENSION,
                   help="reference embedder output dimension")
    p.add_argument("--sidecar", help="precomputed embeddings file (embedder=sidecar)")
    p.add_argument("--model", help="TorchScript model path (embedder=external)")

    p = sub.add_parser("query", help="rank an audio file against an index")
    p.add_argument("--index", required=True)
    p.add_argument("--audio", required=True, help="query recording (WAV)")
    p.add_argument("--where", default="not_sure")
    p.add_argument("--when", default="not_sure")
    p.add_argument("--k", type=int, default=3)

    p = sub.add_parser("evaluate", help="leave-one-out accuracy of an index")
    p.add_argument("--index", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--with-metadata", dest="with_metadata", action="store_true",
                   default=True, help="include the metadata-filtered rows (default)")
    g.add_argument("--no-metadata", dest="with_metadata", action="store_false",
                   help="report unfiltered retrieval only")
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--index", required=True)
    p.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    p.add_argument("--assets", help="static asset directory for the web UI")
    p.add_argument("--audio-root",
                   help="directory the index's audio paths are relative to "
                        "(default: the index file's directory)")

    return parser


def _cmd_build_index(args) -> int:
    rows = load_manifest(args.manifest)
    if args.embedder == "reference":
        index = build_index(rows, args.audio_root,
                            embedder=ReferenceProjectionEmbedder(args.seed, args.dim))
    elif args.embedder == "sidecar":
        if not args.sidecar:
            print("error: --sidecar is required with --embedder sidecar", file=sys.stderr)
            return 2
        index = build_index(rows, args.audio_root, sidecar=read_sidecar(args.sidecar))
    else:
        if not args.model:
            print("error: --model is required with --embedder external", file=sys.stderr)
            return 2
        from .embedding import TorchScriptEmbedder  # deferred: needs torch
        index = build_index(rows, args.audio_root,
                            embedder=TorchScriptEmbedder(args.model))
    index.save(args.out)
    print(f"{len(index)} records, {len(index.diagnoses())} diagnoses -> {args.out}")
    return 0


def _cmd_query(args) -> int:
    from .audio import canonical_waveform
    from .embedding import embed_recording

    index = DiagnosticIndex.load(args.index)
    embedder = resolve_embedder(index)
    if embedder is None:
        print(f"error: index embedder {index.embedder_id!r} cannot embed new audio "
              "from the command line", file=sys.stderr)
        return 1
    w = canonical_waveform(Path(args.audio).read_bytes())
    query = embed_recording(w, embedder)
    result = index.query(query,
                         parse_location(args.where, query=True),
                         parse_timing(args.when, query=True),
                         k=args.k)
    if result.fallback:
        print("note: no records matched the metadata filter; ranking the whole index")
    for m in result.matches:
        print(f"{m.rank}. {m.diagnosis} [{m.record_id}] "
              f"similarity={m.similarity:.3f} confidence={m.confidence:.2f}")
        print(f"   {m.search_url}")
    return 0


def _cmd_evaluate(args) -> int:
    index = DiagnosticIndex.load(args.index)
    report = leave_one_out_eval(index)
    if args.format == "json":
        sys.stdout.write(report_to_json(report))
        return 0
    text = format_report(report)
    if not args.with_metadata:
        text = "\n".join(line for line in text.splitlines()
                         if not line.startswith("with metadata filter")) + "\n"
    sys.stdout.write(text)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    index_path = Path(args.index)
    if not index_path.is_file():
        print(f"error: index file not found: {index_path}", file=sys.stderr)
        return 1
    index = DiagnosticIndex.load(index_path)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        print(f"error: --bind must be host:port, got {args.bind!r}", file=sys.stderr)
        return 2
    audio_root = args.audio_root if args.audio_root else index_path.parent
    app = create_app(index, audio_root=audio_root, assets_dir=args.assets)
    uvicorn.run(app, host=host, port=int(port))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "build-index": _cmd_build_index,
        "query": _cmd_query,
        "evaluate": _cmd_evaluate,
        "serve": _cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except IndexBuildError as exc:
        print(f"error: {len(exc.failures)} row(s) failed", file=sys.stderr)
        for rid, cause in exc.failures:
            code = cause.code if isinstance(cause, DiagnosticError) else "ERROR"
            print(f"  {rid}: [{code}] {cause}", file=sys.stderr)
        return 1
    except DiagnosticError as exc:
        print(f"error: [{exc.code}] {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
