"""Measure end-to-end /api/v1/diagnose latency against a synthetic index.

Run:  python3 benchmarks/bench_latency.py [--records 65] [--requests 50]
Reports p50/p95/max wall-clock per request; the budget is 500 ms at p95 for
a 10 s recording against 65 records.
"""

import argparse
import tempfile
import time
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from cardiag import ReferenceProjectionEmbedder, build_index, create_app, load_manifest
from cardiag._accel import warmup

import sys
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import make_corpus, noisy_tone, wav_bytes  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--records", type=int, default=65)
    parser.add_argument("--requests", type=int, default=50)
    parser.add_argument("--seconds", type=float, default=10.0, help="query length")
    parser.add_argument("--dim", type=int, default=128)
    args = parser.parse_args()

    warmup()
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        manifest = make_corpus(root, n=args.records, seed=0, seconds=1.0)
        t0 = time.perf_counter()
        index = build_index(load_manifest(manifest), root,
                            embedder=ReferenceProjectionEmbedder(0, args.dim))
        build_s = time.perf_counter() - t0
        client = TestClient(create_app(index, audio_root=root))
        query = wav_bytes(noisy_tone(333, 5, seconds=args.seconds))

        client.post("/api/v1/diagnose",
                    files={"audio": ("warm.wav", query, "audio/wav")})
        durations = []
        for _ in range(args.requests):
            start = time.perf_counter()
            r = client.post("/api/v1/diagnose",
                            files={"audio": ("q.wav", query, "audio/wav")})
            durations.append((time.perf_counter() - start) * 1000.0)
            r.raise_for_status()

    print(f"index build: {args.records} records in {build_s:.2f} s")
    print(f"{args.requests} requests, {args.seconds:.0f} s query, dim {args.dim}:")
    for label, q in (("p50", 50), ("p95", 95), ("max", 100)):
        print(f"  {label} {np.percentile(durations, q):7.1f} ms")
    verdict = "within" if np.percentile(durations, 95) <= 500 else "OVER"
    print(f"  {verdict} the 500 ms p95 budget")


if __name__ == "__main__":
    main()
