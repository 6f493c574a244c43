import io
import wave

import numpy as np
import pytest

from cardiag import (
    DiagnosticIndex,
    Embedding,
    Location,
    ReferenceProjectionEmbedder,
    ReferenceRecord,
    Timing,
    canonical_waveform,
    embed_recording,
)

LOCATIONS = [Location.FRONT, Location.REAR, Location.WHEELS]
TIMINGS = [Timing.STARTING, Timing.IDLING, Timing.DRIVING, Timing.BRAKING, Timing.TURNING]


def wav_bytes(samples, rate=16000, width=2, channels=1):
    """Encode float samples in [-1, 1] as a PCM WAV byte string."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1 and channels > 1:
        samples = np.repeat(samples[:, None], channels, axis=1)
    flat = samples.reshape(-1)
    if width == 1:
        raw = (np.clip(np.round(flat * 127), -128, 127) + 128).astype(np.uint8).tobytes()
    elif width == 2:
        raw = np.clip(np.round(flat * 32767), -32768, 32767).astype("<i2").tobytes()
    elif width == 3:
        ints = np.clip(np.round(flat * (2**23 - 1)), -(2**23), 2**23 - 1).astype("<i4")
        raw = ints.astype("<i4").tobytes()
        raw = b"".join(raw[i:i + 3] for i in range(0, len(raw), 4))
    elif width == 4:
        raw = np.clip(np.round(flat * (2**31 - 1)), -(2**31), 2**31 - 1).astype("<i4").tobytes()
    else:
        raise ValueError(f"unsupported width {width}")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(channels)
        wf.setsampwidth(width)
        wf.setframerate(rate)
        wf.writeframes(raw)
    return buf.getvalue()


def tone(freq, seconds=2.0, rate=16000, amplitude=0.8):
    t = np.arange(int(round(seconds * rate))) / rate
    return amplitude * np.sin(2 * np.pi * freq * t)


def noisy_tone(freq, seed, seconds=2.0, rate=16000):
    rng = np.random.default_rng(seed)
    return 0.6 * np.sin(2 * np.pi * freq * np.arange(int(seconds * rate)) / rate) \
        + 0.05 * rng.standard_normal(int(seconds * rate))


def random_records(n, seed=0, dim=16, n_diag=4, embedder_id="test-embedder"):
    """Records with random embeddings and cycling metadata; no audio involved."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        records.append(ReferenceRecord(
            id=f"r{i:03d}",
            diagnosis=f"diag{i % n_diag}",
            location=LOCATIONS[int(rng.integers(len(LOCATIONS)))],
            timing=TIMINGS[int(rng.integers(len(TIMINGS)))],
            embedding=Embedding(rng.standard_normal(dim), embedder_id),
            search_terms=f"terms {i}",
        ))
    return records


def make_corpus(root, n=9, seed=0, seconds=2.0):
    """Write n noisy-tone WAVs plus a manifest under root; return manifest path."""
    rows = ["id,audio_path,diagnosis,location,timing,source_title,source_url,"
            "excerpt_start_s,search_terms"]
    for i in range(n):
        sig = noisy_tone(220 + 130 * i, seed + i, seconds=seconds)
        (root / f"r{i:02d}.wav").write_bytes(wav_bytes(sig))
        rows.append(f"r{i:02d},r{i:02d}.wav,diag{i % 3},"
                    f"{LOCATIONS[i % 3].value},{TIMINGS[i % 3].value},"
                    f"Clip {i},https://example.com/{i},0,car noise {i}")
    manifest = root / "manifest.csv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return manifest


@pytest.fixture
def audio_index(tmp_path):
    """A small index built from real audio, with the files on disk."""
    embedder = ReferenceProjectionEmbedder(0, 32)
    records = []
    for i in range(4):
        data = wav_bytes(noisy_tone(250 + 200 * i, i))
        path = tmp_path / f"r{i}.wav"
        path.write_bytes(data)
        records.append(ReferenceRecord(
            id=f"r{i}",
            diagnosis=f"diag{i}",
            location=LOCATIONS[i % 3],
            timing=TIMINGS[i % 2],
            embedding=embed_recording(canonical_waveform(data), embedder),
            search_terms=f"noise {i}",
            audio_path=f"r{i}.wav",
        ))
    return DiagnosticIndex(records), embedder, tmp_path
