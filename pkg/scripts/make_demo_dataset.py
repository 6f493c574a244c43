"""Generate a synthetic demo dataset: 65 recordings across 12 diagnoses.

Each diagnosis has a distinct spectral signature (tone stack, modulated noise,
click train) so retrieval has real structure to find. Output is a manifest plus
WAV files ready for `cardiag build-index`.

Run:  python3 scripts/make_demo_dataset.py --out demo_data
"""

import argparse
import io
import sys
import wave
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from cardiag import Location, ManifestRow, Timing, write_manifest  # noqa: E402

# name, location, timing, tone stack (Hz), noise band (lo, hi, level),
# AM rate Hz, click rate Hz
PROFILES = [
    ("worn brake pads", Location.WHEELS, Timing.BRAKING,
     (2800, 3150), (2000, 5000, 0.10), 0.0, 0.0),
    ("failing wheel bearing", Location.WHEELS, Timing.DRIVING,
     (180, 360), (100, 900, 0.25), 11.0, 0.0),
    ("loose heat shield", Location.REAR, Timing.IDLING,
     (), (300, 2500, 0.20), 0.0, 24.0),
    ("worn cv joint", Location.WHEELS, Timing.TURNING,
     (240,), (150, 1200, 0.10), 0.0, 9.0),
    ("serpentine belt slipping", Location.FRONT, Timing.STARTING,
     (1700, 2550), (1200, 4000, 0.08), 6.0, 0.0),
    ("alternator whine", Location.FRONT, Timing.IDLING,
     (900, 1800, 2700), (600, 3200, 0.05), 0.0, 0.0),
    ("exhaust leak", Location.REAR, Timing.DRIVING,
     (130,), (80, 700, 0.35), 0.0, 0.0),
    ("power steering pump whine", Location.FRONT, Timing.TURNING,
     (1200, 2400), (800, 3000, 0.07), 4.0, 0.0),
    ("engine knock", Location.FRONT, Timing.DRIVING,
     (110, 220), (60, 500, 0.15), 0.0, 30.0),
    ("failing starter motor", Location.FRONT, Timing.STARTING,
     (), (400, 2000, 0.12), 0.0, 15.0),
    ("loose lug nuts", Location.WHEELS, Timing.DRIVING,
     (90,), (50, 400, 0.15), 0.0, 3.5),
    ("worn suspension bushing", Location.FRONT, Timing.BRAKING,
     (70, 140), (40, 350, 0.20), 2.0, 0.0),
]

# per-diagnosis recording counts summing to 65
COUNTS = [6, 6, 6, 6, 6, 5, 5, 5, 5, 5, 5, 5]


def band_noise(rng, n, rate, lo, hi, level):
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, 1 / rate)
    spectrum[(freqs < lo) | (freqs > hi)] = 0.0
    x = np.fft.irfft(spectrum, n)
    peak = np.max(np.abs(x))
    return level * x / peak if peak > 0 else x


def click_train(rng, n, rate, rate_hz):
    x = np.zeros(n)
    period = int(rate / rate_hz)
    width = max(int(rate * 0.004), 8)
    decay = np.exp(-np.arange(width) / (width / 5))
    phase = int(rng.integers(period))
    for start in range(phase, n - width, period):
        jitter = int(rng.integers(-period // 10, period // 10 + 1))
        s = min(max(start + jitter, 0), n - width)
        x[s:s + width] += decay * rng.uniform(0.6, 1.0)
    return x


def synthesize(profile, rng, seconds, rate):
    _, _, _, tones, (lo, hi, nlevel), am_rate, clicks = profile
    n = int(seconds * rate)
    t = np.arange(n) / rate
    x = np.zeros(n)
    for f in tones:
        detune = f * rng.uniform(0.97, 1.03)
        x += rng.uniform(0.2, 0.4) * np.sin(2 * np.pi * detune * t + rng.uniform(0, 6.28))
    x += band_noise(rng, n, rate, lo, hi, nlevel * rng.uniform(0.8, 1.2))
    if am_rate > 0:
        x *= 0.6 + 0.4 * np.sin(2 * np.pi * am_rate * rng.uniform(0.9, 1.1) * t)
    if clicks > 0:
        x += 0.5 * click_train(rng, n, rate, clicks * rng.uniform(0.9, 1.1))
    x += rng.uniform(0.08, 0.25) * band_noise(rng, n, rate, 40, 6000, 1.0)  # cabin noise
    peak = np.max(np.abs(x))
    return 0.9 * x / peak


def write_wav(path, samples, rate):
    pcm = np.clip(np.round(samples * 32767), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(pcm.tobytes())
    path.write_bytes(buf.getvalue())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out)
    (out / "audio").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    rates = [16000, 32000, 44100]
    rows = []
    serial = 0
    for profile, count in zip(PROFILES, COUNTS):
        name, location, timing = profile[0], profile[1], profile[2]
        slug = name.replace(" ", "-")
        locations = [l for l in Location if l is not Location.NOT_SURE]
        timings = [t for t in Timing if t is not Timing.NOT_SURE]
        for k in range(count):
            serial += 1
            rid = f"{slug[:12]}-{k:02d}"
            rate = rates[int(rng.integers(len(rates)))]
            seconds = float(rng.uniform(2.0, 6.0))
            audio_path = f"audio/{rid}.wav"
            write_wav(out / audio_path, synthesize(profile, rng, seconds, rate), rate)
            # real uploads disagree about where and when a noise happens, so
            # let some recordings drift off the canonical annotation
            loc = location if rng.random() < 0.85 else locations[int(rng.integers(len(locations)))]
            tim = timing if rng.random() < 0.85 else timings[int(rng.integers(len(timings)))]
            rows.append(ManifestRow(
                id=rid,
                audio_path=audio_path,
                diagnosis=name,
                location=loc,
                timing=tim,
                source_title=f"Demo clip {serial}: {name}",
                source_url=f"https://example.com/demo/{rid}",
                excerpt_start_s=0.0,
                search_terms=f"car {name} sound",
            ))
    write_manifest(out / "manifest.csv", rows)
    diagnoses = {r.diagnosis for r in rows}
    print(f"wrote {len(rows)} recordings, {len(diagnoses)} diagnoses under {out}")
    print(f"next: cardiag build-index --manifest {out / 'manifest.csv'} "
          f"--audio-root {out} --out {out / 'index.json'}")


if __name__ == "__main__":
    main()
