"""Audio ingestion: WAV decoding, sample-rate conversion, peak normalization.

The canonical representation downstream of this module is a mono float64
waveform at 16 kHz with samples in [-1, 1], peaking at a fixed target level.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass

import numpy as np

from ._accel import resample_sinc
from .errors import (
    CorruptStreamError,
    EmptyAudioError,
    SilentAudioError,
    UnsupportedFormatError,
)

CANONICAL_RATE_HZ = 16000
DEFAULT_TARGET_PEAK = 1.0
SILENCE_FLOOR = 1e-6
# Zero crossings per side of the windowed-sinc resampling kernel.
RESAMPLE_ZERO_CROSSINGS = 16


@dataclass(frozen=True)
class Waveform:
    """Mono audio samples plus their sample rate. Samples stay within [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(f"waveform must be 1-D, got shape {samples.shape}")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if samples.size and np.max(np.abs(samples)) > 1.0:
            raise ValueError("waveform samples exceed [-1, 1]")
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    def __len__(self):
        return self.samples.size

    @property
    def duration_ms(self) -> float:
        return 1000.0 * self.samples.size / self.sample_rate_hz


def _pcm_to_float(frames: bytes, sample_width: int) -> np.ndarray:
    if sample_width == 1:
        # 8-bit WAV is unsigned
        return (np.frombuffer(frames, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    if sample_width == 2:
        return np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    if sample_width == 3:
        raw = np.frombuffer(frames, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        val = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        val = np.where(val & 0x800000, val - (1 << 24), val)
        return val.astype(np.float64) / float(1 << 23)
    if sample_width == 4:
        return np.frombuffer(frames, dtype="<i4").astype(np.float64) / float(1 << 31)
    raise UnsupportedFormatError(f"unsupported PCM sample width: {sample_width * 8} bit")


def decode_audio(data: bytes, format_hint: str | None = None) -> Waveform:
    """Decode a WAV byte stream to a mono waveform at its source rate.

    Multi-channel audio is downmixed by the arithmetic mean of the channels.
    """
    label = f" ({format_hint})" if format_hint else ""
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise UnsupportedFormatError(f"not a RIFF/WAVE stream{label}")
    try:
        with wave.open(io.BytesIO(data), "rb") as reader:
            channels = reader.getnchannels()
            sample_width = reader.getsampwidth()
            rate = reader.getframerate()
            n_frames = reader.getnframes()
            frames = reader.readframes(n_frames)
    except wave.Error as exc:
        if "unknown format" in str(exc):
            raise UnsupportedFormatError(f"non-PCM WAV{label}: {exc}") from exc
        raise CorruptStreamError(f"unreadable WAV{label}: {exc}") from exc
    except EOFError as exc:
        raise CorruptStreamError(f"truncated WAV header{label}") from exc

    if channels < 1 or rate <= 0:
        raise CorruptStreamError(f"invalid WAV header{label}: channels={channels} rate={rate}")
    if sample_width not in (1, 2, 3, 4):
        raise UnsupportedFormatError(f"unsupported sample width: {sample_width * 8} bit{label}")

    frame_bytes = sample_width * channels
    if len(frames) < n_frames * frame_bytes or len(frames) % frame_bytes != 0:
        raise CorruptStreamError(
            f"truncated data chunk{label}: header promises {n_frames} frames, "
            f"got {len(frames)} bytes"
        )
    if n_frames == 0 or not frames:
        raise EmptyAudioError(f"audio stream holds zero samples{label}")

    flat = _pcm_to_float(frames, sample_width)
    mono = flat.reshape(-1, channels).mean(axis=1) if channels > 1 else flat
    return Waveform(mono, rate)


def resample_to_16k(w: Waveform) -> Waveform:
    """Convert a mono waveform to 16 kHz with band-limited sinc interpolation.

    Input already at 16 kHz is returned unchanged. Interpolation ringing is
    clipped back into [-1, 1]; the pipeline peak-normalizes afterwards anyway.
    """
    if w.sample_rate_hz == CANONICAL_RATE_HZ:
        return w
    n_out = int(round(len(w) * CANONICAL_RATE_HZ / w.sample_rate_hz))
    out = resample_sinc(w.samples, w.sample_rate_hz, CANONICAL_RATE_HZ, n_out,
                        RESAMPLE_ZERO_CROSSINGS)
    np.clip(out, -1.0, 1.0, out=out)
    return Waveform(out, CANONICAL_RATE_HZ)


def peak_normalize(w: Waveform, target_peak: float = DEFAULT_TARGET_PEAK) -> Waveform:
    """Scale the waveform so its maximum absolute sample equals target_peak.

    The peak lands within one representable float step of the target.
    """
    if not 0.0 < target_peak <= 1.0:
        raise ValueError(f"target_peak must be in (0, 1], got {target_peak}")
    if len(w) == 0:
        raise EmptyAudioError("cannot normalize an empty waveform")
    peak = float(np.max(np.abs(w.samples)))
    if peak < SILENCE_FLOOR:
        raise SilentAudioError(
            f"peak amplitude {peak:.2e} is below the silence floor {SILENCE_FLOOR:.0e}"
        )
    scale = target_peak / peak
    if scale == 1.0:
        return w
    out = np.clip(w.samples * scale, -target_peak, target_peak)
    return Waveform(out, w.sample_rate_hz)


def canonical_waveform(data: bytes, format_hint: str | None = None,
                       target_peak: float = DEFAULT_TARGET_PEAK) -> Waveform:
    """decode -> resample -> peak-normalize, the ingestion path used everywhere."""
    return peak_normalize(resample_to_16k(decode_audio(data, format_hint)), target_peak)
