"""Log-mel frontend: fixed 960 ms slices of 16 kHz audio become 96x64 patches.

All frontend constants live here. Window/hop/band geometry follows the input
convention of the pretrained VGGish embedder family so that externally
computed embeddings stay compatible with indices built by this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .audio import CANONICAL_RATE_HZ, Waveform
from .errors import TooShortError

SLICE_MS = 960
SLICE_SAMPLES = CANONICAL_RATE_HZ * SLICE_MS // 1000  # 15360
WINDOW_SAMPLES = 400  # 25 ms
HOP_SAMPLES = 160  # 10 ms
FRAMES_PER_PATCH = 96
FFT_SIZE = 512
MEL_BANDS = 64
MEL_MIN_HZ = 125.0
MEL_MAX_HZ = 7500.0
LOG_OFFSET = 0.01
# HTK-style mel curve constants
MEL_SCALE = 1127.0
MEL_BREAK_HZ = 700.0


@dataclass(frozen=True)
class MelPatch:
    """One 96x64 grid of log mel energies for a single 960 ms slice."""

    values: np.ndarray
    slice_index: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (FRAMES_PER_PATCH, MEL_BANDS):
            raise ValueError(f"patch must be {FRAMES_PER_PATCH}x{MEL_BANDS}, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("patch contains non-finite entries")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def hz_to_mel(hz):
    return MEL_SCALE * np.log(1.0 + np.asarray(hz, dtype=np.float64) / MEL_BREAK_HZ)


def mel_to_hz(mel):
    return MEL_BREAK_HZ * (np.exp(np.asarray(mel, dtype=np.float64) / MEL_SCALE) - 1.0)


def mel_band_centers_hz() -> np.ndarray:
    """Center frequency of each of the 64 mel bands, in Hz."""
    edges = np.linspace(hz_to_mel(MEL_MIN_HZ), hz_to_mel(MEL_MAX_HZ), MEL_BANDS + 2)
    return mel_to_hz(edges[1:-1])


@lru_cache(maxsize=1)
def _mel_filterbank() -> np.ndarray:
    # Triangular weights in mel space, FFT bins x bands. Bins below the lowest
    # edge (incl. DC) get zero weight from the triangle geometry itself.
    bin_mel = hz_to_mel(np.arange(FFT_SIZE // 2 + 1) * (CANONICAL_RATE_HZ / FFT_SIZE))
    edges = np.linspace(hz_to_mel(MEL_MIN_HZ), hz_to_mel(MEL_MAX_HZ), MEL_BANDS + 2)
    lo, center, hi = edges[:-2], edges[1:-1], edges[2:]
    rising = (bin_mel[:, None] - lo) / (center - lo)
    falling = (hi - bin_mel[:, None]) / (hi - center)
    bank = np.maximum(0.0, np.minimum(rising, falling))
    bank.setflags(write=False)
    return bank


@lru_cache(maxsize=1)
def _hann_window() -> np.ndarray:
    # Periodic Hann
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(WINDOW_SAMPLES) / WINDOW_SAMPLES)
    window.setflags(write=False)
    return window


def slice_960ms(w: Waveform) -> list[np.ndarray]:
    """Split a 16 kHz waveform into consecutive non-overlapping 15360-sample
    slices; a trailing remainder shorter than one slice is discarded."""
    if w.sample_rate_hz != CANONICAL_RATE_HZ:
        raise ValueError(f"expected {CANONICAL_RATE_HZ} Hz audio, got {w.sample_rate_hz} Hz")
    if len(w) < SLICE_SAMPLES:
        raise TooShortError(
            f"need at least {SLICE_MS} ms of audio, got {w.duration_ms:.1f} ms"
        )
    n = len(w) // SLICE_SAMPLES
    return [w.samples[i * SLICE_SAMPLES : (i + 1) * SLICE_SAMPLES] for i in range(n)]


def log_mel_patch(slice_samples: np.ndarray, slice_index: int = 0) -> MelPatch:
    """Compute the 96x64 log mel patch for one 960 ms slice.

    25 ms periodic-Hann windows every 10 ms, 512-point FFT magnitudes mapped
    onto 64 mel bands spanning 125-7500 Hz, then log(energy + 0.01). The final
    window overruns the slice by 240 samples; the tail is reflect-padded so
    the frame count stays at 96 without injecting silence.
    """
    slice_samples = np.asarray(slice_samples, dtype=np.float64)
    if slice_samples.shape != (SLICE_SAMPLES,):
        raise ValueError(f"slice must hold exactly {SLICE_SAMPLES} samples, got {slice_samples.shape}")
    padded = np.pad(slice_samples, (0, WINDOW_SAMPLES - HOP_SAMPLES), mode="reflect")
    frames = np.lib.stride_tricks.sliding_window_view(padded, WINDOW_SAMPLES)[::HOP_SAMPLES]
    frames = frames[:FRAMES_PER_PATCH] * _hann_window()
    magnitudes = np.abs(np.fft.rfft(frames, FFT_SIZE, axis=1))
    energies = magnitudes @ _mel_filterbank()
    return MelPatch(np.log(energies + LOG_OFFSET), slice_index)


def patches(w: Waveform) -> list[MelPatch]:
    """All patches of a canonical waveform, in slice order."""
    return [log_mel_patch(s, i) for i, s in enumerate(slice_960ms(w))]
