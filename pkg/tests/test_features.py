import numpy as np
import pytest

from cardiag import Waveform, log_mel_patch, patches, slice_960ms
from cardiag.errors import TooShortError
from cardiag.features import (
    FRAMES_PER_PATCH,
    LOG_OFFSET,
    MEL_BANDS,
    MEL_MAX_HZ,
    MEL_MIN_HZ,
    SLICE_SAMPLES,
    hz_to_mel,
    mel_band_centers_hz,
    mel_to_hz,
)


def _wave(samples):
    return Waveform(np.asarray(samples, dtype=np.float64), 16000)


class TestSlicing:
    def test_floor_count_10s(self):
        slices = slice_960ms(_wave(np.random.default_rng(0).uniform(-0.5, 0.5, 160000)))
        assert len(slices) == 10
        assert sum(len(s) for s in slices) + 160000 % SLICE_SAMPLES == 160000

    def test_exact_boundary(self):
        slices = slice_960ms(_wave(np.zeros(SLICE_SAMPLES)))
        assert len(slices) == 1
        assert len(slices[0]) == SLICE_SAMPLES

    def test_too_short(self):
        with pytest.raises(TooShortError):
            slice_960ms(_wave(np.zeros(15200)))  # 950 ms

    def test_wrong_rate_rejected(self):
        with pytest.raises(ValueError):
            slice_960ms(Waveform(np.zeros(48000), 48000))

    def test_slices_are_consecutive(self):
        x = np.random.default_rng(1).uniform(-0.5, 0.5, SLICE_SAMPLES * 3 + 100)
        slices = slice_960ms(_wave(x))
        assert np.array_equal(np.concatenate(slices), x[:SLICE_SAMPLES * 3])


class TestMelScale:
    def test_roundtrip(self):
        for hz in (125.0, 440.0, 1000.0, 7500.0):
            assert mel_to_hz(hz_to_mel(hz)) == pytest.approx(hz, rel=1e-12)

    def test_reference_point(self):
        # 700 Hz sits at 1127*ln(2) on this scale
        assert hz_to_mel(700.0) == pytest.approx(1127.0 * np.log(2.0), rel=1e-12)

    def test_centers_monotone_in_range(self):
        centers = mel_band_centers_hz()
        assert centers.shape == (MEL_BANDS,)
        assert np.all(np.diff(centers) > 0)
        assert centers[0] > MEL_MIN_HZ
        assert centers[-1] < MEL_MAX_HZ


class TestLogMelPatch:
    def test_silence_is_constant(self):
        patch = log_mel_patch(np.zeros(SLICE_SAMPLES))
        assert patch.values.shape == (FRAMES_PER_PATCH, MEL_BANDS)
        assert np.all(patch.values == np.log(LOG_OFFSET))

    def test_1khz_peaks_in_nearest_band(self):
        sine = np.sin(2 * np.pi * 1000 * np.arange(SLICE_SAMPLES) / 16000)
        patch = log_mel_patch(sine)
        target = int(np.argmin(np.abs(mel_band_centers_hz() - 1000.0)))
        assert np.all(np.argmax(patch.values, axis=1) == target)

    def test_shape_contract(self):
        x = np.random.default_rng(2).uniform(-1, 1, SLICE_SAMPLES)
        assert log_mel_patch(x).values.shape == (96, 64)

    def test_finite_everywhere(self):
        x = np.random.default_rng(3).uniform(-1, 1, SLICE_SAMPLES)
        assert np.all(np.isfinite(log_mel_patch(x).values))

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            log_mel_patch(np.zeros(SLICE_SAMPLES - 1))

    def test_gain_monotone(self):
        x = 0.25 * np.sin(2 * np.pi * 500 * np.arange(SLICE_SAMPLES) / 16000)
        quiet = log_mel_patch(x).values
        loud = log_mel_patch(2 * x).values
        assert np.all(loud >= quiet)


class TestPatches:
    def test_time_shift_locality(self):
        x = np.random.default_rng(4).uniform(-0.8, 0.8, SLICE_SAMPLES * 4)
        original = patches(_wave(x))
        shifted = patches(_wave(x[SLICE_SAMPLES:]))
        for k, p in enumerate(shifted):
            assert np.array_equal(p.values, original[k + 1].values)
            assert p.slice_index == k

    def test_indices_in_order(self):
        x = np.random.default_rng(5).uniform(-0.5, 0.5, SLICE_SAMPLES * 3)
        assert [p.slice_index for p in patches(_wave(x))] == [0, 1, 2]
