import numpy as np
import pytest

from cardiag import (
    Waveform,
    canonical_waveform,
    decode_audio,
    peak_normalize,
    resample_to_16k,
)
from cardiag.errors import (
    CorruptStreamError,
    EmptyAudioError,
    SilentAudioError,
    UnsupportedFormatError,
)

from conftest import tone, wav_bytes


class TestDecode:
    def test_mono_pcm16_counts(self):
        w = decode_audio(wav_bytes(tone(440, seconds=1.0)))
        assert len(w) == 16000
        assert w.sample_rate_hz == 16000

    def test_stereo_downmix_cancels(self):
        stereo = np.zeros((1000, 2))
        stereo[:, 0] = 0.5
        stereo[:, 1] = -0.5
        w = decode_audio(wav_bytes(stereo, channels=2))
        assert np.all(w.samples == 0.0)

    def test_pcm8_value(self):
        w = decode_audio(wav_bytes(np.array([0.0, 0.5]), width=1))
        assert w.samples[0] == 0.0
        assert w.samples[1] == pytest.approx(0.5, abs=1 / 127)

    def test_pcm24_roundtrip(self):
        vals = np.array([0.25, -0.75, 0.0])
        w = decode_audio(wav_bytes(vals, width=3))
        assert np.allclose(w.samples, vals, atol=2 / 2**23)

    def test_pcm32_roundtrip(self):
        vals = np.array([0.125, -0.625])
        w = decode_audio(wav_bytes(vals, width=4))
        assert np.allclose(w.samples, vals, atol=2 / 2**31)

    def test_truncated_data_chunk(self):
        data = wav_bytes(tone(440, seconds=1.0))
        with pytest.raises(CorruptStreamError):
            decode_audio(data[:-5000])

    def test_not_riff(self):
        with pytest.raises(UnsupportedFormatError):
            decode_audio(b"ID3\x04 definitely an mp3 stream")

    def test_ogg_magic(self):
        with pytest.raises(UnsupportedFormatError):
            decode_audio(b"OggS" + b"\x00" * 100)

    def test_zero_frames(self):
        with pytest.raises(EmptyAudioError):
            decode_audio(wav_bytes(np.array([])))


class TestResample:
    def test_identity_at_16k(self):
        w = decode_audio(wav_bytes(tone(440, seconds=1.0)))
        out = resample_to_16k(w)
        assert out.sample_rate_hz == 16000
        assert np.array_equal(out.samples, w.samples)

    def test_downsample_440hz_peak_bin(self):
        # independent oracle: brute-force DFT magnitudes of the output
        w = Waveform(np.sin(2 * np.pi * 440 * np.arange(32000) / 32000), 32000)
        out = resample_to_16k(w)
        assert len(out) == 16000
        n = len(out)
        freqs = np.arange(n // 2 + 1)  # 1 Hz bins over a 1 s output
        mags = np.array([
            abs(np.sum(out.samples * np.exp(-2j * np.pi * k * np.arange(n) / n)))
            for k in range(0, 1000, 20)
        ])
        coarse_peak = np.argmax(mags) * 20
        assert abs(coarse_peak - 440) <= 20
        fine = np.abs(np.fft.rfft(out.samples))
        assert freqs[np.argmax(fine)] == 440

    def test_upsample_length(self):
        w = Waveform(np.random.default_rng(0).uniform(-0.5, 0.5, 8000), 8000)
        assert len(resample_to_16k(w)) == 16000

    def test_duration_preserved(self):
        rng = np.random.default_rng(1)
        for rate in (8000, 11025, 22050, 32000, 44100, 48000):
            n = int(rng.integers(rate // 2, rate * 2))
            w = Waveform(rng.uniform(-0.9, 0.9, n), rate)
            out = resample_to_16k(w)
            assert abs(out.duration_ms - w.duration_ms) <= 1.0


class TestPeakNormalize:
    def test_scale_factor_two(self):
        w = peak_normalize(Waveform(np.array([0.5, -0.25]), 16000))
        assert np.array_equal(w.samples, [1.0, -0.5])

    def test_already_at_target(self):
        w = Waveform(np.array([1.0, -0.5, 0.25]), 16000)
        out = peak_normalize(w)
        assert np.array_equal(out.samples, w.samples)

    def test_silence_rejected(self):
        with pytest.raises(SilentAudioError):
            peak_normalize(Waveform(np.zeros(100), 16000))

    def test_empty_rejected(self):
        with pytest.raises(EmptyAudioError):
            peak_normalize(Waveform(np.array([]), 16000))

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            w = Waveform(rng.uniform(-0.3, 0.3, 500), 16000)
            once = peak_normalize(w, 0.8)
            twice = peak_normalize(once, 0.8)
            assert np.max(np.abs(twice.samples - once.samples)) <= 2 * np.finfo(float).eps

    def test_target_validation(self):
        w = Waveform(np.array([0.5]), 16000)
        for bad in (0.0, -0.5, 1.5):
            with pytest.raises(ValueError):
                peak_normalize(w, bad)

    def test_peak_exactly_target(self):
        out = peak_normalize(Waveform(np.array([0.1, -0.2]), 16000), 0.75)
        assert np.max(np.abs(out.samples)) == 0.75


class TestCanonical:
    def test_deterministic(self):
        data = wav_bytes(tone(523, seconds=1.3, rate=44100), rate=44100)
        a = canonical_waveform(data)
        b = canonical_waveform(data)
        assert a.sample_rate_hz == 16000
        assert np.array_equal(a.samples, b.samples)

    def test_peak_is_one(self):
        data = wav_bytes(tone(440, amplitude=0.3))
        w = canonical_waveform(data)
        assert np.max(np.abs(w.samples)) == pytest.approx(1.0, abs=1e-12)


class TestWaveform:
    def test_readonly(self):
        w = Waveform(np.array([0.1, 0.2]), 16000)
        with pytest.raises(ValueError):
            w.samples[0] = 0.9

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Waveform(np.array([1.5]), 16000)

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Waveform(np.array([np.nan]), 16000)

    def test_duration(self):
        assert Waveform(np.zeros(8000), 16000).duration_ms == 500.0
