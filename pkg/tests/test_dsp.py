import numpy as np
import pytest
from scipy.signal import get_window

from lipspeech.core.types import Waveform, SAMPLE_RATE
from lipspeech.dsp import (LinearSpectrogram, StftConfig, griffin_lim, istft,
                           log_mel, mel_filterbank, mel_from_linear,
                           mel_to_linear, num_stft_frames, spectral_error, stft,
                           stft_magnitude)
from lipspeech.dsp.mel import LOG_FLOOR

from .conftest import speechlike_signal
from .oracles import brute_force_dft_frame, enumerate_frames

CFG = StftConfig()


class TestStft:
    def test_zero_one_second(self):
        spec = stft(np.zeros(SAMPLE_RATE), CFG)
        assert spec.shape == (80, 1025)
        assert np.abs(spec).max() == 0.0

    def test_frame_count_24s_matches_enumeration(self):
        n = 24 * SAMPLE_RATE
        assert stft(np.zeros(n), CFG).shape[0] == 1920
        assert enumerate_frames(n, CFG.win_samples, CFG.hop_samples) == 1920
        for length in (24000, 24010, 36000, 1201):
            assert num_stft_frames(length, CFG) == enumerate_frames(
                length, CFG.win_samples, CFG.hop_samples)
            assert stft(np.zeros(length), CFG).shape[0] == num_stft_frames(length, CFG)

    def test_sine_peak_bin_85_vs_brute_force(self):
        t = np.arange(SAMPLE_RATE) / SAMPLE_RATE
        sine = 0.5 * np.sin(2 * np.pi * 1000 * t)
        mag = np.abs(stft(sine, CFG))
        interior = mag[5:-5]
        assert np.all(interior.argmax(axis=1) == 85)
        # brute-force DFT of one interior frame, same framing convention
        window = get_window("hann", CFG.win_samples, fftbins=True)
        edge = (CFG.win_samples - CFG.hop_samples) // 2
        start = 40 * CFG.hop_samples - edge
        frame = sine[start:start + CFG.win_samples]
        ref = np.abs(brute_force_dft_frame(frame, window, CFG.n_fft))
        assert ref.argmax() == 85
        np.testing.assert_allclose(mag[40], ref, rtol=1e-9, atol=1e-9)

    def test_empty_waveform_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            stft(np.zeros(0), CFG)

    def test_energy_scales_with_amplitude_squared(self):
        x = speechlike_signal(1, 1.0).samples * 0.4
        e1 = (np.abs(stft(x, CFG)) ** 2).sum()
        e2 = (np.abs(stft(2.0 * x, CFG)) ** 2).sum()
        assert abs(e2 / e1 - 4.0) / 4.0 < 1e-6

    def test_short_input_zero_padded(self):
        spec = stft(np.ones(100), CFG)
        assert spec.shape[0] >= 1


class TestIstft:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_round_trip_interior(self, seed):
        x = np.random.default_rng(seed).standard_normal(SAMPLE_RATE) * 0.3
        y = istft(stft(x, CFG), CFG, length=x.shape[0])
        win = CFG.win_samples
        assert np.abs(y[win:-win] - x[win:-win]).max() < 1e-6

    def test_round_trip_speechlike(self):
        x = speechlike_signal(7, 1.5).samples
        y = istft(stft(x, CFG), CFG, length=x.shape[0])
        win = CFG.win_samples
        assert np.abs(y[win:-win] - x[win:-win]).max() < 1e-6


class TestMelFilterbank:
    def test_shape(self):
        assert mel_filterbank().shape == (80, 1025)

    def test_rows_nonnegative_and_nonempty(self):
        fb = mel_filterbank()
        assert fb.min() >= 0.0
        assert np.all(fb.sum(axis=1) > 0.0)

    def test_centers_monotone(self):
        fb = mel_filterbank()
        centers = fb.argmax(axis=1)
        assert np.all(np.diff(centers) >= 0)
        assert centers[-1] > centers[0]

    def test_fmax_above_nyquist_rejected(self):
        with pytest.raises(ValueError, match="Nyquist"):
            mel_filterbank(fmax=12001.0)

    def test_fmin_ge_fmax_rejected(self):
        with pytest.raises(ValueError, match="fmin"):
            mel_filterbank(fmin=5000, fmax=4000)


class TestLogMel:
    def test_silence_hits_floor(self):
        mel = log_mel(np.zeros(SAMPLE_RATE))
        assert np.allclose(mel.values, np.log(LOG_FLOOR))

    def test_finite_for_any_waveform(self):
        x = speechlike_signal(3, 1.0)
        assert np.isfinite(log_mel(x).values).all()

    def test_paired_frame_count(self):
        x = speechlike_signal(4, 1.0)
        mel = log_mel(x, num_video_frames=20)
        assert mel.num_frames == 80
        short = log_mel(Waveform(x.samples[:20000]), num_video_frames=20)
        assert short.num_frames == 80
        longer = log_mel(x, num_video_frames=37)
        assert longer.num_frames == 148


class TestMelInversion:
    def test_silence_round_trip_near_zero(self):
        mel = log_mel(np.zeros(SAMPLE_RATE))
        linear = mel_to_linear(mel)
        assert linear.magnitudes.max() < 1e-6

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_round_trip_relative_error(self, seed):
        mel = log_mel(speechlike_signal(seed, 1.0))
        back = mel_from_linear(mel_to_linear(mel))
        e1 = np.exp(mel.values.astype(np.float64))
        e2 = np.exp(back.values.astype(np.float64))
        rel = np.linalg.norm(e1 - e2) / np.linalg.norm(e1)
        assert rel < 0.15

    def test_output_never_negative(self):
        rng = np.random.default_rng(0)
        values = rng.uniform(-25, 5, size=(16, 80)).astype(np.float32)
        from lipspeech.core.types import MelSpectrogram
        linear = mel_to_linear(MelSpectrogram(values))
        assert linear.magnitudes.min() >= 0.0


class TestGriffinLim:
    def test_thirty_iterations_beat_one(self):
        x = speechlike_signal(42, 1.0)
        mag = stft_magnitude(x.samples, CFG)
        e30 = spectral_error(mag.magnitudes, griffin_lim(mag, CFG, 30, rng_seed=1).samples, CFG)
        e1 = spectral_error(mag.magnitudes, griffin_lim(mag, CFG, 1, rng_seed=1).samples, CFG)
        assert e30 < e1

    def test_zero_magnitudes_give_zero_waveform(self):
        mag = LinearSpectrogram(np.zeros((40, 1025)))
        wav = griffin_lim(mag, CFG, 30, rng_seed=0)
        assert np.all(wav.samples == 0.0)
        assert wav.num_samples == 40 * CFG.hop_samples

    def test_seed_determinism(self):
        mag = stft_magnitude(speechlike_signal(5, 0.5).samples, CFG)
        a = griffin_lim(mag, CFG, 10, rng_seed=3).samples
        b = griffin_lim(mag, CFG, 10, rng_seed=3).samples
        assert np.array_equal(a, b)
        c = griffin_lim(mag, CFG, 10, rng_seed=4).samples
        assert not np.array_equal(a, c)

    def test_classic_mode_error_non_increasing(self):
        x = speechlike_signal(9, 0.5)
        mag = stft_magnitude(x.samples, CFG)
        errors = [spectral_error(
            mag.magnitudes,
            griffin_lim(mag, CFG, k, momentum=0.0, rng_seed=2).samples, CFG)
            for k in range(0, 12, 2)]
        diffs = np.diff(errors)
        assert np.all(diffs <= 1e-9)

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError):
            LinearSpectrogram(np.zeros((0, 1025)))
