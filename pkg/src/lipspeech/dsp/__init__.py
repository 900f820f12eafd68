from .stft import (LinearSpectrogram, StftConfig, istft, num_stft_frames, stft,
                   stft_magnitude)
from .mel import (LOG_FLOOR, log_mel, mel_filterbank, mel_from_linear,
                  mel_to_linear)
from .griffin_lim import griffin_lim, spectral_error

__all__ = [
    "LinearSpectrogram", "StftConfig", "istft", "num_stft_frames", "stft",
    "stft_magnitude", "LOG_FLOOR", "log_mel", "mel_filterbank",
    "mel_from_linear", "mel_to_linear", "griffin_lim", "spectral_error",
]
