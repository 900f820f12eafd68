"""Vocoder, ASR and PESQ adapters.

Native vocoding is Griffin-Lim. External tools plug in as commands:

* vocoder: ``cmd <mel-file> <out-wav>`` where the mel file uses the
  spectrogram binary layout (two little-endian int64 dims + row-major
  float32 log-mel values); must write a 24 kHz mono WAV.
* ASR: ``cmd <wav>`` printing the transcript on standard output.
* PESQ: ``cmd <ref-wav> <deg-wav>`` printing a float score.
"""

from __future__ import annotations

import subprocess
import tempfile
from pathlib import Path

from ..core.io import read_spectrogram, read_wav, write_spectrogram
from ..core.types import MelSpectrogram, Waveform
from ..dsp.griffin_lim import griffin_lim
from ..dsp.mel import mel_to_linear
from ..dsp.stft import StftConfig


class AdapterError(RuntimeError):
    pass


def _run(argv: list[str], what: str) -> str:
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=600)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise AdapterError(f"{what} failed to run: {exc}") from exc
    if proc.returncode != 0:
        raise AdapterError(f"{what} exited {proc.returncode}: {proc.stderr.strip()[:500]}")
    return proc.stdout


class GriffinLimVocoder:
    """Native mel -> waveform inversion (30 fast iterations by default)."""

    kind = "griffin_lim"

    def __init__(self, iterations: int = 30, momentum: float = 0.99,
                 rng_seed: int = 0, stft_cfg: StftConfig = StftConfig()):
        self.iterations = iterations
        self.momentum = momentum
        self.rng_seed = rng_seed
        self.stft_cfg = stft_cfg

    def synthesize(self, mel: MelSpectrogram) -> Waveform:
        linear = mel_to_linear(mel, self.stft_cfg)
        return griffin_lim(linear, self.stft_cfg, self.iterations,
                           self.momentum, self.rng_seed)

    def describe(self) -> str:
        return f"griffin_lim(iterations={self.iterations}, momentum={self.momentum})"


class ExternalVocoder:
    """Spectrogram-to-waveform synthesis through an external command."""

    kind = "external"

    def __init__(self, command: list[str]):
        if not command:
            raise ValueError("external vocoder needs a command")
        self.command = list(command)

    def synthesize(self, mel: MelSpectrogram) -> Waveform:
        with tempfile.TemporaryDirectory(prefix="vocoder_") as tmp:
            mel_path = Path(tmp) / "input.mel"
            wav_path = Path(tmp) / "output.wav"
            write_spectrogram(mel_path, mel.values)
            _run(self.command + [str(mel_path), str(wav_path)], "external vocoder")
            if not wav_path.exists():
                raise AdapterError("external vocoder produced no output file")
            return read_wav(wav_path)

    def describe(self) -> str:
        return f"external({' '.join(self.command)})"


class AsrAdapter:
    """Speech recognition through an external command."""

    def __init__(self, command: list[str]):
        if not command:
            raise ValueError("ASR adapter needs a command")
        self.command = list(command)

    def transcribe(self, wav_path) -> str:
        return _run(self.command + [str(wav_path)], "ASR adapter").strip()


class PesqAdapter:
    """Perceptual quality scoring through an external command."""

    def __init__(self, command: list[str]):
        if not command:
            raise ValueError("PESQ adapter needs a command")
        self.command = list(command)

    def score(self, ref_wav_path, deg_wav_path) -> float:
        out = _run(self.command + [str(ref_wav_path), str(deg_wav_path)],
                   "PESQ adapter").strip()
        try:
            return float(out.split()[-1])
        except (ValueError, IndexError) as exc:
            raise AdapterError(f"PESQ adapter printed no score: {out!r}") from exc
