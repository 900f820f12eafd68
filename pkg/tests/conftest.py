import numpy as np
import pytest
import torch

from lipspeech.core.types import Waveform, SAMPLE_RATE


def speechlike_signal(seed: int, duration_s: float = 2.0) -> Waveform:
    """Harmonic tone with moving f0, syllabic AM, and a noise floor.

    Energy spans the 150 Hz - 4.3 kHz bands that the intelligibility
    measures analyze, with no fully silent stretch.
    """
    rng = np.random.default_rng(seed)
    n = int(SAMPLE_RATE * duration_s)
    t = np.arange(n) / SAMPLE_RATE
    f0 = 120 + 40 * np.sin(2 * np.pi * rng.uniform(0.8, 1.5) * t + rng.uniform(0, 6))
    phase = 2 * np.pi * np.cumsum(f0) / SAMPLE_RATE
    sig = sum((0.55 ** k) * np.sin((k + 1) * phase + rng.uniform(0, 6))
              for k in range(10))
    env = 0.25 + 0.75 * np.abs(np.sin(np.pi * rng.uniform(2.0, 3.0) * t
                                      + rng.uniform(0, 6))) ** 1.2
    sig = sig * env + 0.02 * rng.standard_normal(n) * env
    return Waveform(0.7 * sig / np.abs(sig).max())


@pytest.fixture
def speechlike():
    return speechlike_signal


@pytest.fixture(autouse=True)
def _torch_threads():
    torch.set_num_threads(2)


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory):
    """Small preprocessed toy corpus shared across tests: 6 clips of 1 s."""
    from lipspeech.core.manifest import load_manifest
    from lipspeech.preprocess.pipeline import preprocess_corpus
    from lipspeech.training.toydata import make_toy_dataset

    root = tmp_path_factory.mktemp("toy")
    raw = make_toy_dataset(6, duration_s=1.0, rng_seed=11, out_dir=root / "raw",
                           n_speakers=2, embedding_dim=8)
    entries = load_manifest(raw)
    manifest, failures = preprocess_corpus(entries, raw.parent, root / "proc")
    assert not failures
    return manifest
