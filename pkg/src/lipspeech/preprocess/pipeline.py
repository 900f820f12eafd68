"""Corpus preprocessing: raw frames + landmarks -> mouth crops + log-mels."""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np

from ..core.io import (read_frames, read_landmarks, read_wav,
                       write_spectrogram, write_video_tensor)
from ..core.manifest import ManifestEntry, save_manifest
from ..core.types import VideoClip
from ..dsp.mel import log_mel
from .crop import align_and_crop
from .landmarks import smooth_landmarks

log = logging.getLogger(__name__)


def preprocess_utterance(frames: np.ndarray, track, waveform,
                         smoothing_window: int = 12):
    """One utterance: smooth landmarks, align + crop, extract paired mel.

    Returns (VideoClip 96x96, MelSpectrogram with exactly 4T frames).
    """
    smoothed = smooth_landmarks(track, smoothing_window)
    clip = align_and_crop(frames, smoothed)
    mel = log_mel(waveform, num_video_frames=clip.num_frames)
    return clip, mel


def preprocess_corpus(entries: list[ManifestEntry], base_dir, out_dir,
                      smoothing_window: int = 12):
    """Preprocess every entry; per-utterance failures are logged and skipped.

    Writes <id>.clip (96x96 video tensor) and <id>.mel (spectrogram) under
    out_dir plus a new manifest referencing them; audio, landmark and
    embedding paths are carried over as absolute paths. Returns
    (manifest_path, failures) where failures is a list of (id, reason).
    """
    out = Path(out_dir)
    (out / "clips").mkdir(parents=True, exist_ok=True)
    (out / "mels").mkdir(parents=True, exist_ok=True)

    new_entries = []
    failures: list[tuple[str, str]] = []
    for entry in entries:
        r = entry.resolve(base_dir)
        try:
            frames = read_frames(r.video_path)
            track = read_landmarks(r.landmarks_path)
            wav = read_wav(r.audio_path)
            clip, mel = preprocess_utterance(frames, track, wav, smoothing_window)
            write_video_tensor(out / "clips" / f"{entry.id}.clip", clip.frames)
            write_spectrogram(out / "mels" / f"{entry.id}.mel", mel.values)
        except Exception as exc:  # per-utterance isolation is the contract
            log.warning("skipping %s: %s", entry.id, exc)
            failures.append((entry.id, str(exc)))
            continue
        new_entries.append(ManifestEntry(
            id=entry.id,
            video_path=f"clips/{entry.id}.clip",
            audio_path=r.audio_path,
            landmarks_path=r.landmarks_path,
            speaker_embedding_path=r.speaker_embedding_path,
            speaker_id=entry.speaker_id,
            split=entry.split,
            duration_s=clip.num_frames / clip.fps))

    manifest_path = out / "manifest.txt"
    save_manifest(manifest_path, new_entries)
    return manifest_path, failures
