"""The dataset manifest: one line per utterance.

Format: UTF-8 text, one record per line, fields separated by ``|``::

    id|video_path|audio_path|landmarks_path|speaker_embedding_path|speaker_id|split|duration_s

Relative paths are resolved against the manifest's directory. The format
is plain text on purpose: it diffs cleanly and streams line by line.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

SPLITS = ("train", "val", "test")
_FIELDS = 8


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    video_path: str
    audio_path: str
    landmarks_path: str
    speaker_embedding_path: str
    speaker_id: str
    split: str
    duration_s: float

    def __post_init__(self):
        for name in ("id", "video_path", "audio_path", "landmarks_path",
                     "speaker_embedding_path", "speaker_id", "split"):
            value = getattr(self, name)
            if "|" in value or "\n" in value:
                raise ManifestError(f"field {name} must not contain '|' or newline: {value!r}")
        if not self.id:
            raise ManifestError("id must be non-empty")
        if self.split not in SPLITS:
            raise ManifestError(f"split must be one of {SPLITS}, got {self.split!r}")
        if not (self.duration_s > 0):
            raise ManifestError(f"duration_s must be positive, got {self.duration_s}")

    def to_line(self) -> str:
        return "|".join([self.id, self.video_path, self.audio_path,
                         self.landmarks_path, self.speaker_embedding_path,
                         self.speaker_id, self.split, repr(self.duration_s)])

    def resolve(self, base_dir) -> "ManifestEntry":
        """Return a copy with all paths made absolute relative to base_dir."""
        base = Path(base_dir).resolve()

        def fix(p: str) -> str:
            return str(base / p) if not Path(p).is_absolute() else p

        return replace(self, video_path=fix(self.video_path),
                       audio_path=fix(self.audio_path),
                       landmarks_path=fix(self.landmarks_path),
                       speaker_embedding_path=fix(self.speaker_embedding_path))


def parse_entry(line: str, lineno: int = 0) -> ManifestEntry:
    parts = line.rstrip("\n").split("|")
    if len(parts) != _FIELDS:
        raise ManifestError(f"line {lineno}: expected {_FIELDS} fields, got {len(parts)}")
    try:
        duration = float(parts[7])
    except ValueError as exc:
        raise ManifestError(f"line {lineno}: bad duration_s {parts[7]!r}") from exc
    try:
        return ManifestEntry(id=parts[0], video_path=parts[1], audio_path=parts[2],
                             landmarks_path=parts[3], speaker_embedding_path=parts[4],
                             speaker_id=parts[5], split=parts[6], duration_s=duration)
    except ManifestError as exc:
        raise ManifestError(f"line {lineno}: {exc}") from exc


def load_manifest(path, check_paths: bool = True) -> list[ManifestEntry]:
    """Load and validate a manifest file, preserving record order.

    With check_paths (the default), every referenced file must exist;
    relative paths are resolved against the manifest's directory.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            entries.append(parse_entry(line, lineno))
    if check_paths:
        base = path.parent
        for e in entries:
            r = e.resolve(base)
            for p in (r.video_path, r.audio_path, r.landmarks_path,
                      r.speaker_embedding_path):
                if not Path(p).exists():
                    raise ManifestError(f"entry {e.id}: referenced file missing: {p}")
    return entries


def save_manifest(path, entries: Iterable[ManifestEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(e.to_line() + "\n")


def filter_max_duration(entries: Sequence[ManifestEntry],
                        max_s: float = 24.0) -> list[ManifestEntry]:
    """Keep entries whose duration does not exceed max_s, order preserved."""
    return [e for e in entries if e.duration_s <= max_s]


def make_split(entries: Sequence[ManifestEntry], mode: str,
               ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
               rng_seed: int = 0) -> list[ManifestEntry]:
    """Assign train/val/test splits, deterministically for a fixed seed.

    seen mode: each speaker's utterances are shuffled and partitioned by
    the ratios, so every speaker appears in all three splits (given
    enough utterances).

    unseen mode: speakers themselves are partitioned, so the split
    speaker sets are pairwise disjoint. Requires at least 3 speakers.
    """
    if mode not in ("seen", "unseen"):
        raise ValueError(f"mode must be 'seen' or 'unseen', got {mode!r}")
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be nonnegative and sum to 1, got {ratios}")
    for e in entries:
        if not e.speaker_id:
            raise ManifestError(f"entry {e.id} has no speaker_id")

    rng = np.random.default_rng(rng_seed)
    by_speaker: dict[str, list[int]] = {}
    for i, e in enumerate(entries):
        by_speaker.setdefault(e.speaker_id, []).append(i)

    assignment = [""] * len(entries)
    if mode == "seen":
        for speaker in sorted(by_speaker):
            idx = list(by_speaker[speaker])
            rng.shuffle(idx)
            n = len(idx)
            n_train = int(np.floor(ratios[0] * n))
            n_val = int(np.floor(ratios[1] * n))
            for j, i in enumerate(idx):
                if j < n_train:
                    assignment[i] = "train"
                elif j < n_train + n_val:
                    assignment[i] = "val"
                else:
                    assignment[i] = "test"
    else:
        speakers = sorted(by_speaker)
        if len(speakers) < 3:
            raise ValueError(f"unseen split needs >= 3 speakers, got {len(speakers)}")
        order = list(speakers)
        rng.shuffle(order)
        n = len(order)
        n_train = max(1, int(np.floor(ratios[0] * n)))
        n_val = max(1, int(np.floor(ratios[1] * n)))
        n_train = min(n_train, n - 2)  # leave room for val and test
        n_val = min(n_val, n - n_train - 1)
        split_of = {}
        for j, speaker in enumerate(order):
            if j < n_train:
                split_of[speaker] = "train"
            elif j < n_train + n_val:
                split_of[speaker] = "val"
            else:
                split_of[speaker] = "test"
        for i, e in enumerate(entries):
            assignment[i] = split_of[e.speaker_id]

    return [replace(e, split=s) for e, s in zip(entries, assignment)]


def split_entries(entries: Sequence[ManifestEntry], split: str) -> list[ManifestEntry]:
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}")
    return [e for e in entries if e.split == split]
