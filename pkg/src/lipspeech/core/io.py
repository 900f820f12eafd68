"""File formats used at module boundaries.

Everything here is documented bit-exactly so external tools can produce
or consume the same files:

* WAV audio: 24 kHz mono 16-bit little-endian PCM.
* Spectrogram: header of two little-endian int64 (rows, cols), then the
  row-major float32 body. Rows are time frames, cols are bands/bins.
* Speaker embedding: one ASCII header line ``emb <binary|text> <D>``
  followed by D little-endian float32 values (binary) or D ASCII floats
  separated by whitespace (text).
* Landmarks: header line ``landmarks <binary|text> <T>`` followed by
  T*68*2 float32 values in (x, y) order, frame-major.
* Video tensor: header line ``video binary <T> <H> <W> <C>`` followed by
  T*H*W*C float32 values in [0, 1], C in {1, 3}. A directory of image
  files (sorted by name) is accepted wherever a video tensor is.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .types import LandmarkTrack, SpeakerEmbedding, Waveform, SAMPLE_RATE


def write_wav(path, waveform: Waveform) -> None:
    pcm = np.round(waveform.samples * 32767.0).astype(np.int16)
    wavfile.write(str(path), waveform.sample_rate, pcm)


def read_wav(path) -> Waveform:
    rate, data = wavfile.read(str(path))
    if rate != SAMPLE_RATE:
        raise ValueError(f"{path}: expected {SAMPLE_RATE} Hz audio, got {rate}")
    if data.ndim != 1:
        raise ValueError(f"{path}: expected mono audio, got shape {data.shape}")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32767.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483647.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"{path}: unsupported sample format {data.dtype}")
    return Waveform(np.clip(samples, -1.0, 1.0))


def write_spectrogram(path, values: np.ndarray) -> None:
    v = np.asarray(values, dtype=np.float32)
    if v.ndim != 2:
        raise ValueError(f"spectrogram must be 2-D, got shape {v.shape}")
    with open(path, "wb") as fh:
        fh.write(np.array(v.shape, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())


def read_spectrogram(path) -> np.ndarray:
    with open(path, "rb") as fh:
        dims = np.frombuffer(fh.read(16), dtype="<i8")
        if dims.size != 2 or dims.min() < 1:
            raise ValueError(f"{path}: malformed spectrogram header")
        rows, cols = int(dims[0]), int(dims[1])
        body = fh.read(rows * cols * 4)
    if len(body) != rows * cols * 4:
        raise ValueError(f"{path}: truncated spectrogram body")
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).copy()


def _read_header(fh, expected_kind: str, path) -> list[str]:
    line = fh.readline().decode("ascii", errors="replace").strip()
    parts = line.split()
    if len(parts) < 2 or parts[0] != expected_kind or parts[1] not in ("binary", "text"):
        raise ValueError(f"{path}: bad {expected_kind} header {line!r}")
    return parts


def write_embedding(path, emb: SpeakerEmbedding, fmt: str = "binary") -> None:
    if fmt not in ("binary", "text"):
        raise ValueError(f"fmt must be 'binary' or 'text', got {fmt!r}")
    with open(path, "wb") as fh:
        fh.write(f"emb {fmt} {emb.dim}\n".encode("ascii"))
        if fmt == "binary":
            fh.write(emb.vector.astype("<f4").tobytes())
        else:
            fh.write(" ".join(repr(float(x)) for x in emb.vector).encode("ascii"))
            fh.write(b"\n")


def read_embedding(path, speaker_id: str = "") -> SpeakerEmbedding:
    with open(path, "rb") as fh:
        parts = _read_header(fh, "emb", path)
        dim = int(parts[2])
        if parts[1] == "binary":
            vec = np.frombuffer(fh.read(dim * 4), dtype="<f4")
        else:
            vec = np.array(fh.read().split(), dtype=np.float32)
    if vec.size != dim:
        raise ValueError(f"{path}: expected {dim} values, got {vec.size}")
    return SpeakerEmbedding(vector=vec.copy(), speaker_id=speaker_id)


def write_landmarks(path, track: LandmarkTrack, fmt: str = "binary") -> None:
    if fmt not in ("binary", "text"):
        raise ValueError(f"fmt must be 'binary' or 'text', got {fmt!r}")
    pts = track.points.astype("<f4")
    with open(path, "wb") as fh:
        fh.write(f"landmarks {fmt} {track.num_frames}\n".encode("ascii"))
        if fmt == "binary":
            fh.write(pts.tobytes())
        else:
            flat = pts.reshape(-1)
            fh.write(" ".join(repr(float(x)) for x in flat).encode("ascii"))
            fh.write(b"\n")


def read_landmarks(path) -> LandmarkTrack:
    with open(path, "rb") as fh:
        parts = _read_header(fh, "landmarks", path)
        t = int(parts[2])
        n = t * 68 * 2
        if parts[1] == "binary":
            flat = np.frombuffer(fh.read(n * 4), dtype="<f4")
        else:
            flat = np.array(fh.read().split(), dtype=np.float32)
    if flat.size != n:
        raise ValueError(f"{path}: expected {n} values, got {flat.size}")
    return LandmarkTrack(flat.reshape(t, 68, 2).astype(np.float64))


def write_video_tensor(path, frames: np.ndarray) -> None:
    """Write raw frames (T, H, W) or (T, H, W, C) with values in [0, 1]."""
    f = np.asarray(frames, dtype=np.float32)
    if f.ndim == 3:
        f = f[..., None]
    if f.ndim != 4 or f.shape[3] not in (1, 3):
        raise ValueError(f"frames must be (T, H, W[, C]) with C in {{1, 3}}, got {f.shape}")
    t, h, w, c = f.shape
    with open(path, "wb") as fh:
        fh.write(f"video binary {t} {h} {w} {c}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(f, dtype="<f4").tobytes())


def read_video_tensor(path) -> np.ndarray:
    """Read frames as (T, H, W) grayscale or (T, H, W, 3) RGB in [0, 1]."""
    with open(path, "rb") as fh:
        parts = _read_header(fh, "video", path)
        t, h, w, c = (int(x) for x in parts[2:6])
        n = t * h * w * c
        flat = np.frombuffer(fh.read(n * 4), dtype="<f4")
    if flat.size != n:
        raise ValueError(f"{path}: expected {n} values, got {flat.size}")
    frames = flat.reshape(t, h, w, c).copy()
    return frames[..., 0] if c == 1 else frames


def read_frames(path) -> np.ndarray:
    """Read a video tensor file or a directory of per-frame images."""
    p = Path(path)
    if p.is_dir():
        from PIL import Image

        names = sorted(x for x in os.listdir(p)
                       if x.lower().endswith((".png", ".jpg", ".jpeg", ".bmp")))
        if not names:
            raise ValueError(f"{path}: no image files found")
        frames = []
        for name in names:
            img = np.asarray(Image.open(p / name), dtype=np.float32) / 255.0
            frames.append(img)
        arr = np.stack(frames)
        if arr.ndim == 4 and arr.shape[3] == 4:  # drop alpha
            arr = arr[..., :3]
        return arr
    return read_video_tensor(p)
