"""Synthetic paired audio-visual data for desk-scale verification.

Each clip shows a schematic face whose mouth opening (the "aperture")
oscillates around a per-clip base value; the audio is a harmonic tone
whose fundamental follows the same aperture trajectory, amplitude-
modulated at a syllabic rate, with per-speaker harmonic decay as the
voice timbre. Larger mean aperture therefore means a higher fundamental
and a higher spectral centroid, which is the hook the pitch-monotone
check uses.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.ndimage import map_coordinates

from ..core.io import write_embedding, write_landmarks, write_video_tensor, write_wav
from ..core.manifest import ManifestEntry, save_manifest
from ..core.types import LandmarkTrack, SpeakerEmbedding, Waveform, SAMPLE_RATE, VIDEO_FPS

FRAME_SIZE = 120
MOUTH_CENTER = (60.0, 72.0)
F0_BASE = 100.0
F0_SPAN = 220.0


def synthetic_face_landmarks(aperture: float) -> np.ndarray:
    """68-point frontal face in a 120x120 frame; aperture in [0,1] opens the mouth.

    The shipped mean-face fixture is this layout at aperture 0.5.
    """
    pts = np.zeros((68, 2))
    t = np.linspace(0.0, np.pi, 17)
    pts[0:17, 0] = 60 - 32 * np.cos(t)
    pts[0:17, 1] = 48 + 50 * np.sin(t)
    pts[17:22, 0] = np.linspace(36, 54, 5)
    pts[17:22, 1] = 38 - 2 * np.sin(np.linspace(0, np.pi, 5))
    pts[22:27, 0] = np.linspace(66, 84, 5)
    pts[22:27, 1] = 38 - 2 * np.sin(np.linspace(0, np.pi, 5))
    pts[27:31, 0] = 60.0
    pts[27:31, 1] = np.linspace(46, 62, 4)
    pts[31:36, 0] = np.linspace(52, 68, 5)
    pts[31:36, 1] = 66 + np.array([0.0, 1, 1.5, 1, 0])
    for base, cx in ((36, 45.0), (42, 75.0)):
        ang = np.array([180, 115, 65, 0, 295, 245]) * np.pi / 180
        pts[base:base + 6, 0] = cx + 6 * np.cos(ang)
        pts[base:base + 6, 1] = 45 - 3 * np.sin(ang)
    mx, my = MOUTH_CENTER
    ry_o = 3.0 + 9.0 * aperture
    ry_i = max(0.6, ry_o - 3.5)
    ang_o = np.array([180, 150, 120, 90, 60, 30, 0, 330, 300, 270, 240, 210]) * np.pi / 180
    pts[48:60, 0] = mx + 14 * np.cos(ang_o)
    pts[48:60, 1] = my - ry_o * np.sin(ang_o)
    ang_i = np.array([180, 135, 90, 45, 0, 315, 270, 225]) * np.pi / 180
    pts[60:68, 0] = mx + 10 * np.cos(ang_i)
    pts[60:68, 1] = my - ry_i * np.sin(ang_i)
    return pts


def render_face(aperture: float) -> np.ndarray:
    """Draw the canonical face at the given mouth aperture, (120, 120) in [0,1]."""
    yy, xx = np.mgrid[0:FRAME_SIZE, 0:FRAME_SIZE].astype(np.float64)
    img = 0.30 + 0.15 * yy / FRAME_SIZE
    face = ((xx - 60) / 34) ** 2 + ((yy - 62) / 42) ** 2 <= 1.0
    img[face] = 0.72
    for cx in (45.0, 75.0):
        eye = ((xx - cx) / 6) ** 2 + ((yy - 45) / 3) ** 2 <= 1.0
        img[eye] = 0.15
        brow = (np.abs(yy - 38) <= 1.2) & (np.abs(xx - cx) <= 9)
        img[brow] = 0.35
    nose = (np.abs(xx - 60) <= 1.2) & (yy >= 46) & (yy <= 64)
    img[nose] = 0.55
    mx, my = MOUTH_CENTER
    ry = 3.0 + 9.0 * aperture
    mouth = ((xx - mx) / 14) ** 2 + ((yy - my) / ry) ** 2 <= 1.0
    img[mouth] = 0.08
    return img


def _pose_points(pts: np.ndarray, angle: float, shift: np.ndarray) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    center = np.array([60.0, 60.0])
    return (pts - center) @ rot.T + center + shift


def _pose_image(img: np.ndarray, angle: float, shift: np.ndarray) -> np.ndarray:
    c, s = np.cos(-angle), np.sin(-angle)
    inv = np.array([[c, -s], [s, c]])
    center = np.array([60.0, 60.0])
    yy, xx = np.mgrid[0:FRAME_SIZE, 0:FRAME_SIZE].astype(np.float64)
    rel = np.stack([xx - center[0] - shift[0], yy - center[1] - shift[1]])
    src_x = inv[0, 0] * rel[0] + inv[0, 1] * rel[1] + center[0]
    src_y = inv[1, 0] * rel[0] + inv[1, 1] * rel[1] + center[1]
    return map_coordinates(img, [src_y, src_x], order=1, mode="nearest")


def synthesize_audio(apertures_fn, duration_s: float, timbre_decay: float,
                     rng: np.random.Generator) -> Waveform:
    """Harmonic tone whose fundamental follows the aperture trajectory."""
    n = int(round(duration_s * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    f0 = F0_BASE + F0_SPAN * apertures_fn(t)
    phase = 2 * np.pi * np.cumsum(f0) / SAMPLE_RATE
    sig = np.zeros(n)
    for k in range(10):
        sig += (timbre_decay ** k) * np.sin((k + 1) * phase)
    rate = rng.uniform(2.0, 3.2)
    psi = rng.uniform(0, 2 * np.pi)
    env = 0.25 + 0.75 * np.abs(np.sin(np.pi * rate * t + psi)) ** 1.2
    sig = sig * env + 0.02 * rng.standard_normal(n) * env
    return Waveform(0.7 * sig / np.abs(sig).max())


def make_toy_dataset(n_clips: int, duration_s: float = 1.0, rng_seed: int = 0,
                     out_dir=".", n_speakers: int = 2, embedding_dim: int = 256,
                     split_counts: tuple[int, int, int] | None = None) -> Path:
    """Generate a paired toy corpus and write its manifest.

    Splits default to (n_clips - 2) train / 1 val / 1 test when n_clips
    allows, all-train otherwise. Bit-identical for a fixed seed.
    """
    if n_clips < 1:
        raise ValueError("n_clips must be >= 1")
    out = Path(out_dir)
    if split_counts is None:
        split_counts = (n_clips - 2, 1, 1) if n_clips >= 3 else (n_clips, 0, 0)
    if sum(split_counts) != n_clips or any(c < 0 for c in split_counts):
        raise ValueError(f"split_counts {split_counts} must be nonnegative and sum to {n_clips}")

    for sub in ("video", "audio", "landmarks", "embeddings"):
        try:
            (out / sub).mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out / sub}: {exc}") from exc

    root_ss = np.random.SeedSequence(rng_seed)
    spk_ss, *clip_ss = root_ss.spawn(n_clips + 1)

    spk_rng = np.random.default_rng(spk_ss)
    speakers = []
    for s in range(n_speakers):
        emb = SpeakerEmbedding.from_raw(spk_rng.standard_normal(embedding_dim),
                                        speaker_id=f"spk{s}")
        decay = spk_rng.uniform(0.45, 0.68)
        path = out / "embeddings" / f"spk{s}.emb"
        write_embedding(path, emb)
        speakers.append((f"spk{s}", decay, f"embeddings/spk{s}.emb"))

    num_frames = int(round(duration_s * VIDEO_FPS))
    splits = (["train"] * split_counts[0] + ["val"] * split_counts[1]
              + ["test"] * split_counts[2])
    entries = []
    for i in range(n_clips):
        rng = np.random.default_rng(clip_ss[i])
        clip_id = f"clip{i:03d}"
        spk_name, decay, emb_rel = speakers[i % n_speakers]

        base = 0.2 + 0.6 * (i / max(1, n_clips - 1))
        amp = rng.uniform(0.06, 0.12)
        f_m = rng.uniform(0.8, 1.6)
        phi = rng.uniform(0, 2 * np.pi)

        def aperture(t):
            return np.clip(base + amp * np.sin(2 * np.pi * f_m * t + phi), 0.02, 0.98)

        angle = rng.uniform(-0.05, 0.05)  # ~3 degrees of head pose
        shift = rng.uniform(-3.0, 3.0, size=2)

        frames = np.empty((num_frames, FRAME_SIZE, FRAME_SIZE), dtype=np.float64)
        marks = np.empty((num_frames, 68, 2))
        for f in range(num_frames):
            a = float(aperture(np.array([(f + 0.5) / VIDEO_FPS]))[0])
            frames[f] = _pose_image(render_face(a), angle, shift)
            marks[f] = _pose_points(synthetic_face_landmarks(a), angle, shift)

        wav = synthesize_audio(aperture, duration_s, decay, rng)

        write_video_tensor(out / "video" / f"{clip_id}.vid", np.clip(frames, 0, 1))
        write_landmarks(out / "landmarks" / f"{clip_id}.lmk", LandmarkTrack(marks))
        write_wav(out / "audio" / f"{clip_id}.wav", wav)
        entries.append(ManifestEntry(
            id=clip_id,
            video_path=f"video/{clip_id}.vid",
            audio_path=f"audio/{clip_id}.wav",
            landmarks_path=f"landmarks/{clip_id}.lmk",
            speaker_embedding_path=emb_rel,
            speaker_id=spk_name,
            split=splits[i],
            duration_s=num_frames / VIDEO_FPS))

    manifest_path = out / "manifest.txt"
    save_manifest(manifest_path, entries)
    return manifest_path
