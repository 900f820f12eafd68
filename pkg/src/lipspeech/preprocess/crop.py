"""Face alignment and mouth-region cropping.

Each frame is mapped onto a reference mean face by a least-squares
similarity transform fitted on pose-stable landmarks (eye corners and
nose bridge; mouth points are excluded so speech motion cannot perturb
the alignment), then a square crop is taken around the mouth centroid
and converted to grayscale.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.ndimage import map_coordinates

from ..core.types import LandmarkTrack, VideoClip, STORED_CLIP_SIZE, MODEL_CLIP_SIZE

# eye corners + nose bridge: stable under speech
STABLE_LANDMARKS = (27, 28, 29, 30, 36, 39, 42, 45)
MOUTH_LANDMARKS = tuple(range(48, 68))

_MEAN_FACE_PATH = Path(__file__).parent / "mean_face.txt"


class AlignmentError(ValueError):
    """Raised when frames cannot be aligned; carries the offending frames."""

    def __init__(self, message: str, frames: list[int]):
        super().__init__(message)
        self.frames = frames


def load_mean_face(path=None) -> np.ndarray:
    """The reference 68x2 mean-face landmarks (shipped fixture by default)."""
    face = np.loadtxt(path if path is not None else _MEAN_FACE_PATH)
    if face.shape != (68, 2):
        raise ValueError(f"mean face must be 68x2, got {face.shape}")
    return face


def similarity_transform(src: np.ndarray, dst: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Least-squares similarity (scale, rotation, translation) src -> dst.

    Umeyama's closed form: returns (s, R, t) minimizing sum ||s R x + t - y||^2.
    """
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    mu_s, mu_d = src.mean(axis=0), dst.mean(axis=0)
    sc, dc = src - mu_s, dst - mu_d
    var_s = (sc ** 2).sum() / src.shape[0]
    if var_s < 1e-12:
        raise ValueError("degenerate landmarks: stable points are coincident")
    cov = dc.T @ sc / src.shape[0]
    u, d, vt = np.linalg.svd(cov)
    sign = np.sign(np.linalg.det(u) * np.linalg.det(vt))
    flip = np.array([1.0, sign])
    rot = (u * flip) @ vt
    scale = (d * flip).sum() / var_s
    if scale < 1e-12:
        raise ValueError("degenerate landmarks: zero-scale fit")
    trans = mu_d - scale * (rot @ mu_s)
    return scale, rot, trans


def _to_grayscale(frame: np.ndarray) -> np.ndarray:
    if frame.ndim == 2:
        return frame
    return frame @ np.array([0.299, 0.587, 0.114])


def align_and_crop(frames: np.ndarray, track: LandmarkTrack,
                   mean_face: np.ndarray | None = None,
                   crop_size: int = STORED_CLIP_SIZE) -> VideoClip:
    """Align frames to the mean face and crop around the mouth.

    frames: (T, H, W) grayscale or (T, H, W, 3) RGB in [0, 1].
    Output: VideoClip of crop_size x crop_size grayscale frames.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim not in (3, 4):
        raise ValueError(f"frames must be (T, H, W[, 3]), got {frames.shape}")
    if frames.shape[0] != track.num_frames:
        raise ValueError(f"frame count {frames.shape[0]} != landmark count {track.num_frames}")
    h, w = frames.shape[1], frames.shape[2]
    pts = track.points
    if (pts[..., 0].min() < -0.5 or pts[..., 0].max() > w - 0.5
            or pts[..., 1].min() < -0.5 or pts[..., 1].max() > h - 0.5):
        raise ValueError("landmark coordinates fall outside the frame bounds")
    if mean_face is None:
        mean_face = load_mean_face()

    dst_stable = mean_face[list(STABLE_LANDMARKS)]
    half = crop_size / 2.0
    out = np.empty((frames.shape[0], crop_size, crop_size), dtype=np.float64)
    bad: list[int] = []
    grid_r, grid_c = np.meshgrid(np.arange(crop_size), np.arange(crop_size), indexing="ij")
    for i in range(frames.shape[0]):
        try:
            s, rot, t = similarity_transform(pts[i][list(STABLE_LANDMARKS)], dst_stable)
        except ValueError:
            bad.append(i)
            continue
        mouth = (s * (pts[i][list(MOUTH_LANDMARKS)] @ rot.T) + t).mean(axis=0)
        origin = mouth - half  # crop window in mean-face space, (x, y)
        # inverse-map output pixels to source coordinates
        xs = origin[0] + grid_c
        ys = origin[1] + grid_r
        inv = rot.T / s
        src_x = inv[0, 0] * (xs - t[0]) + inv[0, 1] * (ys - t[1])
        src_y = inv[1, 0] * (xs - t[0]) + inv[1, 1] * (ys - t[1])
        gray = _to_grayscale(frames[i])
        out[i] = map_coordinates(gray, [src_y, src_x], order=1, mode="nearest")
    if bad:
        raise AlignmentError(f"degenerate landmarks in frames {bad}", bad)
    return VideoClip(np.clip(out, 0.0, 1.0))


def center_crop(clip: VideoClip, size: int = MODEL_CLIP_SIZE) -> VideoClip:
    """Spatially centered square crop; identity if already at size."""
    if clip.size == size:
        return clip
    if clip.size < size:
        raise ValueError(f"cannot crop {clip.size} frames to {size}")
    off = (clip.size - size) // 2
    return VideoClip(clip.frames[:, off:off + size, off:off + size])
