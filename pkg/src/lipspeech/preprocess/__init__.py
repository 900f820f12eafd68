from .landmarks import smooth_landmarks
from .crop import (AlignmentError, align_and_crop, center_crop, load_mean_face,
                   similarity_transform, MOUTH_LANDMARKS, STABLE_LANDMARKS)
from .augment import AugmentConfig, augment, time_mask

__all__ = [
    "smooth_landmarks", "AlignmentError", "align_and_crop", "center_crop",
    "load_mean_face", "similarity_transform", "MOUTH_LANDMARKS",
    "STABLE_LANDMARKS", "AugmentConfig", "augment", "time_mask",
]
