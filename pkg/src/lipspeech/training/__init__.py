from .schedule import ScheduleState, lr_at
from .optimizer import AdamW, adamw_step
from .toydata import make_toy_dataset, render_face, synthesize_audio, synthetic_face_landmarks
from .loop import Trainer, fit, load_predictor

__all__ = [
    "ScheduleState", "lr_at", "AdamW", "adamw_step", "make_toy_dataset",
    "render_face", "synthesize_audio", "synthetic_face_landmarks", "Trainer",
    "fit", "load_predictor",
]
