from .types import (LandmarkTrack, MelSpectrogram, SpeakerEmbedding, VideoClip,
                    Waveform, MEL_BANDS, MEL_FRAME_RATE, MODEL_CLIP_SIZE,
                    SAMPLE_RATE, STORED_CLIP_SIZE, VIDEO_FPS)
from .config import ModelConfig, TrainConfig, TRAIN_PRESETS
from .manifest import (ManifestEntry, ManifestError, filter_max_duration,
                       load_manifest, make_split, save_manifest, split_entries)

__all__ = [
    "LandmarkTrack", "MelSpectrogram", "SpeakerEmbedding", "VideoClip", "Waveform",
    "MEL_BANDS", "MEL_FRAME_RATE", "MODEL_CLIP_SIZE", "SAMPLE_RATE",
    "STORED_CLIP_SIZE", "VIDEO_FPS",
    "ModelConfig", "TrainConfig", "TRAIN_PRESETS",
    "ManifestEntry", "ManifestError", "filter_max_duration", "load_manifest",
    "make_split", "save_manifest", "split_entries",
]
