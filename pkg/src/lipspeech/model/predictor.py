"""The video-to-spectrogram predictor.

Pipeline per clip: visual encoder -> per-frame concatenation of the
speaker embedding -> conformer -> linear projection to 320 -> reshape
of each frame's projection into 4 consecutive mel frames of 80 bands,
so T video frames at 20 fps become 4T mel frames at 80 frames/s.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..core.config import ModelConfig
from ..core.types import MelSpectrogram, SpeakerEmbedding, VideoClip
from .conformer import Conformer
from .encoder import VisualEncoder


def condition_on_speaker(features: torch.Tensor, embedding: torch.Tensor) -> torch.Tensor:
    """Broadcast a speaker embedding onto every frame's feature vector.

    features: (B, T, E) or (T, E); embedding: (B, D) or (D,).
    """
    squeeze = features.ndim == 2
    if squeeze:
        features = features.unsqueeze(0)
        embedding = embedding.unsqueeze(0)
    if embedding.ndim != 2 or embedding.shape[0] != features.shape[0]:
        raise ValueError(f"embedding batch {tuple(embedding.shape)} does not match "
                         f"features {tuple(features.shape)}")
    tiled = embedding[:, None, :].expand(-1, features.shape[1], -1)
    out = torch.cat([features, tiled], dim=-1)
    return out.squeeze(0) if squeeze else out


class SpectrogramPredictor(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.encoder = VisualEncoder(cfg.encoder_channels)
        self.conformer = Conformer(self.encoder.out_dim + cfg.speaker_dim, cfg)
        self.projection = nn.Linear(cfg.attention_dim, cfg.projection_dim)

    def forward(self, frames: torch.Tensor, embeddings: torch.Tensor,
                lengths: torch.Tensor | None = None) -> torch.Tensor:
        """(B, T, 88, 88), (B, D) -> (B, 4T, mel_bands).

        lengths (in video frames) marks valid prefixes of padded batches;
        rows beyond 4*length are garbage and must be masked by the caller.
        """
        b, t = frames.shape[0], frames.shape[1]
        if t == 0:
            raise ValueError("clip must contain at least one frame")
        if embeddings.shape[-1] != self.cfg.speaker_dim:
            raise ValueError(f"speaker embedding dim {embeddings.shape[-1]} != "
                             f"configured {self.cfg.speaker_dim}")
        pad_mask = None
        if lengths is not None:
            pad_mask = (torch.arange(t, device=frames.device)[None, :]
                        >= lengths[:, None])
            frames = frames.masked_fill(pad_mask[:, :, None, None], 0.0)

        feats = self.encoder(frames)
        feats = condition_on_speaker(feats, embeddings)
        hidden = self.conformer(feats, pad_mask)
        proj = self.projection(hidden)  # (B, T, 4*mel_bands)
        return proj.view(b, t * self.cfg.reshape_factor, self.cfg.mel_bands)

    # single-clip conveniences over the domain types

    def _to_tensor(self, clip: VideoClip) -> torch.Tensor:
        dtype = next(self.parameters()).dtype
        return torch.from_numpy(np.array(clip.frames)).to(dtype).unsqueeze(0)

    @torch.no_grad()
    def encode_clip(self, clip: VideoClip) -> np.ndarray:
        """Visual features for one clip, shape (T, encoder width)."""
        was_training = self.training
        self.eval()
        out = self.encoder(self._to_tensor(clip))[0].cpu().numpy()
        self.train(was_training)
        return out

    @torch.no_grad()
    def predict(self, clip: VideoClip, embedding: SpeakerEmbedding) -> MelSpectrogram:
        """Deterministic single-clip inference (eval mode, no dropout)."""
        was_training = self.training
        self.eval()
        emb = torch.from_numpy(np.array(embedding.vector)).to(
            next(self.parameters()).dtype).unsqueeze(0)
        mel = self(self._to_tensor(clip), emb)[0].cpu().numpy()
        self.train(was_training)
        return MelSpectrogram(mel.astype(np.float32))


def build_model(cfg: ModelConfig, rng_seed: int | None = None) -> SpectrogramPredictor:
    """Construct a predictor, optionally with seeded initialization."""
    if rng_seed is not None:
        torch.manual_seed(rng_seed)
    return SpectrogramPredictor(cfg)


def count_parameters(cfg: ModelConfig) -> int:
    """Total trainable parameters: visual encoder + conformer + projection."""
    model = SpectrogramPredictor(cfg)
    return sum(p.numel() for p in model.parameters() if p.requires_grad)
