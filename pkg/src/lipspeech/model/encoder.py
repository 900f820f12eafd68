"""Visual front-end: 3D convolutional stem + per-frame 2D residual trunk.

The stem has temporal kernel 5 with stride 1 (frame count is preserved)
and spatial stride 2, followed by a spatial max-pool; the trunk is a
standard 18-layer residual network applied frame by frame, globally
pooled to one feature vector per frame (width 8x the base channels,
512 for the full-size models).
"""

from __future__ import annotations

import torch
from torch import nn


class BasicBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)
        self.relu = nn.ReLU(inplace=True)
        if stride != 1 or in_ch != out_ch:
            self.downsample = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_ch))
        else:
            self.downsample = None

    def forward(self, x):
        identity = x if self.downsample is None else self.downsample(x)
        out = self.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        return self.relu(out + identity)


class VisualEncoder(nn.Module):
    def __init__(self, base_channels: int = 64, input_size: int = 88):
        super().__init__()
        c = base_channels
        self.input_size = input_size
        self.out_dim = 8 * c
        self.stem = nn.Sequential(
            nn.Conv3d(1, c, (5, 7, 7), stride=(1, 2, 2), padding=(2, 3, 3), bias=False),
            nn.BatchNorm3d(c),
            nn.ReLU(inplace=True),
            nn.MaxPool3d((1, 3, 3), stride=(1, 2, 2), padding=(0, 1, 1)))
        self.trunk = nn.Sequential(
            BasicBlock(c, c), BasicBlock(c, c),
            BasicBlock(c, 2 * c, stride=2), BasicBlock(2 * c, 2 * c),
            BasicBlock(2 * c, 4 * c, stride=2), BasicBlock(4 * c, 4 * c),
            BasicBlock(4 * c, 8 * c, stride=2), BasicBlock(8 * c, 8 * c))
        self.pool = nn.AdaptiveAvgPool2d(1)

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        """(B, T, H, W) grayscale in [0, 1] -> (B, T, out_dim)."""
        if frames.ndim != 4:
            raise ValueError(f"expected (B, T, H, W), got shape {tuple(frames.shape)}")
        b, t, h, w = frames.shape
        if h != self.input_size or w != self.input_size:
            raise ValueError(f"expected {self.input_size}x{self.input_size} frames, got {h}x{w}")
        v = self.stem(frames.unsqueeze(1))       # (B, C, T, h', w')
        v = v.transpose(1, 2).flatten(0, 1)      # (B*T, C, h', w')
        v = self.trunk(v)
        v = self.pool(v).flatten(1)              # (B*T, 8C)
        return v.view(b, t, self.out_dim)
