"""Conformer encoder with relative-position self-attention.

Block layout: half-step feed-forward, self-attention, depthwise
convolution, half-step feed-forward, final layer norm. Position
information enters only through the attention scores (Transformer-XL
style content/position terms with learned u/v biases), so there are no
absolute position embeddings to limit sequence length.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from ..core.config import ModelConfig


def rel_positional_encoding(length: int, dim: int, device=None,
                            dtype=torch.float32) -> torch.Tensor:
    """Sinusoidal encodings for relative offsets -(length-1) .. length-1.

    Returns (2*length - 1, dim); row k encodes offset k - (length - 1),
    matching the attention's gather index (key minus query position).
    """
    positions = torch.arange(-(length - 1), length, device=device, dtype=dtype)
    inv_freq = torch.exp(torch.arange(0, dim, 2, device=device, dtype=dtype)
                         * (-math.log(10000.0) / dim))
    args = positions[:, None] * inv_freq[None, :]
    pe = torch.zeros(positions.shape[0], dim, device=device, dtype=dtype)
    pe[:, 0::2] = torch.sin(args)
    pe[:, 1::2] = torch.cos(args[:, : dim - dim // 2])
    return pe


class RelPosSelfAttention(nn.Module):
    """Multi-head self-attention with relative position scores."""

    def __init__(self, dim: int, heads: int, dropout: float):
        super().__init__()
        self.heads = heads
        self.dk = dim // heads
        self.q_proj = nn.Linear(dim, dim)
        self.k_proj = nn.Linear(dim, dim)
        self.v_proj = nn.Linear(dim, dim)
        self.out_proj = nn.Linear(dim, dim)
        self.pos_proj = nn.Linear(dim, dim, bias=False)
        self.pos_bias_u = nn.Parameter(torch.zeros(heads, self.dk))
        self.pos_bias_v = nn.Parameter(torch.zeros(heads, self.dk))
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, pos: torch.Tensor,
                key_padding_mask: torch.Tensor | None = None) -> torch.Tensor:
        b, t, d = x.shape
        h, dk = self.heads, self.dk

        def split(z):
            return z.view(b, t, h, dk).transpose(1, 2)  # (B, H, T, dk)

        q, k, v = split(self.q_proj(x)), split(self.k_proj(x)), split(self.v_proj(x))
        p = self.pos_proj(pos).view(2 * t - 1, h, dk).permute(1, 0, 2)  # (H, 2T-1, dk)

        content = torch.matmul(q + self.pos_bias_u[None, :, None, :],
                               k.transpose(-2, -1))                       # (B,H,T,T)
        pos_full = torch.matmul(q + self.pos_bias_v[None, :, None, :],
                                p.transpose(-2, -1)[None])                # (B,H,T,2T-1)
        # row i attends key j at relative offset j - i -> column j - i + T - 1
        idx = (torch.arange(t, device=x.device)[None, :]
               - torch.arange(t, device=x.device)[:, None] + t - 1)
        pos_scores = pos_full.gather(-1, idx.expand(b, h, t, t))

        scores = (content + pos_scores) / math.sqrt(dk)
        if key_padding_mask is not None:
            scores = scores.masked_fill(key_padding_mask[:, None, None, :],
                                        torch.finfo(scores.dtype).min)
        attn = self.dropout(torch.softmax(scores, dim=-1))
        out = torch.matmul(attn, v).transpose(1, 2).reshape(b, t, d)
        return self.out_proj(out)


class FeedForward(nn.Module):
    def __init__(self, dim: int, ffn_dim: int, dropout: float):
        super().__init__()
        self.net = nn.Sequential(
            nn.LayerNorm(dim),
            nn.Linear(dim, ffn_dim),
            nn.SiLU(),
            nn.Dropout(dropout),
            nn.Linear(ffn_dim, dim),
            nn.Dropout(dropout))

    def forward(self, x):
        return self.net(x)


class ConvModule(nn.Module):
    def __init__(self, dim: int, kernel: int, dropout: float):
        super().__init__()
        self.norm = nn.LayerNorm(dim)
        self.pointwise_in = nn.Conv1d(dim, 2 * dim, 1)
        self.depthwise = nn.Conv1d(dim, dim, kernel, padding=kernel // 2, groups=dim)
        # batch statistics include padded (zeroed) positions during
        # training; eval mode uses running stats and is padding-exact
        self.batch_norm = nn.BatchNorm1d(dim)
        self.pointwise_out = nn.Conv1d(dim, dim, 1)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor, pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        y = self.norm(x)
        if pad_mask is not None:
            y = y.masked_fill(pad_mask[..., None], 0.0)
        y = y.transpose(1, 2)
        y = nn.functional.glu(self.pointwise_in(y), dim=1)
        if pad_mask is not None:
            # the pointwise bias re-populates masked positions; zero them
            # again so the depthwise kernel cannot pull them into valid frames
            y = y.masked_fill(pad_mask[:, None, :], 0.0)
        y = self.batch_norm(self.depthwise(y))
        y = self.pointwise_out(nn.functional.silu(y))
        return self.dropout(y.transpose(1, 2))


class ConformerBlock(nn.Module):
    def __init__(self, dim: int, heads: int, ffn_dim: int, kernel: int, dropout: float):
        super().__init__()
        self.ffn1 = FeedForward(dim, ffn_dim, dropout)
        self.attn_norm = nn.LayerNorm(dim)
        self.attn = RelPosSelfAttention(dim, heads, dropout)
        self.attn_dropout = nn.Dropout(dropout)
        self.conv = ConvModule(dim, kernel, dropout)
        self.ffn2 = FeedForward(dim, ffn_dim, dropout)
        self.final_norm = nn.LayerNorm(dim)

    def forward(self, x, pos, pad_mask=None):
        x = x + 0.5 * self.ffn1(x)
        x = x + self.attn_dropout(self.attn(self.attn_norm(x), pos, pad_mask))
        x = x + self.conv(x, pad_mask)
        x = x + 0.5 * self.ffn2(x)
        return self.final_norm(x)


class Conformer(nn.Module):
    """Input projection followed by a stack of conformer blocks."""

    def __init__(self, input_dim: int, cfg: ModelConfig):
        super().__init__()
        self.input_proj = nn.Linear(input_dim, cfg.attention_dim)
        self.input_dropout = nn.Dropout(cfg.dropout)
        self.blocks = nn.ModuleList([
            ConformerBlock(cfg.attention_dim, cfg.attention_heads, cfg.ffn_dim,
                           cfg.conv_kernel, cfg.dropout)
            for _ in range(cfg.num_blocks)])
        self.dim = cfg.attention_dim

    def forward(self, x: torch.Tensor,
                pad_mask: torch.Tensor | None = None) -> torch.Tensor:
        """(B, T, input_dim) -> (B, T, attention_dim). pad_mask marks padding."""
        if x.shape[1] == 0:
            raise ValueError("empty sequences cannot be encoded")
        y = self.input_dropout(self.input_proj(x))
        pos = rel_positional_encoding(y.shape[1], self.dim, device=y.device, dtype=y.dtype)
        for block in self.blocks:
            y = block(y, pos, pad_mask)
        return y
