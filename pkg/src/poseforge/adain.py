"""Channel-wise moment matching on feature tensors, with blend control.

The transform replaces a content tensor's per-channel mean and standard
deviation with those of a style tensor; a coefficient alpha in [0, 1]
interpolates between the untouched content features (alpha = 0) and the
fully restyled ones (alpha = 1). Alpha may be fixed or drawn per item
from U[0, 1]; together with the choice of style pool this yields the
four styled-dataset sampling regimes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from typing import BinaryIO, Optional

import numpy as np

from .errors import AlphaOutOfRange, ChannelMismatch, CorruptTensorFile, NonFiniteValue, ShapeMismatch

VARIANCE_EPS = 1e-5

TENSOR_MAGIC = b"FTNS"


@dataclass(frozen=True)
class FeatureTensor:
    """A channels x height x width block of real activations."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeMismatch(f"feature tensor must be 3-d (C, H, W), got shape {arr.shape}")
        c, h, w = arr.shape
        if c < 1 or h < 1 or w < 1:
            raise ShapeMismatch(f"dimensions must be positive, got {arr.shape}")
        if h * w < 2:
            raise ShapeMismatch("channel statistics need at least 2 spatial samples")
        if not np.isfinite(arr).all():
            raise NonFiniteValue("feature tensor contains NaN or Inf")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape


@dataclass(frozen=True)
class ChannelStats:
    """Per-channel first and second moments, epsilon-stabilized."""

    mean: np.ndarray
    std: np.ndarray


def channel_stats(t: FeatureTensor) -> ChannelStats:
    """Per-channel spatial mean and population std, sqrt(var + eps)."""
    mean = t.data.mean(axis=(1, 2))
    var = t.data.var(axis=(1, 2))  # population (divide by N)
    std = np.sqrt(var + VARIANCE_EPS)
    return ChannelStats(mean=mean, std=std)


def adain(content: FeatureTensor, style: FeatureTensor) -> FeatureTensor:
    """Match content channel moments to the style's, broadcasting spatially.

    Spatial sizes may differ; channel counts must agree.
    """
    if content.channels != style.channels:
        raise ChannelMismatch(
            f"content has {content.channels} channels, style has {style.channels}")
    cs = channel_stats(content)
    ss = channel_stats(style)
    c_mean = cs.mean[:, None, None]
    c_std = cs.std[:, None, None]
    s_mean = ss.mean[:, None, None]
    s_std = ss.std[:, None, None]
    out = s_std * (content.data - c_mean) / c_std + s_mean
    return FeatureTensor(out)


def alpha_blend(content: FeatureTensor, styled: FeatureTensor, alpha: float) -> FeatureTensor:
    """Elementwise (1 - alpha) * content + alpha * styled.

    alpha = 0 returns the content tensor unchanged and alpha = 1 the styled
    tensor unchanged, bit for bit.
    """
    if not (0.0 <= alpha <= 1.0):
        raise AlphaOutOfRange(f"alpha must lie in [0, 1], got {alpha}")
    if content.shape != styled.shape:
        raise ShapeMismatch(f"shape mismatch: {content.shape} vs {styled.shape}")
    if alpha == 0.0:
        return content
    if alpha == 1.0:
        return styled
    return FeatureTensor((1.0 - alpha) * content.data + alpha * styled.data)


def restyle(content: FeatureTensor, style: FeatureTensor, alpha: float) -> FeatureTensor:
    """Moment matching followed by the alpha trade-off blend."""
    return alpha_blend(content, adain(content, style), alpha)


# -- sampling regimes --------------------------------------------------------

class AlphaMode(str, Enum):
    FIXED = "fixed"
    UNIFORM_RANDOM = "uniform"


class StyleSet(str, Enum):
    RB = "RB"  # red-black figure pool, 100 styles
    CA = "CA"  # collection-image pool


# Opaque style identifiers per pool; images themselves live elsewhere.
STYLE_SET_IDS = {
    StyleSet.RB: tuple(f"rb_{i:03d}" for i in range(100)),
    StyleSet.CA: tuple(f"ca_{i:04d}" for i in range(1210)),
}


@dataclass(frozen=True)
class StyleConfig:
    """Alpha regime plus style pool; seed makes random draws replayable."""

    alpha_mode: AlphaMode
    style_set: StyleSet
    seed: int = 0
    fixed_alpha: Optional[float] = None

    def __post_init__(self):
        if self.alpha_mode == AlphaMode.FIXED:
            if self.fixed_alpha is None:
                raise AlphaOutOfRange("fixed alpha mode needs a value")
            if not (0.0 <= self.fixed_alpha <= 1.0):
                raise AlphaOutOfRange(f"fixed alpha must lie in [0, 1], got {self.fixed_alpha}")

    @property
    def style_ids(self) -> tuple[str, ...]:
        return STYLE_SET_IDS[self.style_set]


def dataset_groups(seed: int = 0) -> tuple[StyleConfig, ...]:
    """The four sampling regimes: alpha in {0.5, U[0,1]} x style set {RB, CA}."""
    groups = []
    for style_set in (StyleSet.RB, StyleSet.CA):
        groups.append(StyleConfig(AlphaMode.FIXED, style_set, seed, fixed_alpha=0.5))
        groups.append(StyleConfig(AlphaMode.UNIFORM_RANDOM, style_set, seed))
    return tuple(groups)


def uniform_alpha(seed: int, draw_index: int) -> float:
    """One U[0,1] draw, a pure function of (seed, draw_index)."""
    rng = np.random.default_rng([seed, draw_index])
    return float(rng.random())


def sample_alpha(cfg: StyleConfig, draw_index: int) -> float:
    """Alpha for one draw; a pure function of (config, draw_index)."""
    if cfg.alpha_mode == AlphaMode.FIXED:
        return float(cfg.fixed_alpha)
    return uniform_alpha(cfg.seed, draw_index)


# -- binary interchange ------------------------------------------------------

def write_tensor(t: FeatureTensor, fh: BinaryIO) -> None:
    """Little-endian layout: magic, C/H/W as u32, then float32 values
    in channel-major order. Values are narrowed to float32."""
    c, h, w = t.shape
    fh.write(TENSOR_MAGIC)
    fh.write(struct.pack("<III", c, h, w))
    fh.write(np.ascontiguousarray(t.data, dtype="<f4").tobytes())


def read_tensor(fh: BinaryIO) -> FeatureTensor:
    magic = fh.read(4)
    if magic != TENSOR_MAGIC:
        raise CorruptTensorFile(f"bad tensor magic {magic!r}")
    header = fh.read(12)
    if len(header) != 12:
        raise CorruptTensorFile("truncated tensor header")
    c, h, w = struct.unpack("<III", header)
    n = c * h * w
    payload = fh.read(4 * n)
    if len(payload) != 4 * n:
        raise CorruptTensorFile("truncated tensor payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(c, h, w)
    return FeatureTensor(data)


def load_tensor(path) -> FeatureTensor:
    with open(path, "rb") as fh:
        return read_tensor(fh)


def save_tensor(t: FeatureTensor, path) -> None:
    with open(path, "wb") as fh:
        write_tensor(t, fh)
