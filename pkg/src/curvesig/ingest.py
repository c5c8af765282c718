"""Load frame sequences, remove background, apply masks, flatten to curves.

A clip of T grayscale frames of H x W pixels becomes one point per frame in
R^(H*W): the clip is a path through pixel space.  Inputs are either a
directory of image files (.png, .pgm, .bmp, ordered lexicographically) or a
CRV tensor file.  A CRV file with H == 1 is not a stack of frames but a
generic multivariate series; use :func:`load_series` for those.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from . import crv
from .curves import Curve
from .errors import DecodeError, DimensionMismatchError, TooShortError

IMAGE_EXTENSIONS = (".png", ".pgm", ".bmp")

# Grayscale conversion weights, fixed so signatures are reproducible.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)

MIN_FRAMES = 4  # third derivatives downstream need at least 4 samples
DEFAULT_BACKGROUND_THRESHOLD = 0.1


@dataclass(frozen=True)
class FrameSequence:
    """T grayscale frames of identical H x W, intensities in [0, 1]."""

    frames: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=float)
        if frames.ndim != 3:
            raise ValueError(f"frames must be a (T, H, W) array, got shape {frames.shape}")
        if frames.shape[0] < MIN_FRAMES:
            raise TooShortError(
                f"need at least {MIN_FRAMES} frames, got {frames.shape[0]}"
            )
        lo, hi = float(frames.min()), float(frames.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"intensities must lie in [0, 1], found range [{lo:g}, {hi:g}]")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    @property
    def width(self) -> int:
        return self.frames.shape[2]


@dataclass(frozen=True)
class MaskSequence:
    """T binary masks matching a paired FrameSequence."""

    masks: np.ndarray

    def __post_init__(self):
        masks = np.asarray(self.masks, dtype=float)
        if masks.ndim != 3:
            raise ValueError(f"masks must be a (T, H, W) array, got shape {masks.shape}")
        values = np.unique(masks)
        if not np.all(np.isin(values, (0.0, 1.0))):
            raise ValueError("mask values must be exactly 0 or 1")
        object.__setattr__(self, "masks", masks)

    @property
    def frame_count(self) -> int:
        return self.masks.shape[0]


def _decode_image(path: Path) -> np.ndarray:
    """Decode one image file to a float [0, 1] grayscale array."""
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode in ("L", "P"):
                arr = np.asarray(img.convert("L"), dtype=float) / 255.0
            elif img.mode in ("I", "I;16"):
                arr = np.asarray(img, dtype=float) / 65535.0
            elif img.mode == "F":
                arr = np.clip(np.asarray(img, dtype=float), 0.0, 1.0)
            else:
                rgb = np.asarray(img.convert("RGB"), dtype=float)
                wr, wg, wb = GRAY_WEIGHTS
                arr = (wr * rgb[..., 0] + wg * rgb[..., 1] + wb * rgb[..., 2]) / 255.0
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"cannot decode image {path}: {exc}") from exc
    if arr.ndim != 2:
        raise DecodeError(f"cannot decode image {path}: not a single-channel grid")
    return arr


def _resize_bilinear(frame: np.ndarray, side: int) -> np.ndarray:
    img = Image.fromarray(frame.astype(np.float32), mode="F")
    out = np.asarray(img.resize((side, side), Image.BILINEAR), dtype=float)
    return np.clip(out, 0.0, 1.0)


def _list_image_files(directory: Path) -> list[Path]:
    files = [
        p
        for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    ]
    return sorted(files, key=lambda p: p.name)


def _load_grids(path, resize_to=None) -> np.ndarray:
    """Shared loader for frames and masks: returns a (T, H, W) float array."""
    path = Path(path)
    if resize_to is not None and resize_to < 2:
        raise ValueError(f"resize_to must be >= 2, got {resize_to}")

    if path.is_dir():
        files = _list_image_files(path)
        if len(files) < MIN_FRAMES:
            raise TooShortError(
                f"{path}: found {len(files)} image files, need at least {MIN_FRAMES}"
            )
        grids = []
        shape = None
        for f in files:
            arr = _decode_image(f)
            if resize_to is not None:
                arr = _resize_bilinear(arr, resize_to)
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise DimensionMismatchError(
                    f"{f}: frame is {arr.shape[0]}x{arr.shape[1]}, others are "
                    f"{shape[0]}x{shape[1]}; pass resize_to to normalize"
                )
            grids.append(arr)
        return np.stack(grids)

    if path.is_file():
        tensor = crv.read_crv(path).astype(float)
        if tensor.shape[0] < MIN_FRAMES:
            raise TooShortError(
                f"{path}: CRV holds {tensor.shape[0]} frames, need at least {MIN_FRAMES}"
            )
        if resize_to is not None:
            tensor = np.stack([_resize_bilinear(fr, resize_to) for fr in tensor])
        return tensor

    raise DecodeError(f"{path}: not a directory of images or a CRV file")


def load_frames(path, resize_to: int = None) -> FrameSequence:
    """Load a frame sequence from an image directory or a CRV tensor file.

    Image files are matched by extension and ordered by filename; color
    images are converted to grayscale with the 0.299/0.587/0.114 weights and
    scaled to [0, 1].  When ``resize_to`` is given every frame is resized
    bilinearly to that square side.
    """
    return FrameSequence(frames=_load_grids(path, resize_to))


def load_masks(path, resize_to: int = None) -> MaskSequence:
    """Load a mask sequence; values are thresholded at 0.5 on load."""
    grids = _load_grids(path, resize_to)
    return MaskSequence(masks=(grids >= 0.5).astype(float))


def load_series(path) -> Curve:
    """Load a CRV file with H == 1 as a raw multivariate series (T x W curve).

    Unlike frames, series values are arbitrary reals; no [0, 1] range is
    imposed and no background or mask stage applies.
    """
    tensor = crv.read_crv(path)
    if tensor.shape[1] != 1:
        raise DecodeError(
            f"{path}: expected an H=1 series file, got H={tensor.shape[1]}; "
            "use load_frames for frame tensors"
        )
    return Curve(samples=tensor[:, 0, :].astype(float))


def median_background(seq: FrameSequence) -> np.ndarray:
    """Per-pixel median over all frames: a robust model of a static background."""
    return np.median(seq.frames, axis=0)


def subtract_background(
    seq: FrameSequence,
    background: np.ndarray = None,
    threshold: float = DEFAULT_BACKGROUND_THRESHOLD,
    binarize: bool = False,
) -> FrameSequence:
    """Zero every pixel whose deviation from the background is within ``threshold``.

    Pixels with |pixel - background| > threshold keep their grayscale value
    (or become 1.0 when ``binarize``); everything else becomes 0.  With
    ``background=None`` the per-pixel median over the clip is used.
    """
    bg = median_background(seq) if background is None else np.asarray(background, dtype=float)
    if bg.shape != seq.frames.shape[1:]:
        raise DimensionMismatchError(
            f"background is {bg.shape}, frames are {seq.frames.shape[1:]}"
        )
    keep = np.abs(seq.frames - bg) > threshold
    out = keep.astype(float) if binarize else seq.frames * keep
    return FrameSequence(frames=out)


def apply_masks(seq: FrameSequence, masks: MaskSequence) -> FrameSequence:
    """Per-pixel product of frames and binary masks."""
    if masks.masks.shape != seq.frames.shape:
        raise DimensionMismatchError(
            f"masks are {masks.masks.shape}, frames are {seq.frames.shape}"
        )
    return FrameSequence(frames=seq.frames * masks.masks)


def flatten(seq: FrameSequence) -> Curve:
    """Flatten each frame row-major into one point of R^(H*W)."""
    t = seq.frame_count
    return Curve(samples=seq.frames.reshape(t, -1).copy())


def unflatten(curve: Curve, height: int, width: int) -> FrameSequence:
    """Inverse of :func:`flatten`, given the original frame dimensions."""
    t, d = curve.samples.shape
    if d != height * width:
        raise DimensionMismatchError(
            f"curve dimension {d} does not factor as {height}x{width}"
        )
    return FrameSequence(frames=curve.samples.reshape(t, height, width).copy())


def flip_horizontal(seq: FrameSequence) -> FrameSequence:
    """Mirror every frame left-right (a pixel permutation of the curve space)."""
    return FrameSequence(frames=seq.frames[:, :, ::-1].copy())


def write_frames_crv(seq: FrameSequence, path) -> None:
    """Store a frame sequence in the CRV container."""
    crv.write_crv(path, seq.frames)
