"""Manifest-driven plumbing: configuration, per-video processing, datasets.

A manifest is a CSV file with a header and one row per video:

    video_path,label[,mask_path][,background_path]

Relative paths resolve against the manifest's directory.  A video path is
either a directory of image frames, a CRV frame tensor (H >= 2), or a CRV
series (H == 1) which skips the image stages and feeds the curve directly.
"""

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import crv, ingest
from .curves import Curve, arclength_profile, reparameterize
from .errors import CurveSigError, DecodeError, ManifestError
from .features import extract_features, feature_names
from .forest import Dataset
from .frenet import CurvatureSignature, frenet_curvatures

CHANNEL_MODES = {"k1": ("k1",), "k1k2": ("k1", "k2")}
BACKGROUND_MODES = ("none", "median")
FAILURE_BUDGET = 0.10


@dataclass(frozen=True)
class PipelineConfig:
    """Every knob of the video -> label pipeline, serialized with each model."""

    resize: int = 64
    background: str = "none"
    background_threshold: float = 0.1
    binarize: bool = False
    grid_size: int = 128
    smooth_sigma: float = 0.0
    channel_mode: str = "k1k2"
    trim_boundary: bool = False
    n_trees: int = 100
    m_features: int = None
    min_leaf: int = 1
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.resize is not None and self.resize < 2:
            raise ValueError("resize must be None or >= 2")
        if self.background not in BACKGROUND_MODES:
            raise ValueError(f"background must be one of {BACKGROUND_MODES}")
        if not 0.0 <= self.background_threshold <= 1.0:
            raise ValueError("background_threshold must lie in [0, 1]")
        if self.grid_size < 7:
            raise ValueError("grid_size must be >= 7 (third derivatives need room)")
        if self.smooth_sigma < 0:
            raise ValueError("smooth_sigma must be >= 0")
        if self.channel_mode not in CHANNEL_MODES:
            raise ValueError(f"channel_mode must be one of {sorted(CHANNEL_MODES)}")
        if self.n_trees < 1 or self.min_leaf < 1 or self.jobs < 1:
            raise ValueError("n_trees, min_leaf, and jobs must be >= 1")
        if self.m_features is not None and self.m_features < 1:
            raise ValueError("m_features must be None (auto) or >= 1")

    @property
    def channels(self) -> tuple:
        return CHANNEL_MODES[self.channel_mode]

    @property
    def feature_labels(self) -> tuple:
        return feature_names(self.channels)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return cls(**d)


@dataclass(frozen=True)
class ManifestEntry:
    video_path: Path
    label: str
    mask_path: Path = None
    background_path: Path = None


@dataclass(frozen=True)
class Manifest:
    entries: tuple
    path: Path = None

    @property
    def labels(self) -> list:
        return [e.label for e in self.entries]

    @property
    def class_names(self) -> tuple:
        return tuple(sorted(set(self.labels)))


def read_manifest(path) -> Manifest:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"video_path", "label"} <= set(reader.fieldnames):
                raise ManifestError(
                    f"{path}: manifest needs a header with video_path and label columns"
                )
            rows = list(reader)
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not rows:
        raise ManifestError(f"{path}: manifest has no entries")

    base = path.parent

    def resolve(value):
        if not value:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    entries = []
    for i, row in enumerate(rows):
        video = resolve(row.get("video_path"))
        label = (row.get("label") or "").strip()
        if video is None or not label:
            raise ManifestError(f"{path}: row {i + 1} is missing video_path or label")
        entries.append(
            ManifestEntry(
                video_path=video,
                label=label,
                mask_path=resolve(row.get("mask_path")),
                background_path=resolve(row.get("background_path")),
            )
        )
    return Manifest(entries=tuple(entries), path=path)


def write_manifest(path, entries) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_path", "label", "mask_path", "background_path"])
        for e in entries:
            writer.writerow(
                [str(e.video_path), e.label, str(e.mask_path or ""), str(e.background_path or "")]
            )


def _load_background(path: Path, resize_to) -> np.ndarray:
    if crv.is_crv_file(path):
        tensor = crv.read_crv(path).astype(float)
        if tensor.shape[0] != 1:
            raise DecodeError(f"{path}: a background CRV must hold exactly one frame")
        grid = tensor[0]
        if resize_to is not None:
            grid = ingest._resize_bilinear(grid, resize_to)
        return grid
    grid = ingest._decode_image(path)
    if resize_to is not None:
        grid = ingest._resize_bilinear(grid, resize_to)
    return grid


def load_video_curve(
    video_path,
    config: PipelineConfig,
    mask_path=None,
    background_path=None,
) -> Curve:
    """Turn one video source into a pixel-space curve.

    CRV series files (H == 1) become curves directly; image directories and
    CRV frame tensors run the frame pipeline: resize, optional background
    subtraction (explicit background file, or per-clip median when the
    config says so), optional masking, then flattening.
    """
    video_path = Path(video_path)
    if crv.is_crv_file(video_path):
        _, h, _ = crv.peek_crv_shape(video_path)
        if h == 1:
            return ingest.load_series(video_path)

    seq = ingest.load_frames(video_path, resize_to=config.resize)
    if background_path is not None:
        background = _load_background(Path(background_path), config.resize)
        seq = ingest.subtract_background(
            seq, background, config.background_threshold, config.binarize
        )
    elif config.background == "median":
        seq = ingest.subtract_background(
            seq, None, config.background_threshold, config.binarize
        )
    if mask_path is not None:
        masks = ingest.load_masks(Path(mask_path), resize_to=config.resize)
        seq = ingest.apply_masks(seq, masks)
    return ingest.flatten(seq)


def signature_for_curve(curve: Curve, config: PipelineConfig) -> CurvatureSignature:
    profile = arclength_profile(curve)
    rc = reparameterize(curve, profile, grid_size=config.grid_size)
    return frenet_curvatures(rc, smooth_sigma=config.smooth_sigma)


def signature_for_video(
    video_path, config: PipelineConfig, mask_path=None, background_path=None
) -> CurvatureSignature:
    curve = load_video_curve(video_path, config, mask_path, background_path)
    return signature_for_curve(curve, config)


def features_for_entry(entry: ManifestEntry, config: PipelineConfig) -> np.ndarray:
    sig = signature_for_video(entry.video_path, config, entry.mask_path, entry.background_path)
    return extract_features(sig, config.channels, config.trim_boundary).values


def manifest_features(manifest: Manifest, config: PipelineConfig):
    """Feature rows for every manifest entry, in manifest order.

    Returns (matrix, label_ids, class_names, failures) where failures is a
    list of (entry, message) for videos that could not be processed; their
    rows are dropped from the matrix.
    """
    entries = manifest.entries
    class_names = manifest.class_names
    name_to_id = {name: i for i, name in enumerate(class_names)}

    def work(entry):
        try:
            return features_for_entry(entry, config), None
        except (CurveSigError, ValueError, OSError) as exc:
            return None, f"{entry.video_path}: {exc}"

    if config.jobs > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(work, entries))
    else:
        results = [work(e) for e in entries]

    rows, label_ids, failures = [], [], []
    for entry, (row, err) in zip(entries, results):
        if err is not None:
            failures.append((entry, err))
        else:
            rows.append(row)
            label_ids.append(name_to_id[entry.label])
    matrix = np.array(rows) if rows else np.empty((0, len(config.feature_labels)))
    return matrix, np.array(label_ids, dtype=int), class_names, failures


def enforce_failure_budget(failures, total: int) -> None:
    """Abort when more than FAILURE_BUDGET of the videos failed to process."""
    if total and len(failures) > FAILURE_BUDGET * total:
        detail = "; ".join(msg for _, msg in failures[:5])
        raise ManifestError(
            f"{len(failures)} of {total} videos failed, over the "
            f"{FAILURE_BUDGET:.0%} budget: {detail}"
        )


def manifest_dataset(manifest: Manifest, config: PipelineConfig):
    """Featurize a manifest into a Dataset, enforcing the failure budget.

    Returns (dataset, failures).
    """
    matrix, label_ids, class_names, failures = manifest_features(manifest, config)
    enforce_failure_budget(failures, len(manifest.entries))
    if matrix.shape[0] == 0:
        raise ManifestError("no manifest entry could be processed")
    dataset = Dataset(features=matrix, labels=label_ids, class_names=class_names)
    return dataset, failures
