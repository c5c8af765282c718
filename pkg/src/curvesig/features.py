"""Statistical indexes reducing each curvature channel to a fixed vector.

Eight indexes per channel:

    mean, median              -- center position
    range, std                -- divergence (population standard deviation)
    wave_rate                 -- 90th minus 10th percentile
    skewness                  -- E[((x - mu)/sigma)^3]
    kurtosis                  -- E[((x - mu)/sigma)^4], non-excess
    beta                      -- (skewness^2 + 1) / kurtosis

Beta separates multimodal shapes that agree on the lower moments.  Moments
are population (biased) moments; quantiles interpolate linearly between
order statistics.  A constant channel (sigma ~ 0) gets skewness, kurtosis,
and beta all set to 0 by convention so near-static clips still produce a
usable row.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCurveError
from .frenet import CurvatureSignature

CHANNEL_STAT_NAMES = (
    "mean",
    "median",
    "range",
    "std",
    "wave_rate",
    "skewness",
    "kurtosis",
    "beta",
)

EPS_SIGMA = 1e-12
BOUNDARY_TRIM = 2  # samples cut from each end when trim_boundary is on


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-length statistics row: 8 indexes per curvature channel."""

    values: np.ndarray
    labels: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.labels),):
            raise ValueError("values and labels disagree on length")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", values)


def channel_stats(values: np.ndarray) -> np.ndarray:
    """The eight statistical indexes of one channel, in CHANNEL_STAT_NAMES order."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("cannot compute statistics of an empty channel")
    mu = float(np.mean(x))
    med = float(np.median(x))
    rng = float(np.max(x) - np.min(x))
    sigma = float(np.std(x))
    wave = float(np.quantile(x, 0.9) - np.quantile(x, 0.1))
    if sigma < EPS_SIGMA:
        skew = kurt = beta = 0.0
    else:
        z = (x - mu) / sigma
        skew = float(np.mean(z**3))
        kurt = float(np.mean(z**4))
        beta = (skew * skew + 1.0) / kurt
    return np.array([mu, med, rng, sigma, wave, skew, kurt, beta])


def feature_names(channels=("k1", "k2")) -> tuple:
    return tuple(f"{ch}_{stat}" for ch in channels for stat in CHANNEL_STAT_NAMES)


def extract_features(
    sig: CurvatureSignature,
    channels=("k1", "k2"),
    trim_boundary: bool = False,
) -> FeatureVector:
    """Statistics of the requested curvature channels of one signature.

    ``channels`` is ("k1", "k2") for the full 16-feature row or ("k1",) for
    the first-curvature-only ablation.  ``trim_boundary`` drops the first
    and last 2 samples, where one-sided difference stencils are noisier.
    """
    if sig.grid_size == 0 or not sig.valid.any():
        raise DegenerateCurveError("signature has no valid samples to featurize")
    sl = slice(BOUNDARY_TRIM, -BOUNDARY_TRIM) if trim_boundary else slice(None)
    parts = []
    for ch in channels:
        if ch not in ("k1", "k2"):
            raise ValueError(f"unknown channel {ch!r}")
        parts.append(channel_stats(getattr(sig, ch)[sl]))
    return FeatureVector(values=np.concatenate(parts), labels=feature_names(channels))


def feature_matrix(sigs, labels=None, channels=("k1", "k2"), trim_boundary=False):
    """Stack per-signature feature rows into an M x (8*channels) matrix.

    Returns (matrix, labels); labels pass through unchanged.  Errors from
    individual signatures are re-raised with the row index attached.
    """
    if labels is not None and len(labels) != len(sigs):
        raise ValueError("signature and label counts differ")
    width = 8 * len(channels)
    rows = np.empty((len(sigs), width))
    for i, sig in enumerate(sigs):
        try:
            rows[i] = extract_features(sig, channels, trim_boundary).values
        except (DegenerateCurveError, ValueError) as exc:
            raise type(exc)(f"signature {i}: {exc}") from exc
    return rows, labels


def write_feature_csv(path, matrix, labels, channels=("k1", "k2")) -> None:
    """Feature table: one header row, one row per video, final column = label."""
    names = feature_names(channels)
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(list(names) + ["label"]) + "\n")
        for row, label in zip(matrix, labels):
            fh.write(",".join(repr(float(v)) for v in row) + f",{label}\n")
