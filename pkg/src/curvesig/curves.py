"""Curves in Euclidean space: arclength profiles and uniform-arclength resampling.

A multivariate sequence is treated as a point path X(t) in R^D sampled at T
instants on [0, 1].  Traversal speed carries no information about what the
path looks like, so the path is renormalized onto a universal scale: the
normalized cumulative arclength

    F(t) = (1/c) * integral_0^t ||dX/dt|| dt,      c = total path length,

discretized by chord lengths.  Sampling the path at equal increments of F
yields a constant-speed version of the same geometry, which makes two
sequences that differ only by a monotone time warp come out identical.
"""

from dataclasses import dataclass, field

import numpy as np

from . import crv
from .errors import DegenerateCurveError, TooShortError

DEFAULT_GRID_SIZE = 128
EPS_DEGENERATE = 1e-12


def _uniform_times(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


@dataclass(frozen=True)
class Curve:
    """A T x D path through R^D with strictly increasing times on [0, 1]."""

    samples: np.ndarray
    times: np.ndarray = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 2:
            raise ValueError(f"curve samples must be 2-D (T, D), got shape {samples.shape}")
        t, d = samples.shape
        if t < 4:
            raise TooShortError(f"a curve needs at least 4 samples, got {t}")
        if d < 1:
            raise ValueError("a curve needs at least 1 dimension")
        times = self.times
        times = _uniform_times(t) if times is None else np.asarray(times, dtype=float)
        if times.shape != (t,):
            raise ValueError(f"times must have shape ({t},), got {times.shape}")
        if not (abs(times[0]) < 1e-12 and abs(times[-1] - 1.0) < 1e-12):
            raise ValueError("times must start at 0 and end at 1")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "times", times)

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class ArclengthProfile:
    """Normalized cumulative arclength F(t_i) plus the total length c."""

    cumulative: np.ndarray
    total_length: float

    def __post_init__(self):
        cum = np.asarray(self.cumulative, dtype=float)
        object.__setattr__(self, "cumulative", cum)
        object.__setattr__(self, "total_length", float(self.total_length))


@dataclass(frozen=True)
class ReparamCurve:
    """A curve resampled at N points spaced uniformly in arclength.

    Consecutive samples are c/(N-1) apart along the polygonal path; their
    straight-line distances match that step up to the linear-interpolation
    residual, so on well-sampled smooth curves the grid is unit-speed.
    """

    samples: np.ndarray
    grid_size: int = field(default=0)
    total_length: float = field(default=0.0)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "grid_size", samples.shape[0])
        object.__setattr__(self, "total_length", float(self.total_length))

    @property
    def dimension(self) -> int:
        return self.samples.shape[1]

    @property
    def arc_step(self) -> float:
        """Arclength spacing c/(N-1) between consecutive samples."""
        return self.total_length / (self.grid_size - 1)


def arclength_profile(curve: Curve, eps_degenerate: float = EPS_DEGENERATE) -> ArclengthProfile:
    """Chord-length discretization of the normalized cumulative arclength.

    cumulative[i] is the polygonal path length from sample 0 to sample i,
    divided by the total length c.  Chord lengths are exactly nonnegative,
    monotone, and invariant under isometries, which is why they are used
    instead of differentiating and integrating the speed.

    Raises DegenerateCurveError when c falls below ``eps_degenerate``
    (a static sequence has no curve to analyze).
    """
    chords = np.linalg.norm(np.diff(curve.samples, axis=0), axis=1)
    cumulative = np.concatenate([[0.0], np.cumsum(chords)])
    total = float(cumulative[-1])
    if total < eps_degenerate:
        raise DegenerateCurveError(
            f"total arclength {total:g} is below {eps_degenerate:g}; the sequence is static"
        )
    return ArclengthProfile(cumulative=cumulative / total, total_length=total)


def reparameterize(
    curve: Curve,
    profile: ArclengthProfile = None,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> ReparamCurve:
    """Resample ``curve`` at ``grid_size`` equal increments of cumulative arclength.

    Output sample k is the curve linearly interpolated where the cumulative
    profile equals k/(grid_size-1).  Plateaus in the profile (repeated
    points, zero-motion intervals) resolve to the earliest parameter.
    """
    if grid_size < 4:
        raise ValueError(f"grid_size must be >= 4, got {grid_size}")
    if profile is None:
        profile = arclength_profile(curve)
    cum = profile.cumulative
    if cum.shape[0] != curve.num_samples:
        raise ValueError("profile does not belong to this curve (length mismatch)")

    targets = np.linspace(0.0, 1.0, grid_size)
    # hi = earliest index with cum[hi] >= target; exact hits land on the
    # earliest parameter, interior targets interpolate inside (hi-1, hi].
    hi = np.searchsorted(cum, targets, side="left")
    hi = np.clip(hi, 0, cum.shape[0] - 1)
    lo = np.maximum(hi - 1, 0)
    span = cum[hi] - cum[lo]
    safe = np.where(span > 0.0, span, 1.0)
    w = np.where(span > 0.0, (targets - cum[lo]) / safe, 1.0)
    x = curve.samples
    samples = x[lo] + w[:, None] * (x[hi] - x[lo])
    return ReparamCurve(samples=samples, total_length=profile.total_length)


def polygonal_length(points: np.ndarray) -> float:
    """Total length of the polygon through ``points`` (rows are vertices)."""
    pts = np.asarray(points, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def write_reparam_crv(rc: ReparamCurve, path) -> None:
    """Export a resampled curve as a CRV series (H=1, W=D) for cross-checking."""
    crv.write_crv(path, rc.samples[:, None, :])


def read_reparam_crv(path) -> ReparamCurve:
    """Load a CRV series written by :func:`write_reparam_crv`.

    The stored payload is float32, so the total length is recomputed from
    the polygon; it matches the original within float32 precision.
    """
    tensor = crv.read_crv(path)
    if tensor.shape[1] != 1:
        raise ValueError(f"expected an H=1 series file, got H={tensor.shape[1]}")
    samples = tensor[:, 0, :].astype(float)
    return ReparamCurve(samples=samples, total_length=polygonal_length(samples))
