"""Built-in synthetic curve datasets with known class structure.

Four families of curves in R^3 with distinct curvature signatures:

    arc    -- near-circular arc: k1 roughly constant, k2 near zero
    coil   -- helix: k1 and k2 both roughly constant and nonzero
    wave   -- planar sinusoid sweep: k1 oscillates strongly, k2 near zero
    twist  -- rippled ring: oscillating torsion, modulated k1

Every sample draws its shape parameters from a per-class band, is traversed
under a random smooth monotone time warp (which arclength resampling must
quotient out), and carries additive Gaussian noise, by default 1% of the
curve's RMS radius.  The generator is the dataset's own ground truth: a
correct pipeline separates the classes almost perfectly.

Because the curves are noisy, the recommended pipeline settings for this
dataset smooth before differentiating: see RECOMMENDED_PIPELINE.
"""

import csv
from pathlib import Path

import numpy as np

from . import crv
from .curves import Curve

SYNTH_CLASSES = ("arc", "coil", "wave", "twist")
DEFAULT_POINTS = 160
DEFAULT_NOISE = 0.01

# Settings that make the pipeline comfortable on this generator's noise level.
RECOMMENDED_PIPELINE = {"grid_size": 128, "smooth_sigma": 3.0, "channel_mode": "k1k2"}


def _stream(seed, *key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def random_warp(t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """A strictly monotone smooth warp of [0, 1] built from a positive speed."""
    b1 = rng.uniform(0.3, 1.1)
    b2 = rng.uniform(0.0, 0.6)
    p1 = rng.uniform(0, 2 * np.pi)
    p2 = rng.uniform(0, 2 * np.pi)
    speed = np.exp(b1 * np.sin(2 * np.pi * t + p1) + b2 * np.sin(4 * np.pi * t + p2))
    w = np.concatenate([[0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(t))])
    return w / w[-1]


def _shape(class_name: str, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Noise-free class geometry evaluated at parameter values u in [0, 1]."""
    if class_name == "arc":
        r = rng.uniform(0.8, 1.2)
        span = rng.uniform(1.5 * np.pi, 2.5 * np.pi)
        theta = span * u
        z = 0.03 * r * np.sin(2 * theta + rng.uniform(0, 2 * np.pi))
        return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)
    if class_name == "coil":
        a = rng.uniform(0.8, 1.2)
        b = rng.uniform(0.35, 0.55)
        theta = 4 * np.pi * u
        return np.stack([a * np.cos(theta), a * np.sin(theta), b * theta], axis=1)
    if class_name == "wave":
        length = rng.uniform(2.2, 2.8)
        amp = rng.uniform(0.4, 0.6)
        freq = rng.uniform(2.0, 3.0)
        phase = rng.uniform(0, 2 * np.pi)
        z = 0.03 * np.sin(2 * np.pi * 1.3 * u + phase)
        return np.stack([length * u, amp * np.sin(2 * np.pi * freq * u + phase), z], axis=1)
    if class_name == "twist":
        r = rng.uniform(0.9, 1.1)
        amp = rng.uniform(0.25, 0.4)
        ripples = rng.integers(4, 6)
        theta = 2 * np.pi * u
        return np.stack(
            [r * np.cos(theta), r * np.sin(theta), amp * np.sin(ripples * theta)], axis=1
        )
    raise ValueError(f"unknown class {class_name!r}")


def synth_curve(
    class_name: str,
    rng: np.random.Generator,
    num_points: int = DEFAULT_POINTS,
    noise: float = DEFAULT_NOISE,
) -> np.ndarray:
    """One random sample of a class: warped traversal plus additive noise."""
    t = np.linspace(0.0, 1.0, num_points)
    points = _shape(class_name, random_warp(t, rng), rng)
    rms = float(np.sqrt(np.mean(np.sum((points - points.mean(axis=0)) ** 2, axis=1))))
    return points + rng.normal(0.0, noise * rms, points.shape)


def make_synthetic_dataset(
    samples_per_class: int = 20,
    seed: int = 0,
    num_points: int = DEFAULT_POINTS,
    noise: float = DEFAULT_NOISE,
):
    """Generate curves in memory: returns (curves, labels, class_names)."""
    curves = []
    labels = []
    for c, name in enumerate(SYNTH_CLASSES):
        for i in range(samples_per_class):
            rng = _stream(seed, c, i)
            curves.append(Curve(samples=synth_curve(name, rng, num_points, noise)))
            labels.append(c)
    return curves, np.array(labels, dtype=int), SYNTH_CLASSES


def write_synthetic_dataset(
    outdir,
    samples_per_class: int = 20,
    seed: int = 0,
    num_points: int = DEFAULT_POINTS,
    noise: float = DEFAULT_NOISE,
) -> Path:
    """Emit the dataset as CRV series files plus a manifest; returns the manifest path."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest_path = outdir / "manifest.csv"
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["video_path", "label"])
        for c, name in enumerate(SYNTH_CLASSES):
            for i in range(samples_per_class):
                rng = _stream(seed, c, i)
                points = synth_curve(name, rng, num_points, noise)
                filename = f"{name}_{i:03d}.crv"
                crv.write_crv(outdir / filename, points[:, None, :])
                writer.writerow([filename, name])
    return manifest_path
