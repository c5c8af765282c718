"""Generalized Frenet curvatures of a uniformly arclength-sampled curve.

For a unit-speed curve X(s) in R^D the moving frame e_1, e_2, e_3 obeys

    dX/ds   = e_1
    de_1/ds = k_1 e_2
    de_2/ds = -k_1 e_1 + k_2 e_3

with e_i the Gram-Schmidt orthonormalization of (X', X'', X''').  k_1 is the
familiar curvature (nonnegative by construction), k_2 the second curvature,
i.e. torsion.  Higher curvatures need fourth and higher derivatives whose
finite-difference error grows too fast to be useful, so the chain stops at
k_2 here.

Derivatives are taken by 2nd-order finite differences on the uniform
arclength grid.  Because the grid is only approximately unit-speed, per
sample the discrete speed ||X'|| is divided back out:

    k_1 = ||X'' - <X'', e_1> e_1|| / ||X'||^2
    k_2 = <d(e_2)/du, e_3> / ||X'||     (u = grid parameter)

Both reduce to the unit-speed formulas when ||X'|| = 1.  Where Gram-Schmidt
degenerates (straight or planar stretches: the residual is numerical noise)
the affected curvature is zero-filled, the limiting value of a straight or
flattened segment, and the sample is flagged invalid.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from . import crv
from .curves import ReparamCurve
from .errors import DegenerateCurveError, TooShortError

MIN_GRID = 7  # central stencils up to third order need interior room
EPS_GRAM_SCHMIDT = 1e-10  # residual-norm cutoff, relative to ||X'||
EPS_TANGENT = 1e-12


@dataclass(frozen=True)
class CurvatureSignature:
    """First and second curvature sampled on the uniform arclength grid.

    ``valid[i]`` is True where the full frame (e_1, e_2, e_3) and both
    curvatures were computed from non-degenerate data; flagged samples hold
    zeros in the affected channels.
    """

    k1: np.ndarray
    k2: np.ndarray
    grid_size: int
    arc_step: float
    valid: np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.k1)) and np.all(np.isfinite(self.k2))):
            raise ValueError("curvature channels must be finite")
        if np.any(self.k1 < 0):
            raise ValueError("first curvature must be nonnegative")

    @property
    def arc_positions(self) -> np.ndarray:
        """Arclength coordinate of each sample, 0 .. c."""
        return np.arange(self.grid_size) * self.arc_step


@dataclass(frozen=True)
class FrenetFrame:
    """Orthonormal frame fields e_1, e_2, e_3 with a per-sample validity flag."""

    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    validity: np.ndarray


def derivatives(rc: ReparamCurve, order: int = 3) -> list[np.ndarray]:
    """First ``order`` derivatives of the curve w.r.t. its uniform grid spacing.

    Interior points use 2nd-order central stencils:

        X'   = (X[i+1] - X[i-1]) / (2 h)
        X''  = (X[i+1] - 2 X[i] + X[i-1]) / h^2
        X''' = (X[i+2] - 2 X[i+1] + 2 X[i-1] - X[i-2]) / (2 h^3)

    Boundary points use one-sided (and for the third derivative, skewed)
    stencils of the same order of accuracy.
    """
    if not 1 <= order <= 3:
        raise ValueError(f"order must be 1, 2, or 3, got {order}")
    x = rc.samples
    n = x.shape[0]
    if n < MIN_GRID:
        raise TooShortError(f"need a grid of at least {MIN_GRID} samples, got {n}")
    h = rc.arc_step
    out = []

    d1 = np.empty_like(x)
    d1[1:-1] = (x[2:] - x[:-2]) / (2 * h)
    d1[0] = (-3 * x[0] + 4 * x[1] - x[2]) / (2 * h)
    d1[-1] = (3 * x[-1] - 4 * x[-2] + x[-3]) / (2 * h)
    out.append(d1)
    if order >= 2:
        d2 = np.empty_like(x)
        d2[1:-1] = (x[2:] - 2 * x[1:-1] + x[:-2]) / h**2
        d2[0] = (2 * x[0] - 5 * x[1] + 4 * x[2] - x[3]) / h**2
        d2[-1] = (2 * x[-1] - 5 * x[-2] + 4 * x[-3] - x[-4]) / h**2
        out.append(d2)
    if order >= 3:
        d3 = np.empty_like(x)
        d3[2:-2] = (x[4:] - 2 * x[3:-1] + 2 * x[1:-3] - x[:-4]) / (2 * h**3)
        d3[0] = (-5 * x[0] + 18 * x[1] - 24 * x[2] + 14 * x[3] - 3 * x[4]) / (2 * h**3)
        d3[1] = (-3 * x[0] + 10 * x[1] - 12 * x[2] + 6 * x[3] - x[4]) / (2 * h**3)
        d3[-2] = (3 * x[-1] - 10 * x[-2] + 12 * x[-3] - 6 * x[-4] + x[-5]) / (2 * h**3)
        d3[-1] = (5 * x[-1] - 18 * x[-2] + 24 * x[-3] - 14 * x[-4] + 3 * x[-5]) / (2 * h**3)
        out.append(d3)
    return out


def _first_derivative_field(field: np.ndarray, h: float) -> np.ndarray:
    """Central first derivative of an N x D field, one-sided at the ends."""
    df = np.empty_like(field)
    df[1:-1] = (field[2:] - field[:-2]) / (2 * h)
    df[0] = (-3 * field[0] + 4 * field[1] - field[2]) / (2 * h)
    df[-1] = (3 * field[-1] - 4 * field[-2] + field[-3]) / (2 * h)
    return df


def _align_signs(field: np.ndarray, ok: np.ndarray) -> np.ndarray:
    """Flip frame vectors so consecutive valid samples keep a consistent sign.

    Gram-Schmidt fixes each e_i only up to sign per sample; without
    alignment a flip between neighbors would put a spurious spike into the
    differenced field.
    """
    aligned = field.copy()
    prev = -1
    for i in np.flatnonzero(ok):
        if prev >= 0 and np.dot(aligned[i], aligned[prev]) < 0:
            aligned[i] = -aligned[i]
        prev = i
    return aligned


def _orthonormalize(rc: ReparamCurve, smooth_sigma: float, eps_gs: float):
    """Gram-Schmidt the derivative triple at every sample.

    Returns (e1, e2, e3, speed, n2, ok1, ok2, ok3) where n2 is the residual
    norm feeding k_1 and ok1..ok3 flag which stages survived.  e2, e3 are
    sign-aligned along the curve.
    """
    if smooth_sigma > 0:
        rc = ReparamCurve(
            samples=gaussian_filter1d(rc.samples, smooth_sigma, axis=0, mode="nearest"),
            total_length=rc.total_length,
        )
    d1, d2, d3 = derivatives(rc, order=3)

    speed = np.linalg.norm(d1, axis=1)
    ok1 = speed > EPS_TANGENT
    if not ok1.any():
        raise DegenerateCurveError("no sample has a usable tangent; the curve is static")
    safe_speed = np.where(ok1, speed, 1.0)
    e1 = np.where(ok1[:, None], d1 / safe_speed[:, None], 0.0)

    v2 = d2 - np.sum(d2 * e1, axis=1)[:, None] * e1
    n2 = np.linalg.norm(v2, axis=1)
    ok2 = ok1 & (n2 > eps_gs * safe_speed)
    e2 = np.where(ok2[:, None], v2 / np.where(ok2, n2, 1.0)[:, None], 0.0)

    v3 = d3 - np.sum(d3 * e1, axis=1)[:, None] * e1 - np.sum(d3 * e2, axis=1)[:, None] * e2
    n3 = np.linalg.norm(v3, axis=1)
    ok3 = ok2 & (n3 > eps_gs * safe_speed)
    e3 = np.where(ok3[:, None], v3 / np.where(ok3, n3, 1.0)[:, None], 0.0)

    e2 = _align_signs(e2, ok2)
    e3 = _align_signs(e3, ok3)
    return e1, e2, e3, speed, n2, ok1, ok2, ok3


def frenet_frames(
    rc: ReparamCurve,
    smooth_sigma: float = 0.0,
    eps_gs: float = EPS_GRAM_SCHMIDT,
) -> FrenetFrame:
    """The orthonormal frame fields; validity marks fully constructed frames."""
    e1, e2, e3, _, _, _, _, ok3 = _orthonormalize(rc, smooth_sigma, eps_gs)
    return FrenetFrame(e1=e1, e2=e2, e3=e3, validity=ok3)


def _k2_support_ok(ok2: np.ndarray) -> np.ndarray:
    """Which samples have every e2 value their difference stencil touches."""
    n = ok2.shape[0]
    support = np.empty(n, dtype=bool)
    support[1:-1] = ok2[:-2] & ok2[1:-1] & ok2[2:]
    support[0] = ok2[:3].all()
    support[-1] = ok2[-3:].all()
    return support


def frenet_curvatures(
    rc: ReparamCurve,
    smooth_sigma: float = 0.0,
    eps_gs: float = EPS_GRAM_SCHMIDT,
) -> CurvatureSignature:
    """First and second curvature of an arclength-resampled curve.

    ``smooth_sigma`` optionally Gaussian-smooths the curve along the grid
    (units: samples) before differentiating; off by default, useful when
    pixel noise would otherwise swamp the third derivative.
    """
    e1, e2, e3, speed, n2, ok1, ok2, ok3 = _orthonormalize(rc, smooth_sigma, eps_gs)
    safe_speed = np.where(ok1, speed, 1.0)

    k1 = np.where(ok2, n2 / safe_speed**2, 0.0)

    h = rc.total_length / (rc.grid_size - 1)
    de2 = _first_derivative_field(e2, h)
    k2_ok = ok3 & _k2_support_ok(ok2)
    k2 = np.where(k2_ok, np.sum(de2 * e3, axis=1) / safe_speed, 0.0)

    return CurvatureSignature(
        k1=k1,
        k2=k2,
        grid_size=rc.grid_size,
        arc_step=h,
        valid=k2_ok,
    )


def write_signature_csv(sig: CurvatureSignature, path, config_echo: str = None) -> None:
    """Write s, k1, k2, valid columns; optional config echo as a comment line."""
    with open(path, "w", newline="") as fh:
        if config_echo:
            fh.write(f"# config: {config_echo}\n")
        writer = csv.writer(fh)
        writer.writerow(["s", "k1", "k2", "valid"])
        for s, a, b, v in zip(sig.arc_positions, sig.k1, sig.k2, sig.valid):
            writer.writerow([repr(float(s)), repr(float(a)), repr(float(b)), int(v)])


def write_signature_crv(sig: CurvatureSignature, path) -> None:
    """Binary export: one (k1, k2) pair per grid sample (CRV with H=1, W=2)."""
    crv.write_crv(path, np.stack([sig.k1, sig.k2], axis=1)[:, None, :])
