"""Spectral zone shapes, sparse-spectrum accounting and redundancy bounds.

A zone is a compact low-frequency region of the transform plane described by
a parametric shape (rectangle, pie sector, ellipse, super-ellipse), fitted by
bisection on a global scale factor so that its rasterized area matches a
requested fraction of the plane.  The sparse-spectrum report gives the
minimal number K of transform coefficients needed to hit a target RMS, which
is the floor any zone-based sampling rate is measured against.
"""

from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .imagecore import as_image
from .transforms import dct2, idct2

FAMILIES = ("rectangle", "pie_sector", "ellipse", "super_ellipse")
ANCHORS = ("dc_corner", "centered")


@dataclass(frozen=True)
class ZoneShape:
    """Parametric spectral zone.

    aspect is the vertical/horizontal extent ratio (b/a).  exponent applies
    to super_ellipse only.  theta (radians) rotates centered zones; it is
    rejected for dc_corner anchors.  scale is the fitted global size factor;
    achieved_fraction records the raster area actually reached.
    """

    family: str
    fraction: float
    aspect: float = 1.0
    exponent: float = 3.0
    theta: float = 0.0
    anchor: str = "dc_corner"
    span: Optional[float] = None  # pie-sector angular span, default full quadrant
    scale: Optional[float] = None
    achieved_fraction: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown shape family {self.family!r}")
        if self.anchor not in ANCHORS:
            raise ValueError(f"unknown anchor {self.anchor!r}")
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.aspect <= 0:
            raise ValueError(f"aspect must be > 0, got {self.aspect}")
        if self.exponent <= 0:
            raise ValueError(f"exponent must be > 0, got {self.exponent}")
        if self.anchor == "dc_corner" and self.theta != 0.0:
            raise ValueError("dc_corner zones do not support rotation (theta != 0)")


def _membership(shape: ZoneShape, scale: float, H: int, W: int) -> np.ndarray:
    """Boolean raster of the zone at the given scale factor."""
    if shape.anchor == "dc_corner":
        u = np.arange(W)[None, :] / W
        v = np.arange(H)[:, None] / H
    else:
        u = (np.arange(W)[None, :] - W // 2) / (W / 2.0)
        v = (np.arange(H)[:, None] - H // 2) / (H / 2.0)
        if shape.theta != 0.0:
            c, s = np.cos(shape.theta), np.sin(shape.theta)
            u, v = u * c + v * s, -u * s + v * c
        u, v = np.abs(u), np.abs(v)

    a = scale / np.sqrt(shape.aspect)
    b = scale * np.sqrt(shape.aspect)
    if shape.family == "rectangle":
        return (u < a) & (v < b)
    if shape.family == "ellipse":
        return (u / a) ** 2 + (v / b) ** 2 <= 1.0
    if shape.family == "super_ellipse":
        p = shape.exponent
        return (u / a) ** p + (v / b) ** p <= 1.0
    # pie_sector: radial cut, optionally limited in angle
    inside = np.hypot(u, v) <= scale
    if shape.span is not None:
        ang = np.arctan2(v, np.maximum(u, 1e-300))
        inside &= ang <= shape.span
    return inside


def _fraction_at(shape: ZoneShape, scale: float, H: int, W: int) -> float:
    return float(np.count_nonzero(_membership(shape, scale, H, W))) / (H * W)


def fraction_tolerance(H: int, W: int) -> float:
    """Fitting tolerance on the raster fraction for an H x W plane."""
    return max(8.0, 0.001 * H * W) / (H * W)


def fit_shape_to_fraction(
    family: str,
    fraction: float,
    aspect: float = 1.0,
    exponent: float = 3.0,
    theta: float = 0.0,
    anchor: str = "dc_corner",
    span: Optional[float] = None,
    H: int = 512,
    W: int = 512,
) -> ZoneShape:
    """Bisect the global scale factor until the raster fraction matches.

    The raster fraction is a monotone step function of the scale, so plain
    bisection brackets the target; the scale whose fraction lands closest to
    the target is kept.  Raises if the family cannot reach the target on this
    grid within tolerance.
    """
    shape = ZoneShape(family, fraction, aspect, exponent, theta, anchor, span)
    if fraction < 1.0 / (H * W):
        raise ValueError(f"target fraction {fraction} is below one-cell resolution 1/{H * W}")
    lo, hi = 0.0, 1.0
    while _fraction_at(shape, hi, H, W) < fraction:
        hi *= 2.0
        if hi > 64.0:
            break
    best_scale, best_frac = hi, _fraction_at(shape, hi, H, W)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        frac = _fraction_at(shape, mid, H, W)
        if abs(frac - fraction) < abs(best_frac - fraction):
            best_scale, best_frac = mid, frac
        if frac < fraction:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    if abs(best_frac - fraction) > fraction_tolerance(H, W):
        raise ValueError(
            f"{family} cannot reach fraction {fraction} on {H}x{W}; "
            f"nearest achievable is {best_frac:.6f}"
        )
    return replace(shape, scale=best_scale, achieved_fraction=best_frac)


def build_zone_mask(shape: ZoneShape, H: int, W: int) -> np.ndarray:
    """Rasterize a zone to a boolean H x W mask, fitting the scale if the
    shape has not been fitted on this grid yet."""
    if shape.scale is None:
        shape = fit_shape_to_fraction(
            shape.family, shape.fraction, shape.aspect, shape.exponent,
            shape.theta, shape.anchor, shape.span, H, W,
        )
    return _membership(shape, shape.scale, H, W)


def mask_fraction(mask: np.ndarray) -> float:
    """Exact ones-count fraction of a boolean mask."""
    mask = np.asarray(mask, dtype=bool)
    return float(np.count_nonzero(mask)) / mask.size


# ---------------------------------------------------------------------------
# Sparse-spectrum accounting


@dataclass(frozen=True)
class SparseSpectrumReport:
    """Minimal-K accounting for one image at one RMS target."""

    K: int
    sparsity: float
    kept_indices: np.ndarray = field(repr=False)  # (K, 2) row/col pairs
    achieved_rms: float
    rms_target: float


def sparse_spectrum(img, rms_target: float) -> SparseSpectrumReport:
    """Minimal number of DCT coefficients whose removal keeps the tail RMS
    at or below rms_target.

    Coefficients are ranked by energy, descending, ties broken by row-major
    index order so the result is platform independent.  Tail RMS follows
    from Parseval under the orthonormal transform convention.
    """
    if rms_target < 0:
        raise ValueError(f"rms_target must be >= 0, got {rms_target}")
    img = as_image(img)
    spec = dct2(img)
    n = spec.size
    energies = (spec ** 2).ravel()
    order = np.argsort(-energies, kind="stable")
    sorted_e = energies[order]
    total = float(np.sum(sorted_e))
    # tail(K) = sqrt((total - sum of top K) / n); find the first K at target
    tail = np.sqrt(np.maximum(total - np.cumsum(sorted_e), 0.0) / n)
    tail = np.concatenate(([np.sqrt(total / n)], tail))
    k = int(np.argmax(tail <= rms_target)) if np.any(tail <= rms_target) else n
    kept = np.stack(np.unravel_index(order[:k], spec.shape), axis=1)
    return SparseSpectrumReport(
        K=k,
        sparsity=k / n,
        kept_indices=kept,
        achieved_rms=float(tail[k]),
        rms_target=rms_target,
    )


def energy_fraction_in_mask(spec, mask) -> float:
    """Fraction of total spectral energy inside the mask."""
    spec = np.asarray(spec)
    mask = np.asarray(mask, dtype=bool)
    if spec.shape != mask.shape:
        raise ValueError(f"dimension mismatch: {spec.shape} vs {mask.shape}")
    e = np.abs(spec) ** 2
    total = float(np.sum(e))
    if total == 0.0:
        raise ValueError("spectrum has zero total energy")
    return float(np.sum(e[mask])) / total


def fit_zone_to_rms(
    img,
    rms_target: float,
    family: str = "ellipse",
    aspect: float = 1.0,
    exponent: float = 3.0,
) -> ZoneShape:
    """Smallest dc_corner zone of a family whose out-of-zone DCT tail RMS is
    at or below rms_target (bisection on the scale factor)."""
    img = as_image(img)
    H, W = img.shape
    spec = dct2(img)
    n = spec.size
    shape = ZoneShape(family, 1.0, aspect, exponent)

    def tail_rms(scale):
        m = _membership(shape, scale, H, W)
        return float(np.sqrt(np.sum(spec[~m] ** 2) / n))

    lo, hi = 0.0, 1.0
    while tail_rms(hi) > rms_target:
        hi *= 2.0
        if hi > 64.0:
            raise ValueError(f"{family} zone cannot reach tail RMS {rms_target}")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail_rms(mid) > rms_target:
            lo = mid
        else:
            hi = mid
    frac = _fraction_at(shape, hi, H, W)
    return replace(shape, fraction=frac, scale=hi, achieved_fraction=frac)


def ec_zone_redundancy(mask_fraction: float, sparsity: float) -> float:
    """Zone area fraction over spectrum sparsity: the overhead paid for
    approximating the true sparse support with a standard shape."""
    if sparsity <= 0:
        raise ValueError(f"sparsity must be > 0, got {sparsity}")
    return mask_fraction / sparsity


class CsBound(NamedTuple):
    redundancy: float
    clamped: bool  # True when the raw fixed point fell below 1


def cs_required_redundancy(sparsity: float) -> CsBound:
    """Oversampling factor required without any knowledge of coefficient
    positions: the fixed point of r = -2 ln(r * sparsity).

    Natural logarithm (validated: reproduces the known 3-8x range over
    sparsities 2e-3 to 1e-1; base 10 does not).  Solved by bisection on the
    strictly increasing residual r + 2 ln(r * sparsity).
    """
    s = sparsity
    if not 0.0 < s < 1.0:
        raise ValueError(f"sparsity must be in (0, 1), got {s}")

    def f(r):
        return r + 2.0 * np.log(r * s)

    lo, hi = 1e-12, 1.0
    while f(hi) < 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    r = 0.5 * (lo + hi)
    if r < 1.0:
        return CsBound(1.0, True)
    return CsBound(float(r), False)
