"""Inverse-problem applications of the bounded-spectrum engine: in-painting,
reconstruction from a sparsely sampled Fourier spectrum, and phase retrieval
from the Fourier modulus of an occluded image.
"""

from dataclasses import dataclass

import numpy as np

from .imagecore import as_image, rms_error
from .reconstructor import ReconstructionTrace, gp_reconstruct
from .sampler import SampleSet
from .transforms import dft2, idft2_complex


def _binary_mask(mask, H=None, W=None):
    m = np.asarray(mask)
    m = m > (127 if m.dtype == np.uint8 or m.max() > 1 else 0)
    if H is not None and m.shape != (H, W):
        raise ValueError(f"mask shape {m.shape} does not match {(H, W)}")
    return m


def inpaint(img_with_holes, occlusion, zone_mask, max_iters=1000,
            ground_truth=None, stop_delta=1e-4):
    """Fill occluded pixels by bounded-spectrum reconstruction, treating the
    observed pixels as the sample set."""
    img = as_image(img_with_holes)
    H, W = img.shape
    occ = _binary_mask(occlusion, H, W)
    if not occ.any():
        raise ValueError("occlusion mask leaves zero observed pixels")
    pos = np.argwhere(occ)
    samples = SampleSet(H, W, pos, img[occ], grid_kind="external")
    return gp_reconstruct(samples, zone_mask, max_iters=max_iters,
                          ground_truth=ground_truth, stop_delta=stop_delta)


# ---------------------------------------------------------------------------
# Sampling in the spectral domain


def support_circle(H, W, radius_fraction):
    """Image-domain circular support mask; radius is a fraction of the full
    side length (min(H, W))."""
    rc, cc = (H - 1) / 2.0, (W - 1) / 2.0
    rr = np.arange(H)[:, None] - rc
    ccol = np.arange(W)[None, :] - cc
    return np.hypot(rr, ccol) <= radius_fraction * min(H, W)


def spectral_circle(H, W, radius_fraction=1.0):
    """Centered-DFT circular bounding mask; radius_fraction = 1 reaches the
    highest horizontal/vertical baseband frequency (min(H, W)/2)."""
    rr = np.arange(H)[:, None] - H // 2
    ccol = np.arange(W)[None, :] - W // 2
    return np.hypot(rr, ccol) <= radius_fraction * min(H, W) / 2.0


def sampling_rate(support_radius: float, H: int, W: int) -> float:
    """Fraction of spectrum nodes to measure: (support-circle area / frame
    area) times the pi/4 bounding-circle saving."""
    circle_area = np.pi * (support_radius * min(H, W)) ** 2
    return circle_area / (H * W) * (np.pi / 4.0)


@dataclass(frozen=True)
class SpectralSampleSet:
    """Complex spectrum measurements at distinct centered-DFT positions."""

    height: int
    width: int
    positions: np.ndarray  # (M, 2) int
    values: np.ndarray  # (M,) complex
    support_radius: float
    bound_radius: float = 1.0
    seed: int = 0

    @property
    def M(self) -> int:
        return len(self.values)


def spectral_sample(img, support_radius, bound_radius=1.0, seed=0) -> SpectralSampleSet:
    """Confine the image to a circular support, take its centered DFT, and
    measure the spectrum at seeded random positions inside the spectral
    bounding circle."""
    if not 0.0 < support_radius <= 1.0 or not 0.0 < bound_radius <= 1.0:
        raise ValueError("radii must be in (0, 1]")
    img = as_image(img)
    H, W = img.shape
    spec = dft2(img * support_circle(H, W, support_radius))
    bound = spectral_circle(H, W, bound_radius)
    in_circle = np.flatnonzero(bound.ravel())
    m = int(round(sampling_rate(support_radius, H, W) * H * W))
    m = min(m, len(in_circle))
    if m < 1:
        raise ValueError("sampling rate yields zero spectrum samples")
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(in_circle)[:m]
    pos = np.stack(np.unravel_index(chosen, (H, W)), axis=1)
    return SpectralSampleSet(H, W, pos, spec[pos[:, 0], pos[:, 1]],
                             support_radius, bound_radius, seed)


def spectral_reconstruct(ss: SpectralSampleSet, max_iters=100, ground_truth=None,
                         stop_delta=0.0):
    """Recover an image from sparse spectrum samples by alternating the
    image-domain support constraint with spectrum re-imposition and spectral
    bounding.  Starts from the sampled-and-bounded spectrum itself."""
    H, W = ss.height, ss.width
    truth = None if ground_truth is None else as_image(ground_truth)
    sup = support_circle(H, W, ss.support_radius)
    bound = spectral_circle(H, W, ss.bound_radius)
    pos = ss.positions

    spec = np.zeros((H, W), dtype=np.complex128)
    spec[pos[:, 0], pos[:, 1]] = ss.values
    spec[~bound] = 0.0
    prev = idft2_complex(spec).real
    trace = ReconstructionTrace()
    for it in range(1, max_iters + 1):
        # realness of the object is part of the image-domain constraint; it
        # halves the effective unknowns via Hermitian spectrum symmetry
        z = idft2_complex(spec).real
        z[~sup] = 0.0
        spec = dft2(z)
        spec[pos[:, 0], pos[:, 1]] = ss.values
        spec[~bound] = 0.0
        cur = idft2_complex(spec).real
        delta = rms_error(cur, prev)
        if truth is not None:
            trace.record(it, rms_error(cur, truth), float("nan"), delta)
        else:
            trace.record(it, float("nan"), float("nan"), delta)
        prev = cur
        if stop_delta and delta < stop_delta:
            break
    return prev, trace


# ---------------------------------------------------------------------------
# Phase retrieval from the Fourier modulus of a masked image


def phase_retrieve_masked(modulus, mask, max_iters=1000, nonnegative=False,
                          return_residuals=False):
    """Recover an occluded image from the modulus of its centered DFT.

    The binary mask (1 = transparent) is the image-domain constraint; its
    own spectrum phase seeds the iteration.  Each round combines the current
    phase with the measured modulus, inverts, re-applies the mask, and takes
    the new phase.  This is an error-reduction scheme: the modulus residual
    never increases, but convergence to the truth is not guaranteed.

    With return_residuals=True, also returns the per-round RMS modulus
    residual (index 0 is the initial phase estimate).
    """
    modulus = np.asarray(modulus, dtype=np.float64)
    if np.any(modulus < 0):
        raise ValueError("modulus must be non-negative")
    m = _binary_mask(mask)
    if m.shape != modulus.shape:
        raise ValueError(f"mask shape {m.shape} does not match modulus {modulus.shape}")
    if not m.any():
        raise ValueError("all-opaque mask")

    phase = np.angle(dft2(m.astype(np.float64)))
    residuals = []
    z = None
    for _ in range(max_iters + 1):  # +1: evaluate the initial phase too
        spec = modulus * np.exp(1j * phase)
        z = idft2_complex(spec).real
        if nonnegative:
            z = np.maximum(z, 0.0)
        z[~m] = 0.0
        spec_z = dft2(z)
        residuals.append(float(np.sqrt(np.mean((np.abs(spec_z) - modulus) ** 2))))
        phase = np.angle(spec_z)
    if return_residuals:
        return z, residuals
    return z


def modulus_residual(img, modulus) -> float:
    """RMS mismatch between |DFT(img)| and a measured modulus."""
    return float(np.sqrt(np.mean((np.abs(dft2(np.asarray(img))) - modulus) ** 2)))


def phase_retrieve_full(modulus, mask, zone_mask, iters1=1000, iters2=500,
                        ground_truth=None, nonnegative=False):
    """Two-stage pipeline: retrieve the occluded image from its modulus,
    then in-paint the occlusions by bounded-spectrum reconstruction."""
    stage1 = phase_retrieve_masked(modulus, mask, max_iters=iters1,
                                   nonnegative=nonnegative)
    out, trace = inpaint(stage1, mask, zone_mask, max_iters=iters2,
                         ground_truth=ground_truth)
    return out, stage1, trace
