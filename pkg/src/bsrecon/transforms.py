"""2D orthonormal DCT-II/IDCT, unitary centered DFT/IDFT, and the circular
raised-cosine apodization window.

Conventions:
  * DCT spectra are real arrays with DC at index (0, 0).
  * DFT spectra are complex arrays in centered layout, DC at
    (H // 2, W // 2), unitary 1/sqrt(H*W) normalization both ways.

Both transforms satisfy Parseval under these conventions, which the rest of
the package relies on for tail-energy <-> RMS accounting.
"""

import numpy as np
from scipy import fft as _fft

from .imagecore import as_image


def dct2(img) -> np.ndarray:
    """Separable orthonormal 2D DCT-II."""
    return _fft.dctn(as_image(img), norm="ortho")


def idct2(spec) -> np.ndarray:
    """Inverse of dct2.  Rejects complex input (wrong spectrum kind)."""
    spec = np.asarray(spec)
    if np.iscomplexobj(spec):
        raise TypeError("idct2 expects a real DCT spectrum, got complex data")
    return _fft.idctn(np.asarray(spec, dtype=np.float64), norm="ortho")


def dft2(img) -> np.ndarray:
    """Unitary 2D DFT, shifted so DC sits at (H//2, W//2).

    Accepts real or complex input (complex is needed by the spectral-domain
    iteration pipelines).
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected 2D array, got shape {img.shape}")
    return np.fft.fftshift(np.fft.fft2(img, norm="ortho"))


def idft2_complex(spec) -> np.ndarray:
    """Exact complex inverse of dft2."""
    spec = np.asarray(spec)
    if not np.iscomplexobj(spec):
        raise TypeError("idft2 expects a complex centered DFT spectrum, got real data")
    return np.fft.ifft2(np.fft.ifftshift(spec), norm="ortho")


def idft2(spec):
    """Inverse of dft2 for real images.

    Returns (image, max_imag_residual): the real part, plus the largest
    |imaginary| component discarded in taking it.
    """
    z = idft2_complex(spec)
    return z.real, float(np.max(np.abs(z.imag)))


def radial_coords(height: int, width: int) -> np.ndarray:
    """Distance of each pixel from the image center, normalized so that
    min(H, W)/2 maps to 1."""
    rc, cc = (height - 1) / 2.0, (width - 1) / 2.0
    rows = np.arange(height)[:, None] - rc
    cols = np.arange(width)[None, :] - cc
    return np.hypot(rows, cols) / (min(height, width) / 2.0)


def apodize(img, flat_radius: float = 0.6, outer_radius: float = 1.0) -> np.ndarray:
    """Multiply by a circular raised-cosine window.

    The window is 1 up to flat_radius (in units of the inscribed-circle
    radius), rolls off as 0.5*(1 + cos) and is 0 beyond outer_radius, so the
    image goes smoothly to zero toward the frame edges before spectral
    estimation.
    """
    if not (0.0 <= flat_radius < outer_radius <= 1.0):
        raise ValueError(
            f"need 0 <= flat_radius < outer_radius <= 1, got {flat_radius}, {outer_radius}"
        )
    img = as_image(img)
    r = radial_coords(*img.shape)
    w = np.zeros_like(r)
    w[r <= flat_radius] = 1.0
    band = (r > flat_radius) & (r <= outer_radius)
    w[band] = 0.5 * (1.0 + np.cos(np.pi * (r[band] - flat_radius) / (outer_radius - flat_radius)))
    return img * w
