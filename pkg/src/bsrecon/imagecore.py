"""Core raster type, PGM/CSV file I/O and error metrics.

Images are plain 2D float64 numpy arrays (row-major, nominal gray range
0-255).  Everything here is a pure function; nothing mutates its inputs.
"""

import numpy as np

PEAK = 255.0


class PgmError(ValueError):
    """Malformed or unsupported PGM file."""


def as_image(data) -> np.ndarray:
    """Validate and return a 2D float64 image array.

    Raises ValueError on wrong rank or non-finite values.
    """
    img = np.asarray(data, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must be 2D with positive dims, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains NaN or Inf")
    return img


def _check_same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def rms_error(a, b) -> float:
    """Root mean square difference over all pixels, in gray levels."""
    a = as_image(a)
    b = as_image(b)
    _check_same_shape(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def psnr(rms: float) -> float:
    """Peak-255 PSNR in dB for a given RMS error; +inf when rms == 0."""
    if rms < 0:
        raise ValueError(f"rms must be >= 0, got {rms}")
    if rms == 0:
        return float("inf")
    return float(20.0 * np.log10(PEAK / rms))


def trimmed_rms(a, b, keep_fraction: float = 0.9) -> float:
    """RMS of the floor(keep_fraction * N) smallest absolute errors.

    keep_fraction = 1 reproduces rms_error exactly.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    a = as_image(a)
    b = as_image(b)
    _check_same_shape(a, b)
    err = np.sort(np.abs(a - b), axis=None)
    keep = int(np.floor(keep_fraction * err.size))
    if keep == 0:
        return 0.0
    return float(np.sqrt(np.mean(err[:keep] ** 2)))


def error_stats(a, b, keep_fraction: float = 0.9):
    """(rms, psnr_db, trimmed_rms) triple for a reconstruction vs its truth."""
    r = rms_error(a, b)
    return r, psnr(r), trimmed_rms(a, b, keep_fraction)


# ---------------------------------------------------------------------------
# PGM (P5 binary, maxval 255) I/O


def _read_pgm_tokens(raw: bytes, n: int, path):
    """Yield the first n whitespace-separated header tokens, skipping
    '#' comments, and the offset where pixel data starts."""
    tokens = []
    i = 0
    while len(tokens) < n:
        if i >= len(raw):
            raise PgmError(f"{path}: truncated header at byte {i}")
        c = raw[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < len(raw) and raw[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < len(raw) and not raw[j : j + 1].isspace():
                j += 1
            tokens.append(raw[i:j])
            i = j
    return tokens, i + 1  # single whitespace byte after maxval


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) PGM file with maxval 255."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] == b"P2":
        raise PgmError(f"{path}: unsupported PGM variant 'P2' (ASCII); only binary P5 is supported")
    if raw[:2] != b"P5":
        raise PgmError(f"{path}: wrong magic {raw[:2]!r} at byte 0, expected b'P5'")
    (magic, w_tok, h_tok, maxval_tok), data_off = _read_pgm_tokens(raw, 4, path)
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except ValueError as exc:
        raise PgmError(f"{path}: non-numeric header field: {exc}") from exc
    if width < 1 or height < 1:
        raise PgmError(f"{path}: non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise PgmError(f"{path}: maxval {maxval} unsupported, expected 255")
    data = raw[data_off : data_off + height * width]
    if len(data) != height * width:
        raise PgmError(
            f"{path}: expected {height * width} pixel bytes at offset {data_off}, got {len(data)}"
        )
    return np.frombuffer(data, dtype=np.uint8).reshape(height, width).astype(np.float64)


def quantize(img) -> np.ndarray:
    """Round half away from zero, then clamp to [0, 255]; returns uint8."""
    img = as_image(img)
    rounded = np.copysign(np.floor(np.abs(img) + 0.5), img)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def write_pgm(img, path) -> None:
    """Write a binary (P5) PGM file, quantizing real values to 8 bits."""
    pix = quantize(img)
    h, w = pix.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(pix.tobytes())
