"""Zero-order interpolation and the iterative bounded-spectrum engine.

The engine alternates two projections: bound the DCT spectrum to a binary
zone mask, then re-impose the measured samples in the image domain.  When
the underlying image actually lies in both constraint sets the iteration
converges toward it; the trace records per-iteration error metrics either
way.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .imagecore import as_image, rms_error, trimmed_rms
from .sampler import SampleSet
from .transforms import dct2, idct2

BRUTE_FORCE_LIMIT = 4096


@dataclass
class ReconstructionTrace:
    """Per-iteration error metrics.  rms_total / rms_trim90 are NaN when no
    ground truth was supplied."""

    iterations: list = field(default_factory=list)
    rms_total: list = field(default_factory=list)
    rms_trim90: list = field(default_factory=list)
    delta_rms: list = field(default_factory=list)

    def record(self, i, rms, trim, delta):
        self.iterations.append(i)
        self.rms_total.append(rms)
        self.rms_trim90.append(trim)
        self.delta_rms.append(delta)

    def write_csv(self, path):
        """Header iter,rms_total,rms_trim90,delta_rms; empty fields when no
        ground truth."""
        with open(path, "w", newline="\n") as fh:
            fh.write("iter,rms_total,rms_trim90,delta_rms\n")
            for i, r, t, d in zip(self.iterations, self.rms_total,
                                  self.rms_trim90, self.delta_rms):
                rs = "" if np.isnan(r) else repr(r)
                ts = "" if np.isnan(t) else repr(t)
                fh.write(f"{i},{rs},{ts},{d!r}\n")


def init_interpolate(samples: SampleSet) -> np.ndarray:
    """Inverse-distance interpolation from the k = min(3, M) nearest samples.

    Sampled nodes get their measured values exactly.  Weights are 1/d
    normalized to sum 1.  For small M the neighbor search is brute force
    with a stable sort after lexicographic sample ordering, which pins down
    equal-distance ties; larger M uses a KD-tree.
    """
    H, W, m = samples.height, samples.width, samples.M
    pos = samples.positions
    # lexicographic sample order makes equal-distance tie-breaking deterministic
    order = np.lexsort((pos[:, 1], pos[:, 0]))
    pos = pos[order].astype(np.float64)
    vals = samples.values[order]
    k = min(3, m)

    out = np.empty((H, W), dtype=np.float64)
    targets = np.stack(np.unravel_index(np.arange(H * W), (H, W)), axis=1).astype(np.float64)
    if m <= BRUTE_FORCE_LIMIT:
        flat = np.empty(H * W)
        for start in range(0, H * W, 8192):
            chunk = targets[start : start + 8192]
            d = np.sqrt(((chunk[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2))
            nearest = np.argsort(d, axis=1, kind="stable")[:, :k]
            dn = np.take_along_axis(d, nearest, axis=1)
            w = 1.0 / np.maximum(dn, 1e-300)
            w /= w.sum(axis=1, keepdims=True)
            flat[start : start + len(chunk)] = (w * vals[nearest]).sum(axis=1)
        out = flat.reshape(H, W)
    else:
        tree = cKDTree(pos)
        d, nearest = tree.query(targets, k=k)
        d = np.atleast_2d(d.reshape(H * W, k))
        nearest = nearest.reshape(H * W, k)
        w = 1.0 / np.maximum(d, 1e-300)
        w /= w.sum(axis=1, keepdims=True)
        out = (w * vals[nearest]).sum(axis=1).reshape(H, W)

    ip = samples.positions
    out[ip[:, 0], ip[:, 1]] = samples.values
    return out


def gp_reconstruct(
    samples: SampleSet,
    mask,
    max_iters: int = 1000,
    ground_truth=None,
    stop_delta: float = 1e-4,
    trim_keep: float = 0.9,
    final_projection: bool = False,
    init=None,
):
    """Iterative bounded-spectrum reconstruction from sparse samples.

    Each iteration: (i) DCT, multiply by the zone mask; (ii) inverse DCT and
    overwrite the sampled positions with their measured values.  The result
    is the iterate after step (ii) (so re-imposed samples are exact); pass
    final_projection=True to append one extra spectral projection for a
    strictly band-limited output.

    Stops early when the RMS change between successive iterates drops below
    stop_delta.  Returns (image, ReconstructionTrace).
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (samples.height, samples.width):
        raise ValueError(
            f"mask shape {mask.shape} does not match grid "
            f"{(samples.height, samples.width)}"
        )
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    truth = None if ground_truth is None else as_image(ground_truth)
    if truth is not None and truth.shape != mask.shape:
        raise ValueError(f"ground truth shape {truth.shape} does not match {mask.shape}")

    x = init_interpolate(samples) if init is None else as_image(init).copy()
    pos = samples.positions
    trace = ReconstructionTrace()
    for it in range(1, max_iters + 1):
        spec = dct2(x)
        spec[~mask] = 0.0
        y = idct2(spec)
        y[pos[:, 0], pos[:, 1]] = samples.values
        delta = rms_error(y, x)
        if truth is not None:
            trace.record(it, rms_error(y, truth), trimmed_rms(y, truth, trim_keep), delta)
        else:
            trace.record(it, float("nan"), float("nan"), delta)
        x = y
        if delta < stop_delta:
            break
    if final_projection:
        spec = dct2(x)
        spec[~mask] = 0.0
        x = idct2(spec)
    return x, trace
