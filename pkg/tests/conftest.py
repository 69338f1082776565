import numpy as np
import pytest

import bsrecon as bs


def band_limited_truth(H, W, mask, seed=42, natural_decay=False):
    """Truth image lying exactly in the zone-bounded space.

    With natural_decay, coefficient magnitudes fall off like a power of the
    radial frequency index, mimicking natural-image statistics; otherwise the
    spectrum is flat (band-limited white), the harder case.
    """
    rng = np.random.default_rng(seed)
    if natural_decay:
        rr = np.arange(H)[:, None]
        cc = np.arange(W)[None, :]
        spec = rng.normal(0, 1, (H, W)) / (1.0 + np.hypot(rr, cc)) ** 1.2
        spec[0, 0] = abs(spec[0, 0]) + 50.0
    else:
        spec = bs.dct2(rng.uniform(0, 255, (H, W)))
    spec[~np.asarray(mask, bool)] = 0.0
    truth = bs.idct2(spec)
    if natural_decay:
        truth = (truth - truth.min()) / (truth.max() - truth.min()) * 255.0
        spec = bs.dct2(truth)
        spec[~np.asarray(mask, bool)] = 0.0
        truth = bs.idct2(spec)
    return truth


@pytest.fixture(scope="session")
def camera512():
    from skimage import data

    return data.camera().astype(np.float64)


@pytest.fixture(scope="session")
def moon512():
    from skimage import data

    return data.moon().astype(np.float64)
