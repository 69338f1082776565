"""Near-minimal-rate image sampling and bounded-spectrum reconstruction.

Sample an image at a rate set by a compact spectral zone, reconstruct it by
alternating spectral bounding with sample re-imposition, and account for the
redundancy against the sparse-spectrum minimum.
"""

from .imagecore import (
    PgmError,
    error_stats,
    psnr,
    read_pgm,
    rms_error,
    trimmed_rms,
    write_pgm,
)
from .transforms import apodize, dct2, dft2, idct2, idft2
from .speczones import (
    CsBound,
    SparseSpectrumReport,
    ZoneShape,
    build_zone_mask,
    cs_required_redundancy,
    ec_zone_redundancy,
    energy_fraction_in_mask,
    fit_shape_to_fraction,
    fit_zone_to_rms,
    mask_fraction,
    sparse_spectrum,
)
from .sampler import (
    SampleSet,
    gen_jitter,
    gen_quasi_uniform,
    gen_random,
    generate_samples,
    read_samples_csv,
    take_samples,
    write_samples_csv,
)
from .reconstructor import ReconstructionTrace, gp_reconstruct, init_interpolate
from .inverseapps import (
    SpectralSampleSet,
    inpaint,
    phase_retrieve_full,
    phase_retrieve_masked,
    sampling_rate,
    spectral_reconstruct,
    spectral_sample,
)

__version__ = "0.1.0"
