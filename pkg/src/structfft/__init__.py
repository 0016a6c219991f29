"""Sparse Fourier transforms for spectra supported on polynomially structured
or block structured frequency sets."""

from .core import ColumnView, median_estimate, solve_all_columns, solve_column
from .estimator import BlockSparseFFT, RandomizedBlockSparseFFT, SinglePrimeSparseFFT, StructuredSparseFFT
from .numtheory import (
    GeneratorPolynomial,
    PrimeScheme,
    build_scheme_block,
    build_scheme_general,
    build_scheme_single_prime,
    count_well_hashing,
    crt_reconstruct,
    extended_gcd,
    hashes_well,
    hashes_well_by_coeffs,
    max_residue_multiplicity,
    primes_up_to,
    single_prime_suffices,
    to_signed_band,
)
from .spectrum import (
    SparseSpectrum,
    StructuredSupport,
    add_noise,
    alias_project,
    dft,
    dft_direct,
    evaluate,
    generate_block_support,
    generate_poly_support,
    read_spectrum,
    sample_vector,
    write_spectrum,
)
from .structured import (
    NoiseConfig,
    RecoveryResult,
    SampledTransforms,
    acquire_samples,
    extract_b_vector,
    recover_block,
    recover_block_randomized,
    recover_general,
    recover_general_randomized,
    recover_single_prime,
)

__version__ = "0.1.0"
