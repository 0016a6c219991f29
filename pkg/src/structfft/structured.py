"""Structured sparse recovery: general polynomial supports, the single hashing
modulus fast path, block sparse FAST and its randomized FASTR variant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .core import ColumnView, componentwise_lower_median, solve_all_columns, top_by_magnitude
from .numtheory import (
    GeneratorPolynomial,
    PrimeScheme,
    build_scheme_block,
    build_scheme_general,
    build_scheme_single_prime,
    extended_gcd,
    single_prime_suffices,
)
from .spectrum import SparseSpectrum, add_noise, dft, sample_vector

__all__ = [
    "NoiseConfig",
    "SampledTransforms",
    "RecoveryResult",
    "make_sampler",
    "acquire_samples",
    "extract_b_vector",
    "column_view",
    "recover_general",
    "recover_general_randomized",
    "recover_single_prime",
    "recover_block",
    "recover_block_randomized",
]

Source = Union[SparseSpectrum, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class NoiseConfig:
    """Additive Gaussian sample noise at ``snr_db``; ``None`` disables it.

    Each sample vector of length ``m`` draws from its own stream seeded by
    ``(seed, m)``, so every algorithm sampling the same grid sees the same noise.
    """

    snr_db: float | None = None
    seed: int | tuple[int, ...] = 0

    @property
    def active(self) -> bool:
        return self.snr_db is not None and np.isfinite(self.snr_db)

    def apply(self, samples: np.ndarray, m: int) -> np.ndarray:
        if not self.active:
            return samples
        key = [*np.atleast_1d(self.seed).tolist(), m]
        return add_noise(samples, self.snr_db, np.random.default_rng(key))


def make_sampler(source: Source) -> Callable[[int], np.ndarray]:
    """Turn a spectrum or a vectorised function on ``[0, 2 pi)`` into ``m -> A_m``."""
    if isinstance(source, SparseSpectrum):
        return lambda m: sample_vector(source, m, method="fft")
    if callable(source):

        def sampler(m: int) -> np.ndarray:
            values = np.asarray(source(2.0 * np.pi * np.arange(m) / m), dtype=np.complex128)
            if values.shape != (m,):
                raise ValueError(f"sampler returned shape {values.shape}, expected ({m},)")
            return values

        return sampler
    raise TypeError("source must be a SparseSpectrum or a callable")


@dataclass
class SampledTransforms:
    """Normalized DFTs of the sample vectors, keyed by length ``s_k t_l u_m``."""

    by_length: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def total_samples(self) -> int:
        return sum(self.by_length)

    def get(self, sk: int, tl: int, um: int) -> np.ndarray:
        return self.by_length[sk * tl * um]

    def rows(self, scheme: PrimeScheme, um: int):
        """``short[k]`` of length ``s_k u`` and ``refined[k][l]`` of length ``s_k t_l u``."""
        short = [self.get(sk, 1, um) for sk in scheme.s]
        refined = [[self.get(sk, tl, um) for tl in scheme.t] for sk in scheme.s]
        return short, refined


def acquire_samples(
    source: Source,
    scheme: PrimeScheme,
    noise: NoiseConfig | None = None,
    u: int | None = None,
) -> SampledTransforms:
    """Sample and transform every length the scheme needs (only hashing modulus ``u`` if given)."""
    sampler = make_sampler(source)
    noise = noise or NoiseConfig()
    out = SampledTransforms()
    for m in scheme.sample_lengths(u):
        out.by_length[m] = dft(noise.apply(sampler(m), m))
    return out


def extract_b_vector(dft_long: np.ndarray, nu: int, st: int, u: int) -> np.ndarray:
    """Residue-``nu`` slice of a length ``st * u`` DFT, reindexed to length ``st``.

    Entry ``j`` is read at ``((j - nu) w mod st) u + nu`` where ``v st + w u = 1``,
    the unique index congruent to ``j`` mod ``st`` and to ``nu`` mod ``u``.
    """
    dft_long = np.asarray(dft_long)
    if len(dft_long) != st * u:
        raise ValueError(f"expected length {st * u}, got {len(dft_long)}")
    if not 0 <= nu < u:
        raise ValueError(f"need 0 <= nu < u, got nu={nu}, u={u}")
    g, _, w = extended_gcd(st, u)
    if g != 1:
        raise ValueError(f"moduli {st} and {u} are not coprime")
    j = np.arange(st, dtype=np.int64)
    return dft_long[((j - nu) * w % st) * u + nu]


def column_view(transforms: SampledTransforms, scheme: PrimeScheme, um: int, nu: int) -> ColumnView:
    """Assemble the per-column view for residue ``nu`` of hashing modulus ``um``."""
    vectors = tuple(
        tuple(extract_b_vector(transforms.get(sk, tl, um), nu, sk * tl, um) for tl in scheme.t_with_one)
        for sk in scheme.s
    )
    return ColumnView(scheme.s, scheme.t, vectors, nu, um, scheme.N)


@dataclass
class RecoveryResult:
    """Recovered frequencies (sorted by decreasing magnitude) with their estimates.

    ``votes[i]`` is the number of ``s_k`` (single hashing modulus) or of ``u_m``
    (general mode) that produced ``frequencies[i]``.
    """

    N: int
    frequencies: np.ndarray
    coefficients: np.ndarray
    samples_used: int
    columns_solved: int = 0
    votes: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    scheme: PrimeScheme | None = None
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frequencies)

    def to_spectrum(self) -> SparseSpectrum:
        return SparseSpectrum(self.N, self.frequencies, self.coefficients)

    def vote_histogram(self) -> dict[int, int]:
        vals, counts = np.unique(self.votes, return_counts=True)
        return dict(zip(vals.tolist(), counts.tolist()))


def _select_output(N, freqs, est, votes, count, samples, columns, scheme, **diag) -> RecoveryResult:
    nz = est != 0
    freqs, est, votes = freqs[nz], est[nz], votes[nz]
    idx = top_by_magnitude(freqs, est, count)
    return RecoveryResult(
        N=N,
        frequencies=freqs[idx],
        coefficients=est[idx],
        samples_used=samples,
        columns_solved=columns,
        votes=votes[idx],
        scheme=scheme,
        diagnostics=diag,
    )


def _solve_modulus(sampler_source, scheme, um, noise, keep, sparsity, estimation):
    transforms = acquire_samples(sampler_source, scheme, noise, u=um)
    short, refined = transforms.rows(scheme, um)
    sol = solve_all_columns(short, refined, scheme.s, scheme.t, um, scheme.N, keep, estimation, sparsity)
    return sol, transforms.total_samples


def _recover_fixed_u(source, scheme: PrimeScheme, count, keep, sparsity, noise, estimation, **diag):
    (um,) = scheme.u
    sol, samples = _solve_modulus(source, scheme, um, noise, keep, sparsity, estimation)
    return _select_output(
        scheme.N,
        sol.freqs,
        sol.estimates,
        sol.votes,
        count,
        samples,
        um,
        scheme,
        overloaded_columns=sol.overloaded,
        **diag,
    )


def _recover_voted_u(source, scheme: PrimeScheme, n, d, B, noise, estimation) -> RecoveryResult:
    dn = d * n
    freqs, ests = [], []
    samples = 0
    overloaded = 0
    for um in scheme.u:
        # one hashing modulus at a time keeps memory at a single u's worth of DFTs
        sol, used = _solve_modulus(source, scheme, um, noise, 2 * dn, dn, estimation)
        samples += used
        overloaded += sol.overloaded
        freqs.append(sol.freqs)
        ests.append(sol.estimates)
    allf = np.concatenate(freqs)
    alle = np.concatenate(ests)
    order = np.argsort(allf, kind="stable")
    allf, alle = allf[order], alle[order]
    uniq, starts, counts = np.unique(allf, return_index=True, return_counts=True)
    win = 2 * counts > scheme.M
    est = np.array(
        [complex(componentwise_lower_median(alle[a : a + c])) for a, c in zip(starts[win], counts[win])],
        dtype=np.complex128,
    )
    return _select_output(
        scheme.N,
        uniq[win],
        est,
        counts[win],
        B * n,
        samples,
        sum(scheme.u),
        scheme,
        overloaded_columns=overloaded,
    )


def recover_general(
    source: Source,
    N: int,
    n: int,
    d: int,
    B: int,
    k_mult: int = 8,
    noise: NoiseConfig | None = None,
    estimation: str = "all-pairs",
    scheme: PrimeScheme | None = None,
) -> RecoveryResult:
    """Recover a P(n, d, B)-structured spectrum.

    Every hashing prime ``u_m`` splits the band into ``u_m`` residue columns, each
    solved with sparsity ``dn`` keeping ``2dn`` candidates. Frequencies found for
    more than half of the ``u_m`` get the componentwise median of their per-prime
    estimates; the ``Bn`` largest are returned.
    """
    if scheme is None:
        scheme = build_scheme_general(N, n, d, B, k_mult)
    elif scheme.N != N:
        raise ValueError("scheme was built for a different bandwidth")
    return _recover_voted_u(source, scheme, n, d, B, noise, estimation)


def recover_general_randomized(
    source: Source,
    N: int,
    n: int,
    d: int,
    B: int,
    subset_size: int,
    rng: np.random.Generator,
    k_mult: int = 8,
    noise: NoiseConfig | None = None,
    estimation: str = "all-pairs",
) -> RecoveryResult:
    """General recovery voting over a uniformly random subset of the hashing primes."""
    scheme = build_scheme_general(N, n, d, B, k_mult)
    if not 1 <= subset_size <= scheme.M:
        raise ValueError(f"subset_size must be in [1, {scheme.M}]")
    chosen = rng.choice(scheme.M, size=subset_size, replace=False)
    return _recover_voted_u(source, scheme.with_u([scheme.u[i] for i in chosen]), n, d, B, noise, estimation)


def recover_single_prime(
    source: Source,
    N: int,
    n: int,
    d: int,
    B: int,
    u: int,
    k_mult: int = 8,
    noise: NoiseConfig | None = None,
    estimation: str = "all-pairs",
    polys: Sequence[GeneratorPolynomial] | None = None,
) -> RecoveryResult:
    """Recovery with one hashing modulus ``u > B`` and no vote across moduli.

    Valid when ``u`` hashes every support set well. If the generating polynomials
    are supplied this is checked and a warning is issued when it fails.
    """
    scheme = build_scheme_single_prime(N, n, d, B, u, k_mult)
    diag = {}
    if polys is not None:
        ok = single_prime_suffices(polys, u)
        diag["hashes_well"] = ok
        if not ok:
            warnings.warn(f"u={u} does not hash every support set well", RuntimeWarning, stacklevel=2)
    return _recover_fixed_u(source, scheme, B * n, 2 * d * n, d * n, noise, estimation, **diag)


def recover_block(
    source: Source,
    N: int,
    n: int,
    B: int,
    k_mult: int = 2,
    noise: NoiseConfig | None = None,
    estimation: str = "last",
) -> RecoveryResult:
    """FAST: recover an (n, B)-block sparse spectrum with the hashing integer ``u = 2**(floor(log2 B)+1)``."""
    scheme = build_scheme_block(N, n, B, k_mult)
    return _recover_fixed_u(source, scheme, B * n, 2 * n, n, noise, estimation)


def recover_block_randomized(
    source: Source,
    N: int,
    n: int,
    B: int,
    subset_size: int,
    rng: np.random.Generator,
    k_mult: int = 2,
    noise: NoiseConfig | None = None,
    estimation: str = "last",
) -> RecoveryResult:
    """FASTR: FAST restricted to a uniformly random subset of the ``s_k``, majority over the subset."""
    scheme = build_scheme_block(N, n, B, k_mult)
    if not 1 <= subset_size <= scheme.K:
        raise ValueError(f"subset_size must be in [1, {scheme.K}]")
    chosen = rng.choice(scheme.K, size=subset_size, replace=False)
    sub = scheme.with_s([scheme.s[i] for i in chosen])
    return _recover_fixed_u(source, sub, B * n, 2 * n, n, noise, estimation, full_K=scheme.K)
