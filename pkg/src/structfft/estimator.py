"""Estimator wrappers with the scikit-learn ``fit`` / ``predict`` / ``get_params`` API.

``fit`` takes the signal to recover (a :class:`SparseSpectrum` or a vectorised
function on ``[0, 2 pi)``); ``predict`` evaluates the recovered Fourier series.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .spectrum import SparseSpectrum, evaluate
from .structured import (
    NoiseConfig,
    RecoveryResult,
    recover_block,
    recover_block_randomized,
    recover_general,
    recover_single_prime,
)

__all__ = [
    "BlockSparseFFT",
    "RandomizedBlockSparseFFT",
    "StructuredSparseFFT",
    "SinglePrimeSparseFFT",
]


def _check_int(name: str, value, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


class _SparseFFTBase(BaseEstimator):
    def _noise(self) -> NoiseConfig:
        return NoiseConfig(self.snr_db, self.noise_seed)

    def _check_signal(self, X):
        if isinstance(X, SparseSpectrum):
            if X.N != self.N:
                raise ValueError(f"spectrum bandwidth {X.N} does not match N={self.N}")
        elif not callable(X):
            raise TypeError("X must be a SparseSpectrum or a callable on [0, 2 pi)")
        return X

    def _store(self, result: RecoveryResult):
        self.result_ = result
        self.frequencies_ = result.frequencies
        self.coef_ = result.coefficients
        self.n_samples_used_ = result.samples_used
        self.scheme_ = result.scheme
        return self

    def fit(self, X, y=None):
        self._validate_params()
        return self._store(self._recover(self._check_signal(X)))

    def spectrum(self) -> SparseSpectrum:
        check_is_fitted(self, "result_")
        return self.result_.to_spectrum()

    def predict(self, X):
        """Evaluate the recovered series at the points ``X``."""
        check_is_fitted(self, "result_")
        x = column_or_1d(np.asarray(X, dtype=float), warn=False)
        return evaluate(self.result_.to_spectrum(), x)

    def _validate_params(self):
        _check_int("N", self.N, 2)
        _check_int("n", self.n)
        _check_int("B", self.B)
        _check_int("k_mult", self.k_mult)


class BlockSparseFFT(_SparseFFTBase):
    """Deterministic recovery of ``n`` frequency blocks of length ``B`` (FAST)."""

    def __init__(self, N, n, B, k_mult=2, estimation="last", snr_db=None, noise_seed=0):
        self.N = N
        self.n = n
        self.B = B
        self.k_mult = k_mult
        self.estimation = estimation
        self.snr_db = snr_db
        self.noise_seed = noise_seed

    def _recover(self, X):
        return recover_block(X, self.N, self.n, self.B, self.k_mult, self._noise(), self.estimation)


class RandomizedBlockSparseFFT(_SparseFFTBase):
    """FASTR: block recovery voting over ``subset_size`` randomly chosen primes."""

    def __init__(self, N, n, B, subset_size, k_mult=2, estimation="last", snr_db=None, noise_seed=0,
                 random_state=None):
        self.N = N
        self.n = n
        self.B = B
        self.subset_size = subset_size
        self.k_mult = k_mult
        self.estimation = estimation
        self.snr_db = snr_db
        self.noise_seed = noise_seed
        self.random_state = random_state

    def _recover(self, X):
        _check_int("subset_size", self.subset_size)
        rng = np.random.default_rng(self.random_state)
        return recover_block_randomized(X, self.N, self.n, self.B, self.subset_size, rng, self.k_mult,
                                        self._noise(), self.estimation)


class StructuredSparseFFT(_SparseFFTBase):
    """Recovery of spectra supported on ``n`` polynomial images of ``1..B`` with degree at most ``d``."""

    def __init__(self, N, n, d, B, k_mult=8, estimation="all-pairs", snr_db=None, noise_seed=0):
        self.N = N
        self.n = n
        self.d = d
        self.B = B
        self.k_mult = k_mult
        self.estimation = estimation
        self.snr_db = snr_db
        self.noise_seed = noise_seed

    def _recover(self, X):
        _check_int("d", self.d)
        return recover_general(X, self.N, self.n, self.d, self.B, self.k_mult, self._noise(), self.estimation)


class SinglePrimeSparseFFT(_SparseFFTBase):
    """Structured recovery with one hashing modulus ``u``, valid when ``u`` hashes every support set well."""

    def __init__(self, N, n, d, B, u, k_mult=8, estimation="all-pairs", snr_db=None, noise_seed=0):
        self.N = N
        self.n = n
        self.d = d
        self.B = B
        self.u = u
        self.k_mult = k_mult
        self.estimation = estimation
        self.snr_db = snr_db
        self.noise_seed = noise_seed

    def _recover(self, X):
        _check_int("d", self.d)
        _check_int("u", self.u, 2)
        return recover_single_prime(X, self.N, self.n, self.d, self.B, self.u, self.k_mult, self._noise(),
                                    self.estimation)
