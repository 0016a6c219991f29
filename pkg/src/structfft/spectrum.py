"""Signal model: sparse spectra on the signed band, exact sampling, normalized DFTs,
the aliasing projection and sample noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
import scipy.fft

from .numtheory import GeneratorPolynomial, band_limits

__all__ = [
    "SparseSpectrum",
    "StructuredSupport",
    "best_terms_indices",
    "generate_block_support",
    "generate_poly_support",
    "bandlimited_noise",
    "evaluate",
    "sample_vector",
    "dft",
    "dft_direct",
    "alias_project",
    "add_noise",
    "write_spectrum",
    "read_spectrum",
]


def best_terms_indices(values: np.ndarray, s: int) -> np.ndarray:
    """Indices of the ``s`` largest-magnitude entries, ties going to the lower index.

    This is the lexicographically first optimal ``s``-subset; the result is
    ordered by decreasing magnitude.
    """
    mags = np.abs(np.asarray(values))
    order = np.argsort(-mags, kind="stable")
    return order[: max(0, min(s, len(order)))]


@dataclass(frozen=True, eq=False)
class SparseSpectrum:
    """Fourier coefficients ``c_omega`` on the band ``(-ceil(N/2), floor(N/2)]``.

    Stored as parallel arrays sorted by frequency; zero coefficients are dropped.
    """

    N: int
    freqs: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.int64).ravel()
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).ravel()
        if freqs.shape != coeffs.shape:
            raise ValueError("freqs and coeffs must have the same length")
        if self.N < 1:
            raise ValueError("N must be positive")
        lo, hi = band_limits(self.N)
        if freqs.size and (freqs.min() < lo or freqs.max() > hi):
            raise ValueError(f"frequencies outside the band [{lo}, {hi}]")
        order = np.argsort(freqs, kind="stable")
        freqs, coeffs = freqs[order], coeffs[order]
        if freqs.size > 1 and np.any(np.diff(freqs) == 0):
            raise ValueError("duplicate frequencies")
        keep = coeffs != 0
        freqs, coeffs = freqs[keep], coeffs[keep]
        freqs.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_dict(cls, N: int, entries: Mapping[int, complex]) -> "SparseSpectrum":
        items = sorted(entries.items())
        return cls(N, [w for w, _ in items], [c for _, c in items])

    @classmethod
    def empty(cls, N: int) -> "SparseSpectrum":
        return cls(N, [], [])

    @classmethod
    def from_dense(cls, N: int, values: np.ndarray) -> "SparseSpectrum":
        lo, _ = band_limits(N)
        values = np.asarray(values)
        if values.shape != (N,):
            raise ValueError(f"dense spectrum must have length {N}")
        return cls(N, np.arange(N) + lo, values)

    def __len__(self) -> int:
        return self.freqs.size

    def __repr__(self) -> str:
        return f"SparseSpectrum(N={self.N}, nnz={len(self)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseSpectrum):
            return NotImplemented
        return (
            self.N == other.N
            and np.array_equal(self.freqs, other.freqs)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __add__(self, other: "SparseSpectrum") -> "SparseSpectrum":
        if other.N != self.N:
            raise ValueError("bandwidth mismatch")
        freqs = np.concatenate([self.freqs, other.freqs])
        coeffs = np.concatenate([self.coeffs, other.coeffs])
        uniq, inv = np.unique(freqs, return_inverse=True)
        summed = np.zeros(uniq.size, dtype=np.complex128)
        np.add.at(summed, inv, coeffs)
        return SparseSpectrum(self.N, uniq, summed)

    def items(self):
        return zip(self.freqs.tolist(), self.coeffs.tolist())

    def to_dict(self) -> dict[int, complex]:
        return dict(self.items())

    def coefficient(self, omega: int) -> complex:
        i = np.searchsorted(self.freqs, omega)
        if i < self.freqs.size and self.freqs[i] == omega:
            return complex(self.coeffs[i])
        return 0j

    def lookup(self, omegas: np.ndarray) -> np.ndarray:
        """Coefficients at ``omegas`` (zero where absent)."""
        omegas = np.asarray(omegas, dtype=np.int64)
        idx = np.searchsorted(self.freqs, omegas)
        idx = np.minimum(idx, max(self.freqs.size - 1, 0))
        out = np.zeros(omegas.shape, dtype=np.complex128)
        if self.freqs.size:
            hit = self.freqs[idx] == omegas
            out[hit] = self.coeffs[idx[hit]]
        return out

    def dense(self) -> np.ndarray:
        lo, _ = band_limits(self.N)
        out = np.zeros(self.N, dtype=np.complex128)
        out[self.freqs - lo] = self.coeffs
        return out

    def best_terms(self, s: int) -> "SparseSpectrum":
        idx = best_terms_indices(self.coeffs, s)
        return SparseSpectrum(self.N, self.freqs[idx], self.coeffs[idx])

    def norm(self, ord: float = 2) -> float:
        return float(np.linalg.norm(self.coeffs, ord)) if len(self) else 0.0


@dataclass(frozen=True)
class StructuredSupport:
    """Support sets ``S_j = {P_j(x) : x = 1..B}`` of ``n`` generator polynomials."""

    polys: tuple[GeneratorPolynomial, ...]
    N: int

    def __post_init__(self):
        object.__setattr__(self, "polys", tuple(self.polys))
        for P in self.polys:
            if not P.in_band(self.N):
                raise ValueError(f"{P} leaves the band for N={self.N}")

    @property
    def n(self) -> int:
        return len(self.polys)

    def sets(self) -> list[np.ndarray]:
        return [np.unique(np.array(P.values(), dtype=np.int64)) for P in self.polys]

    def support(self) -> np.ndarray:
        if not self.polys:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate(self.sets()))


def _random_poly(rng: np.random.Generator, N: int, d: int, B: int, fixed: Mapping[int, int]):
    lo, hi = band_limits(N)
    half = N // 2
    x = np.arange(1, B + 1, dtype=object)
    coeffs = [0] * (d + 1)
    for k in range(1, d + 1):
        if k in fixed:
            coeffs[k] = int(fixed[k])
        else:
            bound = max(1, half // (d * B**k))
            coeffs[k] = int(rng.integers(-bound, bound + 1))
    if not any(coeffs[1:]):
        return None
    shape = [sum(coeffs[k] * xi**k for k in range(1, d + 1)) for xi in x]
    a0_lo, a0_hi = lo - min(shape), hi - max(shape)
    if a0_lo > a0_hi:
        return None
    coeffs[0] = int(rng.integers(a0_lo, a0_hi + 1))
    return GeneratorPolynomial(tuple(coeffs), B)


def generate_poly_support(
    rng: np.random.Generator,
    N: int,
    n: int,
    d: int,
    B: int,
    fixed: Mapping[int, int] | None = None,
    max_tries: int = 10_000,
) -> tuple[StructuredSupport, SparseSpectrum]:
    """Random P(n, d, B)-structured spectrum with unit-magnitude, random-phase coefficients.

    Non-constant coefficients are drawn uniformly from a range that keeps the
    polynomial's spread inside the band, then the constant term is drawn from
    the offsets that keep every value in band. Draws that come out constant or
    do not fit are discarded and redrawn. ``fixed`` pins coefficients by degree.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if not 1 <= B < N or (B <= d and not fixed):
        raise ValueError(f"need d < B < N, got d={d}, B={B}, N={N}")
    fixed = dict(fixed or {})
    polys = []
    for _ in range(n):
        for _ in range(max_tries):
            P = _random_poly(rng, N, d, B, fixed)
            if P is not None:
                break
        else:
            raise RuntimeError("could not draw an in-band generator polynomial")
        polys.append(P)
    support = StructuredSupport(tuple(polys), N)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n * B)
    entries: dict[int, complex] = {}
    for j, P in enumerate(polys):
        for i, w in enumerate(P.values()):
            # first draw wins on overlapping supports
            entries.setdefault(w, complex(np.exp(1j * phases[j * B + i])))
    return support, SparseSpectrum.from_dict(N, entries)


def generate_block_support(rng: np.random.Generator, N: int, n: int, B: int):
    """Random (n, B)-block sparse spectrum: ``n`` runs of ``B`` consecutive frequencies."""
    if B * n > N:
        raise ValueError(f"B*n={B * n} exceeds the bandwidth {N}")
    if B >= N:
        lo, _ = band_limits(N)
        P = GeneratorPolynomial((lo - 1, 1), B)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=B)
        spec = SparseSpectrum(N, np.array(P.values()), np.exp(1j * phases))
        return StructuredSupport((P,), N), spec
    return generate_poly_support(rng, N, n, 1, B, fixed={1: 1})


def bandlimited_noise(rng: np.random.Generator, N: int, eps: float) -> SparseSpectrum:
    """Dense in-band noise spectrum with every coefficient of magnitude ``eps``."""
    lo, _ = band_limits(N)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=N)
    return SparseSpectrum(N, np.arange(N) + lo, eps * np.exp(1j * phases))


def evaluate(spectrum: SparseSpectrum, x):
    """``f(x) = sum_omega c_omega exp(i omega x)`` for scalar or array ``x``."""
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    out = np.zeros(flat.shape, dtype=np.complex128)
    chunk = max(1, 2**20 // max(1, len(spectrum)))
    for start in range(0, flat.size, chunk):
        block = flat[start : start + chunk]
        out[start : start + chunk] = np.exp(1j * np.outer(block, spectrum.freqs)) @ spectrum.coeffs
    if xa.ndim == 0:
        return complex(out[0])
    return out.reshape(xa.shape)


def alias_project(spectrum: SparseSpectrum, m: int) -> np.ndarray:
    """Entry ``k`` is the sum of all ``c_omega`` with ``omega = k (mod m)``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    idx = spectrum.freqs % m
    re = np.bincount(idx, weights=spectrum.coeffs.real, minlength=m)
    im = np.bincount(idx, weights=spectrum.coeffs.imag, minlength=m)
    return re + 1j * im


def _sample_direct(spectrum: SparseSpectrum, m: int) -> np.ndarray:
    out = np.zeros(m, dtype=np.complex128)
    j = np.arange(m, dtype=np.int64)
    for w, c in zip(spectrum.freqs.tolist(), spectrum.coeffs.tolist()):
        # reduce the phase exactly before leaving integers
        out += c * np.exp(2j * np.pi * ((w * j) % m) / m)
    return out


def sample_vector(spectrum: SparseSpectrum, m: int, method: str = "auto") -> np.ndarray:
    """Samples ``A_m(j) = f(2 pi j / m)`` for ``j = 0..m-1``.

    ``method="direct"`` sums the exponentials point by point; ``"fft"``
    synthesises the same values from the aliased coefficients with one inverse
    FFT. ``"auto"`` picks whichever is cheaper.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if method == "auto":
        method = "direct" if len(spectrum) * m <= 4 * m * max(1, math.log2(m)) else "fft"
    if method == "direct":
        return _sample_direct(spectrum, m)
    if method == "fft":
        return scipy.fft.ifft(alias_project(spectrum, m), norm="forward")
    raise ValueError(f"unknown method {method!r}")


def dft(v) -> np.ndarray:
    """Normalized DFT ``X(k) = (1/m) sum_j v(j) exp(-2 pi i j k / m)``, O(m log m) for any m."""
    v = np.asarray(v, dtype=np.complex128)
    if v.size < 1:
        raise ValueError("empty vector")
    return scipy.fft.fft(v, norm="forward")


def dft_direct(v) -> np.ndarray:
    """O(m^2) reference for :func:`dft`."""
    v = np.asarray(v, dtype=np.complex128)
    m = v.size
    if m < 1:
        raise ValueError("empty vector")
    j = np.arange(m, dtype=np.int64)
    out = np.empty(m, dtype=np.complex128)
    rows = max(1, 2**22 // m)
    for start in range(0, m, rows):
        k = j[start : start + rows, None]
        out[start : start + rows] = np.exp(-2j * np.pi * ((k * j[None, :]) % m) / m) @ v
    return out / m


def add_noise(samples, snr_db: float | None, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise scaled to ``20 log10(|f|/|n|) = snr_db`` exactly."""
    samples = np.asarray(samples, dtype=np.complex128)
    if snr_db is None or np.isposinf(snr_db):
        return samples.copy()
    signal_norm = np.linalg.norm(samples)
    if signal_norm == 0:
        raise ValueError("cannot set an SNR on an all-zero sample vector")
    noise = rng.standard_normal(samples.size) + 1j * rng.standard_normal(samples.size)
    noise *= signal_norm / (np.linalg.norm(noise) * 10.0 ** (snr_db / 20.0))
    return samples + noise


def write_spectrum(spectrum: SparseSpectrum, path) -> None:
    """Write ``#N=<N>`` then one ``omega<TAB>re<TAB>im`` line per coefficient."""
    lines = [f"#N={spectrum.N}"]
    for w, c in spectrum.items():
        lines.append(f"{w}\t{float(c.real)!r}\t{float(c.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_spectrum(path) -> SparseSpectrum:
    N = None
    entries: dict[int, complex] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("#N="):
                N = int(line[3:])
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{lineno}: expected omega<TAB>re<TAB>im")
        w = int(parts[0])
        if w in entries:
            raise ValueError(f"{path}:{lineno}: duplicate frequency {w}")
        entries[w] = complex(float(parts[1]), float(parts[2]))
    if N is None:
        raise ValueError(f"{path}: missing '#N=' header")
    return SparseSpectrum.from_dict(N, entries)

