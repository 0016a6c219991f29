"""Quick self-checks of the core identities, used by ``structfft verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .numtheory import (
    GeneratorPolynomial,
    band_limits,
    crt_reconstruct,
    hashes_well,
    hashes_well_by_coeffs,
    primes_up_to,
    to_signed_band,
)
from .spectrum import SparseSpectrum, alias_project, dft, dft_direct, generate_block_support, sample_vector
from .structured import extract_b_vector, recover_block


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _random_spectrum(rng, N, size):
    lo, hi = band_limits(N)
    freqs = rng.choice(np.arange(lo, hi + 1), size=min(size, N), replace=False)
    coeffs = rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)
    return SparseSpectrum(N, freqs, coeffs)


def check_crt_roundtrip(N: int = 2**10) -> CheckResult:
    moduli = (7, 11, 17)
    lo, hi = band_limits(N)
    P = int(np.prod(moduli))
    bad = [w for w in range(lo, hi + 1)
           if to_signed_band(crt_reconstruct([(w % m, m) for m in moduli]), P, N) != w]
    return CheckResult("crt round trip", not bad, f"{N} frequencies, {len(bad)} mismatches")


def check_hashing_equivalence(cases: int = 2000, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    primes = primes_up_to(100)
    mismatches = 0
    for _ in range(cases):
        B = int(rng.integers(2, 20))
        d = int(rng.integers(1, B))
        p = int(rng.choice([q for q in primes if q > B]))
        coeffs = [int(c) for c in rng.integers(-3, 4, size=d + 1) * rng.choice([1, p], size=d + 1)]
        if not any(coeffs[1:]):
            coeffs[1] = p
        poly = GeneratorPolynomial(tuple(coeffs), B)
        mismatches += hashes_well(poly, p) != hashes_well_by_coeffs(poly, p)
    return CheckResult("well-hashing characterisation", mismatches == 0, f"{cases} cases")


def check_aliasing(cases: int = 200, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        N = int(rng.integers(2, 500))
        spec = _random_spectrum(rng, N, int(rng.integers(0, 12)))
        m = int(rng.integers(1, 300))
        worst = max(worst, np.max(np.abs(dft(sample_vector(spec, m, "direct")) - alias_project(spec, m))))
    return CheckResult("aliasing identity", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_dft(cases: int = 50, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for m in list(range(1, 33)) + [int(x) for x in rng.integers(33, 2000, size=cases)]:
        v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        ref = dft_direct(v)
        worst = max(worst, np.linalg.norm(dft(v) - ref) / max(np.linalg.norm(ref), 1e-300))
    return CheckResult("fast DFT against direct sum", worst <= 1e-11, f"max relative error {worst:.2e}")


def check_b_vector(cases: int = 200, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    choices = [(3, 2), (5, 4), (15, 8), (21, 16), (7, 11), (35, 3), (13, 32)]
    worst = 0.0
    for _ in range(cases):
        st, u = choices[int(rng.integers(len(choices)))]
        N = int(rng.integers(2, 2000))
        spec = _random_spectrum(rng, N, int(rng.integers(1, 15)))
        nu = int(rng.integers(u))
        got = extract_b_vector(dft(sample_vector(spec, st * u, "direct")), nu, st, u)
        want = np.zeros(st, dtype=complex)
        for w, c in spec.items():
            if w % u == nu:
                want[w % st] += c
        worst = max(worst, np.max(np.abs(got - want)))
    return CheckResult("residue slice extraction", worst <= 1e-10, f"max deviation {worst:.2e}")


def check_block_recovery(trials: int = 5, N: int = 2**16, n: int = 2, B: int = 8) -> CheckResult:
    failures = 0
    for seed in range(trials):
        _, spec = generate_block_support(np.random.default_rng(seed), N, n, B)
        res = recover_block(spec, N, n, B)
        err = np.max(np.abs(res.to_spectrum().lookup(spec.freqs) - spec.coeffs))
        failures += not (np.array_equal(np.sort(res.frequencies), spec.freqs) and err < 1e-8)
    return CheckResult("noiseless block recovery", failures == 0, f"{trials - failures}/{trials} exact")


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "crt": check_crt_roundtrip,
    "hashing": check_hashing_equivalence,
    "dft": check_dft,
    "aliasing": check_aliasing,
    "bvector": check_b_vector,
    "block": check_block_recovery,
}


def run_checks(names=None) -> list[CheckResult]:
    names = list(CHECKS) if not names else names
    return [CHECKS[name]() for name in names]
