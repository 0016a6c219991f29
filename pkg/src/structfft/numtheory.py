"""Number-theoretic machinery: primes, Bezout coefficients, CRT, hashing predicates
and the coprime modulus schemes that drive the structured sparse FFT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeneratorPolynomial",
    "PrimeScheme",
    "band_limits",
    "primes_up_to",
    "is_prime",
    "next_prime",
    "extended_gcd",
    "mod_inverse",
    "crt_reconstruct",
    "crt_arrays",
    "to_signed_band",
    "to_signed_band_array",
    "hashes_well",
    "hashes_well_by_coeffs",
    "max_residue_multiplicity",
    "build_scheme_general",
    "build_scheme_block",
    "build_scheme_single_prime",
    "count_well_hashing",
    "single_prime_suffices",
    "separating_count",
]


def band_limits(N: int) -> tuple[int, int]:
    """Inclusive ``(lo, hi)`` of the signed band ``(-ceil(N/2), floor(N/2)]``."""
    return -((N + 1) // 2) + 1, N // 2


def primes_up_to(limit: int) -> list[int]:
    """All primes ``<= limit`` in ascending order (sieve of Eratosthenes)."""
    if limit < 2:
        raise ValueError(f"limit must be >= 2, got {limit}")
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(sieve)]


def is_prime(x: int) -> bool:
    # deterministic trial division; scheme primes stay small
    if x < 2:
        return False
    if x < 4:
        return True
    if x % 2 == 0:
        return False
    for f in range(3, math.isqrt(x) + 1, 2):
        if x % f == 0:
            return False
    return True


def next_prime(x: int, exclude: Iterable[int] = ()) -> int:
    """Smallest prime strictly greater than ``x`` that does not divide any of ``exclude``."""
    excluded = [e for e in exclude if e > 1]
    c = max(x, 1) + 1
    while True:
        if is_prime(c) and all(e % c for e in excluded):
            return c
        c += 1


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, v, w)`` with ``g = gcd(a, b) > 0`` and ``g == v*a + w*b``."""
    if a == 0 and b == 0:
        raise ValueError("extended_gcd(0, 0) is undefined")
    old_r, r = a, b
    old_v, v = 1, 0
    old_w, w = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_v, v = v, old_v - q * v
        old_w, w = w, old_w - q * w
    if old_r < 0:
        old_r, old_v, old_w = -old_r, -old_v, -old_w
    return old_r, old_v, old_w


def mod_inverse(a: int, m: int) -> int:
    if m == 1:
        return 0
    g, v, _ = extended_gcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} has no inverse modulo {m}")
    return v % m


def _check_pairwise_coprime(moduli: Sequence[int]) -> None:
    for i, a in enumerate(moduli):
        if a < 1:
            raise ValueError(f"moduli must be positive, got {a}")
        for b in moduli[i + 1 :]:
            if math.gcd(a, b) != 1:
                raise ValueError(f"moduli {a} and {b} are not coprime")


def crt_reconstruct(residue_pairs: Sequence[tuple[int, int]]) -> int:
    """Unique ``x`` in ``[0, prod m_i)`` with ``x = r_i (mod m_i)`` for every pair."""
    moduli = [m for _, m in residue_pairs]
    _check_pairwise_coprime(moduli)
    x, mod = 0, 1
    for r, m in residue_pairs:
        if not 0 <= r < m:
            raise ValueError(f"residue {r} not in [0, {m})")
        step = ((r - x) % m) * mod_inverse(mod, m) % m
        x += mod * step
        mod *= m
    return x


def crt_arrays(x0: np.ndarray, m0: int, residues: Sequence[np.ndarray], moduli: Sequence[int]):
    """Vectorised CRT: fold ``x = residues[i] (mod moduli[i])`` into ``x = x0 (mod m0)``.

    Returns ``(x, P)`` with ``x`` an int64 array in ``[0, P)``. The caller keeps
    ``P`` below 2**62.
    """
    x = np.asarray(x0, dtype=np.int64).copy()
    mod = int(m0)
    for r, m in zip(residues, moduli):
        inv = mod_inverse(mod % m, m)
        step = ((np.asarray(r, dtype=np.int64) - x) % m) * inv % m
        x += mod * step
        mod *= m
    return x, mod


def to_signed_band(x: int, P: int, N: int) -> int | None:
    """Map a CRT value in ``[0, P)`` into the signed band; ``None`` means out of band."""
    if P < N:
        raise ValueError(f"CRT product {P} smaller than bandwidth {N}")
    lo, hi = band_limits(N)
    if x <= hi:
        return x
    if x >= P + lo:
        return x - P
    return None


def to_signed_band_array(x: np.ndarray, P: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = band_limits(N)
    out = np.where(x > hi, x - P, x)
    valid = (x <= hi) | (x >= P + lo)
    return out, valid


@dataclass(frozen=True)
class GeneratorPolynomial:
    """Integer polynomial ``a_0 + a_1 x + ... + a_d x^d`` evaluated at ``x = 1..B``."""

    coeffs: tuple[int, ...]
    eval_count: int

    def __post_init__(self):
        coeffs = tuple(int(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.eval_count < 1:
            raise ValueError("eval_count must be positive")
        if not any(coeffs[1:]):
            raise ValueError("generator polynomial must be non-constant")

    @property
    def degree(self) -> int:
        return max(k for k, a in enumerate(self.coeffs) if a)

    @property
    def nonconstant(self) -> tuple[int, ...]:
        return self.coeffs[1:]

    def __call__(self, x):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def values(self) -> list[int]:
        return [self(x) for x in range(1, self.eval_count + 1)]

    def in_band(self, N: int) -> bool:
        lo, hi = band_limits(N)
        return all(lo <= v <= hi for v in self.values())


def hashes_well(poly: GeneratorPolynomial, p: int) -> bool:
    """True when the values ``P(1..B)`` fall into more than one residue class mod ``p``."""
    if p <= poly.eval_count:
        raise ValueError(f"hashing modulus {p} must exceed B={poly.eval_count}")
    return len({v % p for v in poly.values()}) > 1


def hashes_well_by_coeffs(poly: GeneratorPolynomial, p: int) -> bool:
    """Coefficient criterion: some non-constant coefficient is not divisible by ``p``.

    Agrees with :func:`hashes_well` whenever ``p`` is prime and ``p > B > d``.
    """
    if p <= poly.eval_count:
        raise ValueError(f"hashing modulus {p} must exceed B={poly.eval_count}")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return any(a % p for a in poly.nonconstant)


def max_residue_multiplicity(polys: Sequence[GeneratorPolynomial], p: int) -> int:
    counts: dict[int, int] = {}
    for poly in polys:
        if p <= poly.eval_count:
            raise ValueError(f"modulus {p} must exceed B={poly.eval_count}")
        for v in set(poly.values()):
            counts[v % p] = counts.get(v % p, 0) + 1
    return max(counts.values(), default=0)


def separating_count(x: int, T: Iterable[int], moduli: Sequence[int]) -> int:
    """Number of moduli that separate ``x`` from every element of ``T - {x}``."""
    others = [t for t in set(T) if t != x]
    return sum(all((x - t) % m for t in others) for m in moduli)


def _floor_log(base: int, num: int, den: int = 1) -> int:
    """Largest ``e >= 0`` with ``base**e <= num/den`` (0 when ``num/den < 1``)."""
    e, power = 0, 1
    while power * base * den <= num:
        power *= base
        e += 1
    return e


def _consecutive_primes(first: int, count: int, exclude: Iterable[int] = ()) -> list[int]:
    out = [first]
    while len(out) < count:
        out.append(next_prime(out[-1], exclude))
    return out


def _smallest_primes_with_product(threshold_num: int, threshold_den: int, exclude=()) -> list[int]:
    """Smallest primes ``t_1 < ... < t_L`` with ``prod_{l<L} < num/den <= prod_{l<=L}``."""
    t: list[int] = []
    prod = 1
    p = 1
    while prod * threshold_den < threshold_num:
        p = next_prime(p, exclude)
        t.append(p)
        prod *= p
    return t


@dataclass(frozen=True)
class PrimeScheme:
    """Coprime modulus families ``t``, ``s`` and hashing moduli ``u``."""

    t: tuple[int, ...]
    s: tuple[int, ...]
    u: tuple[int, ...]
    mode: str
    N: int
    k_mult: int | None = None

    @property
    def L(self) -> int:
        return len(self.t)

    @property
    def K(self) -> int:
        return len(self.s)

    @property
    def M(self) -> int:
        return len(self.u)

    @property
    def t_prod(self) -> int:
        return math.prod(self.t)

    @property
    def t_with_one(self) -> tuple[int, ...]:
        """``(1, t_1, ..., t_L)``; index 0 stands for the unrefined vector."""
        return (1,) + self.t

    def sample_lengths(self, u: int | None = None) -> list[int]:
        us = self.u if u is None else (u,)
        return sorted({sk * tl * um for um in us for sk in self.s for tl in self.t_with_one})

    def total_samples(self) -> int:
        return sum(self.sample_lengths())

    def with_s(self, s: Sequence[int]) -> "PrimeScheme":
        return PrimeScheme(self.t, tuple(sorted(s)), self.u, self.mode, self.N, self.k_mult)

    def with_u(self, u: Sequence[int]) -> "PrimeScheme":
        return PrimeScheme(self.t, self.s, tuple(sorted(u)), self.mode, self.N, self.k_mult)

    def validate(self) -> None:
        """Raise ``ValueError`` if a structural invariant is broken."""
        for name, seq in (("t", self.t), ("s", self.s), ("u", self.u)):
            if list(seq) != sorted(set(seq)):
                raise ValueError(f"{name} must be strictly ascending")
        if not self.s or not self.u:
            raise ValueError("scheme needs at least one s and one u")
        _check_pairwise_coprime(list(self.t) + list(self.s) + list(self.u))
        if self.t and self.t[-1] >= self.s[0]:
            raise ValueError("t_L must be smaller than s_1")
        if self.t_prod * self.s[0] * self.u[0] < self.N:
            raise ValueError("prod(t) * s_1 * u_1 must cover the bandwidth")


def _check_params(N: int, n: int, B: int, d: int = 1) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not d < B < N:
        raise ValueError(f"need d < B < N, got d={d}, B={B}, N={N}")


def build_scheme_general(N: int, n: int, d: int, B: int, k_mult: int = 8) -> PrimeScheme:
    """Prime families for the general polynomially structured algorithm.

    ``t`` are the smallest primes whose product first reaches ``N/(B d n)``,
    ``s_1`` is the next prime above ``max(dn, t_L)`` followed by
    ``K = k_mult*dn*floor(log_{s_1}(N/B)) + 1`` consecutive primes, and the
    ``M = 2(n+1)*floor(log_{u_1} N) + 1`` hashing primes start above ``max(B, s_K)``.
    """
    _check_params(N, n, B, d)
    if k_mult < 1:
        raise ValueError("k_mult must be >= 1")
    dn = d * n
    t = _smallest_primes_with_product(N, B * dn)
    s1 = next_prime(max(dn, t[-1] if t else 1))
    K = k_mult * dn * _floor_log(s1, N, B) + 1
    s = _consecutive_primes(s1, K)
    u1 = next_prime(max(B, s[-1]))
    M = 2 * (n + 1) * _floor_log(u1, N) + 1
    u = _consecutive_primes(u1, M)
    scheme = PrimeScheme(tuple(t), tuple(s), tuple(u), "general", N, k_mult)
    scheme.validate()
    return scheme


def _build_fixed_u(N: int, dn: int, u: int, k_mult: int, mode: str) -> PrimeScheme:
    t = _smallest_primes_with_product(N, u * dn, exclude=(u,))
    s1 = next_prime(max(dn, t[-1] if t else 1), exclude=(u,))
    K = k_mult * dn * _floor_log(s1, N, u) + 1
    s = _consecutive_primes(s1, K, exclude=(u,))
    scheme = PrimeScheme(tuple(t), tuple(s), (u,), mode, N, k_mult)
    scheme.validate()
    return scheme


def build_scheme_block(N: int, n: int, B: int, k_mult: int = 2) -> PrimeScheme:
    """Scheme for block sparse signals with the hashing integer ``u = 2**(floor(log2 B) + 1)``.

    ``t`` runs over odd primes from 3 until the product reaches ``N/(u n)``;
    ``K = k_mult*n*floor(log_{s_1}(N/u)) + 1``.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= B < N:
        raise ValueError(f"need 1 <= B < N, got B={B}, N={N}")
    if k_mult < 1:
        raise ValueError("k_mult must be >= 1")
    u = 1 << B.bit_length()
    return _build_fixed_u(N, n, u, k_mult, "block")


def build_scheme_single_prime(N: int, n: int, d: int, B: int, u: int, k_mult: int = 8) -> PrimeScheme:
    """Scheme with one hashing modulus ``u > B``; ``t`` and ``s`` skip divisors of ``u``."""
    _check_params(N, n, B, d)
    if u <= B:
        raise ValueError(f"hashing modulus u={u} must exceed B={B}")
    if not (is_prime(u) or u & (u - 1) == 0):
        raise ValueError(f"u={u} must be a prime or a power of two")
    if k_mult < 1:
        raise ValueError("k_mult must be >= 1")
    return _build_fixed_u(N, d * n, u, k_mult, "single-prime")


def count_well_hashing(polys: Sequence[GeneratorPolynomial], scheme: PrimeScheme) -> int:
    return sum(all(hashes_well(P, um) for P in polys) for um in scheme.u)


def single_prime_suffices(polys: Sequence[GeneratorPolynomial], u: int) -> bool:
    for P in polys:
        if u <= P.eval_count:
            raise ValueError(f"u={u} must exceed B={P.eval_count}")
    return all(any(a % u for a in P.nonconstant) for P in polys)
