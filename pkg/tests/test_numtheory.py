from __future__ import annotations

import math
from itertools import combinations

import numpy as np
import pytest

from structfft.numtheory import (
    GeneratorPolynomial,
    PrimeScheme,
    band_limits,
    build_scheme_block,
    build_scheme_general,
    build_scheme_single_prime,
    count_well_hashing,
    crt_arrays,
    crt_reconstruct,
    extended_gcd,
    hashes_well,
    hashes_well_by_coeffs,
    is_prime,
    max_residue_multiplicity,
    mod_inverse,
    next_prime,
    primes_up_to,
    single_prime_suffices,
    to_signed_band,
    to_signed_band_array,
)


def test_band_limits():
    assert band_limits(8) == (-3, 4)
    assert band_limits(7) == (-3, 3)
    assert band_limits(1) == (0, 0)


def test_primes_up_to_small():
    assert primes_up_to(10) == [2, 3, 5, 7]
    assert primes_up_to(2) == [2]


def test_primes_up_to_100():
    # frozen from a trial-division count
    primes = primes_up_to(100)
    assert len(primes) == 25
    assert primes[-1] == 97
    assert all(is_prime(p) for p in primes)


def test_primes_up_to_rejects_small_limit():
    with pytest.raises(ValueError):
        primes_up_to(1)


def test_next_prime_with_exclusion():
    assert next_prime(1) == 2
    assert next_prime(13) == 17
    assert next_prime(1, exclude=(32,)) == 3
    assert next_prime(6, exclude=(7 * 11,)) == 13


@pytest.mark.parametrize("a,b,g", [(3, 4, 1), (5, 8, 1), (12, 18, 6), (0, 7, 7), (-4, 6, 2)])
def test_extended_gcd_bezout(a, b, g):
    got, v, w = extended_gcd(a, b)
    assert got == g
    assert v * a + w * b == g


def test_extended_gcd_rejects_zero_pair():
    with pytest.raises(ValueError):
        extended_gcd(0, 0)


def test_mod_inverse():
    assert mod_inverse(3, 7) * 3 % 7 == 1
    with pytest.raises(ValueError):
        mod_inverse(4, 8)


def test_crt_small_system():
    # exhaustive search over 0..29 gives 23
    assert crt_reconstruct([(1, 2), (2, 3), (3, 5)]) == 23


def test_crt_single_congruence():
    assert crt_reconstruct([(0, 11)]) == 0


def test_crt_round_trip_below_product():
    assert crt_reconstruct([(17 % m, m) for m in (4, 9, 25)]) == 17


def test_crt_rejects_common_factor():
    with pytest.raises(ValueError):
        crt_reconstruct([(1, 4), (1, 6)])


def test_crt_rejects_out_of_range_residue():
    with pytest.raises(ValueError):
        crt_reconstruct([(5, 5), (0, 3)])


def test_crt_arrays_matches_scalar():
    moduli = [7, 11, 13]
    x = np.arange(0, 5 * 1001, 7, dtype=np.int64)
    got, P = crt_arrays(x % 5, 5, [x % m for m in moduli], moduli)
    assert P == 5 * 1001
    assert np.array_equal(got, x)


@pytest.mark.parametrize("x,expected", [(3, 3), (27, -3), (15, None), (4, 4), (26, None)])
def test_to_signed_band(x, expected):
    assert to_signed_band(x, 30, 8) == expected


def test_to_signed_band_requires_cover():
    with pytest.raises(ValueError):
        to_signed_band(1, 7, 8)


def test_to_signed_band_array_agrees():
    x = np.arange(30)
    vals, valid = to_signed_band_array(x, 30, 8)
    for xi, v, ok in zip(x, vals, valid):
        scalar = to_signed_band(int(xi), 30, 8)
        assert (scalar is not None) == ok
        if ok:
            assert scalar == v


def test_generator_polynomial_validation():
    with pytest.raises(ValueError):
        GeneratorPolynomial((5, 0, 0), 4)
    P = GeneratorPolynomial((1, 0, 2), 3)
    assert P.degree == 2
    assert P.values() == [3, 9, 19]
    assert P.in_band(64) and not P.in_band(32)


def test_hashes_well_examples():
    assert hashes_well(GeneratorPolynomial((-9, 1), 16), 17)
    assert not hashes_well(GeneratorPolynomial((3, 7), 5), 7)
    # values 3, 9, 19 are 3, 4, 4 mod 5
    assert hashes_well(GeneratorPolynomial((1, 0, 2), 3), 5)


def test_hashes_well_requires_modulus_above_b():
    with pytest.raises(ValueError):
        hashes_well(GeneratorPolynomial((0, 1), 5), 5)


def test_hashes_well_by_coeffs_examples():
    assert not hashes_well_by_coeffs(GeneratorPolynomial((4, 11, 22), 5), 11)
    assert hashes_well_by_coeffs(GeneratorPolynomial((4, 11, 1), 5), 11)
    with pytest.raises(ValueError):
        hashes_well_by_coeffs(GeneratorPolynomial((0, 1), 5), 9)


def test_hashing_characterisations_agree_on_random_cases():
    rng = np.random.default_rng(7)
    primes = primes_up_to(60)
    for _ in range(2000):
        B = int(rng.integers(2, 12))
        d = int(rng.integers(1, B))
        p = int(rng.choice([q for q in primes if q > B]))
        coeffs = list(rng.integers(-4, 5, size=d + 1) * rng.choice([1, p], size=d + 1))
        if not any(coeffs[1:]):
            coeffs[-1] = p
        P = GeneratorPolynomial(tuple(int(c) for c in coeffs), B)
        assert hashes_well(P, p) == hashes_well_by_coeffs(P, p)


def test_max_residue_multiplicity_block_is_one():
    assert max_residue_multiplicity([GeneratorPolynomial((-5, 1), 8)], 11) == 1


def test_max_residue_multiplicity_matches_histogram():
    rng = np.random.default_rng(3)
    polys = [GeneratorPolynomial((int(rng.integers(-50, 50)), int(rng.integers(1, 9)), int(rng.integers(0, 4))), 6)
             for _ in range(3)]
    p = 13
    hist = np.zeros(p, dtype=int)
    for P in polys:
        for v in set(P.values()):
            hist[v % p] += 1
    assert max_residue_multiplicity(polys, p) == hist.max()


def test_well_hashed_set_has_at_most_d_per_residue():
    rng = np.random.default_rng(11)
    for _ in range(300):
        d = int(rng.integers(1, 4))
        B = int(rng.integers(d + 1, 12))
        coeffs = tuple(int(c) for c in rng.integers(-30, 30, size=d + 1))
        if not any(coeffs[1:]):
            continue
        P = GeneratorPolynomial(coeffs, B)
        for p in [q for q in primes_up_to(40) if q > B]:
            if hashes_well(P, p):
                assert max_residue_multiplicity([P], p) <= d


def test_golden_general_scheme():
    # frozen from an independent construction with sympy.nextprime
    sch = build_scheme_general(2**20, 2, 2, 8, 8)
    assert sch.t == (2, 3, 5, 7, 11, 13, 17)
    assert sch.s[0] == 19 and sch.s[-1] == 769 and sch.K == 129
    assert sch.u == (773, 787, 797, 809, 811, 821, 823, 827, 829, 839, 853, 857, 859)
    assert sch.t_prod >= 2**20 // 32
    assert sch.s[0] > max(4, sch.t[-1])
    assert sch.u[0] > max(8, sch.s[-1])


def test_golden_block_scheme():
    sch = build_scheme_block(2**22, 3, 16, 2)
    assert sch.u == (32,)
    assert sch.t == (3, 5, 7, 11, 13, 17)
    assert sch.s == (19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103,
                     107, 109, 113, 127, 131)
    assert sch.total_samples() == 3270432


@pytest.mark.parametrize("B,u", [(32, 64), (16, 32), (1, 2), (31, 32)])
def test_block_hashing_integer(B, u):
    assert build_scheme_block(2**20, 2, B).u == (u,)


def test_block_scheme_bracketing_product():
    sch = build_scheme_block(2**22, 3, 16, 2)
    target = 2**22 / (32 * 3)
    assert math.prod(sch.t[:-1]) < target <= sch.t_prod


def test_degenerate_scheme_without_t():
    sch = build_scheme_general(64, 2, 1, 40, 1)
    assert sch.t == ()
    assert sch.s[0] * sch.u[0] >= 64


@pytest.mark.parametrize("builder", [
    lambda: build_scheme_general(2**16, 2, 2, 8, 2),
    lambda: build_scheme_block(2**18, 2, 8, 2),
    lambda: build_scheme_single_prime(2**16, 2, 2, 8, 11, 2),
    lambda: build_scheme_single_prime(2**16, 2, 1, 8, 16, 2),
])
def test_scheme_invariants(builder):
    sch = builder()
    everything = list(sch.t) + list(sch.s) + list(sch.u)
    assert all(math.gcd(a, b) == 1 for a, b in combinations(everything, 2))
    assert all(sk * um * sch.t_prod >= sch.N for sk in sch.s for um in sch.u)


def test_single_prime_scheme_with_power_of_two_matches_block():
    blk = build_scheme_block(2**20, 3, 16, 2)
    sp = build_scheme_single_prime(2**20, 3, 1, 16, 32, 2)
    assert (blk.t, blk.s, blk.u) == (sp.t, sp.s, sp.u)


def test_single_prime_scheme_skips_u():
    sch = build_scheme_single_prime(2**16, 1, 2, 8, 11, 2)
    assert 11 not in sch.t + sch.s


@pytest.mark.parametrize("args", [(2**10, 0, 1, 4), (2**10, 1, 4, 4), (8, 1, 1, 8)])
def test_general_scheme_rejects_bad_parameters(args):
    with pytest.raises(ValueError):
        build_scheme_general(*args)


def test_scheme_validate_catches_common_factor():
    with pytest.raises(ValueError):
        PrimeScheme((3,), (5, 9), (7,), "general", 100).validate()


def test_count_well_hashing_monic_is_all():
    sch = build_scheme_general(2**16, 2, 1, 8, 1)
    polys = [GeneratorPolynomial((-100, 1), 8), GeneratorPolynomial((500, 1), 8)]
    assert count_well_hashing(polys, sch) == sch.M


def test_count_well_hashing_adversarial():
    sch = build_scheme_general(2**30, 1, 2, 8, 1)
    c = sch.u[0] * sch.u[1]
    P = GeneratorPolynomial((0, c, c), 8)
    assert count_well_hashing([P], sch) == sch.M - 2
    assert 2 * count_well_hashing([P], sch) > sch.M


def test_single_prime_suffices():
    assert single_prime_suffices([GeneratorPolynomial((3, 1, 5), 8)], 11)
    assert not single_prime_suffices([GeneratorPolynomial((3, 11, 22), 8)], 11)
    # gcd of non-constant coefficients below B
    assert all(single_prime_suffices([GeneratorPolynomial((0, 6, 4), 8)], u) for u in (11, 13, 17, 19))


def test_majority_of_hashing_primes_separate_every_band_element():
    from structfft.numtheory import separating_count

    rng = np.random.default_rng(21)
    for N, n in [(2**10, 1), (2**12, 2), (2**12, 3)]:
        sch = build_scheme_general(N, n, 1, 8, 1)
        lo, hi = band_limits(N)
        T = rng.choice(np.arange(lo, hi + 1), size=n + 1, replace=False).tolist()
        for x in range(lo, hi + 1):
            assert 2 * separating_count(x, T, sch.u) > sch.M
