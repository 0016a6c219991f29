from __future__ import annotations

import numpy as np
import pytest

from structfft.core import (
    CandidateTable,
    ColumnView,
    componentwise_lower_median,
    median_estimate,
    solve_all_columns,
    solve_column,
    top_by_magnitude,
)
from structfft.numtheory import band_limits, build_scheme_block, build_scheme_single_prime
from structfft.spectrum import SparseSpectrum, alias_project

S_PRIMES = (11, 13, 17, 19, 23)
T_PRIMES = (3, 5, 7)


def restricted_vector(spec, length, nu, u):
    """Brute force: entry j sums c_omega over omega = j mod length and omega = nu mod u."""
    out = np.zeros(length, dtype=complex)
    for w, c in spec.items():
        if w % u == nu:
            out[w % length] += c
    return out


def view_for(spec, s, t, nu, u, perturb=None):
    rows = []
    for sk in s:
        row = []
        for tl in (1,) + tuple(t):
            vec = restricted_vector(spec, sk * tl, nu, u)
            if perturb is not None:
                vec = vec + perturb(vec.size)
            row.append(vec)
        rows.append(tuple(row))
    return ColumnView(tuple(s), tuple(t), tuple(rows), nu, u, spec.N)


def column_spectrum(rng, N, count, nu, u):
    lo, hi = band_limits(N)
    pool = np.arange(lo, hi + 1)
    pool = pool[pool % u == nu]
    freqs = rng.choice(pool, size=count, replace=False)
    return SparseSpectrum(N, freqs, rng.uniform(0.5, 2, count) * np.exp(2j * np.pi * rng.uniform(size=count)))


class TestMedian:
    def test_singleton(self):
        assert median_estimate([3 + 4j]) == 3 + 4j

    def test_outlier(self):
        assert median_estimate([1, 2, 100]) == 2

    def test_even_count_lower_median(self):
        assert median_estimate([1 + 1j, 2 + 5j, 3 + 2j, 9 + 9j]) == 2 + 2j

    def test_empty(self):
        with pytest.raises(ValueError):
            median_estimate([])

    def test_axis(self):
        vals = np.array([[1, 5], [3, 4], [2, 6]], dtype=complex)
        assert componentwise_lower_median(vals).tolist() == [2, 5]


def test_top_by_magnitude_ties():
    freqs = np.array([9, -4, 3, 5])
    vals = np.array([1.0, -1.0, 2.0, 1j])
    assert top_by_magnitude(freqs, vals, 3).tolist() == [2, 1, 3]


def test_candidate_table_threshold_is_strict():
    table = CandidateTable()
    for _ in range(2):
        table.add(5, 1.0)
    for _ in range(3):
        table.add(7, 1.0)
    assert table.winners(4) == [7]
    assert table.winners(5) == [7]
    assert table.winners(3) == [5, 7]


def test_column_view_validates_lengths():
    with pytest.raises(ValueError):
        ColumnView((5,), (3,), ((np.zeros(5), np.zeros(14)),), 0, 1, 64)
    with pytest.raises(ValueError):
        ColumnView((5,), (3,), ((np.zeros(5), np.zeros(15)),), 2, 2, 64)


class TestSolveColumn:
    def test_single_tone(self):
        spec = SparseSpectrum.from_dict(4096, {1234: 1.0})
        view = view_for(spec, S_PRIMES, T_PRIMES, 1234 % 4, 4)
        assert solve_column(view, 1, 2) == [(1234, 1.0)]
        sol = solve_all_columns(
            [alias_project(spec, sk * 4) for sk in S_PRIMES],
            [[alias_project(spec, sk * tl * 4) for tl in T_PRIMES] for sk in S_PRIMES],
            S_PRIMES, T_PRIMES, 4, 4096, 2,
        )
        assert sol.freqs.tolist() == [1234] and sol.votes.tolist() == [len(S_PRIMES)]

    def test_zero_spectrum(self):
        view = view_for(SparseSpectrum.empty(4096), S_PRIMES, T_PRIMES, 0, 4)
        assert solve_column(view, 2, 4) == []

    @pytest.mark.parametrize("estimation", ["all-pairs", "last"])
    def test_sparse_column_exact(self, estimation):
        rng = np.random.default_rng(0)
        sch = build_scheme_single_prime(2**14, 3, 1, 4, 7, 2)
        for trial in range(10):
            u, nu = 7, int(rng.integers(7))
            spec = column_spectrum(rng, 2**14, 3, nu, u)
            view = view_for(spec, sch.s, sch.t, nu, u)
            got = dict(solve_column(view, 3, 6, estimation))
            assert sorted(got) == spec.freqs.tolist()
            assert max(abs(got[w] - c) for w, c in spec.items()) < 1e-9

    def test_unconstrained_column(self):
        spec = SparseSpectrum.from_dict(1024, {-300: 2.0, 17: -1j})
        view = view_for(spec, (37, 41, 43, 47, 53), (3, 5, 7), 0, 1)
        assert dict(solve_column(view, 2, 4)) == pytest.approx({-300: 2.0, 17: -1j})

    def test_keep_truncates_by_magnitude(self):
        spec = SparseSpectrum.from_dict(1024, {-300: 2.0, 17: -1j, 99: 0.5})
        view = view_for(spec, (37, 41, 43, 47, 53), (3, 5, 7), 0, 1)
        assert [w for w, _ in solve_column(view, 3, 2)] == [-300, 17]

    def test_permuting_primes_does_not_change_output(self):
        rng = np.random.default_rng(4)
        spec = column_spectrum(rng, 2**12, 2, 1, 4)
        noise = lambda size: 1e-3 * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
        view = view_for(spec, S_PRIMES, T_PRIMES, 1, 4, noise)
        perm = [3, 0, 4, 2, 1]
        shuffled = ColumnView(tuple(view.s[i] for i in perm), view.t, tuple(view.vectors[i] for i in perm),
                              view.nu, view.u, view.N)
        assert solve_column(view, 2, 4) == solve_column(shuffled, 2, 4)

    def test_rejects_unknown_estimation(self):
        view = view_for(SparseSpectrum.empty(64), (5,), (), 0, 1)
        with pytest.raises(ValueError):
            solve_column(view, 1, 2, estimation="mean")


@pytest.mark.parametrize("estimation", ["all-pairs", "last"])
@pytest.mark.parametrize("noisy", [False, True])
def test_vectorised_solver_matches_column_solver(estimation, noisy):
    rng = np.random.default_rng(12)
    N = 2**12
    sch = build_scheme_block(N, 2, 6, 2)
    (u,) = sch.u
    lo, hi = band_limits(N)
    freqs = rng.choice(np.arange(lo, hi + 1), size=40, replace=False)
    spec = SparseSpectrum(N, freqs, np.exp(2j * np.pi * rng.uniform(size=40)))

    def long(m):
        vec = alias_project(spec, m)
        if noisy:
            vec = vec + 0.05 * np.random.default_rng(m).standard_normal(m)
        return vec

    short = [long(sk * u) for sk in sch.s]
    refined = [[long(sk * tl * u) for tl in sch.t] for sk in sch.s]
    sol = solve_all_columns(short, refined, sch.s, sch.t, u, N, 4, estimation)
    expected = {}
    for nu in range(u):
        rows = []
        for sk, base, row in zip(sch.s, short, refined):
            full = [base] + list(row)
            rows.append(tuple(restricted_slice(vec, nu, sk * tl, u) for vec, tl in zip(full, (1,) + sch.t)))
        view = ColumnView(sch.s, sch.t, tuple(rows), nu, u, N)
        expected.update(dict(solve_column(view, 2, 4, estimation)))
    assert sorted(expected) == sol.freqs.tolist()
    assert np.allclose([expected[w] for w in sol.freqs.tolist()], sol.estimates, atol=1e-14)


def restricted_slice(vec, nu, st, u):
    # entry j is the unique index congruent to j mod st and nu mod u, found by search
    out = np.empty(st, dtype=complex)
    for j in range(st):
        idx = next(i for i in range(j, st * u, st) if i % u == nu)
        out[j] = vec[idx]
    return out
