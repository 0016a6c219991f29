"""Deterministic column solver: residue matching, CRT reconstruction, majority votes
and median coefficient estimates.

:func:`solve_column` works on one residue column at a time and is the readable
reference. :func:`solve_all_columns` performs the same computation for every
column of a hashing modulus at once, straight from the long DFT vectors, and is
what the recovery pipelines call.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .numtheory import crt_arrays, extended_gcd, to_signed_band_array

__all__ = [
    "ESTIMATION_MODES",
    "ColumnView",
    "CandidateTable",
    "ColumnSolution",
    "median_estimate",
    "componentwise_lower_median",
    "top_by_magnitude",
    "solve_column",
    "solve_all_columns",
]

ESTIMATION_MODES = ("all-pairs", "last")


def componentwise_lower_median(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Lower median of real and imaginary parts separately along ``axis``."""
    values = np.asarray(values, dtype=np.complex128)
    n = values.shape[axis]
    if n == 0:
        raise ValueError("median of an empty collection")
    idx = (n - 1) // 2
    re = np.take(np.sort(values.real, axis=axis), idx, axis=axis)
    im = np.take(np.sort(values.imag, axis=axis), idx, axis=axis)
    return re + 1j * im


def median_estimate(values: Sequence[complex]) -> complex:
    """Componentwise median; for an even count the lower middle element is used."""
    arr = np.asarray(list(values), dtype=np.complex128)
    return complex(componentwise_lower_median(arr))


def top_by_magnitude(freqs: np.ndarray, values: np.ndarray, keep: int) -> np.ndarray:
    """Positions of the ``keep`` largest ``|values|``; ties go to the smaller frequency."""
    order = np.lexsort((freqs, -np.abs(values)))
    return order[: max(keep, 0)]


@dataclass(frozen=True)
class ColumnView:
    """Residue-restricted short DFT vectors of one column.

    ``vectors[k][l]`` has length ``s[k] * (1, *t)[l]``; entry ``j`` approximates the
    sum of ``c_omega`` over ``omega = j (mod s_k t_l)`` and ``omega = nu (mod u)``.
    """

    s: tuple[int, ...]
    t: tuple[int, ...]
    vectors: tuple[tuple[np.ndarray, ...], ...]
    nu: int
    u: int
    N: int

    def __post_init__(self):
        if not 0 <= self.nu < self.u:
            raise ValueError(f"need 0 <= nu < u, got nu={self.nu}, u={self.u}")
        if len(self.vectors) != len(self.s):
            raise ValueError("one row of vectors per s_k required")
        for sk, row in zip(self.s, self.vectors):
            if len(row) != len(self.t) + 1:
                raise ValueError("each row needs L + 1 vectors")
            for tl, vec in zip((1,) + tuple(self.t), row):
                if len(vec) != sk * tl:
                    raise ValueError(f"vector length {len(vec)} != {sk}*{tl}")

    @property
    def K(self) -> int:
        return len(self.s)

    @property
    def L(self) -> int:
        return len(self.t)


@dataclass
class CandidateTable:
    """Votes per reconstructed frequency, with the entry of the finest vector of each voting ``s_k``."""

    votes: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    estimates: dict[int, list[complex]] = field(default_factory=lambda: defaultdict(list))

    def add(self, omega: int, value: complex) -> None:
        self.votes[omega] += 1
        self.estimates[omega].append(value)

    def winners(self, K: int) -> list[int]:
        return sorted(w for w, c in self.votes.items() if 2 * c > K)


def _column_estimates(view: ColumnView, omegas: np.ndarray, estimation: str) -> np.ndarray:
    levels = range(view.L + 1) if estimation == "all-pairs" else (view.L,)
    moduli = (1,) + tuple(view.t)
    samples = []
    for sk, row in zip(view.s, view.vectors):
        for l in levels:
            samples.append(row[l][omegas % (sk * moduli[l])])
    return componentwise_lower_median(np.array(samples))


def solve_column(
    view: ColumnView,
    sparsity: int,
    keep: int,
    estimation: str = "all-pairs",
) -> list[tuple[int, complex]]:
    """Recover the energetic frequencies of one column.

    For every ``s_k`` and residue ``h`` the base value ``a_0`` is the unique integer
    below ``s_k u`` congruent to ``h`` mod ``s_k`` and ``nu`` mod ``u``. Each refining
    modulus ``t_l`` picks the candidate ``a_0 + b s_k u`` whose entry best matches the
    unrefined entry; the chosen residues are combined by the CRT. Frequencies
    reconstructed for more than half of the ``s_k`` are kept and estimated by
    componentwise medians. ``sparsity`` is accepted for symmetry with the scheme
    parameters; the number returned is governed by ``keep``.
    """
    if estimation not in ESTIMATION_MODES:
        raise ValueError(f"estimation must be one of {ESTIMATION_MODES}")
    if sparsity < 1:
        raise ValueError("sparsity must be >= 1")
    u, nu = view.u, view.nu
    table = CandidateTable()
    for sk, row in zip(view.s, view.vectors):
        _, _, w = extended_gcd(sk, u)
        h = np.arange(sk, dtype=np.int64)
        a0 = ((h - nu) * w % sk) * u + nu
        base = row[0][h]
        residues = []
        for tl, vec in zip(view.t, row[1:]):
            b = np.arange(tl, dtype=np.int64)
            cand = a0[:, None] + b[None, :] * (sk * u)
            diff = np.abs(vec[cand % (sk * tl)] - base[:, None])
            bmin = np.argmin(diff, axis=1)
            residues.append((a0 + bmin * sk * u) % tl)
        x, P = crt_arrays(a0, sk * u, residues, view.t)
        omegas, valid = to_signed_band_array(x, P, view.N)
        kept = omegas[valid]
        for omega, val in zip(kept.tolist(), row[-1][kept % len(row[-1])].tolist()):
            table.add(omega, val)
    winners = np.array(table.winners(view.K), dtype=np.int64)
    if winners.size == 0:
        return []
    est = _column_estimates(view, winners, estimation)
    nz = est != 0
    winners, est = winners[nz], est[nz]
    idx = top_by_magnitude(winners, est, keep)
    return [(int(winners[i]), complex(est[i])) for i in idx]


@dataclass(frozen=True)
class ColumnSolution:
    """Per-column survivors of one hashing modulus ``u``: frequencies, estimates and vote counts."""

    u: int
    freqs: np.ndarray
    estimates: np.ndarray
    votes: np.ndarray
    overloaded: int = 0

    @property
    def columns(self) -> np.ndarray:
        return self.freqs % self.u


def solve_all_columns(
    short: Sequence[np.ndarray],
    refined: Sequence[Sequence[np.ndarray]],
    s: Sequence[int],
    t: Sequence[int],
    u: int,
    N: int,
    keep: int,
    estimation: str = "all-pairs",
    sparsity: int | None = None,
) -> ColumnSolution:
    """Solve all ``u`` columns from the long DFTs of one hashing modulus.

    ``short[k]`` is the DFT of length ``s_k u``, ``refined[k][l]`` the DFT of length
    ``s_k t_l u``. Index ``r`` of ``short[k]`` is exactly the base value ``a_0`` of the
    column ``nu = r mod u`` at residue ``h = r mod s_k``, and the candidates
    ``r + b s_k u`` index ``refined[k][l]`` directly, so no reindexing is needed.
    """
    if estimation not in ESTIMATION_MODES:
        raise ValueError(f"estimation must be one of {ESTIMATION_MODES}")
    K = len(s)
    found = []
    for sk, base, row in zip(s, short, refined):
        width = sk * u
        r = np.arange(width, dtype=np.int64)
        residues = []
        for tl, vec in zip(t, row):
            grid = np.asarray(vec).reshape(tl, width)
            bmin = np.argmin(np.abs(grid - base[None, :]), axis=0)
            residues.append((r + bmin * width) % tl)
        x, P = crt_arrays(r, width, residues, t)
        omegas, valid = to_signed_band_array(x, P, N)
        found.append(omegas[valid])
    if not found:
        empty = np.zeros(0, dtype=np.int64)
        return ColumnSolution(u, empty, np.zeros(0, dtype=np.complex128), empty)
    cand, counts = np.unique(np.concatenate(found), return_counts=True)
    winners = cand[2 * counts > K]
    votes = counts[2 * counts > K]
    if winners.size == 0:
        return ColumnSolution(u, winners, np.zeros(0, dtype=np.complex128), votes)

    samples = []
    for sk, base, row in zip(s, short, refined):
        if estimation == "all-pairs":
            samples.append(base[winners % len(base)])
            samples.extend(vec[winners % len(vec)] for vec in row)
        else:
            vec = row[-1] if len(row) else base
            samples.append(vec[winners % len(vec)])
    est = componentwise_lower_median(np.array(samples))

    nz = est != 0
    winners, est, votes = winners[nz], est[nz], votes[nz]
    cols = winners % u
    order = np.lexsort((winners, -np.abs(est), cols))
    cols_sorted = cols[order]
    starts = np.searchsorted(cols_sorted, cols_sorted, side="left")
    rank = np.arange(order.size) - starts
    sel = np.sort(order[rank < keep])
    overloaded = 0
    if sparsity is not None and cols.size:
        overloaded = int(np.count_nonzero(np.bincount(cols, minlength=u) > sparsity))
    return ColumnSolution(u, winners[sel], est[sel], votes[sel], overloaded)
