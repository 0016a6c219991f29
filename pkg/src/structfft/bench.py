"""Experiment runner: seeded trial signals, algorithm dispatch, error metrics,
timing and CSV output."""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.fft

from .numtheory import band_limits, build_scheme_block, next_prime
from .spectrum import SparseSpectrum, generate_block_support, generate_poly_support
from .structured import (
    NoiseConfig,
    RecoveryResult,
    Source,
    make_sampler,
    recover_block,
    recover_block_randomized,
    recover_general,
    recover_single_prime,
)

__all__ = [
    "ALGORITHMS",
    "CSV_HEADER",
    "DENSE_MAX_N",
    "TrialConfig",
    "TrialRecord",
    "dense_oracle",
    "trial_signal",
    "run_algorithm",
    "avg_l1_support_error",
    "l2_error",
    "support_exact",
    "run_experiment",
    "sweep",
    "summarize",
    "tune_subset_size",
    "write_csv",
    "records_to_csv",
]

ALGORITHMS = ("fast", "fastr", "general", "single-prime", "dense")
SWEEP_AXES = ("B", "n", "N", "snr")
DENSE_MAX_N = 2**24
CSV_HEADER = (
    "run_id",
    "algorithm",
    "N",
    "n",
    "B",
    "d",
    "seed",
    "snr_db",
    "samples_used",
    "runtime_ns",
    "support_exact",
    "avg_l1_support_error",
    "l2_error",
)
_DEFAULT_K_MULT = {"fast": 2, "fastr": 2, "general": 8, "single-prime": 8, "dense": None}


@dataclass(frozen=True)
class TrialConfig:
    """Parameters of one experiment; ``k_mult=None`` picks the algorithm's default."""

    N: int
    n: int
    B: int
    d: int = 1
    algorithm: str = "fast"
    snr_db: float | None = None
    seed: int = 0
    trials: int = 1
    k_mult: int | None = None
    subset_size: int | None = None
    u: int | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n < 1 or self.d < 1 or self.B < 1:
            raise ValueError("n, d and B must be positive")
        if self.B * self.n > self.N:
            raise ValueError("B*n exceeds the bandwidth")
        if self.algorithm in ("general", "single-prime") and not self.d < self.B:
            raise ValueError("need d < B")
        if self.algorithm == "fastr" and self.subset_size is None:
            raise ValueError("fastr needs a subset_size")
        if self.algorithm == "dense" and self.N > DENSE_MAX_N:
            raise ValueError(f"dense oracle is capped at N={DENSE_MAX_N}")

    @property
    def effective_k_mult(self) -> int | None:
        return self.k_mult if self.k_mult is not None else _DEFAULT_K_MULT[self.algorithm]

    @property
    def hashing_modulus(self) -> int:
        return self.u if self.u is not None else next_prime(self.B)


@dataclass(frozen=True)
class TrialRecord:
    run_id: int
    algorithm: str
    N: int
    n: int
    B: int
    d: int
    seed: int
    snr_db: float | None
    samples_used: int
    runtime_ns: int
    support_exact: bool
    avg_l1_support_error: float
    l2_error: float

    def row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [fmt(getattr(self, f.name)) for f in fields(self)]


def dense_oracle(source: Source, N: int, count: int, noise: NoiseConfig | None = None) -> RecoveryResult:
    """Full length-``N`` transform followed by best-``count`` selection."""
    if N > DENSE_MAX_N:
        raise ValueError(f"dense oracle is capped at N={DENSE_MAX_N}")
    noise = noise or NoiseConfig()
    samples = noise.apply(make_sampler(source)(N), N)
    coeffs = scipy.fft.fft(samples, norm="forward")
    lo, _ = band_limits(N)
    freqs = np.arange(N, dtype=np.int64) + lo
    values = coeffs[freqs % N]
    order = np.lexsort((freqs, -np.abs(values)))[:count]
    order = order[values[order] != 0]
    return RecoveryResult(N, freqs[order], values[order], samples_used=N, columns_solved=1,
                          votes=np.ones(order.size, dtype=np.int64))


def trial_signal(cfg: TrialConfig, trial: int) -> tuple[SparseSpectrum, list]:
    """Ground truth for one trial: block sparse if ``d == 1``, polynomially structured otherwise."""
    rng = np.random.default_rng([cfg.seed, trial])
    if cfg.d == 1:
        support, spec = generate_block_support(rng, cfg.N, cfg.n, cfg.B)
    else:
        support, spec = generate_poly_support(rng, cfg.N, cfg.n, cfg.d, cfg.B)
    return spec, list(support.polys)


def run_algorithm(cfg: TrialConfig, source: Source, trial: int = 0) -> RecoveryResult:
    noise = NoiseConfig(cfg.snr_db, (cfg.seed, trial))
    k_mult = cfg.effective_k_mult
    alg = cfg.algorithm
    if alg == "fast":
        return recover_block(source, cfg.N, cfg.n, cfg.B, k_mult=k_mult, noise=noise)
    if alg == "fastr":
        rng = np.random.default_rng([cfg.seed, trial, 1])
        return recover_block_randomized(source, cfg.N, cfg.n, cfg.B, cfg.subset_size, rng,
                                        k_mult=k_mult, noise=noise)
    if alg == "general":
        return recover_general(source, cfg.N, cfg.n, cfg.d, cfg.B, k_mult=k_mult, noise=noise)
    if alg == "single-prime":
        return recover_single_prime(source, cfg.N, cfg.n, cfg.d, cfg.B, cfg.hashing_modulus,
                                    k_mult=k_mult, noise=noise)
    return dense_oracle(source, cfg.N, cfg.B * cfg.n, noise)


def support_exact(truth: SparseSpectrum, result: RecoveryResult) -> bool:
    """True when the ``|S|`` largest recovered frequencies are exactly the true support ``S``."""
    S = truth.freqs
    top = np.sort(result.frequencies[: S.size])
    return top.size == S.size and np.array_equal(top, S)


def avg_l1_support_error(truth: SparseSpectrum, result: RecoveryResult, S: np.ndarray | None = None) -> float:
    """Mean of ``|c_omega - x_omega|`` over ``S``; frequencies missing from the result count as ``x = 0``."""
    S = truth.freqs if S is None else np.asarray(S, dtype=np.int64)
    if S.size == 0:
        return 0.0
    estimate = result.to_spectrum().lookup(S)
    return float(np.mean(np.abs(truth.lookup(S) - estimate)))


def l2_error(truth: SparseSpectrum, result: RecoveryResult) -> float:
    """``||c - x_R||_2`` over the union of both supports."""
    freqs = np.union1d(truth.freqs, result.frequencies)
    return float(np.linalg.norm(truth.lookup(freqs) - result.to_spectrum().lookup(freqs)))


def _failed_record(run_id, cfg) -> TrialRecord:
    return TrialRecord(run_id, cfg.algorithm, cfg.N, cfg.n, cfg.B, cfg.d, cfg.seed, cfg.snr_db,
                       0, 0, False, math.nan, math.nan)


def run_experiment(
    cfg: TrialConfig,
    out: str | Path | None = None,
    timing: bool = True,
    first_run_id: int = 0,
) -> list[TrialRecord]:
    """Run ``cfg.trials`` seeded trials.

    Only the recovery call (sampling, transforms and solve) is timed. With
    ``timing=False`` runtimes are written as 0 so the CSV is byte-reproducible.
    A trial that raises yields a record with NaN errors and the run continues.
    """
    records = []
    for trial in range(cfg.trials):
        run_id = first_run_id + trial
        try:
            truth, _ = trial_signal(cfg, trial)
            start = time.perf_counter_ns()
            result = run_algorithm(cfg, truth, trial)
            elapsed = time.perf_counter_ns() - start
        except (ValueError, RuntimeError, ArithmeticError):
            records.append(_failed_record(run_id, cfg))
            continue
        records.append(
            TrialRecord(
                run_id=run_id,
                algorithm=cfg.algorithm,
                N=cfg.N,
                n=cfg.n,
                B=cfg.B,
                d=cfg.d,
                seed=cfg.seed,
                snr_db=cfg.snr_db,
                samples_used=result.samples_used,
                runtime_ns=elapsed if timing else 0,
                support_exact=support_exact(truth, result),
                avg_l1_support_error=avg_l1_support_error(truth, result),
                l2_error=l2_error(truth, result),
            )
        )
    if out is not None:
        write_csv(records, out)
    return records


def _with_axis(cfg: TrialConfig, axis: str, value) -> TrialConfig:
    if axis == "snr":
        return replace(cfg, snr_db=None if value is None else float(value))
    return replace(cfg, **{axis: int(value)})


def sweep(
    axis: str,
    values: Sequence,
    base_cfg: TrialConfig,
    algorithms: Iterable[str] | None = None,
    out: str | Path | None = None,
    timing: bool = True,
) -> list[TrialRecord]:
    """One experiment per (value, algorithm), rows ordered by value then algorithm then trial."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    values = list(values)
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("sweep values must be ascending")
    algorithms = list(algorithms) if algorithms is not None else [base_cfg.algorithm]
    records: list[TrialRecord] = []
    for value in values:
        for alg in algorithms:
            cfg = _with_axis(replace(base_cfg, algorithm=alg), axis, value)
            records.extend(run_experiment(cfg, timing=timing, first_run_id=len(records)))
    if out is not None:
        write_csv(records, out)
    return records


def summarize(records: Sequence[TrialRecord], axis: str = "snr") -> list[dict]:
    """Per (algorithm, axis value): success rate and the mean errors over successful trials only."""
    key_attr = "snr_db" if axis == "snr" else axis
    groups: dict = {}
    for rec in records:
        groups.setdefault((rec.algorithm, getattr(rec, key_attr)), []).append(rec)
    rows = []
    for (alg, value), recs in groups.items():
        ok = [r for r in recs if r.support_exact]
        rows.append(
            {
                "algorithm": alg,
                axis: value,
                "trials": len(recs),
                "success_rate": len(ok) / len(recs),
                "avg_l1_support_error": float(np.mean([r.avg_l1_support_error for r in ok])) if ok else math.nan,
                "l2_error": float(np.mean([r.l2_error for r in ok])) if ok else math.nan,
                "samples_used": float(np.mean([r.samples_used for r in recs])),
                "median_runtime_ns": float(np.median([r.runtime_ns for r in recs])),
            }
        )
    return rows


def tune_subset_size(
    cfg: TrialConfig,
    target: float = 0.9,
    calibration_trials: int = 20,
    calibration_seed: int = 1_000_000,
) -> int:
    """Smallest FASTR subset size reaching ``target`` success on a calibration set.

    Binary search over ``1..K``; the calibration seed is kept apart from the
    evaluation seeds so tuning does not see the trials it is judged on.
    """
    K = build_scheme_block(cfg.N, cfg.n, cfg.B, cfg.effective_k_mult if cfg.algorithm == "fastr" else 2).K
    base = replace(cfg, algorithm="fastr", subset_size=K, trials=calibration_trials, seed=calibration_seed)

    def rate(size: int) -> float:
        recs = run_experiment(replace(base, subset_size=size), timing=False)
        return sum(r.support_exact for r in recs) / len(recs)

    lo, hi = 1, K
    while lo < hi:
        mid = (lo + hi) // 2
        if rate(mid) >= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def records_to_csv(records: Sequence[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def write_csv(records: Sequence[TrialRecord], path: str | Path) -> None:
    Path(path).write_text(records_to_csv(records), encoding="utf-8")
