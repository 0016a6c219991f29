"""Command line interface: ``structfft {gen,recover,bench,noise-sweep,verify,tune}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import bench, verify
from .spectrum import read_spectrum, write_spectrum


def _snr(text: str) -> float | None:
    if text.lower() in ("none", "inf", "+inf"):
        return None
    return float(text)


def _values(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_trial_flags(p: argparse.ArgumentParser, alg_choices=bench.ALGORITHMS, multi_alg=False) -> None:
    p.add_argument("--N", type=int, default=2**22, help="bandwidth")
    p.add_argument("--n", type=int, default=3, help="number of support sets / blocks")
    p.add_argument("--B", type=int, default=16, help="values per support set (block length)")
    p.add_argument("--d", type=int, default=1, help="polynomial degree bound; 1 means blocks")
    if multi_alg:
        p.add_argument("--alg", default="fast", help=f"comma separated subset of {','.join(alg_choices)}")
    else:
        p.add_argument("--alg", choices=alg_choices, default="fast")
    p.add_argument("--snr", type=_snr, default=None, help="SNR in dB; omit or 'inf' for noiseless")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--k-mult", type=int, default=None, help="multiplier in the count of s-primes")
    p.add_argument("--subset-size", type=int, default=None, help="FASTR subset size")
    p.add_argument("--u", type=int, default=None, help="hashing modulus for single-prime")


def _config(args, **overrides) -> bench.TrialConfig:
    fields = dict(
        N=args.N, n=args.n, B=args.B, d=args.d, algorithm=args.alg, snr_db=args.snr,
        seed=args.seed, trials=args.trials, k_mult=args.k_mult, subset_size=args.subset_size, u=args.u,
    )
    fields.update(overrides)
    return bench.TrialConfig(**fields)


def _parse_algs(text: str) -> list[str]:
    algs = [a.strip() for a in text.split(",") if a.strip()]
    for a in algs:
        if a not in bench.ALGORITHMS:
            raise SystemExit(f"unknown algorithm {a!r}; choose from {', '.join(bench.ALGORITHMS)}")
    return algs


def cmd_gen(args) -> int:
    cfg = _config(args, algorithm="fast" if args.d == 1 else "general")
    spec, polys = bench.trial_signal(cfg, 0)
    write_spectrum(spec, args.out)
    print(f"wrote {len(spec)} coefficients from {len(polys)} generators to {args.out}")
    return 0


def cmd_recover(args) -> int:
    if args.input:
        truth = read_spectrum(args.input)
        cfg = _config(args, N=truth.N)
    else:
        cfg = _config(args)
        truth, _ = bench.trial_signal(cfg, 0)
    result = bench.run_algorithm(cfg, truth, 0)
    print(f"# algorithm={cfg.algorithm} N={cfg.N} samples_used={result.samples_used} recovered={len(result)}")
    for w, c in zip(result.frequencies.tolist(), result.coefficients.tolist()):
        print(f"{w}\t{c.real!r}\t{c.imag!r}")
    print(f"# support_exact={bench.support_exact(truth, result)} "
          f"avg_l1_support_error={bench.avg_l1_support_error(truth, result)!r}")
    return 0


def _emit(records, out) -> None:
    if out:
        bench.write_csv(records, out)
    else:
        sys.stdout.write(bench.records_to_csv(records))


def cmd_bench(args) -> int:
    algs = _parse_algs(args.alg)
    cfg = _config(args, algorithm=algs[0])
    if args.axis is None:
        records = []
        for alg in algs:
            records.extend(bench.run_experiment(replace(cfg, algorithm=alg), timing=not args.no_timing,
                                                first_run_id=len(records)))
    else:
        values = [None if v == float("inf") else v for v in _values(args.values)] if args.values else []
        records = bench.sweep(args.axis, values, cfg, algs, timing=not args.no_timing)
    _emit(records, args.out)
    return 0


def cmd_noise_sweep(args) -> int:
    algs = _parse_algs(args.alg)
    values = _values(args.values)
    records = bench.sweep("snr", values, _config(args, algorithm=algs[0]), algs, timing=not args.no_timing)
    _emit(records, args.out)
    for row in bench.summarize(records, "snr"):
        print(f"# {row['algorithm']} snr={row['snr']} success={row['success_rate']:.2f} "
              f"l1={row['avg_l1_support_error']:.3e}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    unknown = [c for c in args.checks if c not in verify.CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    results = verify.run_checks(args.checks)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def cmd_tune(args) -> int:
    cfg = _config(args, algorithm="fastr", subset_size=1)
    size = bench.tune_subset_size(cfg, target=args.target, calibration_trials=args.trials)
    print(size)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="structfft", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random structured spectrum to a file")
    _add_trial_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("recover", help="run one recovery and print the recovered coefficients")
    _add_trial_flags(p)
    p.add_argument("--in", dest="input", default=None, help="spectrum file from 'gen'")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("bench", help="run trials, optionally sweeping one parameter, and write CSV")
    _add_trial_flags(p, multi_alg=True)
    p.add_argument("--axis", choices=bench.SWEEP_AXES, default=None)
    p.add_argument("--values", default="", help="comma separated ascending values for --axis")
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p.add_argument("--no-timing", action="store_true", help="write runtime_ns=0 for reproducible output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("noise-sweep", help="sweep the SNR axis and write CSV")
    _add_trial_flags(p, multi_alg=True)
    p.add_argument("--values", default="0,10,20,30,40,50,60")
    p.add_argument("--out", default=None)
    p.add_argument("--no-timing", action="store_true")
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("verify", help="run the built-in invariant checks")
    p.add_argument("checks", nargs="*", metavar="CHECK", help=f"subset of {', '.join(verify.CHECKS)} (default all)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tune", help="smallest FASTR subset size reaching the target success rate")
    _add_trial_flags(p)
    p.add_argument("--target", type=float, default=0.9)
    p.set_defaults(func=cmd_tune, trials=20)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
