"""Command line front end.

    flow run    --problem {nse|natconv|doublediff} [flags] --out records.csv
    flow verify                       # stability property checks
    flow bench  [--dts 1,0.1,0.01]    # scheme timing comparison

Flags override values from an optional --config file of 'key = value' lines.
Exit status: 0 on success, 1 on verification failure, 2 on blow-up,
3 on an energy-bound violation.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .experiments import (
    BoundViolationError,
    ProblemConfig,
    cpu_timing_comparison,
    doublediff_config,
    natconv_config,
    nse_config,
    parse_config_file,
    run_experiment,
    verify_suite,
    write_csv,
)
from .timestepping import BlowUpError

_RUN_KEYS = {
    "problem": str,
    "scheme": str,
    "dt": float,
    "t_end": float,
    "nx": int,
    "ny": int,
    "nu": float,
    "kappa": float,
    "dc": float,
    "ri": float,
    "ra": float,
    "le": float,
    "pr": float,
    "n_ratio": float,
    "out": str,
}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", choices=("nse", "natconv", "doublediff"))
    p.add_argument("--scheme", choices=("blebdf", "bdf2"))
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--nu", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--dc", type=float)
    p.add_argument("--ri", type=float)
    p.add_argument("--ra", type=float)
    p.add_argument("--le", type=float)
    p.add_argument("--pr", type=float)
    p.add_argument("--n-ratio", dest="n_ratio", type=float)
    p.add_argument("--out", type=str)
    p.add_argument("--config", type=str, help="key = value file; flags win")


def _merge_options(args: argparse.Namespace) -> dict:
    opts: dict = {}
    if getattr(args, "config", None):
        raw = parse_config_file(args.config)
        for key, value in raw.items():
            if key not in _RUN_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            opts[key] = _RUN_KEYS[key](value)
    for key in _RUN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    return opts


def build_config(opts: dict) -> ProblemConfig:
    problem = opts.get("problem")
    if problem is None:
        raise ValueError("a problem kind is required (--problem or config file)")
    common_keys = ("scheme", "nx", "ny", "out")
    common = {k: opts[k] for k in common_keys if k in opts}
    if problem == "nse":
        return nse_config(
            nu=opts.get("nu", 1.0),
            dt=opts.get("dt", 0.5),
            t_end=opts.get("t_end", 400.0),
            **common,
        )
    if problem == "natconv":
        return natconv_config(
            nu=opts.get("nu", 0.01),
            dt=opts.get("dt", 0.5),
            t_end=opts.get("t_end", 150.0),
            ri=opts.get("ri", 1.0),
            kappa=opts.get("kappa"),
            **common,
        )
    return doublediff_config(
        ra=opts.get("ra", 1e3),
        le=opts.get("le", 2.0),
        pr=opts.get("pr", 1.0),
        n_ratio=opts.get("n_ratio", 0.8),
        dt=opts.get("dt", 0.1),
        t_end=opts.get("t_end", 10.0),
        **common,
    )


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = build_config(_merge_options(args))
    try:
        records = run_experiment(cfg)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return 2
    except BoundViolationError as exc:
        print(f"bound violation: {exc}", file=sys.stderr)
        return 3
    last = records[-1]
    print(
        f"{cfg.kind}/{cfg.scheme}: {len(records)} steps to t={last.t:g}, "
        f"final |u|={last.l2_u:.6g}"
        + (f", |T|={last.l2_T:.6g}" if last.l2_T is not None else "")
        + (f", |C|={last.l2_C:.6g}" if last.l2_C is not None else "")
    )
    if cfg.out:
        write_csv(records, cfg.out)
        print(f"wrote {cfg.out}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = verify_suite()
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
        failed += 0 if ok else 1
    return 0 if failed == 0 else 1


def _cmd_bench(args: argparse.Namespace) -> int:
    opts = _merge_options(args)
    opts.setdefault("problem", "nse")
    opts.setdefault("t_end", 10.0)
    if opts["problem"] == "nse":
        opts.setdefault("nu", 0.001)
    cfg = build_config(opts)
    dts = [float(s) for s in args.dts.split(",")]
    rows = cpu_timing_comparison(cfg, dts=dts)
    print(f"{'dt':>8}  {'scheme':>8}  {'seconds':>10}")
    for dt, scheme, seconds in rows:
        print(f"{dt:>8g}  {scheme:>8}  {seconds:>10.3f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="flow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configured experiment")
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="run the stability property suite")
    p_verify.set_defaults(func=_cmd_verify)

    p_bench = sub.add_parser("bench", help="compare scheme CPU times")
    _add_run_flags(p_bench)
    p_bench.add_argument("--dts", type=str, default="1,0.1,0.01")
    p_bench.set_defaults(func=_cmd_bench)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
