"""Command-line interface.

Subcommands:

* ``sweep-alpha`` — fixed construction ranks, regularization grid; emits
  misalignment/rank/nuclear-norm rows per alpha (full-rank ridge included).
* ``sweep-rank``  — sweeps the construction rank with the automatic, fixed,
  and oracle regularization policies plus the PRESS-tuned full-rank baseline.
* ``validate``    — runs the PRESS-vs-brute-force and ALO-vs-exact-LO oracle
  suites and prints one pass/fail line each.

Every experiment field can come from a YAML config file (--config) and be
overridden by the flag of the same name.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np
import yaml

from .als import AlsConfig
from .experiment import (
    METHOD_FULL_RANK_FIXED,
    METHOD_FULL_RANK_PRESS,
    METHOD_KRON_ALO,
    METHOD_KRON_FIXED,
    METHOD_KRON_ORACLE,
    ExperimentConfig,
    IrSource,
    MethodSpec,
    records_to_csv,
    run_sweep,
    write_csv,
)
from .tensor_ops import KroneckerShape
from .validation import alo_check, press_check


def parse_shape(text: str) -> KroneckerShape:
    parts = [int(p) for p in text.split(",")]
    if len(parts) == 2:
        m1, m2 = parts
        return KroneckerShape(m1, m2, min(m1, m2))
    if len(parts) == 3:
        return KroneckerShape(*parts)
    raise argparse.ArgumentTypeError(f"expected M1,M2[,R], got {text!r}")


def parse_bracket(text: str) -> tuple[float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return parts[0], parts[1]


def parse_ir_source(text: str) -> IrSource:
    """file:PATH | synthetic_lowrank:rank=3,decay=0.5 |
    synthetic_sparse_exponential:delay=8,decay=0.1"""
    kind, _, rest = text.partition(":")
    if kind == "file":
        return IrSource(kind="file", path=rest)
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            params[key.strip()] = value.strip()
    try:
        if kind == "synthetic_lowrank":
            return IrSource(kind=kind, rank=int(params["rank"]), decay=float(params["decay"]))
        if kind == "synthetic_sparse_exponential":
            return IrSource(kind=kind, delay=int(params["delay"]), decay=float(params["decay"]))
    except KeyError as exc:
        raise argparse.ArgumentTypeError(f"{kind} is missing parameter {exc}") from None
    raise argparse.ArgumentTypeError(f"unknown impulse response source {kind!r}")


def parse_method(text: str) -> MethodSpec:
    name, _, rest = text.partition(":")
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, _, value = item.partition("=")
            key = key.strip()
            if key == "r" or key == "grid":
                kwargs[key] = int(value)
            elif key == "alpha":
                kwargs[key] = float(value)
            else:
                raise argparse.ArgumentTypeError(f"unknown method parameter {key!r}")
    return MethodSpec(name=name.strip(), **kwargs)


def parse_snr(text: str) -> float:
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return float(text)


def _ir_source_from_mapping(raw) -> IrSource:
    if isinstance(raw, IrSource):
        return raw
    if isinstance(raw, str):
        return parse_ir_source(raw)
    raw = dict(raw)
    return IrSource(
        kind=raw.pop("kind"),
        path=raw.pop("path", None),
        rank=raw.pop("rank", None),
        decay=raw.pop("decay", None),
        delay=raw.pop("delay", None),
    )


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a YAML-style mapping."""
    kwargs = dict(mapping)
    shape = kwargs.pop("shape")
    if isinstance(shape, KroneckerShape):
        pass
    elif isinstance(shape, str):
        shape = parse_shape(shape)
    elif isinstance(shape, dict):
        m1, m2 = int(shape["m1"]), int(shape["m2"])
        shape = KroneckerShape(m1, m2, int(shape.get("r", min(m1, m2))))
    else:
        shape = KroneckerShape(*[int(v) for v in shape])
    if "ir_source" in kwargs:
        kwargs["ir_source"] = _ir_source_from_mapping(kwargs["ir_source"])
    if "methods" in kwargs:
        kwargs["methods"] = tuple(
            parse_method(m) if isinstance(m, str) else MethodSpec(**m)
            for m in kwargs["methods"]
        )
    if "bracket" in kwargs and isinstance(kwargs["bracket"], str):
        kwargs["bracket"] = parse_bracket(kwargs["bracket"])
    elif "bracket" in kwargs:
        kwargs["bracket"] = tuple(float(v) for v in kwargs["bracket"])
    if "snr_db" in kwargs and isinstance(kwargs["snr_db"], str):
        kwargs["snr_db"] = parse_snr(kwargs["snr_db"])
    if "als" in kwargs and isinstance(kwargs["als"], dict):
        kwargs["als"] = AlsConfig(**kwargs["als"])
    return ExperimentConfig(shape=shape, **kwargs)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file mirroring the experiment fields")
    parser.add_argument("--shape", type=parse_shape, help="M1,M2[,R]")
    parser.add_argument("--n-samples", type=int)
    parser.add_argument("--snr-db", type=parse_snr, help="SNR in dB; 'inf' disables noise")
    parser.add_argument("--ar-coeff", type=float)
    parser.add_argument("--n-realizations", type=int)
    parser.add_argument("--ir-source", type=parse_ir_source)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--bracket", type=parse_bracket, help="LO,HI for the alpha search")
    parser.add_argument("--methods", help="semicolon-separated method specs (expert override)")
    parser.add_argument("--als-iterations", type=int)
    parser.add_argument("--als-rel-tol", type=float)
    parser.add_argument(
        "--no-warm-start", action="store_true",
        help="re-initialize the solver from scratch at every alpha candidate",
    )
    parser.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    parser.add_argument(
        "--measure-time", action="store_true",
        help="record real wall times (makes the CSV non-reproducible)",
    )


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    mapping: dict = {"shape": "8,10"}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise SystemExit(f"config {args.config} must be a mapping")
        mapping.update(loaded)
    for key in ("shape", "n_samples", "snr_db", "ar_coeff", "n_realizations",
                "ir_source", "seed", "bracket"):
        value = getattr(args, key)
        if value is not None:
            mapping[key] = value
    if args.methods is not None:
        mapping["methods"] = [parse_method(p) for p in args.methods.split(";") if p.strip()]
    if args.no_warm_start:
        mapping["warm_start"] = False
    als_kwargs = {}
    if args.als_iterations is not None:
        als_kwargs["iterations"] = args.als_iterations
    if args.als_rel_tol is not None:
        als_kwargs["rel_tol"] = args.als_rel_tol
    if als_kwargs:
        base = mapping.get("als")
        if isinstance(base, dict):
            base.update(als_kwargs)
        else:
            mapping["als"] = als_kwargs
    return config_from_mapping(mapping)


def _emit(records, out_path: str) -> None:
    if out_path == "-":
        sys.stdout.write(records_to_csv(records))
    else:
        write_csv(records, out_path)


def _parse_int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def _cmd_sweep_alpha(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    min_rank = min(cfg.shape.m1, cfg.shape.m2)
    r_set = _parse_int_list(args.r_set) if args.r_set else sorted({2, 4, min_rank} & set(range(1, min_rank + 1)))
    lo, hi = cfg.bracket
    alphas = np.logspace(math.log10(lo), math.log10(hi), args.grid_points)
    methods = [MethodSpec(METHOD_FULL_RANK_FIXED, alpha=float(a)) for a in alphas]
    for r in r_set:
        if not 1 <= r <= min_rank:
            raise SystemExit(f"rank {r} outside [1, {min_rank}]")
        methods.extend(
            MethodSpec(METHOD_KRON_FIXED, r=r, alpha=float(a)) for a in alphas
        )
    cfg = ExperimentConfig(**{**cfg.__dict__, "methods": tuple(methods)})
    _emit(run_sweep(cfg, measure_time=args.measure_time), args.out)
    return 0


def _cmd_sweep_rank(args: argparse.Namespace) -> int:
    cfg = _build_config(args)
    min_rank = min(cfg.shape.m1, cfg.shape.m2)
    r_max = args.r_max if args.r_max is not None else min_rank
    if not 1 <= r_max <= min_rank:
        raise SystemExit(f"--r-max must lie in [1, {min_rank}]")
    if cfg.methods:
        methods = list(cfg.methods)  # explicit method list from config wins
    else:
        methods = [MethodSpec(METHOD_FULL_RANK_PRESS)]
        for r in range(1, r_max + 1):
            methods.append(MethodSpec(METHOD_KRON_ALO, r=r, grid=args.alo_grid))
            methods.append(MethodSpec(METHOD_KRON_FIXED, r=r, alpha=args.fixed_alpha))
            methods.append(MethodSpec(METHOD_KRON_ORACLE, r=r, grid=args.oracle_grid))
    cfg = ExperimentConfig(**{**cfg.__dict__, "methods": tuple(methods)})
    _emit(run_sweep(cfg, measure_time=args.measure_time), args.out)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    results = [
        press_check(n_instances=args.press_instances),
        alo_check(n_seeds=args.alo_seeds),
    ]
    for res in results:
        print(res.line())
    return 0 if all(res.passed for res in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kronfilter",
        description="Low-rank MMSE filter estimation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_alpha = sub.add_parser("sweep-alpha", help="alpha grid at fixed construction ranks")
    _add_config_flags(p_alpha)
    p_alpha.add_argument("--r-set", help="comma-separated construction ranks")
    p_alpha.add_argument("--grid-points", type=int, default=25, help="alpha grid size")
    p_alpha.set_defaults(func=_cmd_sweep_alpha)

    p_rank = sub.add_parser("sweep-rank", help="rank sweep with all selection policies")
    _add_config_flags(p_rank)
    p_rank.add_argument("--r-max", type=int, help="largest construction rank (default min(M1,M2))")
    p_rank.add_argument("--fixed-alpha", type=float, default=1e-8)
    p_rank.add_argument("--oracle-grid", type=int, default=50)
    p_rank.add_argument("--alo-grid", type=int, default=None,
                        help="evaluate ALO on a grid of this size instead of golden section")
    p_rank.set_defaults(func=_cmd_sweep_rank)

    p_val = sub.add_parser("validate", help="run the oracle validation suites")
    p_val.add_argument("--press-instances", type=int, default=20)
    p_val.add_argument("--alo-seeds", type=int, default=10)
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
