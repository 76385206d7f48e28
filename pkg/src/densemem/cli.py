"""Command-line front end: theory queries, single recoveries, sweeps, benchmarks.

Exit codes: 0 on success (a failed retrieval is data, not an error), 2 on
invalid arguments or malformed configuration. The master seed resolves in
order: --master-seed flag, DENSEMEM_MASTER_SEED environment variable,
"master_seed" in the config file, default 0.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

from . import __version__, experiments, theory
from .dynamics import ModelSpec, NetworkState, asynchronous_pass, synchronous_step
from .experiments import SweepPoint, TrialSpec, run_trial
from .patterns import generate_patterns
from .seeding import derive_seed

ENV_MASTER_SEED = "DENSEMEM_MASTER_SEED"

_POINT_KEYS = {
    "model": str,
    "degree": int,
    "tie_policy": str,
    "N": int,
    "M": int,
    "alpha": float,
    "n_flips": int,
    "rho": float,
    "scheduler": str,
    "max_passes": int,
    "target": (int, str),
}

_CONFIG_KEYS = {
    "master_seed": int,
    "n_trials": int,
    "parallelism": int,
    "metric": str,
    "points": list,
}


class ConfigError(ValueError):
    pass


def _check_keys(obj: dict, allowed: dict, where: str) -> None:
    for key, value in obj.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")
        expected = allowed[key]
        if expected is float:
            expected = (int, float)
        if isinstance(value, bool) or not isinstance(value, expected):
            raise ConfigError(f"key {key!r} in {where} has the wrong type")


def _point_from_dict(raw: dict, index: int) -> SweepPoint:
    if not isinstance(raw, dict):
        raise ConfigError(f"points[{index}] must be a JSON object")
    _check_keys(raw, _POINT_KEYS, f"points[{index}]")
    if "model" not in raw or "N" not in raw:
        raise ConfigError(f"points[{index}] needs at least 'model' and 'N'")
    return SweepPoint(
        model_kind=raw["model"],
        degree=raw.get("degree", 3),
        tie_policy=raw.get("tie_policy", "keep"),
        n_neurons=raw["N"],
        n_patterns=raw.get("M"),
        alpha=raw.get("alpha"),
        n_flips=raw.get("n_flips"),
        rho=raw.get("rho"),
        scheduler=raw.get("scheduler", "sync_one_step"),
        max_passes=raw.get("max_passes", 100),
        target=raw.get("target", 0),
    )


def load_sweep_config(path: str) -> dict:
    """Parse and strictly validate a sweep configuration file."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(raw, _CONFIG_KEYS, "config")
    if "points" not in raw or not raw["points"]:
        raise ConfigError("config needs a non-empty 'points' list")
    if raw.get("metric", "success") not in ("success", "residual"):
        raise ConfigError("metric must be 'success' or 'residual'")
    points = [_point_from_dict(p, i) for i, p in enumerate(raw["points"])]
    return {
        "master_seed": raw.get("master_seed"),
        "n_trials": raw.get("n_trials", 100),
        "parallelism": raw.get("parallelism", 1),
        "metric": raw.get("metric", "success"),
        "points": points,
        "raw": raw,
    }


def _resolve_master_seed(flag_value, config_value) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(ENV_MASTER_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{ENV_MASTER_SEED} must be an integer") from exc
    if config_value is not None:
        return config_value
    return 0


def cmd_theory(args) -> int:
    if args.curve is not None:
        if args.curve != "rho":
            raise ConfigError("only --curve rho is supported")
        points = args.points
        print("rho,alpha_star")
        for k in range(points):
            rho = 0.5 * k / points  # grid over [0, 1/2)
            print(f"{rho!r},{theory.alpha_star(rho)!r}")
        return 0
    if args.rho is None and args.n is None:
        raise ConfigError("theory needs --rho, --n or --curve")
    report = theory.threshold_report(
        rho=args.rho, n_degree=args.n, n_neurons=args.neurons
    )
    if args.format == "json":
        print(report.to_json())
    else:
        print(report.to_table())
    return 0


def cmd_recover(args) -> int:
    model = ModelSpec(args.model, degree=args.degree)
    spec = TrialSpec(
        model=model,
        n_neurons=args.neurons,
        n_patterns=args.patterns,
        n_flips=args.flips,
        seed=args.seed,
        scheduler=args.scheduler,
        max_passes=args.max_passes,
        target=0,
    )
    result = run_trial(spec)
    print(f"model              {args.model}")
    print(f"neurons            {args.neurons}")
    print(f"patterns           {args.patterns}")
    print(f"flips              {args.flips}")
    print(f"seed               {args.seed}")
    print(f"scheduler          {args.scheduler}")
    print(f"success            {'yes' if result.success else 'no'}")
    print(f"residual_bits      {result.n_wrong_bits_after}")
    print(f"ties_seen          {result.ties_seen}")
    if result.signal_magnitude_log is not None:
        print(f"log_signal         {result.signal_magnitude_log!r}")
        print(f"log_noise          {result.noise_magnitude_log!r}")
    return 0


def cmd_sweep(args) -> int:
    config = load_sweep_config(args.config)
    master_seed = _resolve_master_seed(args.master_seed, config["master_seed"])
    parallelism = args.parallelism or config["parallelism"]
    points = config["points"]
    if config["metric"] == "residual":
        points = [dataclasses.replace(p, scheduler="to_fixed_point") for p in points]
    out = open(args.output, "w") if args.output else sys.stdout
    results = []
    try:
        if args.format == "csv":
            print(experiments.CSV_HEADER, file=out, flush=True)
        for result in experiments.iter_sweep(
            points, config["n_trials"], master_seed, parallelism
        ):
            results.append(result)
            if args.format == "csv":
                print(result.csv_row(), file=out, flush=True)
        if args.format == "json":
            json.dump([dataclasses.asdict(r) for r in results], out, default=float, indent=2)
            out.write("\n")
    finally:
        if args.output:
            out.close()
            manifest_path = args.output + ".manifest.json"
            with open(manifest_path, "w") as mh:
                mh.write(
                    experiments.sweep_manifest(config["raw"], master_seed, parallelism)
                )
    return 0


def cmd_bench(args) -> int:
    print("model,N,M,sync_steps_per_s,async_passes_per_s")
    for kind in args.models.split(","):
        model = ModelSpec(kind.strip(), degree=args.degree)
        store = generate_patterns(
            args.neurons, args.patterns, derive_seed(args.seed, "bench", 0)
        )
        state = NetworkState.from_pattern(store, store[0])
        t0 = time.perf_counter()
        for _ in range(args.repeats):
            synchronous_step(state, model)
        sync_rate = args.repeats / (time.perf_counter() - t0)
        t0 = time.perf_counter()
        for _ in range(args.repeats):
            asynchronous_pass(state, model)
        async_rate = args.repeats / (time.perf_counter() - t0)
        print(
            f"{model.kind},{args.neurons},{args.patterns},"
            f"{sync_rate:.1f},{async_rate:.1f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densemem",
        description="Dense associative memory simulator and capacity experiments",
    )
    parser.add_argument("--version", action="version", version=f"densemem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_theory = sub.add_parser("theory", help="closed-form thresholds and constants")
    p_theory.add_argument("--rho", type=float, help="corruption radius fraction in [0, 1/2)")
    p_theory.add_argument("--n", type=int, help="polynomial interaction degree (>= 2)")
    p_theory.add_argument("--neurons", type=int, help="network size for derived pattern counts")
    p_theory.add_argument("--curve", choices=["rho"], help="emit a CSV curve over this variable")
    p_theory.add_argument("--points", type=int, default=11, help="grid size for --curve")
    p_theory.add_argument("--format", choices=["json", "table"], default="table")
    p_theory.set_defaults(func=cmd_theory)

    p_recover = sub.add_parser("recover", help="run one seeded retrieval trial")
    p_recover.add_argument("--model", required=True,
                           choices=["classical", "polynomial", "exponential"])
    p_recover.add_argument("--neurons", type=int, required=True)
    p_recover.add_argument("--patterns", type=int, required=True)
    p_recover.add_argument("--flips", type=int, default=0)
    p_recover.add_argument("--degree", type=int, default=3)
    p_recover.add_argument("--seed", type=int, default=0)
    p_recover.add_argument("--scheduler", default="sync_one_step",
                           choices=list(experiments.SCHEDULERS))
    p_recover.add_argument("--max-passes", type=int, default=100)
    p_recover.set_defaults(func=cmd_recover)

    p_sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--output", help="CSV path; a .manifest.json is written alongside")
    p_sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    p_sweep.add_argument("--master-seed", type=int, default=None)
    p_sweep.add_argument("--parallelism", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", help="micro-benchmark the update kernels")
    p_bench.add_argument("--models", default="classical,polynomial,exponential")
    p_bench.add_argument("--neurons", type=int, default=64)
    p_bench.add_argument("--patterns", type=int, default=32)
    p_bench.add_argument("--degree", type=int, default=3)
    p_bench.add_argument("--repeats", type=int, default=20)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"densemem: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
