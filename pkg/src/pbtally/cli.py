"""Command line for counting, verifying, and generating OPB instances.

Count results go to stdout as a single ``s mc <count>`` line; everything
else (a JSON report with status, configuration, and optional search
statistics) goes to stderr so pipelines can consume the count alone.

Exit codes: 0 success, 1 failed verification, 2 usage or parse error,
10 timeout, 20 memory budget exceeded.

Some options have environment fallbacks (PBTALLY_HEURISTIC,
PBTALLY_TIMEOUT, PBTALLY_MAX_CACHE_MB, PBTALLY_SEED); explicit flags
always win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .counter import (CounterConfig, MemoryBudgetExceeded, ModelCounter,
                      SolveTimeout, count_models)
from .formula import OpbParseError, parse_opb
from .generators import gen_auction, gen_knapsack, gen_sensor
from .oracle import ENUMERATION_LIMIT, brute_count

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_TIMEOUT = 10
EXIT_MEMOUT = 20


def _report(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def _env_override(value, name: str, cast):
    if value is not None:
        return value
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit("%s: cannot parse %r" % (name, raw))


def _read_formula(path: str):
    if path == "-":
        return parse_opb(sys.stdin.read())
    with open(path, "rb") as handle:
        return parse_opb(handle.read())


def _build_config(args, saturate_keys=None, heuristic=None) -> CounterConfig:
    heur = heuristic or _env_override(args.heuristic, "PBTALLY_HEURISTIC", str) or "vcis"
    timeout = _env_override(args.timeout, "PBTALLY_TIMEOUT", float)
    cache_mb = _env_override(args.max_cache_mb, "PBTALLY_MAX_CACHE_MB", float)
    if cache_mb is None:
        cache_mb = 256.0
    seed = _env_override(args.seed, "PBTALLY_SEED", int)
    if seed is None:
        seed = 0
    memory_mb = getattr(args, "max_memory_mb", None)
    return CounterConfig(
        heuristic=heur,
        vcis_static_only=getattr(args, "vcis_static_only", False),
        saturate_keys=not args.no_key_saturation if saturate_keys is None else saturate_keys,
        max_cache_bytes=int(cache_mb * (1 << 20)),
        max_memory_bytes=None if memory_mb is None else int(memory_mb * (1 << 20)),
        timeout_s=timeout,
        seed=seed,
        fingerprint_cache=getattr(args, "unsafe_fingerprint_cache", False),
    )


def _config_echo(config: CounterConfig) -> dict:
    return {
        "heuristic": config.heuristic,
        "vcis_static_only": config.vcis_static_only,
        "saturate_keys": config.saturate_keys,
        "max_cache_bytes": config.max_cache_bytes,
        "max_memory_bytes": config.max_memory_bytes,
        "timeout_s": config.timeout_s,
        "seed": config.seed,
        "fingerprint_cache": config.fingerprint_cache,
    }


def _cmd_count(args) -> int:
    try:
        formula = _read_formula(args.file)
    except (OpbParseError, OSError) as exc:
        _report({"status": "error", "command": "count", "error": str(exc)})
        return EXIT_USAGE
    config = _build_config(args)
    started = time.monotonic()
    try:
        result = count_models(formula, config)
    except SolveTimeout as exc:
        _report({"status": "timeout", "command": "count", "file": args.file,
                 "error": str(exc), "config": _config_echo(config)})
        return EXIT_TIMEOUT
    except MemoryBudgetExceeded as exc:
        _report({"status": "memout", "command": "count", "file": args.file,
                 "error": str(exc), "config": _config_echo(config)})
        return EXIT_MEMOUT
    elapsed = time.monotonic() - started
    print("s mc %d" % result.count)
    payload = {
        "status": "counted",
        "command": "count",
        "file": args.file,
        "count": result.count,
        "num_vars": formula.num_vars,
        "num_constraints": len(formula.constraints),
        "config": _config_echo(config),
        "elapsed_s": round(elapsed, 6),
    }
    if args.stats:
        payload["stats"] = result.stats.as_dict()
    _report(payload)
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        formula = _read_formula(args.file)
    except (OpbParseError, OSError) as exc:
        _report({"status": "error", "command": "verify", "error": str(exc)})
        return EXIT_USAGE
    if formula.num_vars > ENUMERATION_LIMIT:
        _report({"status": "error", "command": "verify",
                 "error": "verification enumerates all assignments and is "
                          "limited to %d variables, got %d"
                          % (ENUMERATION_LIMIT, formula.num_vars)})
        return EXIT_USAGE

    counts = {}
    first = True
    for heuristic in ("vcis", "baseline"):
        for saturate in (True, False):
            config = _build_config(args, saturate_keys=saturate, heuristic=heuristic)
            counter = ModelCounter(formula, config)
            if first and args.corrupt_cache_after is not None:
                counter.cache.debug_corrupt_after = args.corrupt_cache_after
            first = False
            try:
                result = counter.run()
            except SolveTimeout as exc:
                _report({"status": "timeout", "command": "verify",
                         "file": args.file, "error": str(exc)})
                return EXIT_TIMEOUT
            except MemoryBudgetExceeded as exc:
                _report({"status": "memout", "command": "verify",
                         "file": args.file, "error": str(exc)})
                return EXIT_MEMOUT
            label = "%s_%s" % (heuristic, "saturated" if saturate else "raw")
            counts[label] = result.count
    counts["exhaustive"] = brute_count(formula).count

    values = set(counts.values())
    passed = len(values) == 1
    payload = {
        "status": "pass" if passed else "fail",
        "command": "verify",
        "file": args.file,
        "counts": counts,
    }
    _report(payload)
    if passed:
        print("s verify PASS mc %d" % counts["exhaustive"])
        return EXIT_OK
    print("s verify FAIL")
    return EXIT_VERIFY_FAIL


def _cmd_generate(args) -> int:
    if args.family == "knapsack":
        text = gen_knapsack(items=args.items, dims=args.dims,
                            max_coeff=args.max_coeff,
                            capacity_fraction=args.capacity_fraction,
                            seed=args.gen_seed)
    elif args.family == "auction":
        text = gen_auction(bids=args.bids, items=args.auction_items,
                           max_price=args.max_price,
                           revenue_fraction=args.revenue_fraction,
                           max_bundle=args.max_bundle, seed=args.gen_seed)
    else:
        text = gen_sensor(sensors=args.sensors, targets=args.targets,
                          max_cover=args.max_cover, cost_aware=args.cost_aware,
                          max_cost=args.max_cost,
                          budget_fraction=args.budget_fraction,
                          redundancy_rate=args.redundancy_rate,
                          seed=args.gen_seed)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as handle:
            handle.write(text)
    return EXIT_OK


def _add_count_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("file", help="OPB input path, or - for stdin")
    parser.add_argument("--heuristic", choices=("vcis", "baseline"), default=None,
                        help="branching heuristic (default vcis)")
    parser.add_argument("--vcis-static-only", action="store_true",
                        help="ignore conflict activity, branch on static scores alone")
    parser.add_argument("--no-key-saturation", action="store_true",
                        help="store raw residual degrees in cache keys")
    parser.add_argument("--timeout", type=float, default=None, metavar="SECONDS",
                        help="wall-clock budget for the count")
    parser.add_argument("--max-cache-mb", type=float, default=None, metavar="MB",
                        help="component cache budget (default 256)")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for cache eviction tie-breaking (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbtally",
        description="Exact model counter for pseudo-Boolean (OPB) formulas.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_count = sub.add_parser("count", help="count the models of one instance")
    _add_count_options(p_count)
    p_count.add_argument("--max-memory-mb", type=float, default=None, metavar="MB",
                         help="abort with exit code 20 above this accounted footprint")
    p_count.add_argument("--unsafe-fingerprint-cache", action="store_true",
                         help="hash cache keys to 16 bytes; collisions would "
                              "silently corrupt counts")
    p_count.add_argument("--stats", action="store_true",
                         help="include search statistics in the stderr report")
    p_count.set_defaults(func=_cmd_count)

    p_verify = sub.add_parser(
        "verify",
        help="recount under four configurations plus exhaustive enumeration")
    p_verify.add_argument("file", help="OPB input path, or - for stdin")
    p_verify.add_argument("--heuristic", default=None, help=argparse.SUPPRESS)
    p_verify.add_argument("--timeout", type=float, default=None, metavar="SECONDS",
                          help="wall-clock budget per configuration")
    p_verify.add_argument("--max-cache-mb", type=float, default=None, metavar="MB")
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.add_argument("--no-key-saturation", action="store_true",
                          help=argparse.SUPPRESS)
    p_verify.add_argument("--corrupt-cache-after", type=int, default=None,
                          metavar="N", help="test hook: corrupt the Nth cache "
                          "store of the first run; verification must then fail")
    p_verify.set_defaults(func=_cmd_verify)

    p_gen = sub.add_parser("generate", help="emit a seeded benchmark instance")
    gen_sub = p_gen.add_subparsers(dest="family", required=True)

    g_knap = gen_sub.add_parser("knapsack", help="multi-dimensional knapsack")
    g_knap.add_argument("--items", type=int, default=20)
    g_knap.add_argument("--dims", type=int, default=2)
    g_knap.add_argument("--max-coeff", type=int, default=10)
    g_knap.add_argument("--capacity-fraction", type=float, default=0.5)

    g_auct = gen_sub.add_parser("auction", help="combinatorial auction")
    g_auct.add_argument("--bids", type=int, default=12)
    g_auct.add_argument("--items", type=int, default=8, dest="auction_items")
    g_auct.add_argument("--max-price", type=int, default=20)
    g_auct.add_argument("--revenue-fraction", type=float, default=0.3)
    g_auct.add_argument("--max-bundle", type=int, default=4)

    g_sens = gen_sub.add_parser("sensor", help="sensor placement coverage")
    g_sens.add_argument("--sensors", type=int, default=10)
    g_sens.add_argument("--targets", type=int, default=12)
    g_sens.add_argument("--max-cover", type=int, default=4)
    g_sens.add_argument("--cost-aware", action="store_true")
    g_sens.add_argument("--max-cost", type=int, default=10)
    g_sens.add_argument("--budget-fraction", type=float, default=0.5)
    g_sens.add_argument("--redundancy-rate", type=float, default=0.25)

    for g in (g_knap, g_auct, g_sens):
        g.add_argument("--seed", type=int, default=0, dest="gen_seed")
        g.add_argument("-o", "--output", default="-",
                       help="output path (default stdout)")
        g.set_defaults(func=_cmd_generate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        _report({"status": "error", "command": args.command, "error": str(exc)})
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
