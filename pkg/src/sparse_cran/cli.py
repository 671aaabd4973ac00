"""``sparse-cran`` command line: calibrate, run and report campaigns.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure
(engine failures in some slot, unreadable results, unwritable output).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import __version__
from . import reporting, simulator
from .topology import NetworkConfig, load_config

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

PRESETS = {"desk": NetworkConfig.desk, "full": NetworkConfig, "toy": NetworkConfig.toy}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pair(text, kind=float):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected MACRO,PICO, got {text!r}")
    try:
        return kind(parts[0]), kind(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r}") from None


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _network(args, seed) -> NetworkConfig:
    try:
        if args.config:
            base = load_config(args.config)
        else:
            base = PRESETS[args.preset]()
        return base.replace(rng_seed=seed)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {args.config}") from None
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad config: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sparse-cran", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def network_args(sp):
        sp.add_argument("config", nargs="?", help="INI file with a [network] section")
        sp.add_argument("--preset", choices=sorted(PRESETS), default="desk",
                        help="network preset used when no config file is given")
        sp.add_argument("--slots", type=int, default=200)

    cal = sub.add_parser("calibrate", help="tier-averaged backhaul use of an unconstrained baseline")
    network_args(cal)
    cal.add_argument("--scheme", choices=["strongest_s", "disjoint"], default="strongest_s")
    cal.add_argument("--s", type=int, default=2, dest="S")
    cal.add_argument("--seed", type=int, default=0)
    cal.add_argument("--out", default=None, help="directory for the manifest (default: none)")

    run = sub.add_parser("run", help="run one or more PF campaigns")
    network_args(run)
    run.add_argument("--scheme", default="dynamic",
                     help="comma-separated list from: " + ", ".join(simulator.SCHEMES))
    run.add_argument("--backhaul", type=_pair, default=None, metavar="MACRO,PICO",
                     help="backhaul budgets in Mbps (default: from the config)")
    run.add_argument("--seed", type=_int_list, default=[0], metavar="SEED[,SEED...]")
    run.add_argument("--out", required=True)
    run.add_argument("--s", type=int, default=2, dest="S")
    run.add_argument("--eta1", type=float, default=14.0)
    run.add_argument("--eta2", type=float, default=12.0)
    run.add_argument("--k-max", type=lambda t: _pair(t, int), default=(70, 10), metavar="MACRO,PICO")
    run.add_argument("--bias", type=_pair, default=(0.0, 6.0), metavar="MACRO,PICO",
                     help="static biased clustering offsets in dB")
    run.add_argument("--unconstrained", action="store_true",
                     help="ignore backhaul budgets (default for baselines)")
    run.add_argument("--parallel", type=int, default=1, help="campaigns run concurrently")

    rep = sub.add_parser("report", help="compare result directories against a baseline")
    rep.add_argument("results", nargs="+")
    rep.add_argument("--baseline", required=True)
    rep.add_argument("--out", default=".")
    rep.add_argument("--bins", type=int, default=20)
    return p


def _manifest_path(out) -> Path:
    return Path(out) / "manifest.json"


def cmd_calibrate(args) -> int:
    net = _network(args, args.seed)
    scheme = "baseline:" + ("strongest_s" if args.scheme == "strongest_s" else "disjoint")
    t0 = time.perf_counter()
    (macro, pico), result = simulator.calibrate_backhaul(scheme, net, args.slots, S=args.S,
                                                         return_result=True)
    print(f"{macro:.6g},{pico:.6g}")
    if args.out:
        config = simulator.CampaignConfig(scheme=scheme, num_slots=args.slots, backhaul=False,
                                          S=args.S)
        doc = simulator.manifest_for(config, net, command="calibrate", version=__version__,
                                     calibrated_mbps=[macro, pico],
                                     wall_seconds=time.perf_counter() - t0,
                                     slot_seconds=result.seconds.tolist(),
                                     engine_iterations=result.iterations.tolist())
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _manifest_path(out).write_text(json.dumps(doc, indent=2, default=simulator._json_default))
    return EXIT_RUNTIME if result.failures else EXIT_OK


def _run_one(job):
    config, net, out = job
    t0 = time.perf_counter()
    result = simulator.run_campaign(config, net)
    manifest = simulator.manifest_for(
        config, net, command="run", version=__version__, output=str(out),
        wall_seconds=time.perf_counter() - t0, slot_seconds=result.seconds.tolist(),
        engine_iterations=result.iterations.tolist())
    result.write(out, manifest)
    return str(out), len(result.failures)


def cmd_run(args) -> int:
    schemes = [s for s in args.scheme.split(",") if s]
    for s in schemes:
        if s not in simulator.SCHEMES:
            raise UsageError(f"unknown scheme {s!r}; choose from {', '.join(simulator.SCHEMES)}")
    if args.slots < 1:
        raise UsageError("--slots must be >= 1")
    jobs = []
    many = len(schemes) * len(args.seed) > 1
    for seed in args.seed:
        net = _network(args, seed)
        for s in schemes:
            try:
                config = simulator.CampaignConfig(
                    scheme=s, num_slots=args.slots, backhaul_override=args.backhaul,
                    backhaul=False if args.unconstrained else None, S=args.S, eta1=args.eta1,
                    eta2=args.eta2, k_max=args.k_max, bias_db=args.bias)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
            out = Path(args.out)
            if many:
                out = out / f"{s.replace(':', '_')}_seed{seed}"
            jobs.append((config, net, out))
    for _, _, out in jobs:
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise OSError(f"output directory is not writable: {out}")
    if args.parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            done = list(pool.map(_run_one, jobs))
    else:
        done = [_run_one(j) for j in jobs]
    failed = 0
    for out, n in done:
        print(f"{out}: {n} failed slots" if n else out)
        failed += n
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_report(args) -> int:
    dirs = {}
    for d in list(args.results) + [args.baseline]:
        if not _manifest_path(d).is_file():
            raise UsageError(f"not a result directory (no manifest.json): {d}")
        dirs[str(Path(d))] = simulator.CampaignResult.read(d)
    base = str(Path(args.baseline))
    report = reporting.compare(dirs, baseline=base, bins=args.bins)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_csv(out / "report.csv")
    report.to_json(out / "report.json")
    report.write_cdfs(out)
    for s in report.schemes:
        cells = "  ".join(f"p{p}={v:.3g} Mbps ({s.gains[p]:+.1f}%)" for p, v in s.percentiles.items())
        print(f"{s.name}: {cells}")
    return EXIT_OK


COMMANDS = {"calibrate": cmd_calibrate, "run": cmd_run, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"sparse-cran: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"sparse-cran: failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
