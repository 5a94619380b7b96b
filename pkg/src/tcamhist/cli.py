"""``histeval`` command line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import histogram as hc
from .exceptions import CapacityError, TcamHistError
from .prefix import IntRange, range_to_prefixes
from .tcam import DEFAULT_CAPACITY
from .traffic import (
    Constant,
    LogNormal,
    TrafficSpec,
    Uniform,
    entry_count_report,
    expected_packet_count,
    run_eval,
)


def _traffic_spec(args) -> TrafficSpec:
    if args.dist == "lognormal":
        dist = LogNormal(args.mean, args.std)
    elif args.dist == "constant":
        dist = Constant(int(args.value if args.value is not None else args.mean))
    else:
        dist = Uniform(int(args.lo), int(args.hi))
    if args.rate is not None:
        return TrafficSpec(dist, rate_bps=args.rate, frame_size_bytes=args.frame,
                           duration_s=args.duration, seed=args.seed, l1=args.l1)
    return TrafficSpec(dist, count=args.samples, seed=args.seed)


def cmd_run(args):
    config = hc.HistogramConfig(args.min, args.max, args.bins)
    summary = run_eval(config, _traffic_spec(args), args.out, args.format, capacity=args.capacity)
    summary.pop("snapshot")
    text = json.dumps(summary, indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(text + "\n")
    print(text)


def cmd_decompose(args):
    prefixes = range_to_prefixes(IntRange(args.lo, args.hi, args.width))
    digits = (args.width + 3) // 4
    for p in prefixes:
        print(f"{p}  0x{p.value:0{digits}x}/0x{p.mask:0{digits}x}")
    print(f"{len(prefixes)} entries")


def cmd_expected_count(args):
    print(expected_packet_count(args.rate, args.frame, args.duration, l1=args.l1))


def cmd_entries(args):
    rows = entry_count_report(capacity=args.capacity)
    for r in rows:
        verdict = "matches" if r["matches"] else "does not match"
        print(f"{r['convention']}: {r['num_entries']} entries "
              f"({r['relative_deviation']:+.2%} vs 7477, {verdict} within 5%; "
              f"bound {r['worst_case_bound']}, fits {args.capacity}: {r['fits_capacity']})")


def cmd_serve(args):
    import uvicorn

    from .api import create_app
    from .service import HistogramService

    ports = [int(p) for p in args.ports.split(",")]
    service = HistogramService(ports, capacity=args.capacity, poll_interval=args.poll_interval)
    uvicorn.run(create_app(service), host=args.host, port=args.port)


def build_parser():
    parser = argparse.ArgumentParser(prog="histeval", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="stream synthetic RTTs through a compiled histogram")
    run.add_argument("--min", type=int, default=46_000_000, help="lower edge, ns (inclusive)")
    run.add_argument("--max", type=int, default=54_000_000, help="upper edge, ns (exclusive)")
    run.add_argument("--bins", type=int, default=500)
    run.add_argument("--dist", choices=("lognormal", "constant", "uniform"), default="lognormal")
    run.add_argument("--mean", type=float, default=50e6)
    run.add_argument("--std", type=float, default=1e6)
    run.add_argument("--value", type=float, help="constant RTT (defaults to --mean)")
    run.add_argument("--lo", type=float, help="uniform lower bound")
    run.add_argument("--hi", type=float, help="uniform upper bound")
    run.add_argument("--samples", type=int, default=10_000_000)
    run.add_argument("--rate", type=float, help="CBR rate in bit/s; overrides --samples")
    run.add_argument("--frame", type=int, default=1518)
    run.add_argument("--duration", type=float, default=2100.0)
    run.add_argument("--l1", action="store_true", help="count preamble and IFG in --rate")
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--out", help="per-bin output file")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--summary", help="also write the summary JSON here")
    run.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    run.set_defaults(func=cmd_run)

    dec = sub.add_parser("decompose", help="print the ternary prefixes of a range")
    dec.add_argument("--lo", type=int, required=True)
    dec.add_argument("--hi", type=int, required=True)
    dec.add_argument("--width", type=int, default=32)
    dec.set_defaults(func=cmd_decompose)

    cnt = sub.add_parser("expected-count", help="frames sent by a CBR stream")
    cnt.add_argument("--rate", type=float, required=True)
    cnt.add_argument("--frame", type=int, required=True)
    cnt.add_argument("--duration", type=float, required=True)
    cnt.add_argument("--l1", action="store_true")
    cnt.set_defaults(func=cmd_expected_count)

    ent = sub.add_parser("entries", help="entry counts of the 500-bin evaluation histogram")
    ent.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    ent.set_defaults(func=cmd_entries)

    srv = sub.add_parser("serve", help="run the REST control plane")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    srv.add_argument("--ports", default="0", help="comma-separated RX port ids")
    srv.add_argument("--poll-interval", type=float, default=0.5)
    srv.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except CapacityError as exc:
        print(f"histeval: {exc}", file=sys.stderr)
        return 3
    except TcamHistError as exc:
        print(f"histeval: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"histeval: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
