"""``bkmodes`` command line: ingest, synth, run, matrix, report.

Exit codes: 0 when every run completed, 2 when any run (or its input) failed,
64 on a usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import (AGGREGATES, FORMATS, UsageError, emit_report, load_report,
                    matrix_specs, run_matrix, RunSpec)
from .dataset import ContractError
from .engine import EngineConfig
from .ingest import (PROFILES, FormatError, IngestError, get_profile, ingest_csv,
                     load_dataset, save_encoded, synth_generate)
from .init import METHODS

EXIT_OK = 0
EXIT_FAILED = 2
EXIT_USAGE = 64

log = logging.getLogger("bkmodes")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _profile_args(p):
    p.add_argument("--profile", choices=sorted(PROFILES), default="generic")
    p.add_argument("--delimiter", default=None, help="field separator (default: profile's)")
    hdr = p.add_mutually_exclusive_group()
    hdr.add_argument("--header", dest="has_header", action="store_true", default=None)
    hdr.add_argument("--no-header", dest="has_header", action="store_false")
    p.add_argument("--max-cardinality", type=int, default=None)


def _engine_args(p):
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for distance kernels (default: $BKMODES_THREADS or 1)")


def _output_args(p):
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--aggregate", choices=AGGREGATES, default="none")
    p.add_argument("--output", "-o", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bkmodes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="recode a CSV into the encoded binary format")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--drop-report", default=None, help="also write the drop report here")
    _profile_args(p)

    p = sub.add_parser("synth", help="generate planted-mode synthetic data")
    p.add_argument("--k-true", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--cardinality", type=int, default=4)
    p.add_argument("--flip", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)

    p = sub.add_parser("run", help="one initialiser + K-Modes run")
    p.add_argument("--input", required=True)
    _profile_args(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", type=_int_list, default=None)
    p.add_argument("--dump-model", default=None, help="directory for per-run model JSON")
    _engine_args(p)
    _output_args(p)

    p = sub.add_parser("matrix", help="methods x K values x seeds")
    p.add_argument("--input", required=True)
    _profile_args(p)
    p.add_argument("--k", type=_int_list, required=True, help="e.g. 30,100,300")
    p.add_argument("--methods", type=lambda s: [t for t in s.split(",") if t],
                   default=["random", "cao", "bkmodes"], help=f"comma list of {','.join(METHODS)}")
    p.add_argument("--seeds", type=_int_list, default=[1, 2, 3, 4, 5])
    p.add_argument("--parallel-runs", type=int, default=1)
    p.add_argument("--dump-model", default=None, help="directory for per-run model JSON")
    _engine_args(p)
    _output_args(p)

    p = sub.add_parser("report", help="re-render a JSON report")
    p.add_argument("--input", required=True)
    _output_args(p)
    return parser


def _profile(args):
    return get_profile(args.profile, delimiter=args.delimiter, has_header=args.has_header,
                       max_cardinality=args.max_cardinality)


def _write(data: bytes, output):
    if output:
        Path(output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _bench(args, specs) -> int:
    dataset = load_dataset(args.input, _profile(args))
    report = run_matrix(dataset, specs, parallel_runs=getattr(args, "parallel_runs", 1),
                        dump_dir=args.dump_model)
    _write(emit_report(report, args.format, args.aggregate), args.output)
    for r in report.records:
        if r.failed:
            log.error("%s", r.error)
        elif not r.converged:
            log.warning("%s k=%d seed=%s hit max_iterations", r.method, r.k, r.seed)
    return EXIT_FAILED if report.any_failed else EXIT_OK


def _cmd_ingest(args) -> int:
    result = ingest_csv(args.input, _profile(args))
    save_encoded(result.dataset, result.recode_map, args.output)
    text = result.drop_report.to_json() + "\n"
    sys.stderr.write(text)
    if args.drop_report:
        Path(args.drop_report).write_text(text)
    log.info("encoded %d rows x %d attributes", result.dataset.n, result.dataset.m)
    return EXIT_OK


def _cmd_synth(args) -> int:
    data = synth_generate(args.k_true, args.n, args.m, args.cardinality, args.flip, args.seed)
    save_encoded(data.dataset, None, args.output)
    return EXIT_OK


def _cmd_run(args) -> int:
    seeds = args.seeds or ([args.seed] if args.seed is not None else [])
    if args.method == "random" and not seeds:
        seeds = [1]
    elif args.method != "random" and seeds:
        raise UsageError("--seed/--seeds only apply to --method random")
    config = EngineConfig(max_iterations=args.max_iter, threads=args.threads)
    return _bench(args, [RunSpec(args.method, args.k, tuple(seeds), config)])


def _cmd_matrix(args) -> int:
    bad = [m for m in args.methods if m not in METHODS]
    if bad:
        raise UsageError(f"unknown method(s) {bad}; choose from {METHODS}")
    config = EngineConfig(max_iterations=args.max_iter, threads=args.threads)
    return _bench(args, matrix_specs(args.methods, args.k, args.seeds, config))


def _cmd_report(args) -> int:
    report = load_report(args.input)
    _write(emit_report(report, args.format, args.aggregate), args.output)
    return EXIT_FAILED if report.any_failed else EXIT_OK


COMMANDS = {"ingest": _cmd_ingest, "synth": _cmd_synth, "run": _cmd_run,
            "matrix": _cmd_matrix, "report": _cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"bkmodes: error: {exc}\n")
        return EXIT_USAGE
    except (IngestError, FormatError, ContractError, OSError) as exc:
        sys.stderr.write(f"bkmodes: {exc}\n")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
