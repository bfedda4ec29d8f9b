"""``naab`` command line: clean, stats, split, shard, verify, bench.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 data error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .charsets import RuleSet, default_ruleset, load_ruleset
from .errors import InvalidUTF8Error, PartialOutputError, RuleSetError, ShardWriteError

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _shard_bytes(text: str) -> int:
    from .corpus_io import MIN_CLI_SHARD_BYTES

    value = _positive(text)
    if value < MIN_CLI_SHARD_BYTES:
        raise argparse.ArgumentTypeError(f"must be at least {MIN_CLI_SHARD_BYTES} (1 MiB), got {text}")
    return value


def _seed(text: str) -> int:
    value = _non_negative(text)
    if value >= 1 << 64:
        raise argparse.ArgumentTypeError("must fit in 64 bits")
    return value


def _base(text: str) -> int:
    value = _positive(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"must be >= 2, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    from .bench import DEFAULT_FLOOR
    from .corpus_io import DEFAULT_SHARD_BYTES

    p = _Parser(prog="naab", description="Streaming cleaner and corpus tools for Persian text.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, output_help="output file, - for stdout"):
        sp.add_argument("--input", "-i", default="-", help="input file, - for stdin")
        sp.add_argument("--output", "-o", default="-", help=output_help)
        sp.add_argument("--report", help="write the structured report to this path")
        sp.add_argument("--lossy", action="store_true", help="replace invalid UTF-8 instead of failing")

    def ruleflags(sp):
        sp.add_argument("--rules", help="rule file (default: $NAAB_RULES or built-in)")
        sp.add_argument("--min-tokens", type=_non_negative, help="override the rule set's min_tokens")

    def parallel(sp):
        sp.add_argument("--workers", type=_positive, default=1)
        sp.add_argument("--ordered", action=argparse.BooleanOptionalAction, default=True,
                        help="keep input order (default); --no-ordered trades order for latency")

    c = sub.add_parser("clean", help="run the five cleaning stages")
    common(c)
    ruleflags(c)
    parallel(c)
    c.add_argument("--reject", help="write dropped lines as reason<TAB>line")
    c.add_argument("--quiet", "-q", action="store_true")

    s = sub.add_parser("stats", help="paragraph/word counts and the words-per-paragraph histogram")
    common(s)
    s.add_argument("--rules", help="rule file whose fingerprint is recorded in the report")
    s.add_argument("--histogram-base", type=_base, default=2)
    s.add_argument("--format", choices=("json", "table", "tsv"), default="json")
    s.add_argument("--stage", default="unspecified", help="metadata: raw, cleaned, ...")

    sp = sub.add_parser("split", help="hash-split lines into train/test shards")
    common(sp, output_help="output directory")
    sp.add_argument("--rules", help="rule file whose fingerprint is recorded in manifests")
    sp.add_argument("--test-fraction", type=_fraction, required=True)
    sp.add_argument("--seed", type=_seed, default=0)
    sp.add_argument("--max-shard-bytes", type=_shard_bytes, default=DEFAULT_SHARD_BYTES)

    sh = sub.add_parser("shard", help="write size-bounded shards plus a manifest")
    common(sh, output_help="output directory")
    sh.add_argument("--rules", help="rule file whose fingerprint is recorded in the manifest")
    sh.add_argument("--max-shard-bytes", type=_shard_bytes, default=DEFAULT_SHARD_BYTES)

    v = sub.add_parser("verify", help="check shards against a manifest")
    v.add_argument("--input", "-i", required=True, help="manifest file, - for stdin (shards in cwd)")
    v.add_argument("--report", help="write the verification result as JSON")

    b = sub.add_parser("bench", help="time the cleaner end to end")
    common(b, output_help="where to write cleaned output (default: hash only)")
    ruleflags(b)
    b.add_argument("--workers", type=_positive, default=1)
    b.add_argument("--floor", type=float, default=DEFAULT_FLOOR, help="bytes/second pass threshold")
    b.set_defaults(output=None)
    return p


def _rules(args) -> RuleSet:
    path = getattr(args, "rules", None) or os.environ.get("NAAB_RULES")
    rules = load_ruleset(path) if path else default_ruleset()
    if getattr(args, "min_tokens", None) is not None:
        rules = rules.with_min_tokens(args.min_tokens)
    return rules


@contextlib.contextmanager
def _open_in(path):
    if path == "-":
        yield sys.stdin.buffer
    else:
        with open(path, "rb") as fh:
            yield fh


@contextlib.contextmanager
def _open_out(path):
    if path == "-":
        yield sys.stdout.buffer
        sys.stdout.buffer.flush()
    else:
        with open(path, "wb") as fh:
            yield fh


def _write_json(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def cmd_clean(args) -> int:
    from .corpus_io import clean_bytes

    rules = _rules(args)
    reject = open(args.reject, "wb") if args.reject else None
    try:
        with _open_in(args.input) as src, _open_out(args.output) as dst:
            report = clean_bytes(src, dst, rules, workers=args.workers, ordered=args.ordered,
                                 reject=reject, lossy=args.lossy)
    finally:
        if reject is not None:
            reject.close()
    if args.report:
        doc = {"tool": "naab-clean", "tool_version": __version__, "ruleset_fingerprint": rules.fingerprint}
        doc.update(report.to_dict())
        _write_json(args.report, doc)
    if not args.quiet:
        print(report.render(), file=sys.stderr)
    return EXIT_OK


def cmd_stats(args) -> int:
    from .corpus_io import read_lines
    from .stats import render_report, scan

    fingerprint = load_ruleset(args.rules).fingerprint if args.rules else None
    with _open_in(args.input) as src:
        s, h = scan(read_lines(src, lossy=args.lossy), base=args.histogram_base)
    meta = dict(stage=args.stage, ruleset_fingerprint=fingerprint)
    text = render_report(s, h, args.format, **meta)
    with _open_out(args.output) as dst:
        dst.write(text.encode("utf-8"))
    if args.report:
        Path(args.report).write_text(render_report(s, h, "json", **meta), encoding="utf-8")
    return EXIT_OK


def _outdir(args) -> Path:
    if args.output == "-":
        raise UsageError(f"naab {args.subcommand}: error: --output must be a directory")
    return Path(args.output)


def cmd_split(args) -> int:
    from .corpus_io import SplitSpec, read_lines, split_to_shards

    outdir = _outdir(args)
    fingerprint = load_ruleset(args.rules).fingerprint if args.rules else None
    spec = SplitSpec(args.test_fraction, args.seed)
    with _open_in(args.input) as src:
        train, test = split_to_shards(read_lines(src, lossy=args.lossy), spec, outdir,
                                      args.max_shard_bytes, fingerprint)
    if args.report:
        _write_json(args.report, {"train": train.to_dict(), "test": test.to_dict()})
    print(f"train {train.total_paragraphs:,} lines in {len(train.shards)} shard(s); "
          f"test {test.total_paragraphs:,} lines in {len(test.shards)} shard(s)", file=sys.stderr)
    return EXIT_OK


def cmd_shard(args) -> int:
    from .corpus_io import read_lines, write_shards

    outdir = _outdir(args)
    fingerprint = load_ruleset(args.rules).fingerprint if args.rules else None
    with _open_in(args.input) as src:
        manifest = write_shards(read_lines(src, lossy=args.lossy), args.max_shard_bytes, outdir,
                                ruleset_fingerprint=fingerprint)
    if args.report:
        _write_json(args.report, manifest.to_dict())
    print(f"{manifest.total_paragraphs:,} lines in {len(manifest.shards)} shard(s)", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .corpus_io import ShardManifest, verify

    if args.input == "-":
        manifest = ShardManifest.from_dict(json.load(sys.stdin))
        directory = Path.cwd()
    else:
        manifest = ShardManifest.load(args.input)
        directory = Path(args.input).parent
    result = verify(manifest, directory)
    print(result.render())
    if args.report:
        _write_json(args.report, {
            "ok": result.ok,
            "problems": result.problems,
            "shards": [{"file": c.file, "problem": c.problem, "detail": c.detail} for c in result.checks],
        })
    return EXIT_OK if result.ok else EXIT_DATA


def cmd_bench(args) -> int:
    from .bench import bench

    rules = _rules(args)
    source = "/dev/stdin" if args.input == "-" else args.input
    rep = bench(source, rules, args.workers, floor=args.floor, output=args.output)
    if args.report:
        _write_json(args.report, rep.to_dict())
    print(rep.render(), file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "clean": cmd_clean,
    "stats": cmd_stats,
    "split": cmd_split,
    "shard": cmd_shard,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.subcommand](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except RuleSetError as exc:
        print(f"naab: invalid rules: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvalidUTF8Error as exc:
        print(f"naab: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"naab: malformed document: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (PartialOutputError, ShardWriteError, OSError) as exc:
        print(f"naab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"naab: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


run = main

if __name__ == "__main__":
    sys.exit(main())
