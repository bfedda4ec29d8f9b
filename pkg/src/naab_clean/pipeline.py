"""The five cleaning stages and the streaming cleaner built from them.

Stage order is fixed: word filter, character unification, space unification,
empty-line drop, short-line drop. The per-line functions below are the
readable definition; :func:`clean_block` is a vectorised equivalent that works
on many lines at once and is what the streaming entry points use.
"""

from __future__ import annotations

import re
import time
from collections import deque
from dataclasses import asdict, dataclass, fields
from functools import lru_cache
from itertools import islice
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .charsets import SPACE, ZWNJ, RuleSet
from .errors import PartialOutputError

_ZW = "\u200c"
_SPACE_RUN = re.compile(r"[ \t]+")
_ZWNJ_RUN = re.compile(_ZW + "{2,}")

STAGES = ("decode", "filter_words", "unify_chars", "unify_spaces", "line_gates", "encode")


@dataclass
class PipelineReport:
    lines_in: int = 0
    lines_out: int = 0
    lines_dropped_empty: int = 0
    lines_dropped_short: int = 0
    words_dropped_non_farsi: int = 0
    substitutions_applied: int = 0
    words_out: int = 0
    bytes_in: int = 0
    bytes_out: int = 0
    elapsed: float = 0.0

    def merge(self, other: "PipelineReport") -> "PipelineReport":
        out = PipelineReport()
        for f in fields(self):
            a, b = getattr(self, f.name), getattr(other, f.name)
            setattr(out, f.name, max(a, b) if f.name == "elapsed" else a + b)
        return out

    __add__ = merge

    def add(self, other: "PipelineReport") -> None:
        for f in fields(self):
            if f.name != "elapsed":
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))
        self.elapsed = max(self.elapsed, other.elapsed)

    @property
    def balanced(self) -> bool:
        return self.lines_out + self.lines_dropped_empty + self.lines_dropped_short == self.lines_in

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineReport":
        return cls(**{f.name: d[f.name] for f in fields(cls) if f.name in d})

    def render(self) -> str:
        rate = self.bytes_in / self.elapsed / 1e6 if self.elapsed > 0 else 0.0
        return (
            f"lines in {self.lines_in:,}  out {self.lines_out:,}  "
            f"dropped empty {self.lines_dropped_empty:,}  short {self.lines_dropped_short:,}\n"
            f"words dropped {self.words_dropped_non_farsi:,}  substitutions {self.substitutions_applied:,}  "
            f"words out {self.words_out:,}\n"
            f"bytes in {self.bytes_in:,}  out {self.bytes_out:,}  "
            f"{self.elapsed:.2f}s ({rate:.1f} MB/s)"
        )


# -- per-line stages ---------------------------------------------------------


def _proper(word: str, allowed) -> bool:
    if word.strip(_ZW) == "":
        return False
    return all(ord(c) in allowed for c in word)


def filter_words(text: str, rules: RuleSet) -> tuple[str, int]:
    words = [w for w in text.split(" ") if w]
    kept = [w for w in words if _proper(w, rules.allowed)]
    return " ".join(kept), len(words) - len(kept)


def unify_chars(text: str, rules: RuleSet) -> tuple[str, int]:
    subs = rules.substitutions
    changed = sum(1 for c in text if ord(c) in subs)
    if not changed:
        return text, 0
    return text.translate(subs), changed


def unify_spaces(text: str) -> str:
    text = _SPACE_RUN.sub(" ", text).strip(" ")
    return _ZWNJ_RUN.sub(_ZW, text)


def is_empty(text: str) -> bool:
    return text == ""


def count_tokens(text: str) -> int:
    return sum(1 for w in text.split(" ") if w)


def meets_min_tokens(text: str, n: int) -> bool:
    return count_tokens(text) >= n


class LineResult(NamedTuple):
    text: str | None  # None when dropped
    reason: str | None  # "empty" | "short" | None
    words_dropped: int
    substitutions: int


def clean_line(text: str, rules: RuleSet) -> LineResult:
    text, dropped = filter_words(text, rules)
    text, nsub = unify_chars(text, rules)
    text = unify_spaces(text)
    if is_empty(text):
        return LineResult(None, "empty", dropped, nsub)
    if not meets_min_tokens(text, rules.min_tokens):
        return LineResult(None, "short", dropped, nsub)
    return LineResult(text, None, dropped, nsub)


def clean_lines(lines: Iterable[str], rules: RuleSet) -> Iterator[str]:
    """Surviving lines only, one at a time."""
    for line in lines:
        out = clean_line(line, rules).text
        if out is not None:
            yield out


# -- vectorised block kernel -------------------------------------------------


class _Tables(NamedTuple):
    wide: bool  # utf-32 code units instead of utf-16
    allowed: np.ndarray  # bool lookup by code unit
    is_source: np.ndarray
    substitute: np.ndarray
    min_tokens: int


@lru_cache(maxsize=32)
def _tables(rules: RuleSet) -> _Tables:
    cps = set(rules.allowed) | set(rules.substitutions.values())
    wide = max(cps) > 0xFFFF
    size = 0x110000 if wide else 0x10000
    dtype = np.uint32 if wide else np.uint16
    allowed = np.zeros(size, dtype=bool)
    allowed[np.fromiter(rules.allowed, dtype=np.int64)] = True
    if not wide:
        allowed[0xD800:0xE000] = False  # surrogate halves of astral chars
    is_source = np.zeros(size, dtype=bool)
    substitute = np.arange(size, dtype=dtype)
    for src, dst in rules.substitutions.items():
        is_source[src] = True
        substitute[src] = dst
    return _Tables(wide, allowed, is_source, substitute, rules.min_tokens)


class BlockResult(NamedTuple):
    text: str  # surviving lines, each followed by "\n"
    lines_in: int
    lines_out: int
    dropped_empty: int
    dropped_short: int
    words_dropped: int
    substitutions: int
    words_out: int
    drop_reasons: list | None  # (line offset in block, reason) when requested


def _shift_right(a: np.ndarray, fill) -> np.ndarray:
    out = np.empty_like(a)
    out[0] = fill
    out[1:] = a[:-1]
    return out


def clean_block(text: str, rules: RuleSet, *, want_reasons: bool = False, timings: dict | None = None) -> BlockResult:
    """Clean ``text`` holding one or more lines joined by ``"\\n"`` (no trailing newline).

    Produces exactly what :func:`clean_line` gives on each line.
    """
    t = _tables(rules)
    clock = time.perf_counter
    t0 = clock()
    if t.wide:
        c = np.frombuffer((text + "\n").encode("utf-32-le"), dtype=np.uint32)
    else:
        c = np.frombuffer((text + "\n").encode("utf-16-le", "surrogatepass"), dtype=np.uint16)

    # filter_words: a token is dropped if it holds any disallowed character or only ZWNJs
    nl_code, sp_code, zw_code = 10, SPACE, ZWNJ
    sep = (c == sp_code) | (c == nl_code)
    bad = ~(t.allowed[c] | sep)
    heads = np.flatnonzero(bad)
    zs = c == zw_code
    if zs.any():
        # ZWNJ runs bounded by separators on both sides are whole tokens
        prev_sep = _shift_right(sep, True)
        next_sep = np.empty_like(sep)
        next_sep[-1] = True
        next_sep[:-1] = sep[1:]
        run_starts = np.flatnonzero(zs & ~_shift_right(zs, False))
        run_ends = np.flatnonzero(zs & np.append(~zs[1:], True))
        lone = run_starts[prev_sep[run_starts] & next_sep[run_ends]]
        if len(lone):
            heads = np.union1d(heads, lone)
    words_dropped = 0
    if len(heads):
        sepidx = np.flatnonzero(sep)
        tok = np.searchsorted(sepidx, heads)  # token k ends at sepidx[k]
        tok = tok[np.append(True, tok[1:] != tok[:-1])]
        words_dropped = len(tok)
        starts = np.where(tok > 0, sepidx[tok - 1] + 1, 0)
        marks = np.zeros(len(c) + 1, dtype=np.int8)
        marks[starts] = 1
        marks[sepidx[tok]] = -1
        c = c[np.cumsum(marks[:-1], dtype=np.int8) == 0]
    t1 = clock()

    src = t.is_source[c]
    nsub = int(np.count_nonzero(src))
    if nsub:
        c = t.substitute[c]
    t2 = clock()

    sp = c == sp_code
    c = c[~(sp & _shift_right(sp | (c == nl_code), True))]
    sp = c == sp_code
    nxt_nl = np.empty_like(sp)
    nxt_nl[-1] = True
    nxt_nl[:-1] = c[1:] == nl_code
    c = c[~(sp & nxt_nl)]
    zs = c == zw_code
    zz = zs & _shift_right(zs, False)
    if zz.any():
        c = c[~zz]
    t3 = clock()

    nl = c == nl_code
    ends = np.flatnonzero(nl)
    starts = np.empty_like(ends)
    starts[0] = 0
    starts[1:] = ends[:-1] + 1
    lengths = ends - starts
    spaces = np.diff(np.cumsum(c == sp_code, dtype=np.int64)[ends], prepend=0)
    empty = lengths == 0
    tokens = np.where(empty, 0, spaces + 1)
    short = ~empty & (tokens < t.min_tokens)
    keep = ~(empty | short)
    lines_in = len(ends)
    lines_out = int(np.count_nonzero(keep))
    if lines_out != lines_in:
        line_id = np.cumsum(nl, dtype=np.int64) - nl
        c = c[keep[line_id]]
    reasons = None
    if want_reasons and lines_out != lines_in:
        reasons = [(int(i), "empty" if empty[i] else "short") for i in np.flatnonzero(~keep)]
    out = c.tobytes().decode("utf-32-le" if t.wide else "utf-16-le")
    t4 = clock()
    if timings is not None:
        for k, v in zip(STAGES[1:5], (t1 - t0, t2 - t1, t3 - t2, t4 - t3)):
            timings[k] = timings.get(k, 0.0) + v
    return BlockResult(
        out,
        lines_in,
        lines_out,
        int(np.count_nonzero(empty)),
        int(np.count_nonzero(short)),
        words_dropped,
        nsub,
        int(tokens[keep].sum()),
        reasons,
    )


# -- streaming ---------------------------------------------------------------


def _clean_payload(payload, rules: RuleSet, want_reasons: bool, timed: bool):
    """Decode (if raw), clean and encode one batch. Runs in worker processes too."""
    timings = {} if timed else None
    t0 = time.perf_counter()
    text = payload if isinstance(payload, str) else payload.decode()
    if timings is not None:
        timings["decode"] = time.perf_counter() - t0
    res = clean_block(text, rules, want_reasons=want_reasons, timings=timings)
    t0 = time.perf_counter()
    data = res.text.encode("utf-8")
    if timings is not None:
        timings["encode"] = time.perf_counter() - t0
    rejected = []
    if res.drop_reasons:
        lines = text.split("\n")
        rejected = [(why, lines[i]) for i, why in res.drop_reasons]
    return res, data, rejected, timings


def _report_for(res: BlockResult, bytes_in: int, bytes_out: int) -> PipelineReport:
    return PipelineReport(
        lines_in=res.lines_in,
        lines_out=res.lines_out,
        lines_dropped_empty=res.dropped_empty,
        lines_dropped_short=res.dropped_short,
        words_dropped_non_farsi=res.words_dropped,
        substitutions_applied=res.substitutions,
        words_out=res.words_out,
        bytes_in=bytes_in,
        bytes_out=bytes_out,
    )


def _line_batches(lines: Iterable[str], batch_lines: int) -> Iterator[tuple[str, int]]:
    it = iter(lines)
    while True:
        chunk = list(islice(it, batch_lines))
        if not chunk:
            return
        text = "\n".join(chunk)
        if text.count("\n") != len(chunk) - 1 or "\r" in text:
            raise ValueError("lines passed to clean_stream must not contain line terminators")
        yield text, len(text.encode("utf-8")) + len(chunk)


def run_batches(
    batches: Iterable,
    sink,
    rules: RuleSet,
    *,
    workers: int = 1,
    ordered: bool = True,
    reject=None,
    timings: dict | None = None,
) -> PipelineReport:
    """Drive ``(payload, bytes_in)`` batches through the kernel into a binary ``sink``.

    ``payload`` is either a ``str`` of lines joined by ``"\\n"`` or an object with
    a ``decode()`` method returning one. With ``workers > 1`` batches are cleaned
    in a process pool with at most ``2 * workers`` batches in flight.
    """
    report = PipelineReport()
    start = time.perf_counter()
    want_reasons = reject is not None
    timed = timings is not None

    def emit(bytes_in, result):
        res, data, rejected, block_timings = result
        report.add(_report_for(res, bytes_in, len(data)))
        if block_timings:
            for k, v in block_timings.items():
                timings[k] = timings.get(k, 0.0) + v
        for why, line in rejected:
            reject.write(f"{why}\t{line}\n".encode("utf-8"))
        if data:
            try:
                sink.write(data)
            except OSError as exc:
                report.elapsed = time.perf_counter() - start
                raise PartialOutputError(report, exc) from exc

    try:
        if workers <= 1:
            for payload, bytes_in in batches:
                emit(bytes_in, _clean_payload(payload, rules, want_reasons, timed))
        else:
            _run_pool(batches, emit, rules, workers, ordered, want_reasons, timed)
    finally:
        report.elapsed = time.perf_counter() - start
    return report


def _run_pool(batches, emit, rules, workers, ordered, want_reasons, timed):
    import multiprocessing as mp

    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else mp.get_context()
    window = 2 * workers
    with ctx.Pool(workers) as pool:
        pending: deque = deque()

        def drain_one():
            i = 0
            if not ordered:
                i = next((k for k, (_, fut) in enumerate(pending) if fut.ready()), 0)
            bytes_in, fut = pending[i]
            del pending[i]
            emit(bytes_in, fut.get())

        for payload, bytes_in in batches:
            pending.append((bytes_in, pool.apply_async(_clean_payload, (payload, rules, want_reasons, timed))))
            while len(pending) >= window:
                drain_one()
        while pending:
            drain_one()


def clean_stream(
    source: Iterable[str],
    sink,
    rules: RuleSet,
    *,
    workers: int = 1,
    ordered: bool = True,
    reject=None,
    batch_lines: int = 4096,
) -> PipelineReport:
    """Clean an iterable of lines into a binary ``sink`` (UTF-8, LF-terminated).

    ``reject``, when given, is a binary file receiving ``reason<TAB>line`` rows.
    Output is byte-identical for any ``workers`` when ``ordered`` is true.
    """
    return run_batches(
        _line_batches(source, batch_lines), sink, rules, workers=workers, ordered=ordered, reject=reject
    )
