"""Corpus statistics as mergeable single-pass aggregates.

Counts here follow the cleaner's word rule (split on spaces); on raw text
tabs also separate words. Byte counts are UTF-8 sizes without terminators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, ROUND_HALF_EVEN, Decimal
from typing import Iterable, Sequence

from . import __version__
from .errors import HistogramBaseMismatch, UndefinedRatioError

GB = 10**9


def count_words(line: str) -> int:
    parts = line.replace("\t", " ").split(" ") if "\t" in line else line.split(" ")
    return len(parts) - parts.count("")


def log_bin(words: int, base: int = 2) -> int:
    """Index k with base**k <= words < base**(k+1); words >= 1."""
    if base == 2:
        return words.bit_length() - 1
    k, bound = 0, base
    while bound <= words:
        k += 1
        bound *= base
    return k


@dataclass
class CorpusStats:
    bytes: int = 0
    paragraphs: int = 0
    words: int = 0
    max_words_in_paragraph: int = 0

    def merge(self, other: "CorpusStats") -> "CorpusStats":
        return CorpusStats(
            self.bytes + other.bytes,
            self.paragraphs + other.paragraphs,
            self.words + other.words,
            max(self.max_words_in_paragraph, other.max_words_in_paragraph),
        )

    __add__ = merge


@dataclass
class Histogram:
    base: int = 2
    counts: dict = field(default_factory=dict)  # bin index -> count, zeros omitted
    underflow_zero: int = 0

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("histogram base must be >= 2")
        self.counts = {k: v for k, v in self.counts.items() if v}

    def add(self, words: int, n: int = 1) -> None:
        if words == 0:
            self.underflow_zero += n
        else:
            k = log_bin(words, self.base)
            self.counts[k] = self.counts.get(k, 0) + n

    def merge(self, other: "Histogram") -> "Histogram":
        if self.base != other.base:
            raise HistogramBaseMismatch(f"cannot merge base {self.base} with base {other.base}")
        counts = dict(self.counts)
        for k, v in other.counts.items():
            counts[k] = counts.get(k, 0) + v
        return Histogram(self.base, counts, self.underflow_zero + other.underflow_zero)

    __add__ = merge

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.underflow_zero

    def bins(self) -> list[tuple[int, int]]:
        """Contiguous ``(lower_bound, count)`` rows from 1 up to the top occupied bin."""
        if not self.counts:
            return []
        return [(self.base**k, self.counts.get(k, 0)) for k in range(max(self.counts) + 1)]

    def top_bin(self) -> tuple[int, int] | None:
        """``[lo, hi)`` of the highest occupied bin."""
        if not self.counts:
            return None
        k = max(self.counts)
        return self.base**k, self.base ** (k + 1)

    @classmethod
    def from_bins(cls, base: int, rows: Sequence, underflow_zero: int = 0) -> "Histogram":
        counts = {log_bin(lo, base): c for lo, c in rows}
        return cls(base, counts, underflow_zero)


class Scanner:
    """Incremental scan; feed lines, read ``stats`` and ``histogram``."""

    def __init__(self, base: int = 2):
        self.stats = CorpusStats()
        self.histogram = Histogram(base)

    def add(self, line: str) -> None:
        w = count_words(line)
        s = self.stats
        s.paragraphs += 1
        s.words += w
        s.bytes += len(line.encode("utf-8"))
        if w > s.max_words_in_paragraph:
            s.max_words_in_paragraph = w
        self.histogram.add(w)

    def update(self, lines: Iterable[str]) -> "Scanner":
        for line in lines:
            self.add(line)
        return self


def scan(lines: Iterable[str], base: int = 2) -> tuple[CorpusStats, Histogram]:
    sc = Scanner(base).update(lines)
    return sc.stats, sc.histogram


def merge(a: tuple[CorpusStats, Histogram], b: tuple[CorpusStats, Histogram]) -> tuple[CorpusStats, Histogram]:
    return a[0].merge(b[0]), a[1].merge(b[1])


def words_per_paragraph(s: CorpusStats) -> float:
    if s.paragraphs < 1:
        raise UndefinedRatioError("words per paragraph is undefined for zero paragraphs")
    return s.words / s.paragraphs


def format_ratio(words: int, paragraphs: int, *, truncate: bool = False) -> str:
    """Two-decimal ratio, computed exactly; half-even rounding unless ``truncate``."""
    if paragraphs < 1:
        raise UndefinedRatioError("words per paragraph is undefined for zero paragraphs")
    exact = Decimal(words) / Decimal(paragraphs)
    return str(exact.quantize(Decimal("0.01"), rounding=ROUND_DOWN if truncate else ROUND_HALF_EVEN))


# -- reports -----------------------------------------------------------------


def report_dict(
    s: CorpusStats,
    h: Histogram,
    *,
    stage: str = "unspecified",
    ruleset_fingerprint: str | None = None,
    tool_version: str = __version__,
) -> dict:
    return {
        "tool": "naab-clean",
        "tool_version": tool_version,
        "stage": stage,
        "ruleset_fingerprint": ruleset_fingerprint,
        "bytes": s.bytes,
        "paragraphs": s.paragraphs,
        "words": s.words,
        "words_per_paragraph": format_ratio(s.words, s.paragraphs) if s.paragraphs else None,
        "max_words_in_paragraph": s.max_words_in_paragraph,
        "histogram_base": h.base,
        "underflow_zero": h.underflow_zero,
        "histogram": [[lo, c] for lo, c in h.bins()],
    }


def _json(d: dict) -> str:
    # one histogram row per line keeps the document diffable
    lines = ["{"]
    items = list(d.items())
    for i, (k, v) in enumerate(items):
        comma = "," if i < len(items) - 1 else ""
        if k == "histogram" and v:
            rows = ",\n".join(f"    {json.dumps(r)}" for r in v)
            lines.append(f'  "{k}": [\n{rows}\n  ]{comma}')
        else:
            lines.append(f"  {json.dumps(k)}: {json.dumps(v, ensure_ascii=False)}{comma}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_report(s: CorpusStats, h: Histogram, fmt: str = "json", **meta) -> str:
    if fmt == "json":
        return _json(report_dict(s, h, **meta))
    if fmt == "tsv":
        return histogram_tsv(h)
    if fmt == "table":
        return render_table([("corpus", s)]) + "\n\n" + render_histogram_table(h)
    raise ValueError(f"unknown report format {fmt!r}")


def parse_report(text: str) -> tuple[CorpusStats, Histogram, dict]:
    """Inverse of the JSON report; the third element holds the metadata fields."""
    d = json.loads(text)
    s = CorpusStats(d["bytes"], d["paragraphs"], d["words"], d["max_words_in_paragraph"])
    h = Histogram.from_bins(d["histogram_base"], d["histogram"], d["underflow_zero"])
    meta = {k: d[k] for k in ("stage", "ruleset_fingerprint", "tool_version")}
    return s, h, meta


def histogram_tsv(h: Histogram) -> str:
    return "".join(f"{lo}\t{c}\n" for lo, c in h.bins())


def render_histogram_table(h: Histogram) -> str:
    rows = [f"{'words':>20}  {'paragraphs':>14}"]
    if h.underflow_zero:
        rows.append(f"{'0':>20}  {h.underflow_zero:>14,}")
    for lo, c in h.bins():
        rows.append(f"{f'[{lo}, {lo * h.base})':>20}  {c:>14,}")
    return "\n".join(rows)


def render_table(entries: Sequence[tuple[str, CorpusStats]]) -> str:
    head = f"{'corpus':<16} {'size(GB)':>10} {'# paragraphs':>16} {'# words':>18} {'words/paragraph':>16}"
    rows = [head]
    for name, s in entries:
        ratio = format_ratio(s.words, s.paragraphs) if s.paragraphs else "-"
        rows.append(f"{name:<16} {s.bytes / GB:>10.2f} {s.paragraphs:>16,} {s.words:>18,} {ratio:>16}")
    return "\n".join(rows)


# -- per-source breakdown ----------------------------------------------------


@dataclass
class SourceBreakdown:
    entries: list  # (name, CorpusStats)

    @property
    def total(self) -> CorpusStats:
        out = CorpusStats()
        for _, s in self.entries:
            out = out.merge(s)
        return out

    def byte_shares(self) -> dict:
        return self._shares("bytes")

    def paragraph_shares(self) -> dict:
        return self._shares("paragraphs")

    def _shares(self, attr: str) -> dict:
        total = sum(getattr(s, attr) for _, s in self.entries)
        if total == 0:
            return {name: 1.0 / len(self.entries) for name, _ in self.entries}
        return {name: getattr(s, attr) / total for name, s in self.entries}

    def render(self) -> str:
        b, p = self.byte_shares(), self.paragraph_shares()
        rows = [f"{'source':<16} {'size(GB)':>10} {'# paragraphs':>16} {'byte share':>11} {'para share':>11}"]
        for name, s in self.entries:
            rows.append(f"{name:<16} {s.bytes / GB:>10.2f} {s.paragraphs:>16,} {b[name]:>11.4f} {p[name]:>11.4f}")
        return "\n".join(rows)


def breakdown(entries: Iterable[tuple[str, CorpusStats]]) -> SourceBreakdown:
    entries = list(entries)
    if not entries:
        raise ValueError("breakdown needs at least one source")
    names = [n for n, _ in entries]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"duplicate source names: {', '.join(dupes)}")
    return SourceBreakdown(entries)
