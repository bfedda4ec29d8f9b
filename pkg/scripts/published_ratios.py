"""Recompute words/paragraph for the published per-source numbers.

Shows the exact ratio next to its rounded and truncated two-decimal forms,
which makes it easy to see which convention each printed value follows.
"""

from naab_clean.published import SOURCES, TOTAL
from naab_clean.stats import format_ratio


def main():
    print(f"{'source':<12} {'printed':>8} {'exact':>10} {'rounded':>8} {'cut':>8}")
    for row in SOURCES + (TOTAL,):
        rounded = format_ratio(row.words, row.paragraphs)
        cut = format_ratio(row.words, row.paragraphs, truncate=True)
        print(f"{row.name:<12} {row.ratio!s:>8} {row.exact_ratio:>10.4f} {rounded:>8} {cut:>8}")
    print(f"\nparagraph sum matches total: {sum(r.paragraphs for r in SOURCES) == TOTAL.paragraphs}")
    print(f"word sum matches total:      {sum(r.words for r in SOURCES) == TOTAL.words}")


if __name__ == "__main__":
    main()
