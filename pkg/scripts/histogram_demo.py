"""Log-scaled words-per-paragraph histogram on a heavy-tailed synthetic corpus.

Prints the table and optionally writes a PNG (needs matplotlib).
"""

import argparse

from naab_clean.stats import render_histogram_table, scan
from naab_clean.synthetic import heavy_tailed_corpus


def main():
    p = argparse.ArgumentParser(description="histogram of a synthetic heavy-tailed corpus")
    p.add_argument("--lines", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", type=int, default=2)
    p.add_argument("--png", help="save a bar chart here")
    args = p.parse_args()

    lines, _ = heavy_tailed_corpus(args.lines, seed=args.seed)
    stats, hist = scan(lines, base=args.base)
    print(f"{stats.paragraphs:,} paragraphs, {stats.words:,} words, longest {stats.max_words_in_paragraph:,}")
    print(render_histogram_table(hist))

    if args.png:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        rows = hist.bins()
        fig, ax = plt.subplots(figsize=(8, 4))
        ax.bar(range(len(rows)), [c for _, c in rows])
        ax.set_xticks(range(len(rows)), [str(lo) for lo, _ in rows], rotation=60)
        ax.set_yscale("log")
        ax.set_xlabel("words per paragraph (bin lower bound)")
        ax.set_ylabel("paragraphs")
        fig.tight_layout()
        fig.savefig(args.png)
        print(f"saved {args.png}")


if __name__ == "__main__":
    main()
