"""Per-source statistics released with the NAAB corpus, used as regression data.

Sizes are decimal gigabytes. ``ratio`` is the words/paragraph value as
printed; most rows are cut to two decimals, the total is rounded.
"""

from dataclasses import dataclass
from decimal import Decimal


@dataclass(frozen=True)
class SourceRow:
    name: str
    size_gb: Decimal
    paragraphs: int
    words: int
    ratio: Decimal

    @property
    def exact_ratio(self) -> Decimal:
        return Decimal(self.words) / Decimal(self.paragraphs)


def _row(name, size, paragraphs, words, ratio):
    return SourceRow(name, Decimal(size), paragraphs, words, Decimal(ratio))


SOURCES = (
    _row("Persian NLP", "67", 13_287_678, 7_618_898_575, "573.38"),
    _row("OSCAR-fa", "36", 60_099_393, 4_193_005_807, "69.76"),
    _row("AGP", "23", 141_912_688, 2_776_681_752, "19.56"),
    _row("LSCP", "2.3", 15_205_432, 269_097_323, "17.69"),
    _row("Telegram", "0.9", 6_471_586, 100_253_032, "15.49"),
)
TOTAL = _row("Total", "129.2", 236_976_777, 14_957_936_489, "63.12")
