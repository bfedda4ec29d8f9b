"""Deterministic synthetic corpora for tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .charsets import ARABIC_EXTRAS, PERSIAN_LETTERS

ZW = "\u200c"
LATIN = "abcdefghijklmnopqrstuvwxyz"
NOISE_CHARS = "آأئؤ0123456789۰۱۲۳۴۵۶۷۸۹!:()«»@#_ًـ😀"
PUNCT = ".?-,؟،؛"


def farsi_word(rng: random.Random, lo: int = 2, hi: int = 8) -> str:
    letters = PERSIAN_LETTERS + ARABIC_EXTRAS if rng.random() < 0.2 else PERSIAN_LETTERS
    w = "".join(rng.choice(letters) for _ in range(rng.randint(lo, hi)))
    if rng.random() < 0.08:
        w += ZW + rng.choice(["ها", "های", "تر", "ترین"])
    return w


def noise_word(rng: random.Random) -> str:
    r = rng.random()
    if r < 0.5:
        return "".join(rng.choice(LATIN) for _ in range(rng.randint(1, 9)))
    if r < 0.8:
        w = list(farsi_word(rng))
        w.insert(rng.randrange(len(w) + 1), rng.choice(NOISE_CHARS))
        return "".join(w)
    return "".join(rng.choice(NOISE_CHARS) for _ in range(rng.randint(1, 4)))


def mixed_line(rng: random.Random, max_words: int = 30, noise: float = 0.15) -> str:
    """One line mixing Farsi, Latin, digits, punctuation, ZWNJs, tabs and odd spacing."""
    if rng.random() < 0.05:
        return rng.choice(["", " ", "\t", ZW, "  " + ZW + ZW + " "])
    words = []
    for _ in range(rng.randint(1, max_words)):
        r = rng.random()
        if r < noise:
            words.append(noise_word(rng))
        elif r < noise + 0.05:
            words.append(rng.choice(PUNCT))
        elif r < noise + 0.07:
            words.append(ZW * rng.randint(1, 3))
        else:
            words.append(farsi_word(rng))
    out = words[0]
    for w in words[1:]:
        out += rng.choice([" ", " ", " ", " ", "  ", "\t", " \t "]) + w
    if rng.random() < 0.1:
        out = " " * rng.randint(1, 3) + out
    if rng.random() < 0.1:
        out += rng.choice([" ", "\t", "   "])
    return out


def mixed_lines(n: int, seed: int = 0, **kw) -> list[str]:
    rng = random.Random(seed)
    return [mixed_line(rng, **kw) for _ in range(n)]


def write_farsi_mix(path, size_bytes: int, seed: int = 0, pool_lines: int = 20000) -> int:
    """Write about ``size_bytes`` of mixed text by cycling a random line pool; returns bytes written."""
    rng = random.Random(seed)
    pool = "".join(mixed_line(rng) + "\n" for _ in range(pool_lines)).encode("utf-8")
    written = 0
    with open(path, "wb") as fh:
        while written + len(pool) <= size_bytes:
            fh.write(pool)
            written += len(pool)
        rest = size_bytes - written
        if rest > 0:
            cut = pool.rfind(b"\n", 0, rest)
            if cut >= 0:
                fh.write(pool[: cut + 1])
                written += cut + 1
    return written


@dataclass
class GroundTruth:
    """Statistics recorded by the generator while emitting, independent of ``stats``."""

    paragraphs: int = 0
    words: int = 0
    bytes: int = 0
    max_words: int = 0
    words_per_line: list = field(default_factory=list)

    def bin_counts(self, base: int = 2) -> tuple[dict, int]:
        counts: dict = {}
        zeros = 0
        for w in self.words_per_line:
            if w == 0:
                zeros += 1
                continue
            lo, k = 1, 0
            while lo * base <= w:
                lo *= base
                k += 1
            counts[k] = counts.get(k, 0) + 1
        return counts, zeros


def heavy_tailed_corpus(n: int, seed: int = 0, giant_words: int | None = 200_000, cap: int = 50_000):
    """``n`` lines whose word counts follow a Pareto tail, plus one line of ``giant_words`` words.

    Returns ``(lines, truth)``.
    """
    rng = np.random.default_rng(seed)
    counts = np.minimum(np.floor(rng.pareto(1.5, n) * 3).astype(np.int64), cap)
    if giant_words is not None and n:
        counts[int(rng.integers(n))] = giant_words
    prng = random.Random(seed)
    vocab = [farsi_word(prng) for _ in range(4096)]
    idx = rng.integers(0, len(vocab), int(counts.sum())).tolist()
    words = [vocab[i] for i in idx]
    truth = GroundTruth()
    lines = []
    pos = 0
    for c in counts.tolist():
        line = " ".join(words[pos : pos + c])
        pos += c
        lines.append(line)
        truth.paragraphs += 1
        truth.words += c
        truth.bytes += len(line.encode("utf-8"))
        truth.max_words = max(truth.max_words, c)
        truth.words_per_line.append(c)
    return lines, truth


def write_lines(path, lines) -> Path:
    path = Path(path)
    with open(path, "wb") as fh:
        for line in lines:
            fh.write(line.encode("utf-8") + b"\n")
    return path
