"""Streaming input, deterministic train/test split, sharded output and verification."""

from __future__ import annotations

import codecs
import hashlib
import json
import os
import re
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, NamedTuple

import numpy as np

from . import __version__
from .charsets import RuleSet
from .errors import InvalidUTF8Error, ShardWriteError
from .pipeline import PipelineReport, run_batches

DEFAULT_CHUNK = 1 << 18
DEFAULT_SHARD_BYTES = 500_000_000
MIN_CLI_SHARD_BYTES = 1 << 20

# -- reading -----------------------------------------------------------------


def _normalize_newlines(text: str) -> str:
    if "\r" in text:
        text = text.replace("\r\n", "\n").replace("\r", "\n")
    return text


def read_lines(source: BinaryIO, chunk_size: int = 1 << 16, *, lossy: bool = False) -> Iterator[str]:
    """Yield lines from a binary stream without their terminators.

    Multi-byte sequences split across reads are reassembled. CRLF and lone CR
    both end a line. Invalid UTF-8 raises :class:`InvalidUTF8Error` with the
    absolute byte offset unless ``lossy`` substitutes U+FFFD.
    """
    if chunk_size < 4:
        raise ValueError("chunk_size must be at least 4")
    decoder = codecs.getincrementaldecoder("utf-8")("replace" if lossy else "strict")
    consumed = 0
    carry = ""
    while True:
        chunk = source.read(chunk_size)
        final = not chunk
        pending = len(decoder.getstate()[0])
        try:
            text = decoder.decode(chunk, final=final)
        except UnicodeDecodeError as exc:
            raise InvalidUTF8Error(consumed - pending + exc.start, exc.reason) from None
        consumed += len(chunk)
        text = carry + text
        held_cr = not final and text.endswith("\r")
        if held_cr:
            text = text[:-1]
        parts = _normalize_newlines(text).split("\n")
        carry = parts.pop()
        yield from parts
        if held_cr:
            # the CR may be the first half of a CRLF in the next chunk
            carry += "\r"
        if final:
            if carry:
                yield carry
            return


class RawBlock(NamedTuple):
    """Whole lines as raw bytes; decoded lazily (possibly in a worker process)."""

    data: bytes
    offset: int
    lossy: bool = False

    def decode(self) -> str:
        try:
            text = self.data.decode("utf-8", "replace" if self.lossy else "strict")
        except UnicodeDecodeError as exc:
            raise InvalidUTF8Error(self.offset + exc.start, exc.reason) from None
        text = _normalize_newlines(text)
        return text[:-1] if text.endswith("\n") else text


def read_blocks(source: BinaryIO, chunk_size: int = DEFAULT_CHUNK, *, lossy: bool = False) -> Iterator[RawBlock]:
    """Yield byte blocks that end on a line feed (the last may be unterminated).

    LF never occurs inside a multi-byte UTF-8 sequence, so every block decodes
    on its own. Memory is bounded by ``chunk_size`` plus the longest line.
    """
    if chunk_size < 4:
        raise ValueError("chunk_size must be at least 4")
    offset = 0
    carry = b""
    while True:
        chunk = source.read(chunk_size)
        if not chunk:
            if carry:
                yield RawBlock(carry, offset, lossy)
            return
        buf = carry + chunk if carry else chunk
        cut = buf.rfind(b"\n")
        if cut < 0:
            carry = buf
            continue
        block, carry = buf[: cut + 1], buf[cut + 1 :]
        yield RawBlock(block, offset, lossy)
        offset += len(block)


def clean_bytes(
    source: BinaryIO,
    sink: BinaryIO,
    rules: RuleSet,
    *,
    workers: int = 1,
    ordered: bool = True,
    reject: BinaryIO | None = None,
    chunk_size: int = DEFAULT_CHUNK,
    lossy: bool = False,
    timings: dict | None = None,
) -> PipelineReport:
    """Clean a raw UTF-8 byte stream; the fast path behind ``naab clean``."""
    batches = ((blk, len(blk.data)) for blk in read_blocks(source, chunk_size, lossy=lossy))
    return run_batches(batches, sink, rules, workers=workers, ordered=ordered, reject=reject, timings=timings)


# -- splitting ---------------------------------------------------------------

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.test_fraction <= 1.0:
            raise ValueError(f"test_fraction must be in [0, 1], got {self.test_fraction}")
        if not 0 <= self.seed <= _M64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def threshold(self) -> int:
        """Line goes to test iff ``split_hash(seed, index) < threshold``; exact, up to 2**64."""
        return int(Fraction(self.test_fraction) * (1 << 64))


def split_hash(seed: int, index: int) -> int:
    """SplitMix64 output for state ``seed + (index + 1) * 0x9E3779B97F4A7C15`` (mod 2**64)."""
    z = (seed + (index + 1) * _GOLDEN) & _M64
    z = ((z ^ (z >> 30)) * _MIX1) & _M64
    z = ((z ^ (z >> 27)) * _MIX2) & _M64
    return z ^ (z >> 31)


def is_test(index: int, spec: SplitSpec) -> bool:
    return split_hash(spec.seed, index) < spec.threshold


def test_mask(start: int, count: int, spec: SplitSpec) -> np.ndarray:
    """Vectorised :func:`is_test` for indices ``start .. start + count - 1``."""
    threshold = spec.threshold
    if threshold >= 1 << 64:
        return np.ones(count, dtype=bool)
    if threshold == 0:
        return np.zeros(count, dtype=bool)
    z = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    z *= np.uint64(_GOLDEN)
    z += np.uint64(spec.seed)
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z < np.uint64(threshold)


def split_stream(lines: Iterable[str], spec: SplitSpec, batch: int = 65536) -> Iterator[tuple[bool, str]]:
    """Yield ``(goes_to_test, line)`` in input order."""
    buf: list[str] = []
    start = 0
    for line in lines:
        buf.append(line)
        if len(buf) == batch:
            yield from zip(test_mask(start, len(buf), spec).tolist(), buf)
            start += len(buf)
            buf = []
    if buf:
        yield from zip(test_mask(start, len(buf), spec).tolist(), buf)


def split(lines: Iterable[str], spec: SplitSpec) -> tuple[list[str], list[str]]:
    """In-memory convenience; use :func:`split_to_shards` for large inputs."""
    train: list[str] = []
    test: list[str] = []
    for to_test, line in split_stream(lines, spec):
        (test if to_test else train).append(line)
    return train, test


# -- shards ------------------------------------------------------------------

SPLIT_LABELS = ("train", "test", "none")
_SHARD_NAME = re.compile(r"(train|test|none)-(\d{5})\.txt")


@dataclass
class ShardEntry:
    file: str
    bytes: int
    paragraphs: int
    sha256: str


@dataclass
class ShardManifest:
    label: str = "none"
    shards: list = field(default_factory=list)
    ruleset_fingerprint: str | None = None
    seed: int | None = None
    test_fraction: float | None = None
    tool_version: str = __version__
    incomplete: bool = False

    @property
    def total_paragraphs(self) -> int:
        return sum(s.paragraphs for s in self.shards)

    @property
    def total_bytes(self) -> int:
        return sum(s.bytes for s in self.shards)

    @property
    def file_name(self) -> str:
        return manifest_name(self.label)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total_paragraphs"] = self.total_paragraphs
        d["total_bytes"] = self.total_bytes
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ShardManifest":
        shards = [ShardEntry(**s) for s in d.get("shards", [])]
        return cls(
            label=d["label"],
            shards=shards,
            ruleset_fingerprint=d.get("ruleset_fingerprint"),
            seed=d.get("seed"),
            test_fraction=d.get("test_fraction"),
            tool_version=d.get("tool_version", ""),
            incomplete=d.get("incomplete", False),
        )

    @classmethod
    def load(cls, path) -> "ShardManifest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, directory) -> Path:
        path = Path(directory) / self.file_name
        tmp = path.with_suffix(".tmp")
        tmp.write_text(self.to_json(), encoding="utf-8")
        os.replace(tmp, path)
        return path


def manifest_name(label: str) -> str:
    return f"manifest.{label}.json"


def shard_name(label: str, index: int) -> str:
    return f"{label}-{index:05d}.txt"


class ShardWriter:
    """Single-writer sink that rolls to a new shard before ``max_shard_bytes`` is exceeded.

    Sizes count the LF terminator. A line longer than the limit gets a shard of its own.
    """

    _FLUSH = 1 << 20

    def __init__(self, directory, max_shard_bytes: int = DEFAULT_SHARD_BYTES, label: str = "none", **meta):
        if label not in SPLIT_LABELS:
            raise ValueError(f"label must be one of {SPLIT_LABELS}")
        if max_shard_bytes < 1:
            raise ValueError("max_shard_bytes must be positive")
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.max = max_shard_bytes
        self.manifest = ShardManifest(label=label, **meta)
        self._fh = None
        self._hash = None
        self._buf = bytearray()
        self._size = 0
        self._count = 0

    def _open_next(self):
        self._close_current()
        name = shard_name(self.manifest.label, len(self.manifest.shards))
        self._fh = open(self.dir / name, "wb")
        self._hash = hashlib.sha256()
        self._name = name
        self._size = 0
        self._count = 0

    def _flush(self):
        if self._buf:
            self._hash.update(self._buf)
            self._fh.write(self._buf)
            self._buf.clear()

    def _close_current(self):
        if self._fh is None:
            return
        self._flush()
        self._fh.close()
        self._fh = None
        self.manifest.shards.append(ShardEntry(self._name, self._size, self._count, self._hash.hexdigest()))

    def write_line(self, line: str) -> None:
        data = line.encode("utf-8") + b"\n"
        try:
            if self._fh is None or (self._size and self._size + len(data) > self.max):
                self._open_next()
            self._buf += data
            self._size += len(data)
            self._count += 1
            if len(self._buf) >= self._FLUSH:
                self._flush()
        except OSError as exc:
            self._fail(exc)

    def _fail(self, exc):
        self.manifest.incomplete = True
        try:
            if self._fh is not None:
                self._fh.close()
            self.manifest.save(self.dir)
        except OSError:
            pass
        self._fh = None
        raise ShardWriteError(self.manifest, exc) from exc

    def close(self) -> ShardManifest:
        try:
            self._close_current()
            self.manifest.save(self.dir)
        except OSError as exc:
            self._fail(exc)
        return self.manifest

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if exc[0] is None:
            self.close()
        elif self._fh is not None:
            self._fh.close()


def write_shards(lines: Iterable[str], max_shard_bytes: int, directory, label: str = "none", **meta) -> ShardManifest:
    writer = ShardWriter(directory, max_shard_bytes, label, **meta)
    for line in lines:
        writer.write_line(line)
    return writer.close()


def split_to_shards(
    lines: Iterable[str],
    spec: SplitSpec,
    directory,
    max_shard_bytes: int = DEFAULT_SHARD_BYTES,
    ruleset_fingerprint: str | None = None,
) -> tuple[ShardManifest, ShardManifest]:
    meta = dict(seed=spec.seed, test_fraction=spec.test_fraction, ruleset_fingerprint=ruleset_fingerprint)
    train = ShardWriter(directory, max_shard_bytes, "train", **meta)
    test = ShardWriter(directory, max_shard_bytes, "test", **meta)
    for to_test, line in split_stream(lines, spec):
        (test if to_test else train).write_line(line)
    return train.close(), test.close()


# -- verification ------------------------------------------------------------


@dataclass
class ShardCheck:
    file: str
    problem: str | None = None  # missing | size | checksum | count | name
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.problem is None


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    problems: list = field(default_factory=list)  # manifest-level

    @property
    def ok(self) -> bool:
        return not self.problems and all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def render(self) -> str:
        rows = [f"{'ok' if c.ok else c.problem}\t{c.file}\t{c.detail}".rstrip() for c in self.checks]
        rows += [f"manifest\t{p}" for p in self.problems]
        return "\n".join(rows)


def _file_digest(path: Path) -> tuple[int, int, str]:
    h = hashlib.sha256()
    size = lines = 0
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
            size += len(chunk)
            lines += chunk.count(b"\n")
    return size, lines, h.hexdigest()


def verify(manifest: ShardManifest, directory) -> VerifyReport:
    directory = Path(directory)
    report = VerifyReport()
    if manifest.incomplete:
        report.problems.append("manifest is marked incomplete")
    names = [s.file for s in manifest.shards]
    if len(set(names)) != len(names):
        report.problems.append("duplicate shard file names")
    for i, shard in enumerate(manifest.shards):
        check = ShardCheck(shard.file)
        report.checks.append(check)
        if shard.file != shard_name(manifest.label, i):
            check.problem, check.detail = "name", f"expected {shard_name(manifest.label, i)}"
            continue
        path = directory / shard.file
        if not path.is_file():
            check.problem, check.detail = "missing", str(path)
            continue
        size, lines, digest = _file_digest(path)
        if size != shard.bytes:
            check.problem, check.detail = "size", f"{size} != {shard.bytes}"
        elif digest != shard.sha256:
            check.problem, check.detail = "checksum", digest
        elif lines != shard.paragraphs:
            check.problem, check.detail = "count", f"{lines} != {shard.paragraphs}"
    return report
