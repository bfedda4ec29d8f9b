"""Throughput benchmark for the cleaner."""

from __future__ import annotations

import hashlib
import resource
import time
from dataclasses import asdict, dataclass, field

from .charsets import RuleSet
from .corpus_io import DEFAULT_CHUNK, clean_bytes

# 1 GB per minute
DEFAULT_FLOOR = 17e6


class HashingSink:
    def __init__(self, fh=None):
        self.hash = hashlib.sha256()
        self.fh = fh

    def write(self, data: bytes) -> int:
        self.hash.update(data)
        if self.fh is not None:
            self.fh.write(data)
        return len(data)


def peak_rss_bytes() -> int:
    own = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    kids = resource.getrusage(resource.RUSAGE_CHILDREN).ru_maxrss
    return max(own, kids) * 1024  # ru_maxrss is KiB on Linux


@dataclass
class BenchReport:
    input: str
    workers: int
    bytes: int
    lines_in: int
    lines_out: int
    elapsed: float
    bytes_per_second: float
    lines_per_second: float
    peak_rss_bytes: int
    output_sha256: str
    floor_bytes_per_second: float
    passed: bool
    stage_seconds: dict = field(default_factory=dict)
    pipeline: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def render(self) -> str:
        stages = "  ".join(f"{k} {v:.2f}s" for k, v in self.stage_seconds.items())
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"{self.input}: {self.bytes / 1e6:.1f} MB, {self.lines_in:,} lines, {self.workers} worker(s)\n"
            f"{self.elapsed:.2f}s  {self.bytes_per_second / 1e6:.1f} MB/s  {self.lines_per_second:,.0f} lines/s  "
            f"peak rss {self.peak_rss_bytes / 2**20:.1f} MiB\n"
            f"stages: {stages}\n"
            f"{verdict} against floor {self.floor_bytes_per_second / 1e6:.1f} MB/s"
        )


def bench(
    input_path,
    rules: RuleSet,
    workers: int = 1,
    *,
    floor: float = DEFAULT_FLOOR,
    chunk_size: int = DEFAULT_CHUNK,
    output=None,
) -> BenchReport:
    """Clean ``input_path`` end to end and time it. Output goes to ``output`` (path) or is only hashed."""
    timings: dict = {}
    out_fh = open(output, "wb") if output is not None else None
    sink = HashingSink(out_fh)
    try:
        with open(input_path, "rb", buffering=0) as src:
            t0 = time.perf_counter()
            rep = clean_bytes(src, sink, rules, workers=workers, chunk_size=chunk_size, timings=timings)
            elapsed = time.perf_counter() - t0
    finally:
        if out_fh is not None:
            out_fh.close()
    if rep.bytes_in == 0 or elapsed <= 0:
        bps = lps = 0.0
        passed = True
    else:
        bps = rep.bytes_in / elapsed
        lps = rep.lines_in / elapsed
        passed = bps >= floor
    return BenchReport(
        input=str(input_path),
        workers=workers,
        bytes=rep.bytes_in,
        lines_in=rep.lines_in,
        lines_out=rep.lines_out,
        elapsed=elapsed,
        bytes_per_second=bps,
        lines_per_second=lps,
        peak_rss_bytes=peak_rss_bytes(),
        output_sha256=sink.hash.hexdigest(),
        floor_bytes_per_second=floor,
        passed=passed,
        stage_seconds={k: round(v, 4) for k, v in timings.items()},
        pipeline=rep.to_dict(),
    )
