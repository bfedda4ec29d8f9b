"""Benchmark the cleaner at several worker counts on one input file.

Each run happens in a fresh interpreter so peak RSS is per run.

    python scripts/run_bench.py /tmp/mix.txt --workers 1 2 4
"""

import argparse
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(path, workers, floor):
    with tempfile.TemporaryDirectory() as d:
        report = Path(d) / "bench.json"
        cmd = [sys.executable, "-m", "naab_clean", "bench", "-i", path, "--workers", str(workers),
               "--floor", str(floor), "--report", str(report)]
        subprocess.run(cmd, check=True, capture_output=True)
        return json.loads(report.read_text())


def main():
    p = argparse.ArgumentParser(description="time naab clean at several worker counts")
    p.add_argument("path")
    p.add_argument("--workers", type=int, nargs="+", default=[1, 4])
    p.add_argument("--floor", type=float, default=17e6)
    p.add_argument("--json", help="also dump all reports here")
    args = p.parse_args()

    reports = [run(args.path, w, args.floor) for w in args.workers]
    print(f"{'workers':>7} {'MB/s':>8} {'seconds':>8} {'peak MiB':>9}  sha256")
    for r in reports:
        print(f"{r['workers']:>7} {r['bytes_per_second'] / 1e6:>8.1f} {r['elapsed']:>8.1f} "
              f"{r['peak_rss_bytes'] / 2**20:>9.1f}  {r['output_sha256'][:16]}")
    if len({r["output_sha256"] for r in reports}) != 1:
        print("outputs differ between worker counts", file=sys.stderr)
        return 1
    if reports:
        print("\nstage seconds (first run):")
        for k, v in reports[0]["stage_seconds"].items():
            print(f"  {k:<14} {v:8.2f}")
    if args.json:
        Path(args.json).write_text(json.dumps(reports, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
