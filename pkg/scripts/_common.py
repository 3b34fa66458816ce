"""Shared output helpers for the figure scripts."""
import argparse
from pathlib import Path

from taperconv import io


def parser(doc: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=doc)
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--threads", type=int, default=None)
    return ap


def write(outdir, name, header, rows, meta=None):
    path = Path(outdir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(io.csv_text(header, rows, meta))
    print(f"wrote {path}")
    return path


