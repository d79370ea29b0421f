"""Artifact writers: CSV with a provenance line, JSON, and gnuplot scripts."""
from __future__ import annotations

import csv
import hashlib
import json
import os
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

OUT_DIR_ENV = "LLGEN_OUT_DIR"
DEFAULT_OUT_DIR = "llgen_out"


def config_hash(config: Dict[str, object]) -> str:
    text = "\n".join(f"{k}={config[k]}" for k in sorted(config))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def provenance_line(config: Dict[str, object]) -> str:
    from . import __version__

    return f"# llgen {__version__} config_sha256={config_hash(config)} git=unknown"


def resolve_out_dir(cli_value: Optional[str] = None, config_value: Optional[str] = None) -> Path:
    """Command-line flag, then the environment variable, then the config file, then the default."""
    chosen = cli_value or os.environ.get(OUT_DIR_ENV) or config_value or DEFAULT_OUT_DIR
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], config: Dict[str, object]) -> Path:
    with open(path, "w", newline="") as fh:
        fh.write(provenance_line(config) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
    return path


def read_csv(path: Path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [row for row in reader]


def write_json(path: Path, payload, config: Dict[str, object]) -> Path:
    data = {"provenance": provenance_line(config)[2:], "result": payload}
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_gnuplot(path: Path, csv_name: str, title: str, plots: Sequence[str], xlabel: str, ylabel: str,
                  logscale: str = "", extra: Sequence[str] = ()) -> Path:
    """Script that renders ``csv_name`` to a PNG next to it.

    ``plots`` are gnuplot plot clauses that refer to the data file as ``data``.
    """
    lines = [
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"data = '{csv_name}'",
        "set terminal pngcairo size 900,600",
        f"set output '{Path(csv_name).stem}.png'",
        f"set title '{title}'",
        f"set xlabel '{xlabel}'",
        f"set ylabel '{ylabel}'",
    ]
    if logscale:
        lines.append(f"set logscale {logscale}")
    lines.extend(extra)
    lines.append("plot " + ", \\\n     ".join(plots))
    path.write_text("\n".join(lines) + "\n")
    return path
