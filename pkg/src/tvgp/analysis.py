"""Posterior summaries: HPD intervals, histograms and modal values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from tvgp import _kernels
from tvgp.errors import DomainError, ParseError

DEFAULT_BINS = 50


@dataclass(frozen=True)
class HpdInterval:
    lower: float
    upper: float
    mass: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def window_size(n: int, mass: float) -> int:
    # guard against 0.95 * 100 = 95.00000000000001 style rounding
    return min(n, max(1, math.ceil(mass * n - 1e-9)))


def hpd(samples: Sequence[float], mass: float = 0.95) -> HpdInterval:
    """Shortest interval holding ``ceil(mass * N)`` of the samples.

    Exact for the empirical distribution: scan every window of that many
    consecutive sorted values and keep the narrowest, earliest on ties.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if len(x) < 2:
        raise DomainError(f"need at least 2 samples, got {len(x)}")
    if not 0 < mass < 1:
        raise DomainError(f"mass must lie in (0, 1), got {mass}")
    w = window_size(len(x), mass)
    i = _kernels.hpd_window(x, w)
    return HpdInterval(float(x[i]), float(x[i + w - 1]), mass)


def histogram(samples: Sequence[float], bins: int = DEFAULT_BINS) -> list[tuple[float, int]]:
    """Equal-width bins spanning [min, max] as (center, count) rows.

    A sample with zero spread collapses to a single row.
    """
    if bins < 1:
        raise DomainError(f"bins must be >= 1, got {bins}")
    x = np.asarray(samples, dtype=np.float64).ravel()
    if len(x) == 0:
        return []
    lo, hi = float(x.min()), float(x.max())
    if lo == hi:
        return [(lo, len(x))]
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    return [(float(c), int(n)) for c, n in zip(centers, counts)]


def mode_estimate(samples: Sequence[float], bins: int = DEFAULT_BINS) -> float:
    """Center of the fullest histogram bin (earliest on ties)."""
    rows = histogram(samples, bins)
    if not rows:
        raise DomainError("no samples")
    counts = [n for _, n in rows]
    return rows[int(np.argmax(counts))][0]


def write_histogram_csv(rows, path) -> None:
    with Path(path).open("w") as fh:
        fh.write("bin_center,count\n")
        for c, n in rows:
            fh.write(f"{c!r},{n}\n")


def read_histogram_csv(path) -> list[tuple[float, int]]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "bin_center,count":
        raise ParseError("header must be 'bin_center,count'", line=1, path=path)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            c, n = line.split(",")
            rows.append((float(c), int(n)))
        except ValueError:
            raise ParseError(f"bad row {line!r}", line=lineno, path=path) from None
    return rows


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    mag = abs(v)
    if mag >= 1000:
        return f"{v:.1f}"
    if mag >= 10:
        return f"{v:.2f}"
    return f"{v:.4f}"


def format_report(
    columns: Mapping[str, Mapping[str, HpdInterval]],
    names: Sequence[str] | None = None,
    mass: float = 0.95,
) -> str:
    """Plain-text table of HPD intervals: one row per parameter, one
    column per inference scheme. Missing entries print as ``-``.
    """
    schemes = list(columns)
    if names is None:
        names = []
        for col in columns.values():
            names.extend(n for n in col if n not in names)
    cells = [["parameter", *schemes]]
    for name in names:
        row = [name]
        for s in schemes:
            iv = columns[s].get(name)
            row.append("-" if iv is None else f"[{_fmt(iv.lower)}, {_fmt(iv.upper)}]")
        cells.append(row)
    widths = [max(len(r[i]) for r in cells) for i in range(len(cells[0]))]
    lines = [f"# {round(mass * 100, 6):g}% HPD intervals"]
    for r in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> tuple[float, dict[str, dict[str, HpdInterval]]]:
    """Inverse of :func:`format_report` (values at printed precision)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    mass = 0.95
    if lines and lines[0].startswith("#"):
        head = lines.pop(0)
        try:
            mass = float(head.split("%")[0].lstrip("# ").strip()) / 100
        except ValueError:
            raise ParseError(f"bad report title {head!r}", line=1) from None
    if not lines:
        raise ParseError("report has no header row")
    schemes = lines[0].split()[1:]
    out: dict[str, dict[str, HpdInterval]] = {s: {} for s in schemes}
    for lineno, line in enumerate(lines[1:], start=3):
        name, rest = line.split(None, 1)
        cells = _split_cells(rest)
        if len(cells) != len(schemes):
            raise ParseError(f"expected {len(schemes)} cells, got {len(cells)}", line=lineno)
        for s, cell in zip(schemes, cells):
            if cell == "-":
                continue
            lo, hi = cell.strip("[]").split(",")
            out[s][name] = HpdInterval(float(lo), float(hi), mass)
    return mass, out


def _split_cells(rest: str) -> list[str]:
    cells, buf, depth = [], "", 0
    for ch in rest:
        if ch == "[":
            depth += 1
        if ch == "]":
            depth -= 1
        if ch == " " and depth == 0:
            if buf:
                cells.append(buf)
                buf = ""
            continue
        buf += ch
    if buf:
        cells.append(buf)
    return cells
