"""CSV and Markdown emitters for rejection-frequency tables.

The CSV schema is one row per (cell, level) with floats printed at 17
significant digits, so parsing an emitted file reproduces the table
exactly.  The Markdown layout mirrors the publication tables: one block
per (nominal level, true-value anchor), rows indexed by (error
distribution, sample size), one column per scheme.
"""

from __future__ import annotations

import csv
import math
from typing import IO, Iterable

from .montecarlo import CellKey, ErpCell

CSV_COLUMNS = (
    "dist",
    "regressor",
    "n",
    "theta0_1",
    "theta0_2",
    "scheme",
    "kappa",
    "level",
    "erp",
    "mc_se",
    "reps",
    "failures",
)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_csv(table: Iterable[ErpCell], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in table:
        k = row.key
        writer.writerow(
            [
                k.dist,
                k.regressor,
                str(k.n),
                _fmt(k.theta0_1),
                _fmt(k.theta0_2),
                k.scheme,
                "" if k.kappa is None else _fmt(k.kappa),
                _fmt(k.level),
                _fmt(row.erp),
                _fmt(row.mc_se),
                str(row.reps_completed),
                str(row.failures),
            ]
        )


def read_csv(stream: IO[str]) -> list[ErpCell]:
    """Parse a table emitted by :func:`write_csv` back into rows."""
    reader = csv.reader(stream)
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header!r}")
    out = []
    for rec in reader:
        if not rec:
            continue
        out.append(
            ErpCell(
                key=CellKey(
                    dist=rec[0],
                    regressor=rec[1],
                    n=int(rec[2]),
                    theta0_1=float(rec[3]),
                    theta0_2=float(rec[4]),
                    scheme=rec[5],
                    kappa=None if rec[6] == "" else float(rec[6]),
                    level=float(rec[7]),
                ),
                erp=float(rec[8]),
                mc_se=float(rec[9]),
                reps_completed=int(rec[10]),
                failures=int(rec[11]),
            )
        )
    return out


def scheme_column_label(scheme: str, kappa: float | None) -> str:
    if scheme in ("power", "rate", "transform-fs"):
        return f"κ={kappa}"
    if scheme == "numerical-hl":
        return f"γ={kappa}"
    return scheme


def _ordered_unique(items):
    seen = []
    for item in items:
        if item not in seen:
            seen.append(item)
    return seen


def write_markdown(
    table: Iterable[ErpCell], stream: IO[str], include_se: bool = True
) -> None:
    """Publication-style layout; entries are percentages at one decimal."""
    rows = list(table)
    groups = _ordered_unique(
        [(r.key.level, (r.key.theta0_1, r.key.theta0_2)) for r in rows]
    )
    for level, theta0 in groups:
        block = [
            r
            for r in rows
            if r.key.level == level and (r.key.theta0_1, r.key.theta0_2) == theta0
        ]
        columns = _ordered_unique([(r.key.scheme, r.key.kappa) for r in block])
        labels = [scheme_column_label(s, k) for s, k in columns]
        index = {
            ((r.key.dist, r.key.n), (r.key.scheme, r.key.kappa)): r for r in block
        }
        row_keys = _ordered_unique([(r.key.dist, r.key.n) for r in block])
        stream.write(
            f"**Nominal level {level:g}, true value anchor "
            f"({theta0[0]:g}, {theta0[1]:g})**\n\n"
        )
        stream.write("| dist | n | " + " | ".join(labels) + " |\n")
        stream.write("|---|---|" + "|".join(["---"] * len(labels)) + "|\n")
        for dist, n in row_keys:
            cells = []
            for col in columns:
                r = index.get(((dist, n), col))
                if r is None or math.isnan(r.erp):
                    cells.append("--")
                elif include_se:
                    cells.append(f"{100.0 * r.erp:.1f} ({100.0 * r.mc_se:.1f})")
                else:
                    cells.append(f"{100.0 * r.erp:.1f}")
            stream.write(f"| {dist} | {n} | " + " | ".join(cells) + " |\n")
        stream.write("\n")
