"""Tabular observational data with declared column kinds.

Columns are ``continuous`` or ``discrete``; discrete columns hold dense
category codes 0..k-1. Kinds are declared (CSV sidecar or constructor),
never inferred, because coded integers are indistinguishable from counts.

CSV I/O: RFC-4180-style quoting, LF line endings, floats at 17 significant
digits so write/read round-trips are exact. Sidecar format::

    {"kinds": {"col": "continuous" | "discrete", ...}}
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

CONTINUOUS = "continuous"
DISCRETE = "discrete"


class Dataset:
    def __init__(self, names, kinds, values, code_maps=None):
        self.names = tuple(str(n) for n in names)
        if len(set(self.names)) != len(self.names):
            raise DataError("duplicate column names")
        self.kinds = tuple(kinds)
        if len(self.kinds) != len(self.names):
            raise DataError("kinds/names length mismatch")
        for k in self.kinds:
            if k not in (CONTINUOUS, DISCRETE):
                raise DataError(f"unknown column kind '{k}'")
        values = np.array(values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise DataError("values must be a 2-d matrix")
        if values.shape[0] < 1:
            raise DataError("dataset needs at least one row")
        if values.shape[1] != len(self.names):
            raise DataError("column count does not match names")
        if not np.all(np.isfinite(values)):
            raise DataError("missing or non-finite values are not supported")
        self.values = values
        self.values.setflags(write=False)
        self._col = {n: i for i, n in enumerate(self.names)}
        self.code_maps = dict(code_maps or {})
        for name, kind in zip(self.names, self.kinds):
            if kind == DISCRETE:
                col = self.values[:, self._col[name]]
                codes = np.unique(col)
                if not np.allclose(codes, np.round(codes)) or codes[0] < 0:
                    raise DataError(f"discrete column '{name}' must hold codes 0..k-1")
                if not np.array_equal(codes, np.arange(len(codes))):
                    raise DataError(
                        f"discrete column '{name}' has non-dense codes "
                        f"{[int(c) for c in codes]}"
                    )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def index(self, name) -> int:
        try:
            return self._col[name]
        except KeyError:
            raise DataError(f"unknown column '{name}'") from None

    def col(self, name) -> np.ndarray:
        return self.values[:, self.index(name)]

    def kind(self, name) -> str:
        return self.kinds[self.index(name)]

    def levels(self, name) -> int:
        if self.kind(name) != DISCRETE:
            raise DataError(f"column '{name}' is not discrete")
        return int(self.col(name).max()) + 1

    def select(self, names) -> "Dataset":
        idx = [self.index(n) for n in names]
        return Dataset(
            [self.names[i] for i in idx],
            [self.kinds[i] for i in idx],
            self.values[:, idx],
            {self.names[i]: self.code_maps[self.names[i]]
             for i in idx if self.names[i] in self.code_maps},
        )

    def with_kinds(self, mapping) -> "Dataset":
        """Copy with some column kinds replaced (mixed-data coercion)."""
        kinds = [mapping.get(n, k) for n, k in zip(self.names, self.kinds)]
        return Dataset(self.names, kinds, self.values, self.code_maps)


def load_csv(path, kinds=None) -> Dataset:
    """Read a headered CSV; ``kinds`` is a sidecar path, a dict, or None
    (all continuous). Non-numeric labels in discrete columns are re-coded
    densely in lexicographic order; the label->code map is retained."""
    if isinstance(kinds, (str,)) or hasattr(kinds, "__fspath__"):
        try:
            with open(kinds, "r", encoding="utf-8") as fh:
                kinds = json.load(fh).get("kinds", {})
        except OSError as exc:
            raise DataError(f"cannot read kinds sidecar {kinds}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid kinds sidecar JSON: {exc}") from exc
    kinds = dict(kinds or {})
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")
    width = len(header)
    for lineno, row in enumerate(body, start=2):
        if len(row) != width:
            raise DataError(f"{path}: ragged row at line {lineno}")
    for name in kinds:
        if name not in header:
            raise DataError(f"kinds sidecar names unknown column '{name}'")
    col_kinds = [kinds.get(name, CONTINUOUS) for name in header]
    raw = [[cell.strip() for cell in row] for row in body]
    values = np.empty((len(raw), width), dtype=np.float64)
    code_maps = {}
    for j, (name, kind) in enumerate(zip(header, col_kinds)):
        cells = [row[j] for row in raw]
        numeric = True
        parsed = np.empty(len(cells))
        for i, cell in enumerate(cells):
            try:
                parsed[i] = float(cell)
            except ValueError:
                numeric = False
                break
        if numeric:
            values[:, j] = parsed
            if kind == DISCRETE:
                # re-code to dense 0..k-1 in ascending numeric order
                codes = sorted(set(parsed.tolist()))
                lut = {v: i for i, v in enumerate(codes)}
                values[:, j] = [lut[v] for v in parsed]
                code_maps[name] = tuple(_fmt_label(v) for v in codes)
        else:
            if kind != DISCRETE:
                raise DataError(
                    f"{path}: non-numeric cell in column '{name}' "
                    "not declared discrete in the kinds sidecar"
                )
            labels = sorted(set(cells))
            lut = {lab: i for i, lab in enumerate(labels)}
            values[:, j] = [lut[c] for c in cells]
            code_maps[name] = tuple(labels)
    return Dataset(header, col_kinds, values, code_maps)


def _fmt_label(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else f"{v:.17g}"


def csv_text(d: Dataset) -> str:
    """Serialize to CSV: header row, discrete codes as ints, floats at 17
    significant digits, LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(d.names)
    discrete = [k == DISCRETE for k in d.kinds]
    for row in d.values:
        writer.writerow(
            [str(int(v)) if disc else f"{v:.17g}" for v, disc in zip(row, discrete)]
        )
    return buf.getvalue()


def save_csv(d: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(d))


def save_kinds(d: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"kinds": dict(zip(d.names, d.kinds))}, fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class ColumnStats:
    minimum: float
    maximum: float
    average: float
    std: float | None
    skewness: float | None


def summary_stats(d: Dataset) -> dict[str, ColumnStats]:
    """Per-column min / max / mean / sample std / adjusted skewness.

    Std uses the n-1 denominator; skewness is the adjusted Fisher-Pearson
    coefficient g1 * sqrt(n(n-1)) / (n-2). Fields that need more rows (or
    nonzero spread) than available come back as None.
    """
    out = {}
    n = d.n
    for name in d.names:
        x = d.col(name)
        mean = float(np.mean(x))
        std = float(np.std(x, ddof=1)) if n >= 2 else None
        skew = None
        if n >= 3:
            m2 = float(np.mean((x - mean) ** 2))
            if m2 > 0:
                g1 = float(np.mean((x - mean) ** 3)) / m2 ** 1.5
                skew = g1 * math.sqrt(n * (n - 1)) / (n - 2)
        out[name] = ColumnStats(float(x.min()), float(x.max()), mean, std, skew)
    return out
