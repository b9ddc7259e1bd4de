"""Run report containers and CSV/JSON serialisation."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

CURVE_HEADER = ["mode", "modulation", "snr_db", "tau_over_t", "symbol_index",
                "bias_mean", "bias_ci_lo", "bias_ci_hi"]
SUMMARY_HEADER = ["mode", "modulation", "snr_db", "tau_over_t", "mse", "mse_ci_lo",
                  "mse_ci_hi", "crb"]
CURVES_FILE = "curves.csv"
SUMMARY_FILE = "summary.csv"
JSON_FILE = "report.json"


class ReportIOError(OSError):
    pass


@dataclass
class CellResult:
    mode: str
    modulation: str
    snr_db: float
    tau_over_t: float
    bias_mean: np.ndarray
    bias_ci_lo: np.ndarray
    bias_ci_hi: np.ndarray
    mse: float
    mse_ci_lo: float
    mse_ci_hi: float
    crb: float
    trials: int = 0
    clamp_rate: float = 0.0
    mse_stderr: float = math.nan
    final_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def key(self) -> tuple:
        return (self.mode, self.modulation, self.snr_db, self.tau_over_t)

    def csv_equal(self, other: CellResult) -> bool:
        """Equality over the fields carried by the CSV schema."""
        return (self.key == other.key
                and all(np.array_equal(getattr(self, f), getattr(other, f))
                        for f in ("bias_mean", "bias_ci_lo", "bias_ci_hi"))
                and (self.mse, self.mse_ci_lo, self.mse_ci_hi, self.crb)
                == (other.mse, other.mse_ci_lo, other.mse_ci_hi, other.crb))

    def __eq__(self, other):
        if not isinstance(other, CellResult):
            return NotImplemented
        return (self.csv_equal(other) and self.trials == other.trials
                and _same_float(self.clamp_rate, other.clamp_rate)
                and _same_float(self.mse_stderr, other.mse_stderr)
                and np.array_equal(self.final_errors, other.final_errors))


def _same_float(a, b):
    return a == b or (math.isnan(a) and math.isnan(b))


@dataclass
class RunReport:
    cells: list[CellResult] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def cell(self, mode, modulation, snr_db, tau) -> CellResult:
        mode = getattr(mode, "value", mode)
        modulation = getattr(modulation, "value", modulation)
        for c in self.cells:
            if c.key == (mode, modulation, float(snr_db), float(tau)):
                return c
        raise KeyError((mode, modulation, snr_db, tau))


def _fmt(x) -> str:
    return repr(float(x))


def _write(path: Path, fn):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fn(fh)
    except OSError as exc:
        raise ReportIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_report(report: RunReport, out_dir, fmt: str = "csv") -> list[Path]:
    """Write ``curves.csv`` + ``summary.csv`` or ``report.json`` under ``out_dir``."""
    out_dir = Path(out_dir)
    if fmt == "csv":
        def curves(fh):
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CURVE_HEADER)
            for c in report.cells:
                for i in range(len(c.bias_mean)):
                    w.writerow([c.mode, c.modulation, _fmt(c.snr_db), _fmt(c.tau_over_t), i,
                                _fmt(c.bias_mean[i]), _fmt(c.bias_ci_lo[i]), _fmt(c.bias_ci_hi[i])])

        def summary(fh):
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_HEADER)
            for c in report.cells:
                w.writerow([c.mode, c.modulation, _fmt(c.snr_db), _fmt(c.tau_over_t),
                            _fmt(c.mse), _fmt(c.mse_ci_lo), _fmt(c.mse_ci_hi), _fmt(c.crb)])

        paths = [out_dir / CURVES_FILE, out_dir / SUMMARY_FILE]
        _write(paths[0], curves)
        _write(paths[1], summary)
        return paths
    if fmt == "json":
        doc = {"metadata": report.metadata, "cells": [_cell_to_json(c) for c in report.cells]}
        path = out_dir / JSON_FILE
        _write(path, lambda fh: json.dump(doc, fh, indent=1))
        return [path]
    raise ValueError(f"unknown report format {fmt!r}")


def _cell_to_json(c: CellResult) -> dict:
    d = asdict(c)
    for k, v in d.items():
        if isinstance(v, np.ndarray):
            d[k] = v.tolist()
        elif isinstance(v, float) and math.isnan(v):
            d[k] = None
    return d


def _cell_from_json(d: dict) -> CellResult:
    d = dict(d)
    for k in ("bias_mean", "bias_ci_lo", "bias_ci_hi", "final_errors"):
        d[k] = np.asarray(d[k], dtype=float)
    if d.get("mse_stderr") is None:
        d["mse_stderr"] = math.nan
    return CellResult(**d)


def read_report(path, fmt: str | None = None) -> RunReport:
    """Inverse of :func:`emit_report`; ``path`` is the output directory or the JSON file."""
    path = Path(path)
    if fmt is None:
        fmt = "json" if path.suffix == ".json" or (path / JSON_FILE).exists() else "csv"
    try:
        if fmt == "json":
            f = path if path.suffix == ".json" else path / JSON_FILE
            doc = json.loads(f.read_text())
            return RunReport([_cell_from_json(c) for c in doc["cells"]], doc["metadata"])
        return _read_csv(path)
    except OSError as exc:
        raise ReportIOError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _read_csv(out_dir: Path) -> RunReport:
    with open(out_dir / SUMMARY_FILE, newline="") as fh:
        rows = list(csv.DictReader(fh))
    with open(out_dir / CURVES_FILE, newline="") as fh:
        curve_rows = list(csv.DictReader(fh))

    def key(r):
        return (r["mode"], r["modulation"], float(r["snr_db"]), float(r["tau_over_t"]))

    curves: dict[tuple, list] = {}
    for r in curve_rows:
        curves.setdefault(key(r), []).append(r)
    cells = []
    for r in rows:
        pts = sorted(curves.get(key(r), []), key=lambda p: int(p["symbol_index"]))

        def col(name):
            return np.array([float(p[name]) for p in pts])

        cells.append(CellResult(
            mode=r["mode"], modulation=r["modulation"], snr_db=float(r["snr_db"]),
            tau_over_t=float(r["tau_over_t"]), bias_mean=col("bias_mean"),
            bias_ci_lo=col("bias_ci_lo"), bias_ci_hi=col("bias_ci_hi"),
            mse=float(r["mse"]), mse_ci_lo=float(r["mse_ci_lo"]),
            mse_ci_hi=float(r["mse_ci_hi"]), crb=float(r["crb"])))
    return RunReport(cells)
