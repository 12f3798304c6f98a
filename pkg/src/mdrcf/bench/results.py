"""Per-frame result files and summary tables (CSV)."""
from __future__ import annotations

import csv
import warnings
from dataclasses import fields
from pathlib import Path

from mdrcf.tracker import FrameRecord

COLUMNS = tuple(f.name for f in fields(FrameRecord))
_MAGIC = "# mdrcf-results v1"
_FLOAT_COLUMNS = {"x", "y", "w", "h", "scale", "v_m", "v_p", "v_s", "psmd", "lambda_hat"}


class ConfigHashMismatch(UserWarning):
    pass


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse(column: str, text: str):
    if column == "frame":
        return int(text)
    if column == "update_flag":
        return text == "1"
    if column == "branch":
        return text
    if text == "":
        return None
    return float(text)


def write_results(path, records, config_hash: str = "", variant: str = "") -> None:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"{_MAGIC} variant={variant} config={config_hash}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(COLUMNS)
            for r in records:
                writer.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_header(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
    if not first.startswith(_MAGIC):
        raise ValueError(f"{path}: not a result file")
    meta = dict(item.split("=", 1) for item in first[len(_MAGIC):].split() if "=" in item)
    return meta


def read_results(path, expected_hash: str | None = None) -> list[FrameRecord]:
    """Read records back; a config-hash mismatch only warns."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"result file not found: {path}")
    meta = read_header(path)
    if expected_hash is not None and meta.get("config") != expected_hash:
        warnings.warn(f"{path}: config hash {meta.get('config')!r} != expected {expected_hash!r}",
                      ConfigHashMismatch, stacklevel=2)
    with open(path, encoding="utf-8", newline="") as fh:
        fh.readline()
        reader = csv.DictReader(fh)
        return [FrameRecord(**{c: _parse(c, row[c]) for c in COLUMNS}) for row in reader]


def write_curve(path, thresholds, values) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("threshold", "value"))
        for t, v in zip(thresholds, values):
            writer.writerow((repr(float(t)), repr(float(v))))


def write_table(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
