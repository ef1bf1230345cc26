"""Flat-file outputs: CSV tables, JSON summaries and JSON-lines snapshots.

Every file starts with a header that records the schema version and the
fully resolved configuration, so a run can be reproduced from its output.
CSV and JSON-lines carry it as a ``#`` comment line; JSON summaries carry
it under the ``"config"`` key.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

SCHEMA_VERSION = 1
HEADER_PREFIX = "# mhd-echo schema="


def format_value(value: Any) -> str:
    """Text form used in CSV cells: 17 significant digits for floats."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if hasattr(value, "item") and callable(value.item):  # numpy scalar
        return _jsonable(value.item())
    return value


def header_line(config: dict) -> str:
    return f"{HEADER_PREFIX}{SCHEMA_VERSION} " + json.dumps(_jsonable(config), sort_keys=True)


def parse_header(line: str) -> dict:
    if not line.startswith(HEADER_PREFIX):
        raise ValueError("missing mhd-echo header line")
    version, _, payload = line[len(HEADER_PREFIX) :].partition(" ")
    if int(version) != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
    return json.loads(payload)


def atomic_write_text(path: str | os.PathLike, text: str):
    """Write via a temporary file and rename, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]], config: dict) -> str:
    buf = io.StringIO()
    buf.write(header_line(config) + "\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence[Any]], config: dict):
    atomic_write_text(path, csv_text(columns, rows, config))


def read_csv(path) -> tuple[dict | None, list[dict[str, str]]]:
    """Return ``(config, rows)``; ``config`` is None for files without a header."""
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    lines = text.splitlines(keepends=True)
    config = None
    if lines and lines[0].startswith("#"):
        config = parse_header(lines[0].rstrip("\r\n"))
        lines = lines[1:]
    reader = csv.DictReader(io.StringIO("".join(lines)))
    return config, list(reader)


def json_text(payload: dict, config: dict) -> str:
    doc = {"schema": SCHEMA_VERSION, "config": config, **payload}
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def write_json(path, payload: dict, config: dict):
    atomic_write_text(path, json_text(payload, config))


def write_jsonl(path, records: Iterable[dict], config: dict):
    lines = [header_line(config)]
    lines += [json.dumps(_jsonable(r), sort_keys=True) for r in records]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_config_from_output(path) -> dict:
    """Recover the recorded configuration of a previous output file."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.startswith(HEADER_PREFIX):
        return parse_header(text.splitlines()[0])
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        raise ValueError(f"{path}: no recorded configuration found") from None
    if not isinstance(doc, dict) or "config" not in doc:
        raise ValueError(f"{path}: no recorded configuration found")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema version {doc.get('schema')!r}")
    return doc["config"]
