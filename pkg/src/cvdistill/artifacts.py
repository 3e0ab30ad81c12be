"""Deterministic artifact writing: atomic files, fixed float formatting."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .fock import SCHEMA_VERSION


def atomic_write(path, text: str) -> None:
    """Write ``text`` to a sibling temp file and rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(doc: dict) -> str:
    """JSON with sorted keys; Python floats already round-trip via repr."""
    return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"


def config_comment(config: dict) -> str:
    """``#`` lines carrying the schema version and resolved config."""
    return f"# schema_version: {SCHEMA_VERSION}\n# config: " + json.dumps(_plain(config), sort_keys=True) + "\n"


def csv_with_header(columns: list[str], rows: list[list], config: dict | None = None) -> str:
    """CSV text; the resolved config is embedded as ``#`` comment lines first."""
    lines = []
    if config is not None:
        lines.append(config_comment(config).rstrip("\n"))
    lines.append(",".join(columns))
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def read_csv(text: str) -> tuple[list[str], list[list[str]], dict | None]:
    config = None
    body = []
    for line in text.splitlines():
        if line.startswith("# config: "):
            config = json.loads(line[len("# config: "):])
        elif line.startswith("#") or not line.strip():
            continue
        else:
            body.append(line.split(","))
    return body[0], body[1:], config
