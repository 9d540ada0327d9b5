"""Structured-text report files shared by the CLI and downstream plotting.

Reports are JSON with floats rendered at 17 significant digits (lossless for
float64) and no timestamps, so identical configs produce byte-identical
files.  Every report carries schema_version, the resolved config, its hash,
and the tolerances in force.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from . import __version__

SCHEMA_VERSION = 1


def _render(obj, out):
    if isinstance(obj, dict):
        out.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if not isinstance(key, str):
                raise TypeError(f"report keys must be strings, got {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _render(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, val in enumerate(obj):
            if i:
                out.append(",")
            _render(val, out)
        out.append("]")
    elif isinstance(obj, np.ndarray):
        _render(obj.tolist(), out)
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        val = float(obj)
        if not np.isfinite(val):
            raise ValueError(f"non-finite float {val} cannot be serialized in a report")
        out.append(format(val, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialize {type(obj)} in a report")


def render_json(obj) -> str:
    """Canonical JSON text with .17g floats (byte-stable for a fixed input)."""
    out: list = []
    _render(obj, out)
    return "".join(out)


def config_hash(config: dict) -> str:
    return hashlib.sha256(render_json(config).encode()).hexdigest()


def envelope(kind: str, config: dict, payload: dict, deterministic: bool, tolerances: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "tool": f"corrspec {__version__}",
        "deterministic": bool(deterministic),
        "config": config,
        "config_hash": config_hash(config),
        "tolerances": tolerances,
        "payload": payload,
    }


def write_report(report: dict, path) -> None:
    text = render_json(report)
    with open(path, "w") as fh:
        fh.write(text)
        fh.write("\n")


def load_report(path) -> dict:
    with open(path) as fh:
        report = json.load(fh)
    version = report.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version}")
    return report
