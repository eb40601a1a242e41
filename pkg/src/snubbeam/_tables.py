"""Plain-text table I/O shared by the export/import helpers.

Format: ``#``-prefixed header lines (a kind tag, ``key = value`` metadata
echoing the resolved configuration, and a ``columns:`` line), then one
whitespace-separated row per sample. Deterministic: metadata is sorted and
carries no timestamps.
"""

from __future__ import annotations

import numpy as np

KIND_PREFIX = "snubbeam table:"


def write_table(path, kind, column_names, data, meta=None):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    if data.shape[1] != len(column_names):
        raise ValueError(
            f"{data.shape[1]} data columns vs {len(column_names)} names"
        )
    lines = [f"# {KIND_PREFIX} {kind}"]
    for key in sorted(meta or {}):
        lines.append(f"# {key} = {meta[key]}")
    lines.append("# columns: " + " ".join(column_names))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
        np.savetxt(fh, data, fmt="%.12e")


def read_table(path, expected_kind=None):
    """Returns (meta dict, {column name: 1-d array})."""
    meta = {}
    names = None
    kind = None
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith(KIND_PREFIX):
                    kind = body[len(KIND_PREFIX) :].strip()
                elif body.startswith("columns:"):
                    names = body[len("columns:") :].split()
                elif "=" in body:
                    key, _, value = body.partition("=")
                    meta[key.strip()] = value.strip()
                continue
            try:
                rows.append([float(x) for x in line.split()])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unparsable row {raw!r}") from exc
    if expected_kind is not None and kind != expected_kind:
        raise ValueError(
            f"{path}: expected a {expected_kind!r} table, found {kind!r}"
        )
    if names is None:
        raise ValueError(f"{path}: missing '# columns:' header")
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(names):
        raise ValueError(f"{path}: rows do not match the {len(names)} columns")
    return meta, {name: data[:, j] for j, name in enumerate(names)}
